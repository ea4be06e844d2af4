use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const POISSON_GAMMA: &str = r#"{"frequency": {"kind": "poisson", "lambda": 2},
    "severity": {"kind": "gamma", "shape": 1.5, "scale": 0.3333333333333333}}"#;
const PASCAL_EXP: &str = r#"{"frequency": {"kind": "pascal", "alpha": 10, "p": 0.75},
    "severity": {"kind": "gamma", "shape": 1, "scale": 0.16666666666666666}}"#;
const POISSON_PARETO: &str = r#"{"frequency": {"kind": "poisson", "lambda": 4},
    "severity": {"kind": "pareto", "a": 5, "b": 11}}"#;
const RUIN_GAMMA: &str = r#"{"severity": {"kind": "gamma", "shape": 2, "scale": 2},
    "risk": {"lambda": 4, "c": 1}, "mc": {"n": 200000, "seed": 9}}"#;
const RUIN_PARETO: &str = r#"{"severity": {"kind": "pareto", "a": 5, "b": 11},
    "risk": {"lambda": 2, "c": 1}, "mc": {"n": 200000, "seed": 3}}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stoploss")).args(args).output().unwrap()
}

fn run_config(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

struct Row {
    x: f64,
    method: String,
    value: f64,
    stderr: Option<f64>,
}

fn rows(text: &str) -> Vec<Row> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,method,value,stderr,approx_abs_error"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 5, "{l}");
            Row {
                x: f[0].parse().unwrap(),
                method: f[1].to_string(),
                value: f[2].parse().unwrap(),
                stderr: (!f[3].is_empty()).then(|| f[3].parse().unwrap()),
            }
        })
        .collect()
}

fn curve<'a>(rows: &'a [Row], method: &str) -> Vec<&'a Row> {
    rows.iter().filter(|r| r.method == method).collect()
}

#[test]
fn output_is_lf_terminated_csv_sorted_by_method() {
    let ws = Workspace::new();
    let cfg = ws.file("poisson-gamma.json", POISSON_GAMMA);
    let text = stdout(&run_config("sf", &cfg, &["--method", "truncation,ortho,laplace"]));
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let rows = rows(&text);
    assert_eq!(rows.len(), 3 * 30);
    let methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    let mut sorted = methods.clone();
    sorted.sort();
    assert_eq!(methods, sorted);
    let xs: Vec<f64> = curve(&rows, "ortho").iter().map(|r| r.x).collect();
    assert_eq!(xs[0], 0.0);
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn survival_at_zero_is_the_defective_mass_and_premium_is_the_mean() {
    let ws = Workspace::new();
    let cfg = ws.file("poisson-gamma.json", POISSON_GAMMA);
    let sf = rows(&stdout(&run_config("sf", &cfg, &["--method", "ortho,laplace", "--grid", "0:1:2"])));
    let slp = rows(&stdout(&run_config("slp", &cfg, &["--method", "ortho,laplace", "--grid", "0:1:2"])));
    let defective = 1.0 - (-2.0f64).exp();
    for method in ["ortho", "laplace"] {
        assert!((curve(&sf, method)[0].value - defective).abs() < 1e-8, "{method}");
        // E[S] = λ E[U] = 2 · 0.5.
        assert!((curve(&slp, method)[0].value - 1.0).abs() < 1e-8, "{method}");
    }
}

#[test]
fn exact_order_matches_closed_form() {
    let ws = Workspace::new();
    let cfg = ws.file("pe.json", PASCAL_EXP);
    for cmd in ["sf", "slp"] {
        let out = run_config(
            cmd,
            &cfg,
            &["--method", "ortho,exact", "--r", "1", "--m", "0.2222222222222222", "--K", "9", "--grid", "0:3:31"],
        );
        let rows = rows(&stdout(&out));
        for (a, b) in curve(&rows, "ortho").iter().zip(curve(&rows, "exact")) {
            assert!((a.value - b.value).abs() < 1e-10, "{cmd} x={}: {} vs {}", a.x, a.value, b.value);
        }
    }
}

#[test]
fn monte_carlo_output_is_byte_stable() {
    let ws = Workspace::new();
    let cfg = ws.file("poisson-gamma.json", POISSON_GAMMA);
    let args = ["--method", "mc,ortho", "--mc-n", "50000", "--seed", "17", "--grid", "0:4:9"];
    let first = run_config("slp", &cfg, &args);
    let second = run_config("slp", &cfg, &args);
    assert_eq!(stdout(&first), stdout(&second));
    let other = run_config("slp", &cfg, &["--method", "mc", "--mc-n", "50000", "--seed", "18", "--grid", "0:4:9"]);
    assert_ne!(curve(&rows(&stdout(&first)), "mc")[1].value, curve(&rows(&stdout(&other)), "mc")[1].value);
}

#[test]
fn out_flag_writes_the_same_text() {
    let ws = Workspace::new();
    let cfg = ws.file("poisson-gamma.json", POISSON_GAMMA);
    let path = ws.dir.path().join("sf.csv");
    let out = run_config("sf", &cfg, &["--out", path.to_str().unwrap()]);
    assert_eq!(stdout(&out), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&run_config("sf", &cfg, &[])));
}

#[test]
fn coeffs_report_mass_identity() {
    let ws = Workspace::new();
    let cfg = ws.file("poisson-gamma.json", POISSON_GAMMA);
    let out = run_config("coeffs", &cfg, &["--K", "12"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,q,p"));
    let table: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(table.len(), 13);
    let defective = 1.0 - (-2.0f64).exp();
    assert!((table[0][1] - defective).abs() < 1e-12);
    let mass: f64 = table.iter().map(|r| r[2]).sum();
    assert!((mass - defective).abs() < 1e-10);

    let summary = String::from_utf8(out.stderr).unwrap();
    let residual: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("mass identity residual: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual.abs() < 1e-10, "{summary}");
    assert!(summary.contains("basis: r=1.2"));
}

#[test]
fn finite_ruin_methods_agree_with_simulation() {
    let ws = Workspace::new();
    for (name, text, method) in [("ruin-gamma.json", RUIN_GAMMA, "ortho"), ("ruin-pareto.json", RUIN_PARETO, "laplace")] {
        let cfg = ws.file(name, text);
        let rows = rows(&stdout(&run_config("ruin", &cfg, &["--method", &format!("{method},mc"), "--grid", "0:2:5"])));
        let det = curve(&rows, method);
        let mc = curve(&rows, "mc");
        assert_eq!(det[0].value, 0.0, "{name}: no ruin without time");
        for (d, m) in det.iter().zip(&mc).skip(1) {
            let z = (d.value - m.value).abs() / m.stderr.unwrap();
            assert!(z < 4.0, "{name} T={}: {} vs {} (z {z:.2})", d.x, d.value, m.value);
        }
        assert!(det.windows(2).all(|w| w[1].value >= w[0].value - 1e-6));
    }
}

#[test]
fn infinite_ruin_with_exponential_claims_is_closed_form() {
    let ws = Workspace::new();
    // ψ(u) = ρ e^{−(1−ρ)u/β} with ρ = λβ/c = 1/2, β = 1.
    let cfg = ws.file(
        "exp.json",
        r#"{"severity": {"kind": "gamma", "shape": 1, "scale": 1}, "risk": {"lambda": 1, "c": 2}}"#,
    );
    let rows = rows(&stdout(&run_config("ruin", &cfg, &["--infinite", "--method", "ortho,laplace"])));
    assert_eq!(rows.len(), 2 * 21);
    for r in &rows {
        let want = 0.5 * (-0.5 * r.x).exp();
        assert!((r.value - want).abs() < 1e-8, "{} u={}: {} vs {want}", r.method, r.x, r.value);
        assert!(r.stderr.is_none());
    }
}

#[test]
fn table_prints_and_writes_csv() {
    let ws = Workspace::new();
    let path = ws.dir.path().join("table2.csv");
    let out = run(&["table", "--which", "table2", "--out", path.to_str().unwrap()]);
    let pretty = stdout(&out);
    assert!(pretty.contains("a=18.5, M1=10, M2=10"));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("a,inversion,exact,relative_error"));
    let rel: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(rel.len(), 5);
    assert!(rel.iter().all(|r| r.abs() < 1e-4 && r.abs() > 1e-8));
}

fn assert_exit(out: &Output, code: i32, needle: &str) {
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(code), "stderr: {stderr}");
    assert!(stderr.contains(needle), "expected '{needle}' in: {stderr}");
    assert!(out.stdout.is_empty());
}

#[test]
fn configuration_errors_exit_with_two() {
    let ws = Workspace::new();
    let cfg = ws.file("poisson-gamma.json", POISSON_GAMMA);
    assert_exit(&run_config("sf", &ws.file("bad.json", "{ not json"), &[]), 2, "invalid config");
    assert_exit(
        &run_config("sf", &ws.file("extra.json", &POISSON_GAMMA.replace("}}", "}, \"colour\": 1}")), &[]),
        2,
        "colour",
    );
    assert_exit(&run_config("sf", &cfg, &["--grid", "3:1:4"]), 2, "grid");
    assert_exit(&run_config("sf", &cfg, &["--r", "1"]), 2, "both r and m");
    assert_exit(&run_config("sf", &cfg, &["--method", "exact"]), 2, "exact");
    assert_exit(&run_config("sf", &ws.file("poisson-pareto.json", POISSON_PARETO), &["--method", "truncation", "--grid", "0:1:2"]), 2, "truncation");
    assert_exit(&run_config("ruin", &cfg, &[]), 2, "risk");
    assert_exit(&run(&["sf", "--config", "/nonexistent/model.json"]), 2, "cannot read");
}

#[test]
fn numerical_failures_exit_with_three() {
    let ws = Workspace::new();
    let cfg = ws.file("poisson-gamma.json", POISSON_GAMMA);
    assert_exit(&run_config("sf", &cfg, &["--K", "400", "--grid", "0:1:3"]), 3, "ortho");
    assert_exit(
        &run_config("sf", &cfg, &["--method", "laplace", "--a", "700", "--grid", "0:1:3"]),
        3,
        "laplace at x=0.5",
    );
}
