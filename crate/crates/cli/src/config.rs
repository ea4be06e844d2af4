//! Run configuration: the JSON model document plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use stoploss_core::distributions::{CompoundModel, FrequencyModel, SeverityModel};
use stoploss_core::expansion::{BasisMode, GammaBasis};
use stoploss_core::inversion::EulerParams;
use stoploss_core::methods::{Method, Settings};
use stoploss_core::ruin::RiskModel;

use crate::CliError;

/// Linear grid with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self, CliError> {
        if !(start.is_finite() && stop.is_finite()) || count < 1 || start > stop {
            return Err(CliError::Config(format!(
                "grid needs finite start <= stop and count >= 1; got {start}:{stop}:{count}"
            )));
        }
        Ok(Self { start, stop, count })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("bad grid value '{v}': {e}"));
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad grid count '{count}': {e}"))?;
        Grid::new(num(start)?, num(stop)?, count).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionSection {
    #[serde(rename = "K")]
    order: Option<usize>,
    r: Option<f64>,
    m: Option<f64>,
    theta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InversionSection {
    a: Option<f64>,
    m1: Option<usize>,
    m2: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct McSection {
    n: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RiskSection {
    lambda: f64,
    c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    frequency: Option<FrequencyModel>,
    severity: SeverityModel,
    #[serde(default)]
    expansion: ExpansionSection,
    #[serde(default)]
    inversion: InversionSection,
    #[serde(default)]
    mc: McSection,
    risk: Option<RiskSection>,
    methods: Option<Vec<Method>>,
    grid: Option<Grid>,
    out: Option<PathBuf>,
}

/// Values given on the command line; each one overrides the document.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub methods: Vec<Method>,
    pub grid: Option<Grid>,
    pub order: Option<usize>,
    pub r: Option<f64>,
    pub m: Option<f64>,
    pub theta: Option<f64>,
    pub a: Option<f64>,
    pub m1: Option<usize>,
    pub m2: Option<usize>,
    pub mc_n: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    frequency: Option<FrequencyModel>,
    severity: SeverityModel,
    risk: Option<RiskSection>,
    pub methods: Vec<Method>,
    pub grid: Option<Grid>,
    pub settings: Settings,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn parse(text: &str, o: Overrides) -> Result<Self, CliError> {
        let doc: Document =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        let frequency = doc.frequency.map(FrequencyModel::validated).transpose()?;
        let severity = doc.severity.validated()?;

        let order = o.order.or(doc.expansion.order).unwrap_or(Settings::default().order);
        let r = o.r.or(doc.expansion.r);
        let m = o.m.or(doc.expansion.m);
        let theta = o.theta.or(doc.expansion.theta);
        let basis = match (r, m) {
            (Some(r), Some(m)) => BasisMode::Explicit(GammaBasis::new(r, m, theta.unwrap_or(0.0))?),
            (None, None) if theta.is_none() => BasisMode::Auto,
            _ => {
                return Err(CliError::Config(
                    "an explicit basis needs both r and m (theta is optional)".into(),
                ))
            }
        };

        let euler = EulerParams::default();
        let euler = EulerParams::new(
            o.a.or(doc.inversion.a).unwrap_or(euler.a),
            o.m1.or(doc.inversion.m1).unwrap_or(euler.m1),
            o.m2.or(doc.inversion.m2).unwrap_or(euler.m2),
        )?;

        let defaults = Settings::default();
        let mc_samples = o.mc_n.or(doc.mc.n).unwrap_or(defaults.mc_samples);
        if mc_samples < 2 {
            return Err(CliError::Config(format!("mc.n must be at least 2, got {mc_samples}")));
        }
        let settings = Settings {
            order,
            basis,
            euler,
            mc_samples,
            seed: o.seed.or(doc.mc.seed).unwrap_or(defaults.seed),
            ..defaults
        };

        let mut methods = if o.methods.is_empty() {
            doc.methods.unwrap_or_else(|| vec![Method::Ortho])
        } else {
            o.methods
        };
        methods.sort_by_key(|m| m.name());
        methods.dedup();
        if methods.is_empty() {
            return Err(CliError::Config("no methods selected".into()));
        }

        let grid = match o.grid.or(doc.grid) {
            Some(g) => Some(Grid::new(g.start, g.stop, g.count)?),
            None => None,
        };

        Ok(Self {
            frequency,
            severity,
            risk: doc.risk,
            methods,
            grid,
            settings,
            out: o.out.or(doc.out),
        })
    }

    pub fn compound(&self) -> Result<CompoundModel, CliError> {
        let frequency = self
            .frequency
            .ok_or_else(|| CliError::Config("config has no frequency section".into()))?;
        Ok(CompoundModel::new(frequency, self.severity.clone())?)
    }

    pub fn risk(&self) -> Result<RiskModel, CliError> {
        let risk = self
            .risk
            .ok_or_else(|| CliError::Config("ruin needs a risk section {\"lambda\", \"c\"}".into()))?;
        Ok(RiskModel::new(risk.lambda, self.severity.clone(), risk.c)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const POISSON_GAMMA: &str = r#"{
        "frequency": {"kind": "poisson", "lambda": 2},
        "severity": {"kind": "gamma", "shape": 1.5, "scale": 0.3333333333333333}
    }"#;

    #[test]
    fn grid_points_are_linear_and_inclusive() {
        let g: Grid = "0:3:4".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 1.0, 2.0, 3.0]);
        let g: Grid = "0:0.3:4".parse().unwrap();
        assert_eq!(*g.points().last().unwrap(), 0.3);
        assert_eq!("2.5:7:1".parse::<Grid>().unwrap().points(), vec![2.5]);
        assert!("1:0:3".parse::<Grid>().is_err());
        assert!("0:1:0".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert!("a:1:2".parse::<Grid>().is_err());
    }

    #[test]
    fn defaults_and_overrides() {
        let rc = RunConfig::parse(POISSON_GAMMA, Overrides::default()).unwrap();
        assert_eq!(rc.methods, vec![Method::Ortho]);
        assert_eq!(rc.settings, Settings::default());
        assert!(rc.grid.is_none());

        let text = r#"{
            "frequency": {"kind": "poisson", "lambda": 2},
            "severity": {"kind": "gamma", "shape": 1.5, "scale": 0.5},
            "expansion": {"K": 9, "r": 1, "m": 0.5},
            "inversion": {"a": 20},
            "mc": {"n": 1000, "seed": 7},
            "methods": ["mc", "ortho"]
        }"#;
        let o = Overrides {
            order: Some(12),
            seed: Some(3),
            ..Overrides::default()
        };
        let rc = RunConfig::parse(text, o).unwrap();
        assert_eq!(rc.settings.order, 12);
        assert_eq!(rc.settings.seed, 3);
        assert_eq!(rc.settings.mc_samples, 1000);
        assert_eq!(rc.settings.euler.a, 20.0);
        assert_eq!(rc.settings.euler.m1, 11);
        assert_eq!(rc.methods, vec![Method::Mc, Method::Ortho]);
        assert!(matches!(rc.settings.basis, BasisMode::Explicit(b) if b.r == 1.0 && b.theta == 0.0));
    }

    #[test]
    fn bad_documents_are_config_errors() {
        for text in [
            "{",
            r#"{"severity": {"kind": "gamma", "shape": -1, "scale": 1}}"#,
            r#"{"severity": {"kind": "gamma", "shape": 1, "scale": 1}, "extra": 1}"#,
            r#"{"severity": {"kind": "lognormal", "mu": 0}}"#,
            r#"{"frequency": {"kind": "poisson", "rate": 2}, "severity": {"kind": "gamma", "shape": 1, "scale": 1}}"#,
            r#"{"severity": {"kind": "gamma", "shape": 1, "scale": 1}, "expansion": {"r": 1}}"#,
            r#"{"severity": {"kind": "gamma", "shape": 1, "scale": 1}, "mc": {"n": 1}}"#,
            r#"{"severity": {"kind": "gamma", "shape": 1, "scale": 1}, "grid": {"start": 2, "stop": 1, "count": 3}}"#,
        ] {
            let err = RunConfig::parse(text, Overrides::default()).unwrap_err();
            assert!(matches!(err, CliError::Config(_)), "{text}: {err}");
        }
        let rc = RunConfig::parse(
            r#"{"severity": {"kind": "gamma", "shape": 1, "scale": 1}}"#,
            Overrides::default(),
        )
        .unwrap();
        assert!(matches!(rc.compound(), Err(CliError::Config(_))));
        assert!(matches!(rc.risk(), Err(CliError::Config(_))));
    }
}
