//! Special functions, adaptive quadrature and bracketing root search.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const INCGAMMA_MAX_ITER: usize = 10_000;

/// Natural logarithm of the gamma function for positive arguments.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos sum in its accurate range.
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized upper incomplete gamma function Q(a, z) = Γ(a, z)/Γ(a).
///
/// Series for z < a, Lentz continued fraction otherwise.
pub fn regularized_upper_gamma(a: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() || z.is_nan() || z < 0.0 {
        return Err(Error::domain(format!(
            "incomplete gamma requires a > 0 and z >= 0, got a={a}, z={z}"
        )));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z.is_infinite() {
        return Ok(0.0);
    }
    let log_prefactor = -z + a * z.ln() - ln_gamma_unchecked(a);
    if z < a {
        let p = lower_series(a, z, log_prefactor)?;
        Ok((1.0 - p).clamp(0.0, 1.0))
    } else {
        let q = upper_continued_fraction(a, z, log_prefactor)?;
        Ok(q.clamp(0.0, 1.0))
    }
}

/// P(a, z) = e^{-z} z^a / Γ(a) · Σ z^n / (a (a+1) ... (a+n))
fn lower_series(a: f64, z: f64, log_prefactor: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..INCGAMMA_MAX_ITER {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            return Ok(sum * log_prefactor.exp());
        }
    }
    Err(Error::numerical(format!(
        "incomplete gamma series did not converge (a={a}, z={z})"
    )))
}

/// Modified Lentz evaluation of the continued fraction for Q(a, z).
fn upper_continued_fraction(a: f64, z: f64, log_prefactor: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=INCGAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(log_prefactor.exp() * h);
        }
    }
    Err(Error::numerical(format!(
        "incomplete gamma continued fraction did not converge (a={a}, z={z})"
    )))
}

/// Survival function P(G > x) of G ~ Gamma(shape, scale).
pub fn upper_gamma_sf(shape: f64, scale: f64, x: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::domain(format!("gamma scale must be positive, got {scale}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("gamma sf requires x >= 0, got {x}")));
    }
    regularized_upper_gamma(shape, x / scale)
}

/// Density of Gamma(shape, scale) at x, evaluated in the log domain.
pub fn gamma_pdf(shape: f64, scale: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 1.0 / scale,
            _ => 0.0,
        };
    }
    let z = x / scale;
    ((shape - 1.0) * z.ln() - z - ln_gamma_unchecked(shape) - scale.ln()).exp()
}

/// Sum with O(log n) error growth.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Tolerances and budget of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) || max_subdivisions == 0 {
            return Err(Error::domain(
                "quadrature tolerances must be positive and the subdivision budget at least 1",
            ));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }
}

/// Values the adaptive integrator can accumulate: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn real_part(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn real_part(&self) -> f64 {
        *self
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn real_part(&self) -> f64 {
        self.re
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment<V> {
    lo: f64,
    hi: f64,
    value: V,
    error: f64,
}

/// 15-point Kronrod rule with the QUADPACK error heuristic.
fn kronrod15<V: QuadValue, F: Fn(f64) -> V>(f: &F, lo: f64, hi: f64) -> Result<(V, f64)> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut fv = [V::zero(); 15];
    fv[7] = f(center);
    for j in 0..7 {
        let dx = half * GK_NODES[j];
        fv[j] = f(center - dx);
        fv[14 - j] = f(center + dx);
    }
    if fv.iter().any(|v| !v.magnitude().is_finite()) {
        return Err(Error::numerical(format!(
            "integrand is not finite on [{lo:e}, {hi:e}]"
        )));
    }
    let mut kronrod = fv[7] * GK_WEIGHTS[7];
    let mut gauss = fv[7] * GAUSS_WEIGHTS[3];
    let mut resabs = fv[7].magnitude() * GK_WEIGHTS[7];
    for j in 0..7 {
        let pair = fv[j] + fv[14 - j];
        kronrod = kronrod + pair * GK_WEIGHTS[j];
        resabs += (fv[j].magnitude() + fv[14 - j].magnitude()) * GK_WEIGHTS[j];
        if j % 2 == 1 {
            gauss = gauss + pair * GAUSS_WEIGHTS[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = GK_WEIGHTS[7] * (fv[7] - mean).magnitude();
    for j in 0..7 {
        resasc += GK_WEIGHTS[j] * ((fv[j] - mean).magnitude() + (fv[14 - j] - mean).magnitude());
    }
    let value = kronrod * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((kronrod - gauss) * half).magnitude();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((value, error))
}

/// Globally adaptive Gauss–Kronrod integration of `f` over a finite interval.
pub fn integrate_interval<V, F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if lo == hi {
        return Ok(V::zero());
    }
    let (value, error) = kronrod15(&f, lo, hi)?;
    let mut segments = vec![Segment {
        lo,
        hi,
        value,
        error,
    }];
    let mut total = value;
    let mut total_error = error;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.magnitude());
        if total_error <= target {
            return Ok(total);
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: total.real_part(),
                error_bound: total_error,
                subdivisions: segments.len(),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // Interval cannot be split further at double precision.
            return Err(Error::Quadrature {
                estimate: total.real_part(),
                error_bound: total_error,
                subdivisions: segments.len() + 1,
            });
        }
        let (left, left_err) = kronrod15(&f, seg.lo, mid)?;
        let (right, right_err) = kronrod15(&f, mid, seg.hi)?;
        total = total - seg.value + left + right;
        total_error += left_err + right_err - seg.error;
        segments.push(Segment {
            lo: seg.lo,
            hi: mid,
            value: left,
            error: left_err,
        });
        segments.push(Segment {
            lo: mid,
            hi: seg.hi,
            value: right,
            error: right_err,
        });
        // Re-summing avoids drift in the running totals after many updates.
        if segments.len() % 64 == 0 {
            total = segments.iter().fold(V::zero(), |acc, s| acc + s.value);
            total_error = segments.iter().map(|s| s.error).sum();
        }
    }
}

/// ∫_0^∞ f(x) dx through the map x = t/(1-t) onto [0, 1).
pub fn integrate_semi_infinite<V, F>(f: F, spec: &QuadratureSpec) -> Result<V>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    integrate_interval(
        |t: f64| {
            let one_minus = 1.0 - t;
            let x = t / one_minus;
            let jac = 1.0 / (one_minus * one_minus);
            let v = f(x);
            if jac.is_infinite() && v.magnitude() == 0.0 {
                V::zero()
            } else {
                v * jac
            }
        },
        0.0,
        1.0,
        spec,
    )
}

const ROOT_REL_TOL: f64 = 1e-12;
const ROOT_MAX_DOUBLINGS: usize = 1100;

/// Positive root of a function that is negative at 0 and increasing up to a
/// root or a pole.
///
/// The bracket starts at `[0, bracket_hint]` and its upper end doubles until
/// `g` turns nonnegative or stops being finite; non-finite values count as
/// "past the root" during bisection.
pub fn find_root_increasing<G: Fn(f64) -> f64>(g: G, bracket_hint: f64) -> Result<f64> {
    if !(bracket_hint > 0.0) || !bracket_hint.is_finite() {
        return Err(Error::domain("root bracket hint must be positive and finite"));
    }
    let g0 = g(0.0);
    if !(g0 < 0.0) {
        return Err(Error::domain(format!(
            "root search requires g(0) < 0, got {g0}"
        )));
    }
    let past = |v: f64| !v.is_finite() || v >= 0.0;
    let mut lo = 0.0;
    let mut hi = bracket_hint;
    let mut doublings = 0;
    while !past(g(hi)) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > ROOT_MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::domain(
                "no sign change found within the expanding bracket",
            ));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= ROOT_REL_TOL * hi.abs() * 0.5 {
            break;
        }
        let v = g(mid);
        if v.is_finite() && v == 0.0 {
            return Ok(mid);
        }
        if past(v) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Prefer the endpoint with a finite value, the smaller residual first.
    let (glo, ghi) = (g(lo), g(hi));
    let root = match (glo.is_finite(), ghi.is_finite()) {
        (true, true) if ghi.abs() < glo.abs() => hi,
        (true, _) => lo,
        (false, true) => hi,
        (false, false) => {
            return Err(Error::numerical("root search ended between non-finite values"))
        }
    };
    if root <= 0.0 {
        return Err(Error::numerical("root search collapsed onto zero"));
    }
    Ok(root)
}
