//! Claim-count and claim-size models.
//!
//! Frequencies expose their probability generating function both on truncated
//! series (for coefficient extraction) and at complex points (for transform
//! inversion). Severities expose raw and exponentially damped moments, the
//! Maclaurin series of t ↦ L_U(θ + t), complex Laplace transforms, survival
//! functions and samplers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    find_root_increasing, gamma_pdf, integrate_interval, integrate_semi_infinite,
    ln_gamma_unchecked, regularized_upper_gamma, upper_gamma_sf, QuadValue, QuadratureSpec,
};
use crate::series::TruncatedSeries;

/// Tolerances for damped moments; the expansion amplifies their errors.
const MOMENT_QUADRATURE: QuadratureSpec = QuadratureSpec {
    rel_tol: 1e-13,
    abs_tol: f64::MIN_POSITIVE,
    max_subdivisions: 4000,
};

const TRANSFORM_QUADRATURE: QuadratureSpec = QuadratureSpec {
    rel_tol: 1e-12,
    abs_tol: 1e-16,
    max_subdivisions: 2000,
};

const MAX_TRANSFORM_PANELS: usize = 20_000;

/// Distribution of the claim count N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FrequencyModel {
    Poisson { lambda: f64 },
    /// Failures before the `alpha`-th success with success probability `p`.
    Pascal { alpha: u32, p: f64 },
    Binomial { n: u32, p: f64 },
    /// P(N = n) = (1 - rho) rho^n.
    Geometric0 { rho: f64 },
}

fn is_probability_open(p: f64) -> bool {
    p > 0.0 && p < 1.0
}

impl FrequencyModel {
    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::Poisson { lambda }.validated()
    }

    pub fn pascal(alpha: u32, p: f64) -> Result<Self> {
        Self::Pascal { alpha, p }.validated()
    }

    pub fn binomial(n: u32, p: f64) -> Result<Self> {
        Self::Binomial { n, p }.validated()
    }

    pub fn geometric0(rho: f64) -> Result<Self> {
        Self::Geometric0 { rho }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Poisson { lambda } => lambda > 0.0 && lambda.is_finite(),
            Self::Pascal { alpha, p } => alpha >= 1 && is_probability_open(p),
            Self::Binomial { n, p } => n >= 1 && p > 0.0 && p <= 1.0,
            Self::Geometric0 { rho } => is_probability_open(rho),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::domain(format!("invalid frequency parameters: {self:?}")))
        }
    }

    /// f_N(0).
    pub fn mass_at_zero(&self) -> f64 {
        match *self {
            Self::Poisson { lambda } => (-lambda).exp(),
            Self::Pascal { alpha, p } => p.powi(alpha as i32),
            Self::Binomial { n, p } => (1.0 - p).powi(n as i32),
            Self::Geometric0 { rho } => 1.0 - rho,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Poisson { lambda } => lambda,
            Self::Pascal { alpha, p } => alpha as f64 * (1.0 - p) / p,
            Self::Binomial { n, p } => n as f64 * p,
            Self::Geometric0 { rho } => rho / (1.0 - rho),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Poisson { lambda } => lambda,
            Self::Pascal { alpha, p } => alpha as f64 * (1.0 - p) / (p * p),
            Self::Binomial { n, p } => n as f64 * p * (1.0 - p),
            Self::Geometric0 { rho } => rho / ((1.0 - rho) * (1.0 - rho)),
        }
    }

    /// P(N = n), computed in the log domain.
    pub fn pmf(&self, n: u64) -> f64 {
        let k = n as f64;
        let log_binom = |top: f64, bottom: f64| {
            ln_gamma_unchecked(top + 1.0)
                - ln_gamma_unchecked(bottom + 1.0)
                - ln_gamma_unchecked(top - bottom + 1.0)
        };
        match *self {
            Self::Poisson { lambda } => {
                (k * lambda.ln() - lambda - ln_gamma_unchecked(k + 1.0)).exp()
            }
            Self::Pascal { alpha, p } => {
                let a = alpha as f64;
                (log_binom(a + k - 1.0, k) + a * p.ln() + k * (1.0 - p).ln()).exp()
            }
            Self::Binomial { n: trials, p } => {
                if n > trials as u64 {
                    return 0.0;
                }
                if p == 1.0 {
                    return if n == trials as u64 { 1.0 } else { 0.0 };
                }
                let t = trials as f64;
                (log_binom(t, k) + k * p.ln() + (t - k) * (1.0 - p).ln()).exp()
            }
            Self::Geometric0 { rho } => (1.0 - rho) * rho.powf(k),
        }
    }

    /// PGF_N(g(z)) as a truncated series; `g` must have constant term in (0, 1].
    pub fn pgf_apply(&self, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        let order = g.order();
        let one = TruncatedSeries::constant(1.0, order);
        match *self {
            Self::Poisson { lambda } => g.add_constant(-1.0).scale(lambda).exp(),
            Self::Pascal { alpha, p } => {
                let base = one.sub(&g.scale(1.0 - p))?;
                Ok(base.pow_real(-(alpha as f64))?.scale(p.powi(alpha as i32)))
            }
            Self::Binomial { n, p } => g.scale(p).add_constant(1.0 - p).pow_real(n as f64),
            Self::Geometric0 { rho } => {
                Ok(one.sub(&g.scale(rho))?.reciprocal()?.scale(1.0 - rho))
            }
        }
    }

    /// ln PGF_N(g(z)) as a truncated series.
    pub fn log_pgf_apply(&self, g: &TruncatedSeries) -> Result<TruncatedSeries> {
        let order = g.order();
        let one = TruncatedSeries::constant(1.0, order);
        match *self {
            Self::Poisson { lambda } => Ok(g.add_constant(-1.0).scale(lambda)),
            Self::Pascal { alpha, p } => {
                let a = alpha as f64;
                let log_base = one.sub(&g.scale(1.0 - p))?.ln()?;
                Ok(log_base.scale(-a).add_constant(a * p.ln()))
            }
            Self::Binomial { n, p } => Ok(g.scale(p).add_constant(1.0 - p).ln()?.scale(n as f64)),
            Self::Geometric0 { rho } => {
                let log_base = one.sub(&g.scale(rho))?.ln()?;
                Ok(log_base.scale(-1.0).add_constant((1.0 - rho).ln()))
            }
        }
    }

    /// PGF_N(w) at a complex point.
    pub fn pgf_point(&self, w: Complex64) -> Result<Complex64> {
        let value = match *self {
            Self::Poisson { lambda } => ((w - 1.0) * lambda).exp(),
            Self::Pascal { alpha, p } => {
                let base = Complex64::new(1.0, 0.0) - w * (1.0 - p);
                if base.norm() < 1e-300 {
                    return Err(Error::numerical("Pascal generating function evaluated at its pole"));
                }
                base.powi(-(alpha as i32)) * p.powi(alpha as i32)
            }
            Self::Binomial { n, p } => (w * p + (1.0 - p)).powi(n as i32),
            Self::Geometric0 { rho } => {
                let base = Complex64::new(1.0, 0.0) - w * rho;
                if base.norm() < 1e-300 {
                    return Err(Error::numerical("geometric generating function evaluated at its pole"));
                }
                (1.0 - rho) / base
            }
        };
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::numerical(format!(
                "generating function is not finite at {w}"
            )));
        }
        Ok(value)
    }

    /// ln PGF_N(w) at a complex point, on whatever branch is convenient; only
    /// its exponential is meaningful.
    pub fn log_pgf_point(&self, w: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            Self::Poisson { lambda } => (w - 1.0) * lambda,
            Self::Pascal { alpha, p } => {
                let a = alpha as f64;
                (one - w * (1.0 - p)).ln() * (-a) + a * p.ln()
            }
            Self::Binomial { n, p } => (w * p + (1.0 - p)).ln() * n as f64,
            Self::Geometric0 { rho } => -(one - w * rho).ln() + (1.0 - rho).ln(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            Self::Poisson { lambda } => {
                let d = Poisson::new(lambda).expect("validated rate");
                d.sample(rng) as u64
            }
            Self::Pascal { alpha, p } => {
                let d = Geometric::new(p).expect("validated probability");
                (0..alpha).map(|_| d.sample(rng)).sum()
            }
            Self::Binomial { n, p } => (0..n).filter(|_| rng.random::<f64>() < p).count() as u64,
            Self::Geometric0 { rho } => {
                let v: f64 = 1.0 - rng.random::<f64>();
                (v.ln() / rho.ln()).floor() as u64
            }
        }
    }
}

/// Distribution of a single claim size U.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SeverityModel {
    Gamma { shape: f64, scale: f64 },
    /// Pareto with location 0: P(U > x) = (1 + x/a)^{-b}.
    Pareto { a: f64, b: f64 },
    /// P(U > x) = exp(-(x/scale)^shape).
    Weibull { shape: f64, scale: f64 },
    /// The equilibrium law with density P(U > x)/E[U].
    Equilibrium { of: Box<SeverityModel> },
}

/// One point of a change of variables x = x(u) with weight w(u) so that
/// E[h(U)] = ∫_0^∞ h(x(u)) w(u) du.
struct Node {
    x: f64,
    weight: f64,
}

impl SeverityModel {
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        Self::Gamma { shape, scale }.validated()
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        Self::gamma(1.0, scale)
    }

    pub fn pareto(a: f64, b: f64) -> Result<Self> {
        Self::Pareto { a, b }.validated()
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::Weibull { shape, scale }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        match &self {
            Self::Gamma { shape, scale } | Self::Weibull { shape, scale } => {
                if !(pos(*shape) && pos(*scale)) {
                    return Err(Error::domain(format!("invalid severity parameters: {self:?}")));
                }
            }
            Self::Pareto { a, b } => {
                if !(pos(*a) && pos(*b)) {
                    return Err(Error::domain(format!("invalid severity parameters: {self:?}")));
                }
            }
            Self::Equilibrium { of } => {
                if matches!(**of, Self::Equilibrium { .. }) {
                    return Err(Error::domain("nested equilibrium severities are not supported"));
                }
                of.as_ref().clone().validated()?;
                if let Self::Pareto { b, .. } = **of {
                    if b <= 1.0 {
                        return Err(Error::domain(
                            "equilibrium law needs a finite mean (Pareto b > 1)",
                        ));
                    }
                }
            }
        }
        Ok(self)
    }

    /// The equilibrium law of this severity.
    pub fn equilibrium(&self) -> Result<Self> {
        Self::Equilibrium {
            of: Box::new(self.clone()),
        }
        .validated()
    }

    /// Pareto and Weibull (and their equilibrium laws) have no exponential moments.
    pub fn is_heavy_tailed(&self) -> bool {
        match self {
            Self::Gamma { .. } => false,
            Self::Pareto { .. } | Self::Weibull { .. } => true,
            Self::Equilibrium { of } => of.is_heavy_tailed(),
        }
    }

    /// Exponent β with f_U(x) ~ x^β as x → 0.
    pub fn density_exponent_at_zero(&self) -> f64 {
        match *self {
            Self::Gamma { shape, .. } | Self::Weibull { shape, .. } => shape - 1.0,
            Self::Pareto { .. } | Self::Equilibrium { .. } => 0.0,
        }
    }

    /// sup{s > 0 : E e^{sU} < ∞}; zero for heavy tails.
    pub fn radius_of_convergence(&self) -> f64 {
        match self {
            Self::Gamma { scale, .. } => 1.0 / scale,
            Self::Pareto { .. } | Self::Weibull { .. } => 0.0,
            Self::Equilibrium { of } => of.radius_of_convergence(),
        }
    }

    /// E[U^n].
    pub fn moment(&self, n: u32) -> Result<f64> {
        match self {
            Self::Gamma { shape, scale } => {
                Ok((0..n).fold(1.0, |acc, j| acc * (shape + j as f64) * scale))
            }
            Self::Pareto { a, b } => {
                if n as f64 >= *b {
                    return Err(Error::domain(format!(
                        "moment of order {n} does not exist for Pareto tail index {b}; \
                         use an exponentially tilted basis"
                    )));
                }
                Ok((1..=n).fold(1.0, |acc, j| acc * a * j as f64 / (b - j as f64)))
            }
            Self::Weibull { shape, scale } => {
                Ok((n as f64 * scale.ln() + ln_gamma_unchecked(1.0 + n as f64 / shape)).exp())
            }
            Self::Equilibrium { of } => {
                Ok(of.moment(n + 1)? / ((n as f64 + 1.0) * of.moment(1)?))
            }
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// P(U > x).
    pub fn survival(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Ok(1.0);
        }
        match self {
            Self::Gamma { shape, scale } => upper_gamma_sf(*shape, *scale, x),
            Self::Pareto { a, b } => Ok((1.0 + x / a).powf(-b)),
            Self::Weibull { shape, scale } => Ok((-(x / scale).powf(*shape)).exp()),
            Self::Equilibrium { of } => match **of {
                Self::Gamma { shape, scale } => {
                    let z = x / scale;
                    let slp = scale * shape * regularized_upper_gamma(shape + 1.0, z)?
                        - x * regularized_upper_gamma(shape, z)?;
                    Ok((slp / (shape * scale)).clamp(0.0, 1.0))
                }
                Self::Pareto { a, b } => Ok((1.0 + x / a).powf(1.0 - b)),
                Self::Weibull { shape, scale } => {
                    regularized_upper_gamma(1.0 / shape, (x / scale).powf(shape))
                }
                Self::Equilibrium { .. } => unreachable!("rejected at construction"),
            },
        }
    }

    /// Density at x > 0.
    pub fn density(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::Gamma { shape, scale } => gamma_pdf(*shape, *scale, x),
            Self::Pareto { a, b } => b / a * (1.0 + x / a).powf(-b - 1.0),
            Self::Weibull { shape, scale } => {
                let z = x / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp()
            }
            Self::Equilibrium { of } => of.survival(x)? / of.mean()?,
        })
    }

    /// Integration variable u ↦ (x, weight). Weibull-type laws integrate in
    /// y = (x/scale)^shape, which removes the algebraic singularity at 0.
    fn node(&self, u: f64) -> Node {
        match self {
            Self::Weibull { shape, scale } => Node {
                x: scale * u.powf(1.0 / shape),
                weight: (-u).exp(),
            },
            Self::Equilibrium { of } => match **of {
                Self::Weibull { shape, scale } => {
                    let mean = scale * ln_gamma_unchecked(1.0 + 1.0 / shape).exp();
                    Node {
                        x: scale * u.powf(1.0 / shape),
                        weight: (-u).exp() * scale / shape * u.powf(1.0 / shape - 1.0) / mean,
                    }
                }
                _ => Node {
                    x: u,
                    weight: self.density(u).unwrap_or(f64::NAN),
                },
            },
            _ => Node {
                x: u,
                weight: self.density(u).unwrap_or(f64::NAN),
            },
        }
    }

    fn u_of_x(&self, x: f64) -> f64 {
        match self {
            Self::Weibull { shape, scale } => (x / scale).powf(*shape),
            Self::Equilibrium { of } => match **of {
                Self::Weibull { shape, scale } => (x / scale).powf(shape),
                _ => x,
            },
            _ => x,
        }
    }

    /// E[h(U)] by adaptive quadrature.
    pub fn expectation<V: QuadValue>(
        &self,
        h: impl Fn(f64) -> V,
        spec: &QuadratureSpec,
    ) -> Result<V> {
        integrate_semi_infinite(
            |u: f64| {
                let node = self.node(u);
                if node.weight == 0.0 {
                    V::zero()
                } else {
                    h(node.x) * node.weight
                }
            },
            spec,
        )
    }

    /// E[U^n e^{-θU}].
    pub fn exp_moment(&self, n: u32, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::domain(format!("damping rate must be nonnegative, got {theta}")));
        }
        if theta == 0.0 {
            return self.moment(n);
        }
        match self {
            Self::Gamma { shape, scale } => {
                let damped = scale / (1.0 + theta * scale);
                let rising = (0..n).fold(1.0, |acc, j| acc * (shape + j as f64) * damped);
                Ok(rising * (1.0 + theta * scale).powf(-shape))
            }
            _ => {
                let nf = n as i32;
                self.expectation(|x: f64| x.powi(nf) * (-theta * x).exp(), &MOMENT_QUADRATURE)
            }
        }
    }

    /// Maclaurin coefficients of t ↦ L_U(θ + t) up to order K.
    pub fn lt_series(&self, theta: f64, order: usize) -> Result<TruncatedSeries> {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut log_fact = 0.0;
        for j in 0..=order {
            if j > 0 {
                log_fact += (j as f64).ln();
            }
            let m = if theta == 0.0 {
                self.moment(j as u32)?
            } else {
                self.exp_moment(j as u32, theta)?
            };
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs.push(sign * m / log_fact.exp());
        }
        TruncatedSeries::from_coeffs(coeffs)
    }

    /// L_U(s) = E e^{sU} style moment generating function value L_U(-s) for
    /// real s ≥ 0; `+∞` past the radius of convergence.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        match self {
            Self::Gamma { shape, scale } => {
                let base = 1.0 - s * scale;
                Ok(if base <= 0.0 { f64::INFINITY } else { base.powf(-shape) })
            }
            Self::Equilibrium { of } if !of.is_heavy_tailed() => {
                let m = of.mgf(s)?;
                Ok(if m.is_finite() { (m - 1.0) / (s * of.mean()?) } else { f64::INFINITY })
            }
            _ => Ok(if s > 0.0 { f64::INFINITY } else { self.lt_real(-s)? }),
        }
    }

    fn lt_real(&self, t: f64) -> Result<f64> {
        Ok(self.lt_point(Complex64::new(t, 0.0))?.re)
    }

    /// L_U(t) = E e^{-tU} for Re t ≥ 0.
    pub fn lt_point(&self, t: Complex64) -> Result<Complex64> {
        if t.re < 0.0 || !t.re.is_finite() || !t.im.is_finite() {
            return Err(Error::domain(format!(
                "Laplace transform needs Re t >= 0, got {t}"
            )));
        }
        if t == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        match self {
            Self::Gamma { shape, scale } => Ok((t * *scale + 1.0).powf(-shape)),
            Self::Equilibrium { of } => {
                let mean = of.mean()?;
                if (t * mean).norm() < 1e-5 {
                    // Two-term expansion avoids the cancellation in 1 - L_U(t).
                    if let (Ok(m1), Ok(m2)) = (self.moment(1), self.moment(2)) {
                        return Ok(Complex64::new(1.0, 0.0) - t * m1 + t * t * (m2 / 2.0));
                    }
                }
                let inner = of.lt_point(t)?;
                Ok((Complex64::new(1.0, 0.0) - inner) / (t * mean))
            }
            _ => self.lt_by_quadrature(t),
        }
    }

    /// L_U continued analytically to Re t > −ρ_U. Only gamma claims and their
    /// equilibrium law have a closed form there; `None` otherwise.
    pub(crate) fn lt_continued(&self, t: Complex64) -> Option<Complex64> {
        match self {
            Self::Gamma { shape, scale } => {
                let base = t * *scale + 1.0;
                (base.re > 0.0).then(|| base.powf(-shape))
            }
            Self::Equilibrium { of } if matches!(**of, Self::Gamma { .. }) => {
                let mean = of.mean().ok()?;
                if (t * mean).norm() < 1e-5 {
                    let (m1, m2) = (self.moment(1).ok()?, self.moment(2).ok()?);
                    return Some(Complex64::new(1.0, 0.0) - t * m1 + t * t * (m2 / 2.0));
                }
                let inner = of.lt_continued(t)?;
                Some((Complex64::new(1.0, 0.0) - inner) / (t * mean))
            }
            _ => None,
        }
    }

    /// Laplace transform by quadrature. Oscillatory arguments are integrated
    /// panel by panel between zeros of sin(Im t · x), adjacent panels are
    /// summed in pairs, and the loop stops once the remaining tail mass
    /// e^{-Re t · x} P(U > x) falls below tolerance.
    fn lt_by_quadrature(&self, t: Complex64) -> Result<Complex64> {
        let spec = TRANSFORM_QUADRATURE;
        let integrand = |u: f64| {
            let node = self.node(u);
            if node.weight == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (-t * node.x).exp() * node.weight
            }
        };
        let omega = t.im.abs();
        if omega == 0.0 {
            return integrate_semi_infinite(integrand, &spec);
        }
        let mean = self.mean().unwrap_or(1.0);
        let natural = 1.0 / (t.re + 1.0 / mean);
        let width = (PI / omega).min(natural);
        let mut total = Complex64::new(0.0, 0.0);
        let mut pending: Option<Complex64> = None;
        let mut x_lo = 0.0;
        for k in 0..MAX_TRANSFORM_PANELS {
            let x_hi = (k + 1) as f64 * width;
            let panel: Complex64 = integrate_interval(
                integrand,
                self.u_of_x(x_lo),
                self.u_of_x(x_hi),
                &spec,
            )
            .map_err(|e| {
                Error::numerical(format!(
                    "Laplace transform quadrature failed at t={t} on panel [{x_lo}, {x_hi}]: {e}"
                ))
            })?;
            match pending.take() {
                Some(prev) => total += prev + panel,
                None => pending = Some(panel),
            }
            let tail = (-t.re * x_hi).exp() * self.survival(x_hi)?;
            let running = total + pending.unwrap_or_default();
            if tail <= spec.abs_tol.max(spec.rel_tol * running.norm()) {
                return Ok(running);
            }
            x_lo = x_hi;
        }
        Err(Error::numerical(format!(
            "Laplace transform at t={t} did not converge within {MAX_TRANSFORM_PANELS} panels"
        )))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gamma { shape, scale } => Gamma::new(*shape, *scale)
                .expect("validated gamma")
                .sample(rng),
            Self::Pareto { a, b } => {
                let v: f64 = rng.random();
                a * ((1.0 - v).powf(-1.0 / b) - 1.0)
            }
            Self::Weibull { shape, scale } => {
                let v: f64 = 1.0 - rng.random::<f64>();
                scale * (-v.ln()).powf(1.0 / shape)
            }
            Self::Equilibrium { of } => {
                // Equilibrium law = uniform fraction of the size-biased law.
                let v: f64 = rng.random();
                let biased = match **of {
                    Self::Gamma { shape, scale } => Gamma::new(shape + 1.0, scale)
                        .expect("validated gamma")
                        .sample(rng),
                    Self::Weibull { shape, scale } => {
                        let g = Gamma::new(1.0 + 1.0 / shape, 1.0)
                            .expect("validated weibull")
                            .sample(rng);
                        scale * g.powf(1.0 / shape)
                    }
                    Self::Pareto { a, b } => {
                        let g1 = Gamma::new(2.0, 1.0).expect("shape 2").sample(rng);
                        let g2 = Gamma::new(b - 1.0, 1.0).expect("b > 1").sample(rng);
                        a * g1 / g2
                    }
                    Self::Equilibrium { .. } => unreachable!("rejected at construction"),
                };
                v * biased
            }
        }
    }
}

/// Aggregate claims S = U_1 + ... + U_N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompoundModel {
    pub frequency: FrequencyModel,
    pub severity: SeverityModel,
}

impl CompoundModel {
    pub fn new(frequency: FrequencyModel, severity: SeverityModel) -> Result<Self> {
        Ok(Self {
            frequency: frequency.validated()?,
            severity: severity.validated()?,
        })
    }

    pub fn validated(self) -> Result<Self> {
        Self::new(self.frequency, self.severity)
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.frequency.mass_at_zero()
    }

    pub fn mean(&self) -> Result<f64> {
        Ok(self.frequency.mean() * self.severity.moment(1)?)
    }

    pub fn variance(&self) -> Result<f64> {
        let m1 = self.severity.moment(1)?;
        let m2 = self.severity.moment(2)?;
        Ok(self.frequency.mean() * (m2 - m1 * m1) + self.frequency.variance() * m1 * m1)
    }

    /// L_S(t) = PGF_N(L_U(t)).
    pub fn lt_point(&self, t: Complex64) -> Result<Complex64> {
        self.frequency.pgf_point(self.severity.lt_point(t)?)
    }

    /// Radius of convergence of the aggregate; zero for heavy-tailed claims.
    pub fn radius_of_convergence(&self) -> Result<f64> {
        if self.severity.is_heavy_tailed() {
            return Ok(0.0);
        }
        let rho_u = self.severity.radius_of_convergence();
        let level = match self.frequency {
            FrequencyModel::Poisson { .. } | FrequencyModel::Binomial { .. } => return Ok(rho_u),
            FrequencyModel::Pascal { p, .. } => 1.0 / (1.0 - p),
            FrequencyModel::Geometric0 { rho } => 1.0 / rho,
        };
        let g = |s: f64| match self.severity.mgf(s) {
            Ok(v) => v - level,
            Err(_) => f64::NAN,
        };
        find_root_increasing(g, 0.5 * rho_u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.frequency.sample(rng);
        (0..n).map(|_| self.severity.sample(rng)).sum()
    }
}
