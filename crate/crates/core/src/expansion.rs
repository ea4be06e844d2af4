//! Gamma/Laguerre polynomial expansion of the defective density
//! f⁺(x) = d/dx P(0 < S ≤ x).
//!
//! With reference density γ(r, m, ·) the expansion reads
//! f⁺(x) ≈ Σ_{i≤K} p_i γ(r+i, m, x), so survival function and stop-loss
//! premium are finite mixtures of regularized incomplete gamma functions.
//! Heavy-tailed laws are handled by expanding the damped density
//! e^{-θx} f⁺(x) and undoing the damping analytically afterwards.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::distributions::{CompoundModel, FrequencyModel};
use crate::error::{Error, Result};
use crate::numerics::{gamma_pdf, ln_gamma_unchecked, pairwise_sum, upper_gamma_sf};
use crate::series::TruncatedSeries;

pub const DEFAULT_ORDER: usize = 16;

/// Reference gamma density parameters, with optional exponential tilt θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBasis {
    pub r: f64,
    pub m: f64,
    pub theta: f64,
}

impl GammaBasis {
    pub fn new(r: f64, m: f64, theta: f64) -> Result<Self> {
        let finite = r.is_finite() && m.is_finite() && theta.is_finite();
        if !(finite && r > 0.0 && m > 0.0 && theta >= 0.0) {
            return Err(Error::domain(format!(
                "basis needs r > 0, m > 0, theta >= 0; got r={r}, m={m}, theta={theta}"
            )));
        }
        if m * theta >= 1.0 {
            return Err(Error::domain(format!(
                "tilted basis needs m*theta < 1; got m={m}, theta={theta}"
            )));
        }
        Ok(Self { r, m, theta })
    }

    /// Scale of the gamma components after undoing the tilt.
    pub fn tilted_scale(&self) -> f64 {
        self.m / (1.0 - self.m * self.theta)
    }
}

impl fmt::Display for GammaBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r={}, m={}, theta={}", self.r, self.m, self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisMode {
    Auto,
    Explicit(GammaBasis),
}

/// Default basis for a model.
///
/// Light tails with Poisson or Binomial counts match the first two moments
/// of S; Pascal and geometric counts use r = 1 and the reciprocal radius of
/// convergence of S as scale, which is exact for exponential claims.
/// Heavy tails use the damped basis θ = 1, m = 1/2, r = E[U].
pub fn choose_basis(model: &CompoundModel, mode: BasisMode) -> Result<GammaBasis> {
    match mode {
        BasisMode::Explicit(basis) => {
            let basis = GammaBasis::new(basis.r, basis.m, basis.theta)?;
            if basis.theta == 0.0 && model.severity.is_heavy_tailed() {
                return Err(Error::domain(
                    "heavy-tailed severity needs a tilted basis (theta > 0)",
                ));
            }
            Ok(basis)
        }
        BasisMode::Auto => {
            if model.severity.is_heavy_tailed() {
                return GammaBasis::new(model.severity.mean()?, 0.5, 1.0);
            }
            match model.frequency {
                FrequencyModel::Poisson { .. } | FrequencyModel::Binomial { .. } => {
                    let mean = model.mean()?;
                    let var = model.variance()?;
                    GammaBasis::new(mean * mean / var, var / mean, 0.0)
                }
                FrequencyModel::Pascal { .. } | FrequencyModel::Geometric0 { .. } => {
                    GammaBasis::new(1.0, 1.0 / model.radius_of_convergence()?, 0.0)
                }
            }
        }
    }
}

/// Outcome of the sufficient conditions for convergence of the expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDiagnostics {
    pub tail_condition: bool,
    pub origin_condition: bool,
    pub warnings: Vec<String>,
}

impl BasisDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.tail_condition && self.origin_condition
    }
}

/// Checks square integrability of f⁺/γ(r, m, ·) at infinity and at the origin.
/// Failures are reported, not raised.
pub fn validate_basis(model: &CompoundModel, basis: &GammaBasis) -> BasisDiagnostics {
    let mut warnings = Vec::new();
    let tail_condition = if basis.theta > 0.0 {
        let bound = 1.0 / (2.0 * basis.theta);
        let ok = basis.m >= bound * (1.0 - 1e-12);
        if !ok {
            warnings.push(format!("tail condition fails: m={} < 1/(2 theta)={bound}", basis.m));
        }
        ok
    } else {
        match model.radius_of_convergence() {
            Ok(rho) if rho > 0.0 => {
                let bound = 1.0 / (2.0 * rho);
                let ok = basis.m > bound;
                if !ok {
                    warnings.push(format!("tail condition fails: m={} <= 1/(2 rho)={bound}", basis.m));
                }
                ok
            }
            Ok(_) => {
                warnings.push("tail condition fails: no exponential moments and no tilt".into());
                false
            }
            Err(e) => {
                warnings.push(format!("tail condition unknown: {e}"));
                false
            }
        }
    };
    let beta = model.severity.density_exponent_at_zero();
    let bound = 2.0 * (beta + 1.0);
    let origin_condition = basis.r < bound;
    if !origin_condition {
        warnings.push(format!(
            "origin condition fails: r={} >= 2(beta+1)={bound}",
            basis.r
        ));
    }
    BasisDiagnostics {
        tail_condition,
        origin_condition,
        warnings,
    }
}

/// A computed expansion. For tilted bases `weights` already hold the
/// untilted mixture weights, so evaluation uses the scale m/(1 − mθ).
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    basis: GammaBasis,
    q: Vec<f64>,
    weights: Vec<f64>,
    atom: f64,
}

/// ln c_k, where c_k² = Γ(k+r) / (k! Γ(r)) normalizes the Laguerre polynomials.
fn ln_norm(k: usize, r: f64) -> f64 {
    0.5 * (ln_gamma_unchecked(k as f64 + r)
        - ln_gamma_unchecked(k as f64 + 1.0)
        - ln_gamma_unchecked(r))
}

/// Coefficients of z^k in (1+z)^{-r} L[f⁺_θ](−z/(m(1+z))), i.e. q_k c_k.
fn generating_coefficients(
    model: &CompoundModel,
    basis: &GammaBasis,
    order: usize,
) -> Result<TruncatedSeries> {
    let lt_u = model.severity.lt_series(basis.theta, order)?;
    let lt_s = model.frequency.pgf_apply(&lt_u)?;
    // The atom at zero is unaffected by the tilt.
    let defective = lt_s.add_constant(-model.mass_at_zero());
    let z = TruncatedSeries::variable(order);
    let inner = z
        .mul(&z.add_constant(1.0).reciprocal()?)?
        .scale(-1.0 / basis.m);
    let q_gen = defective.compose(&inner)?;
    let weight = z.add_constant(1.0).pow_real(-basis.r)?;
    q_gen.mul(&weight)
}

/// Points per circle for the contour route.
const CONTOUR_POINTS: usize = 512;
const CONTOUR_NOISE_LIMIT: f64 = 1e-6;
const CONTOUR_RADII: [f64; 6] = [0.15, 0.3, 0.45, 0.6, 0.75, 0.9];

/// The same q_k c_k as `generating_coefficients`, from the Cauchy integral
/// on circles |z| = ρ by the trapezoidal rule; each k takes the radius with
/// the smallest roundoff bound max|Q|/ρ^k. Needs L_S continued to
/// Re t < 0, so only untilted models with gamma-type claims qualify.
///
/// For large r the series route is badly conditioned: the Maclaurin
/// coefficients of L_S(−z/(m(1+z))) grow like (E[S]/m)^j/j! and cancel
/// against (1+z)^{-r}. On the circle nothing cancels.
fn contour_coefficients(
    model: &CompoundModel,
    basis: &GammaBasis,
    order: usize,
) -> Result<Option<Vec<f64>>> {
    if basis.theta != 0.0 || model.severity.lt_continued(Complex64::new(-1e-3, 0.0)).is_none() {
        return Ok(None);
    }
    // L_S is analytic for Re t > −ρ_S; the circle maps into Re t ≥ −ρ/(m(1+ρ)).
    let m_rho = basis.m * model.radius_of_convergence()?;
    let limit = if m_rho >= 1.0 { 1.0 } else { m_rho / (1.0 - m_rho) }.min(1.0);
    let mut radii: Vec<f64> = CONTOUR_RADII.into_iter().filter(|&r| r < 0.9 * limit).collect();
    if radii.is_empty() {
        radii.push(0.9 * limit);
    }
    let n = CONTOUR_POINTS.max((4 * (order + 1)).next_power_of_two());
    let ln_atom = model.mass_at_zero().ln();
    let one = Complex64::new(1.0, 0.0);

    let mut best = vec![(f64::INFINITY, 0.0); order + 1];
    for rho in radii {
        // Q(conj z) = conj Q(z), so half the circle suffices.
        let mut values = Vec::with_capacity(n / 2 + 1);
        let mut max_abs = 0.0f64;
        for j in 0..=n / 2 {
            let z = Complex64::from_polar(rho, 2.0 * PI * j as f64 / n as f64);
            let t = -z / ((one + z) * basis.m);
            let Some(lu) = model.severity.lt_continued(t) else {
                return Err(Error::numerical(format!(
                    "claim transform has no continuation at t = {t}"
                )));
            };
            let ln_l = model.frequency.log_pgf_point(lu);
            let q = if ln_l.re == f64::NEG_INFINITY {
                Complex64::new(0.0, 0.0)
            } else {
                let defective = if ln_atom == f64::NEG_INFINITY {
                    ln_l
                } else {
                    ln_l + (one - (ln_atom - ln_l).exp()).ln()
                };
                (defective - (one + z).ln() * basis.r).exp()
            };
            if !(q.re.is_finite() && q.im.is_finite()) {
                return Err(Error::numerical(format!(
                    "generating function is not finite at z = {z} for basis {basis}"
                )));
            }
            max_abs = max_abs.max(q.norm());
            values.push(q);
        }
        for (k, slot) in best.iter_mut().enumerate() {
            let bound = max_abs / rho.powi(k as i32);
            if bound >= slot.0 {
                continue;
            }
            let terms: Vec<f64> = values
                .iter()
                .enumerate()
                .map(|(j, q)| {
                    let phase = Complex64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64);
                    let w = if j == 0 || j == n / 2 { 1.0 } else { 2.0 };
                    w * (q * phase).re
                })
                .collect();
            *slot = (bound, pairwise_sum(&terms) / n as f64 / rho.powi(k as i32));
        }
    }
    // Roundoff in q_k is about ε·max|Q|/(ρ^k c_k); past a point a higher
    // order only adds noise, and the curves become garbage.
    for (k, &(bound, _)) in best.iter().enumerate() {
        let noise = 8.0 * f64::EPSILON * bound / ln_norm(k, basis.r).exp();
        if noise > CONTOUR_NOISE_LIMIT {
            return Err(Error::numerical(format!(
                "order {order} is too high for basis {basis}: coefficient {k} is lost to roundoff (~{noise:.1e})"
            )));
        }
    }
    Ok(Some(best.into_iter().map(|(_, c)| c).collect()))
}

/// p̂_i = Σ_{k≥i} (−1)^{i+k} C(k, i) q_k c_k, from the generating
/// coefficients q_k c_k. The weights alternate and can be far larger than
/// their sum, so each one is a compensated dot product (error-free products
/// and sums) to keep Σ p̂_i = q_0 at rounding level.
fn mixture_weights(coef: &[f64]) -> Vec<f64> {
    let order = coef.len() - 1;
    (0..=order)
        .map(|i| {
            let (mut sum, mut err) = (0.0f64, 0.0f64);
            let mut binom = 1.0f64;
            for k in i..=order {
                if k > i {
                    binom = (binom * k as f64 / (k - i) as f64).round();
                }
                let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
                let a = sign * coef[k];
                let prod = a * binom;
                let prod_err = a.mul_add(binom, -prod);
                let t = sum + prod;
                let z = t - sum;
                err += (sum - (t - z)) + (prod - z) + prod_err;
                sum = t;
            }
            sum + err
        })
        .collect()
}

/// Expansion of order K of the defective density of `model` in `basis`.
pub fn compute_expansion(
    model: &CompoundModel,
    basis: &GammaBasis,
    order: usize,
) -> Result<Expansion> {
    let basis = GammaBasis::new(basis.r, basis.m, basis.theta)?;
    let generating = match contour_coefficients(model, &basis, order)? {
        Some(c) => c,
        None => generating_coefficients(model, &basis, order)?.coeffs().to_vec(),
    };
    let q: Vec<f64> = generating
        .iter()
        .enumerate()
        .map(|(k, c)| c / ln_norm(k, basis.r).exp())
        .collect();
    let mut weights = mixture_weights(&generating);
    if basis.theta > 0.0 {
        let ln_factor = (1.0 - basis.m * basis.theta).ln();
        for (i, w) in weights.iter_mut().enumerate() {
            *w *= (-(basis.r + i as f64) * ln_factor).exp();
        }
    }
    if let Some(bad) = q.iter().chain(&weights).find(|v| !v.is_finite()) {
        return Err(Error::numerical(format!(
            "expansion coefficients are not finite ({bad}) for basis {basis}"
        )));
    }
    Ok(Expansion {
        basis,
        q,
        weights,
        atom: model.mass_at_zero(),
    })
}

impl Expansion {
    /// Builds an expansion directly from mixture weights (mainly for tests).
    pub fn from_weights(basis: GammaBasis, weights: Vec<f64>, atom: f64) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("weights must be a nonempty finite vector"));
        }
        if !(0.0..1.0).contains(&atom) {
            return Err(Error::domain(format!("atom must lie in [0, 1), got {atom}")));
        }
        Ok(Self {
            basis,
            q: Vec::new(),
            weights,
            atom,
        })
    }

    pub fn basis(&self) -> &GammaBasis {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.weights.len() - 1
    }

    /// Coordinates of f⁺/γ(r, m, ·) in the orthonormal Laguerre basis.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Mixture weights of γ(r+i, m_eff, ·).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atom(&self) -> f64 {
        self.atom
    }

    fn scale(&self) -> f64 {
        self.basis.tilted_scale()
    }

    fn shape(&self, i: usize) -> f64 {
        self.basis.r + i as f64
    }

    /// Coordinates a_k with f⁺ = γ(r, m, ·) Σ_k a_k L_k^{(r−1)}(x/m), available
    /// for untilted expansions built from coefficients.
    fn laguerre_coordinates(&self) -> Option<Vec<f64>> {
        if self.basis.theta > 0.0 || self.q.is_empty() {
            return None;
        }
        Some(
            self.q
                .iter()
                .enumerate()
                .map(|(k, q)| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * q * (-ln_norm(k, self.basis.r)).exp()
                })
                .collect(),
        )
    }

    /// Defective density; may dip below zero through truncation.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if let Some(a) = self.laguerre_coordinates() {
            let (r, m) = (self.basis.r, self.basis.m);
            let poly = laguerre(a.len() - 1, r - 1.0, x / m);
            let terms: Vec<f64> = a.iter().zip(&poly).map(|(a, l)| a * l).collect();
            return gamma_pdf(r, m, x) * pairwise_sum(&terms);
        }
        let terms: Vec<f64> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * gamma_pdf(self.shape(i), self.scale(), x))
            .collect();
        pairwise_sum(&terms)
    }

    /// P(S > x). At the origin this is exactly 1 − P(N = 0).
    pub fn sf(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(1.0 - self.atom);
        }
        if let Some(a) = self.laguerre_coordinates() {
            // ∫_z^∞ u^{r−1} e^{−u} L_k^{(r−1)}(u) du = −z^r e^{−z} L_{k−1}^{(r)}(z) / k
            let (r, m) = (self.basis.r, self.basis.m);
            let z = x / m;
            let poly = laguerre(a.len().saturating_sub(2), r, z);
            let density = r * gamma_pdf(r + 1.0, 1.0, z);
            let mut terms = vec![a[0] * upper_gamma_sf(r, 1.0, z)?];
            for k in 1..a.len() {
                terms.push(-a[k] * density * poly[k - 1] / k as f64);
            }
            return Ok(pairwise_sum(&terms));
        }
        let terms = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| Ok(w * upper_gamma_sf(self.shape(i), self.scale(), x)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_sum(&terms))
    }

    /// E[(S − a)_+].
    pub fn slp(&self, a: f64) -> Result<f64> {
        let a = a.max(0.0);
        if let Some(coords) = self.laguerre_coordinates() {
            // integrate the survival terms once more with the same identity
            let (r, m) = (self.basis.r, self.basis.m);
            let z = a / m;
            let upper_r = upper_gamma_sf(r, 1.0, z)?;
            let upper_r1 = upper_gamma_sf(r + 1.0, 1.0, z)?;
            let mut terms = vec![coords[0] * (r * upper_r1 - z * upper_r)];
            if coords.len() > 1 {
                terms.push(-coords[1] * r * upper_r1);
            }
            if coords.len() > 2 {
                let poly = laguerre(coords.len() - 3, r + 1.0, z);
                let density = r * (r + 1.0) * gamma_pdf(r + 2.0, 1.0, z);
                for k in 2..coords.len() {
                    terms.push(coords[k] * density * poly[k - 2] / (k * (k - 1)) as f64);
                }
            }
            return Ok(m * pairwise_sum(&terms));
        }
        let m = self.scale();
        let terms = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let r = self.shape(i);
                let upper = if a == 0.0 {
                    m * r
                } else {
                    m * r * upper_gamma_sf(r + 1.0, m, a)? - a * upper_gamma_sf(r, m, a)?
                };
                Ok(w * upper)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(pairwise_sum(&terms))
    }
}

/// L_0^{(α)}(z), ..., L_n^{(α)}(z) by the three-term recurrence.
fn laguerre(n: usize, alpha: f64, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 + alpha - z);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - z) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}
