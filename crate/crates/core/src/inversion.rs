//! Numerical inversion of Laplace transforms by the Fourier-series method
//! with Euler summation.
//!
//! The Bromwich integral is discretized by the trapezoidal rule with step
//! π/(2x) on the vertical line Re t = a/(2x). This aliases the target with
//! damped copies of itself, f_disc(x) = Σ_j e^{-ja} f((2j+1)x), so for a
//! target in [0, 1] the error is at most e^{-a}/(1 − e^{-a}). The alternating
//! series that remains is summed by binomial averaging of partial sums.

use num_complex::Complex64;

use crate::distributions::CompoundModel;
use crate::error::{Error, Result};

/// Partial sums beyond this size mean the transform is being evaluated in a
/// regime where the alternating series has lost all accuracy.
const PARTIAL_SUM_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    /// Damping of the contour; controls the aliasing error.
    pub a: f64,
    /// Order of the binomial average.
    pub m1: usize,
    /// Index of the first partial sum entering the average.
    pub m2: usize,
}

impl Default for EulerParams {
    fn default() -> Self {
        Self {
            a: 18.5,
            m1: 11,
            m2: 15,
        }
    }
}

impl EulerParams {
    pub fn new(a: f64, m1: usize, m2: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || m2 < 1 {
            return Err(Error::domain(format!(
                "inversion needs a > 0 and M2 >= 1; got a={a}, M2={m2}"
            )));
        }
        Ok(Self { a, m1, m2 })
    }

    /// Number of transform evaluations per inversion.
    pub fn evaluations(&self) -> usize {
        self.m1 + self.m2 + 1
    }
}

/// Upper bound e^{-a}/(1 − e^{-a}) on the aliasing error for targets in [0, 1].
pub fn discretization_error_bound(a: f64) -> f64 {
    let e = (-a).exp();
    e / (1.0 - e)
}

/// Inverts `transform` at `x > 0`, calling it exactly M1 + M2 + 1 times.
pub fn euler_invert<L>(transform: L, x: f64, params: &EulerParams) -> Result<f64>
where
    L: Fn(Complex64) -> Result<Complex64>,
{
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("inversion needs x > 0, got {x}")));
    }
    let params = EulerParams::new(params.a, params.m1, params.m2)?;
    let n = params.evaluations();
    let scale = (params.a / 2.0).exp();

    // Partial sums without the e^{a/2} factor, which is applied last.
    let mut partial = Vec::with_capacity(n);
    let mut running = 0.0;
    for k in 0..n {
        let t = Complex64::new(params.a, 2.0 * std::f64::consts::PI * k as f64) / (2.0 * x);
        let value = transform(t).map_err(|e| {
            Error::numerical(format!("transform evaluation failed at node {k} (t = {t}): {e}"))
        })?;
        if !value.re.is_finite() {
            return Err(Error::numerical(format!(
                "transform is not finite at node {k} (t = {t})"
            )));
        }
        running += if k == 0 {
            value.re / (2.0 * x)
        } else if k % 2 == 0 {
            value.re / x
        } else {
            -value.re / x
        };
        if !(running * scale).is_finite() || (running * scale).abs() > PARTIAL_SUM_LIMIT {
            return Err(Error::numerical(format!(
                "partial sum {k} at x = {x} diverged ({:e})",
                running * scale
            )));
        }
        partial.push(running);
    }

    let mut weight = 0.5f64.powi(params.m1 as i32);
    let mut average = 0.0;
    for k in 0..=params.m1 {
        average += weight * partial[params.m2 + k];
        weight *= (params.m1 - k) as f64 / (k + 1) as f64;
    }
    Ok(scale * average)
}

/// P(S > x) by inverting (1 − L_S(t))/t. At x = 0 this is 1 − P(N = 0).
pub fn sf_via_inversion(model: &CompoundModel, x: f64, params: &EulerParams) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0 - model.mass_at_zero());
    }
    euler_invert(
        |t| Ok((Complex64::new(1.0, 0.0) - model.lt_point(t)?) / t),
        x,
        params,
    )
}

/// E[(S − a)_+] = E[S] · P(S* > a), with S* the equilibrium law of S whose
/// transform is (1 − L_S(t))/(t E[S]).
pub fn slp_via_inversion(model: &CompoundModel, a: f64, params: &EulerParams) -> Result<f64> {
    let mean = model.mean()?;
    if a == 0.0 {
        return Ok(mean);
    }
    let one = Complex64::new(1.0, 0.0);
    let tail = euler_invert(
        |t| {
            let equilibrium = (one - model.lt_point(t)?) / (t * mean);
            Ok((one - equilibrium) / t)
        },
        a,
        params,
    )?;
    Ok(mean * tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{FrequencyModel, SeverityModel};
    use std::cell::Cell;

    fn pascal_exponential() -> CompoundModel {
        CompoundModel::new(
            FrequencyModel::pascal(10, 0.75).unwrap(),
            SeverityModel::exponential(1.0 / 6.0).unwrap(),
        )
        .unwrap()
    }

    /// Binomial(10, 1/4) mixture of Erlang(i, 2/9) tails.
    fn exact_sf(x: f64) -> f64 {
        let (alpha, p, scale) = (10u32, 0.75f64, 2.0 / 9.0);
        let z = x / scale;
        let mut binom = 1.0;
        let mut total = 0.0;
        for i in 1..=alpha {
            binom = binom * (alpha - i + 1) as f64 / i as f64;
            let w = binom * (1.0 - p).powi(i as i32) * p.powi((alpha - i) as i32);
            let mut term = (-z).exp();
            let mut tail = 0.0;
            for j in 0..i {
                tail += term;
                term *= z / (j + 1) as f64;
            }
            total += w * tail;
        }
        total
    }

    #[test]
    fn discretization_bound_examples() {
        let b = discretization_error_bound(18.5);
        assert!(b < 1e-8);
        assert!((b - 9.237_449_747_301_072e-9).abs() < 1e-20);
        assert!((discretization_error_bound(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
        assert_eq!(discretization_error_bound(800.0), 0.0);
    }

    #[test]
    fn inverts_elementary_pairs() {
        let p = EulerParams::default();
        let exp = |t: Complex64| Ok(1.0 / (t + 1.0));
        for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let got = euler_invert(exp, x, &p).unwrap();
            assert!((got - (-x).exp()).abs() < 1e-8, "x={x}: {got}");
        }
        let one = euler_invert(|t: Complex64| Ok(1.0 / t), 5.0, &p).unwrap();
        assert!((one - 1.0).abs() < 1e-8);
        let ramp = euler_invert(|t: Complex64| Ok(1.0 / (t * t)), 2.0, &p).unwrap();
        assert!((ramp - 2.0).abs() < 1e-7);
    }

    #[test]
    fn evaluation_count_is_fixed() {
        for (m1, m2) in [(11, 15), (0, 1), (5, 40)] {
            let params = EulerParams::new(18.5, m1, m2).unwrap();
            let calls = Cell::new(0usize);
            euler_invert(
                |t: Complex64| {
                    calls.set(calls.get() + 1);
                    Ok(1.0 / (t + 1.0))
                },
                1.0,
                &params,
            )
            .unwrap();
            assert_eq!(calls.get(), m1 + m2 + 1);
        }
    }

    #[test]
    fn failures_name_the_node() {
        let err = euler_invert(
            |t: Complex64| {
                if t.im > 10.0 {
                    Err(Error::numerical("boom"))
                } else {
                    Ok(1.0 / t)
                }
            },
            1.0,
            &EulerParams::default(),
        )
        .unwrap_err();
        assert!(err.is_numerical());
        assert!(err.to_string().contains("node 4"), "{err}");
        let err = euler_invert(|_| Ok(Complex64::new(1e20, 0.0)), 1.0, &EulerParams::default())
            .unwrap_err();
        assert!(err.to_string().contains("diverged"), "{err}");
        assert!(euler_invert(|t: Complex64| Ok(1.0 / t), 0.0, &EulerParams::default()).is_err());
    }

    #[test]
    fn pascal_exponential_table_accuracy() {
        let model = pascal_exponential();
        let p = EulerParams::default();
        for x in [0.5, 1.0, 1.5, 2.0, 2.5] {
            let exact = exact_sf(x);
            let got = sf_via_inversion(&model, x, &p).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-3, "x={x}: {got} vs {exact}");
        }
    }

    #[test]
    fn cdf_and_sf_transforms_agree() {
        let model = pascal_exponential();
        let p = EulerParams::default();
        for x in [0.3, 1.0, 2.0, 4.0] {
            let cdf = euler_invert(|t| Ok(model.lt_point(t)? / t), x, &p).unwrap();
            let sf = sf_via_inversion(&model, x, &p).unwrap();
            assert!((1.0 - cdf - sf).abs() < 1e-7, "x={x}");
        }
    }

    #[test]
    fn slp_limits() {
        let model = pascal_exponential();
        let p = EulerParams::default();
        let mean = model.mean().unwrap();
        // Π_a = E[S] − a P(S > 0) + O(a²)
        let a = 1e-6;
        let near_zero = slp_via_inversion(&model, a, &p).unwrap();
        let first_order = mean - a * (1.0 - model.mass_at_zero());
        assert!((near_zero - first_order).abs() < 1e-6 * mean, "{near_zero}");
        assert_eq!(slp_via_inversion(&model, 0.0, &p).unwrap(), mean);
    }

    #[test]
    fn aliasing_error_is_an_overestimate_within_the_bound() {
        // Damping a = 8 makes the aliasing term e^{-a} F̄(3x) large enough to
        // see; a long Euler-averaged series removes the truncation error.
        let model = pascal_exponential();
        let params = EulerParams::new(8.0, 11, 200).unwrap();
        let bound = discretization_error_bound(params.a);
        for x in [0.25, 0.5, 1.0, 2.0] {
            let disc = sf_via_inversion(&model, x, &params).unwrap();
            let gap = disc - exact_sf(x);
            let aliased: f64 = (1..6)
                .map(|j| (-(j as f64) * params.a).exp() * exact_sf((2 * j + 1) as f64 * x))
                .sum();
            assert!(gap >= 0.0 && gap <= bound, "x={x}: gap {gap}");
            assert!((gap - aliased).abs() < 1e-9, "x={x}: gap {gap} vs {aliased}");
        }
    }
}
