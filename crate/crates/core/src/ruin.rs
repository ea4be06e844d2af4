//! Ruin probabilities of the compound Poisson surplus process
//! R(t) = u + ct − Σ_{k ≤ N(t)} U_k, and premiums of layered covers.

use crate::distributions::{CompoundModel, FrequencyModel, SeverityModel};
use crate::error::{Error, Result};
use crate::methods::{evaluate, Estimate, Method, Quantity, Settings};

/// Values this far outside [0, 1] are clamped; anything further is an error.
const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RiskModel {
    /// Claim arrival intensity.
    pub lambda: f64,
    pub severity: SeverityModel,
    /// Premium income per unit time.
    pub c: f64,
}

impl RiskModel {
    pub fn new(lambda: f64, severity: SeverityModel, c: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!(
                "risk model needs lambda > 0 and c > 0; got lambda={lambda}, c={c}"
            )));
        }
        Ok(Self {
            lambda,
            severity: severity.validated()?,
            c,
        })
    }

    /// Aggregate claims over [0, T].
    pub fn aggregate(&self, horizon: f64) -> Result<CompoundModel> {
        CompoundModel::new(
            FrequencyModel::poisson(self.lambda * horizon)?,
            self.severity.clone(),
        )
    }

    /// Expected claims per unit of premium, λE[U]/c.
    pub fn loading_ratio(&self) -> Result<f64> {
        Ok(self.lambda * self.severity.mean()? / self.c)
    }
}

/// Monte Carlo values may stray this many standard errors outside [0, 1].
const MC_SLACK: f64 = 5.0;

fn checked_probability(value: f64, stderr: Option<f64>, what: &str) -> Result<f64> {
    let slack = CLAMP_SLACK + MC_SLACK * stderr.unwrap_or(0.0);
    if !value.is_finite() || value < -slack || value > 1.0 + slack {
        return Err(Error::numerical(format!(
            "{what} evaluated to {value}, outside [0, 1]"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// ψ(0, T) = (λT E[U] − Π_{cT}) / (cT): ruin before T starting from zero
/// reserve, via the stop-loss premium of the aggregate claims at priority cT.
pub fn finite_ruin_zero_reserve(
    rm: &RiskModel,
    horizon: f64,
    method: Method,
    settings: &Settings,
) -> Result<Estimate> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("horizon must be nonnegative, got {horizon}")));
    }
    if horizon == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            stderr: (method == Method::Mc).then_some(0.0),
        });
    }
    let model = rm.aggregate(horizon)?;
    let income = rm.c * horizon;
    let slp = evaluate(&model, Quantity::Slp, method, &[income], settings)?[0];
    let value = (model.mean()? - slp.value) / income;
    let stderr = slp.stderr.map(|s| s / income);
    let value = checked_probability(value, stderr, &format!("ruin probability at T={horizon}"))
        .map_err(|e| e.context(format!("method {method}")))?;
    Ok(Estimate { value, stderr })
}

/// ψ(u) by the Pollaczeck–Khinchine formula: the survival function at u of
/// a geometric sum of equilibrium claims with ratio ρ = λE[U]/c.
pub fn infinite_ruin_probability(
    rm: &RiskModel,
    reserve: f64,
    method: Method,
    settings: &Settings,
) -> Result<Estimate> {
    if !(reserve >= 0.0 && reserve.is_finite()) {
        return Err(Error::domain(format!("reserve must be nonnegative, got {reserve}")));
    }
    let rho = rm.loading_ratio()?;
    if rho >= 1.0 {
        return Ok(Estimate {
            value: 1.0,
            stderr: None,
        });
    }
    let model = CompoundModel::new(
        FrequencyModel::geometric0(rho)?,
        rm.severity.equilibrium()?,
    )?;
    let est = evaluate(&model, Quantity::Sf, method, &[reserve], settings)?[0];
    let value = checked_probability(est.value, est.stderr, &format!("ruin probability at u={reserve}"))
        .map_err(|e| e.context(format!("method {method}")))?;
    Ok(Estimate { value, ..est })
}

/// E min[(S − a)_+, b] = Π_a − Π_{a+b}.
pub fn limited_slp(slp: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::domain(format!("priority and limit must be nonnegative; got {a}, {b}")));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    if b.is_infinite() {
        return slp(a);
    }
    Ok(slp(a)? - slp(a + b)?)
}

/// E[c (S − a)_+] for a ceded share c.
pub fn change_loss_premium(slp: impl Fn(f64) -> Result<f64>, share: f64, a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&share) {
        return Err(Error::domain(format!("ceded share must lie in [0, 1], got {share}")));
    }
    if share == 0.0 {
        return Ok(0.0);
    }
    Ok(share * slp(a)?)
}
