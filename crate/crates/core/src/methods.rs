//! One entry point for every evaluation route, so that callers can run the
//! same grid through several methods and compare.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    pascal_exponential_sf, pascal_exponential_slp, truncated_frequency_sf,
    truncated_frequency_slp, McSample, DEFAULT_TAIL_TOL,
};
use crate::distributions::{CompoundModel, FrequencyModel, SeverityModel};
use crate::error::{Error, Result};
use crate::expansion::{choose_basis, compute_expansion, BasisMode, DEFAULT_ORDER};
use crate::inversion::{sf_via_inversion, slp_via_inversion, EulerParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Gamma/Laguerre expansion.
    Ortho,
    /// Euler-accelerated transform inversion.
    Laplace,
    /// Claim-count truncation; gamma claims only.
    Truncation,
    /// Closed form for Pascal counts with exponential claims.
    Exact,
    /// Crude Monte Carlo.
    Mc,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ortho,
        Method::Laplace,
        Method::Truncation,
        Method::Exact,
        Method::Mc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Ortho => "ortho",
            Method::Laplace => "laplace",
            Method::Truncation => "truncation",
            Method::Exact => "exact",
            Method::Mc => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown method '{s}' (expected ortho, laplace, truncation, exact or mc)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Sf,
    Slp,
}

/// Tuning shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub order: usize,
    pub basis: BasisMode,
    pub euler: EulerParams,
    pub mc_samples: usize,
    pub seed: u64,
    pub tail_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            basis: BasisMode::Auto,
            euler: EulerParams::default(),
            mc_samples: 1_000_000,
            seed: 1,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

/// A value with its Monte Carlo standard error, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: Option<f64>,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self { value, stderr: None }
    }
}

fn pascal_exponential(model: &CompoundModel) -> Result<(u32, f64, f64)> {
    match (model.frequency, &model.severity) {
        (FrequencyModel::Pascal { alpha, p }, SeverityModel::Gamma { shape, scale })
            if *shape == 1.0 =>
        {
            Ok((alpha, p, *scale))
        }
        _ => Err(Error::domain(
            "the exact method needs Pascal counts and exponential (gamma shape 1) claims",
        )),
    }
}

/// Evaluates `quantity` at every abscissa. Errors name the method and the
/// abscissa that failed.
pub fn evaluate(
    model: &CompoundModel,
    quantity: Quantity,
    method: Method,
    xs: &[f64],
    settings: &Settings,
) -> Result<Vec<Estimate>> {
    if let Some(x) = xs.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("abscissa must be finite and nonnegative, got {x}")));
    }
    let at = |x: f64| move |e: Error| e.context(format!("method {method} at x={x}"));
    match method {
        Method::Ortho => {
            let basis = choose_basis(model, settings.basis)
                .map_err(|e| e.context(format!("method {method}")))?;
            let expansion = compute_expansion(model, &basis, settings.order)
                .map_err(|e| e.context(format!("method {method}")))?;
            xs.iter()
                .map(|&x| {
                    let v = match quantity {
                        Quantity::Sf => expansion.sf(x),
                        Quantity::Slp => expansion.slp(x),
                    };
                    v.map(Estimate::exact).map_err(at(x))
                })
                .collect()
        }
        Method::Laplace => xs
            .par_iter()
            .map(|&x| {
                let v = match quantity {
                    Quantity::Sf => sf_via_inversion(model, x, &settings.euler),
                    Quantity::Slp => slp_via_inversion(model, x, &settings.euler),
                };
                v.map(Estimate::exact).map_err(at(x))
            })
            .collect(),
        Method::Truncation => xs
            .iter()
            .map(|&x| {
                let v = match quantity {
                    Quantity::Sf => truncated_frequency_sf(model, x, settings.tail_tol),
                    Quantity::Slp => truncated_frequency_slp(model, x, settings.tail_tol),
                };
                v.map(Estimate::exact).map_err(at(x))
            })
            .collect(),
        Method::Exact => {
            let (alpha, p, beta) =
                pascal_exponential(model).map_err(|e| e.context(format!("method {method}")))?;
            xs.iter()
                .map(|&x| {
                    let v = match quantity {
                        Quantity::Sf => pascal_exponential_sf(alpha, p, beta, x),
                        Quantity::Slp => pascal_exponential_slp(alpha, p, beta, x),
                    };
                    v.map(Estimate::exact).map_err(at(x))
                })
                .collect()
        }
        Method::Mc => {
            let sample = McSample::draw(model, settings.mc_samples, settings.seed)
                .map_err(|e| e.context(format!("method {method}")))?;
            Ok(xs
                .iter()
                .map(|&x| {
                    let e = match quantity {
                        Quantity::Sf => sample.sf(x),
                        Quantity::Slp => sample.slp(x),
                    };
                    Estimate {
                        value: e.value,
                        stderr: Some(e.stderr),
                    }
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pascal_exponential_model() -> CompoundModel {
        CompoundModel::new(
            FrequencyModel::pascal(10, 0.75).unwrap(),
            SeverityModel::exponential(1.0 / 6.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn all_methods_agree_on_pascal_exponential() {
        let model = pascal_exponential_model();
        let xs = [0.0, 0.5, 1.0, 2.0];
        let settings = Settings {
            mc_samples: 200_000,
            ..Settings::default()
        };
        for q in [Quantity::Sf, Quantity::Slp] {
            let exact = evaluate(&model, q, Method::Exact, &xs, &settings).unwrap();
            for m in [Method::Ortho, Method::Laplace] {
                let got = evaluate(&model, q, m, &xs, &settings).unwrap();
                for (a, b) in got.iter().zip(&exact) {
                    assert!((a.value - b.value).abs() < 1e-4, "{m} {q:?}");
                    assert!(a.stderr.is_none());
                }
            }
            let mc = evaluate(&model, q, Method::Mc, &xs, &settings).unwrap();
            for (a, b) in mc.iter().zip(&exact) {
                assert!((a.value - b.value).abs() < 4.0 * a.stderr.unwrap());
            }
        }
    }

    #[test]
    fn errors_name_method_and_abscissa() {
        let heavy = CompoundModel::new(
            FrequencyModel::poisson(4.0).unwrap(),
            SeverityModel::pareto(5.0, 11.0).unwrap(),
        )
        .unwrap();
        let err = evaluate(&heavy, Quantity::Sf, Method::Truncation, &[0.7], &Settings::default())
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(err.to_string().contains("truncation at x=0.7"), "{err}");
        let err = evaluate(&heavy, Quantity::Sf, Method::Exact, &[0.7], &Settings::default())
            .unwrap_err();
        assert!(err.to_string().contains("method exact"), "{err}");
        assert!(evaluate(&heavy, Quantity::Sf, Method::Ortho, &[-1.0], &Settings::default()).is_err());
    }
}
