//! Survival functions, stop-loss premiums and ruin probabilities of compound
//! distributions S = U_1 + ... + U_N.
//!
//! Two evaluation routes are provided: a gamma/Laguerre orthogonal polynomial
//! expansion of the defective density ([`expansion`]) and Euler-accelerated
//! Bromwich inversion of Laplace transforms ([`inversion`]). Exact closed
//! forms and Monte Carlo estimators ([`baselines`]) serve as references.

pub mod error;
pub mod expansion;
pub mod inversion;
pub mod methods;
pub mod baselines;
pub mod distributions;
pub mod numerics;
pub mod ruin;
pub mod series;

pub use error::{Error, Result};
