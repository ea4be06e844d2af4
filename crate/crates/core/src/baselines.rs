//! Reference values: the closed form for Pascal counts with exponential
//! claims, frequency truncation for gamma claims, and crude Monte Carlo.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{CompoundModel, FrequencyModel, SeverityModel};
use crate::error::{Error, Result};
use crate::numerics::{pairwise_sum, upper_gamma_sf};

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Samples per independently seeded stream. Fixed so that results depend
/// only on the seed, never on the number of worker threads.
const BLOCK: usize = 1 << 15;

fn check_pascal(alpha: u32, p: f64, beta: f64) -> Result<()> {
    if alpha == 0 || !(p > 0.0 && p < 1.0) || !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!(
            "Pascal-exponential needs alpha >= 1, p in (0,1), beta > 0; got {alpha}, {p}, {beta}"
        )));
    }
    Ok(())
}

/// Binomial(α, q) weights of the Erlang(i, β/p) components.
fn pascal_exponential_terms(alpha: u32, p: f64) -> impl Iterator<Item = (f64, f64)> {
    let q = 1.0 - p;
    let mut binom = 1.0;
    (1..=alpha).map(move |i| {
        binom = binom * (alpha - i + 1) as f64 / i as f64;
        let w = binom * q.powi(i as i32) * p.powi((alpha - i) as i32);
        (i as f64, w)
    })
}

/// P(S > x) for Pascal(α, p) counts and exponential claims with mean β.
pub fn pascal_exponential_sf(alpha: u32, p: f64, beta: f64, x: f64) -> Result<f64> {
    check_pascal(alpha, p, beta)?;
    let scale = beta / p;
    let terms = pascal_exponential_terms(alpha, p)
        .map(|(i, w)| Ok(w * upper_gamma_sf(i, scale, x.max(0.0))?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// E[(S − a)_+] for Pascal(α, p) counts and exponential claims with mean β.
pub fn pascal_exponential_slp(alpha: u32, p: f64, beta: f64, a: f64) -> Result<f64> {
    check_pascal(alpha, p, beta)?;
    let scale = beta / p;
    let a = a.max(0.0);
    let terms = pascal_exponential_terms(alpha, p)
        .map(|(i, w)| {
            Ok(w * (i * scale * upper_gamma_sf(i + 1.0, scale, a)?
                - a * upper_gamma_sf(i, scale, a)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Claim-count probabilities f_N(1), ..., f_N(n*) with the neglected tail
/// below `tail_tol`.
fn truncated_counts(model: &CompoundModel, tail_tol: f64) -> Result<(f64, f64, Vec<f64>)> {
    let SeverityModel::Gamma { shape, scale } = model.severity else {
        return Err(Error::domain("frequency truncation needs a gamma severity"));
    };
    if !(tail_tol > 0.0) {
        return Err(Error::domain(format!("tail tolerance must be positive, got {tail_tol}")));
    }
    const MAX_COUNT: u64 = 10_000_000;
    let mut probs = Vec::new();
    let mut covered = model.mass_at_zero();
    let mut n = 0;
    loop {
        n += 1;
        if n > MAX_COUNT {
            return Err(Error::numerical(format!(
                "frequency tail above {tail_tol} after {MAX_COUNT} terms"
            )));
        }
        let p = model.frequency.pmf(n);
        covered += p;
        probs.push(p);
        if let FrequencyModel::Binomial { n: trials, .. } = model.frequency {
            if n == trials as u64 {
                break;
            }
        }
        // Past the mode the pmf ratios decrease, so the tail beyond n is at
        // most p·ρ/(1 − ρ); this bound is immune to rounding in 1 − covered.
        if p == 0.0 && n as f64 > model.frequency.mean() {
            break;
        }
        let ratio = model.frequency.pmf(n + 1) / p;
        let bounded = ratio < 1.0 && p * ratio / (1.0 - ratio) < tail_tol;
        if 1.0 - covered < tail_tol || bounded {
            break;
        }
    }
    Ok((shape, scale, probs))
}

/// P(S > x) by truncating the claim count; S given N = n is Gamma(n r, m).
pub fn truncated_frequency_sf(model: &CompoundModel, x: f64, tail_tol: f64) -> Result<f64> {
    let (shape, scale, probs) = truncated_counts(model, tail_tol)?;
    let terms = probs
        .iter()
        .enumerate()
        .map(|(i, p)| Ok(p * upper_gamma_sf((i + 1) as f64 * shape, scale, x.max(0.0))?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// E[(S − a)_+] by truncating the claim count.
pub fn truncated_frequency_slp(model: &CompoundModel, a: f64, tail_tol: f64) -> Result<f64> {
    let (shape, scale, probs) = truncated_counts(model, tail_tol)?;
    let a = a.max(0.0);
    let terms = probs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let r = (i + 1) as f64 * shape;
            Ok(p * (scale * r * upper_gamma_sf(r + 1.0, scale, a)? - a * upper_gamma_sf(r, scale, a)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

/// A seeded sample of S shared by all estimates (common random numbers).
#[derive(Debug, Clone)]
pub struct McSample {
    values: Vec<f64>,
    seed: u64,
}

impl McSample {
    /// Draws `n` values; block `b` uses stream `b` of the ChaCha generator
    /// keyed by `seed`, so the result is reproducible across thread counts.
    pub fn draw(model: &CompoundModel, n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("Monte Carlo needs at least 2 samples, got {n}")));
        }
        let blocks = n.div_ceil(BLOCK);
        let values = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let len = BLOCK.min(n - b * BLOCK);
                (0..len).map(|_| model.sample(&mut rng)).collect::<Vec<f64>>()
            })
            .flatten()
            .collect();
        Ok(Self { values, seed })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample mean of f(S) with its standard error.
    fn mean_of(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let n = self.values.len() as f64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for &s in &self.values {
            let v = f(s);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }

    pub fn sf(&self, x: f64) -> McEstimate {
        let n = self.values.len();
        let hits = self.values.iter().filter(|&&s| s > x).count();
        let p = hits as f64 / n as f64;
        McEstimate {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n,
            seed: self.seed,
        }
    }

    pub fn slp(&self, a: f64) -> McEstimate {
        let (value, stderr) = self.mean_of(|s| (s - a).max(0.0));
        McEstimate {
            value,
            stderr,
            n: self.values.len(),
            seed: self.seed,
        }
    }
}

/// Survival probabilities on a grid from one shared sample.
pub fn mc_sf(model: &CompoundModel, xs: &[f64], n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    let sample = McSample::draw(model, n, seed)?;
    Ok(xs.iter().map(|&x| sample.sf(x)).collect())
}

/// Stop-loss premiums on a grid from one shared sample.
pub fn mc_slp(
    model: &CompoundModel,
    priorities: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    let sample = McSample::draw(model, n, seed)?;
    Ok(priorities.iter().map(|&a| sample.slp(a)).collect())
}
