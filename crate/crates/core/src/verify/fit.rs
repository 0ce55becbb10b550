use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lstsq::solve_least_squares;
use super::{check_state_range, sample_pair, FIT_MIN_STATES, MIN_FIT_SAMPLES};
use crate::catalog::TraceGenerator;
use crate::error::{Error, Result};
use crate::numeric::{nan_max, pairwise_sum};
use crate::simplex::product;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub n_samples: usize,
    pub w_min: usize,
    pub w_max: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_samples: 1000,
            w_min: FIT_MIN_STATES,
            w_max: 8,
            seed: 42,
        }
    }
}

/// Least-squares surface `z ≈ a0 + a1 x + a2 y + a3 x y` relating the trace of
/// a product system to the traces of its factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearFit {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub rms_residual: f64,
    pub max_residual: f64,
    pub n_samples: usize,
    pub condition_flag: bool,
}

impl BilinearFit {
    pub fn predict(&self, x: f64, y: f64) -> f64 {
        self.a0 + self.a1 * x + self.a2 * y + self.a3 * x * y
    }
}

/// Traces `(x, y, z) = (Σ f(p^A), Σ f(p^B), Σ f(p^A ⊗ p^B))` for the sampled pairs.
pub(crate) fn trace_triples(gen: &TraceGenerator, config: &FitConfig) -> Result<Vec<[f64; 3]>> {
    (0..config.n_samples as u64)
        .into_par_iter()
        .map(|k| {
            let (a, b) = sample_pair(config.seed, k, config.w_min, config.w_max)?;
            let ab = product(&a, &b);
            Ok([
                gen.trace(a.probs()),
                gen.trace(b.probs()),
                gen.trace(ab.probs()),
            ])
        })
        .collect()
}

/// Fits the bilinear law to sampled product-system traces of `gen`.
///
/// For a composable trace entropy the fit is exact: `a0 = 0`, `a1 = a2 = 1`
/// and `a3` is the multiplicative constant. Any nonzero residual means no
/// composition law of any shape exists for `gen`.
pub fn bilinear_fit(gen: &TraceGenerator, config: &FitConfig) -> Result<BilinearFit> {
    if config.n_samples < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_FIT_SAMPLES,
            got: config.n_samples,
        });
    }
    check_state_range(config.w_min, config.w_max)?;
    let triples = trace_triples(gen, config)?;
    let rows: Vec<[f64; 4]> = triples
        .iter()
        .map(|&[x, y, _]| [1.0, x, y, x * y])
        .collect();
    let rhs: Vec<f64> = triples.iter().map(|t| t[2]).collect();
    let sol = solve_least_squares(&rows, &rhs)?;
    let [a0, a1, a2, a3] = sol.coef;

    let mut fit = BilinearFit {
        a0,
        a1,
        a2,
        a3,
        rms_residual: 0.0,
        max_residual: 0.0,
        n_samples: config.n_samples,
        condition_flag: sol.ill_conditioned,
    };
    let residuals: Vec<f64> = triples
        .iter()
        .map(|&[x, y, z]| (z - fit.predict(x, y)).abs())
        .collect();
    fit.max_residual = residuals.iter().copied().fold(0.0, nan_max);
    fit.rms_residual =
        (pairwise_sum(residuals.iter().map(|r| r * r)) / residuals.len() as f64).sqrt();
    Ok(fit)
}
