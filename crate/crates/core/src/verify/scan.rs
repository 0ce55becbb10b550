use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_state_range, sample_pair, SCAN_TOL};
use crate::catalog::Entropy;
use crate::composition::{BinaryLaw, CompositionLaw};
use crate::error::{Error, Result};
use crate::numeric::{nan_max, pairwise_sum};
use crate::simplex::{product, uniform, Distribution};

/// `|S(A × B) - Φ(S(A), S(B))|`.
pub fn composability_residual<L: BinaryLaw + ?Sized>(
    entropy: &Entropy,
    law: &L,
    a: &Distribution,
    b: &Distribution,
) -> Result<f64> {
    let joint = entropy.eval(&product(a, b))?;
    let composed = law.compose(entropy.eval(a)?, entropy.eval(b)?)?;
    Ok((joint - composed).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub n_pairs: usize,
    pub w_min: usize,
    pub w_max: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            n_pairs: 1000,
            w_min: 2,
            w_max: 8,
            seed: 42,
            tolerance: SCAN_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    #[serde(rename = "entropy")]
    pub entropy_id: String,
    pub params: BTreeMap<String, f64>,
    #[serde(rename = "law")]
    pub law_id: String,
    pub seed: u64,
    pub n_pairs: usize,
    pub w_min: usize,
    pub w_max: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    #[serde(rename = "worst_pA")]
    pub worst_a: Vec<f64>,
    #[serde(rename = "worst_pB")]
    pub worst_b: Vec<f64>,
    pub pass: bool,
    pub tolerance: f64,
    /// Pairs where one factor has a single state; included in the totals above.
    pub single_state_pairs: usize,
    pub single_state_max_residual: f64,
}

/// Residuals over `n_pairs` stratified pairs with state counts in `[w_min, w_max]`.
///
/// A pair whose residual cannot be evaluated (domain violation) counts as an
/// infinite residual. Pairs are evaluated in parallel and aggregated in index
/// order, so the report does not depend on the thread count.
pub fn composability_scan(
    entropy: &Entropy,
    law: &CompositionLaw,
    config: &ScanConfig,
) -> Result<ScanReport> {
    if config.n_pairs == 0 {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    check_state_range(config.w_min, config.w_max)?;
    if !(config.tolerance > 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "tolerance",
            value: config.tolerance,
            reason: "must be positive",
        });
    }

    let rows: Vec<(f64, bool)> = (0..config.n_pairs as u64)
        .into_par_iter()
        .map(|k| {
            let (a, b) = sample_pair(config.seed, k, config.w_min, config.w_max)?;
            let r = composability_residual(entropy, law, &a, &b).unwrap_or(f64::INFINITY);
            Ok((r, a.states() == 1 || b.states() == 1))
        })
        .collect::<Result<_>>()?;

    let mut max_residual: f64 = 0.0;
    let mut worst = 0usize;
    let mut single_max = 0.0;
    let mut single_count = 0;
    for (k, &(r, single)) in rows.iter().enumerate() {
        let next = nan_max(max_residual, r);
        if !max_residual.is_nan() && (next.is_nan() || next > max_residual) {
            worst = k;
        }
        max_residual = next;
        if single {
            single_count += 1;
            single_max = nan_max(single_max, r);
        }
    }
    let mean_residual = pairwise_sum(rows.iter().map(|&(r, _)| r)) / rows.len() as f64;
    let (worst_a, worst_b) = sample_pair(config.seed, worst as u64, config.w_min, config.w_max)?;

    Ok(ScanReport {
        entropy_id: entropy.id(),
        params: entropy
            .params()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        law_id: law.id(),
        seed: config.seed,
        n_pairs: config.n_pairs,
        w_min: config.w_min,
        w_max: config.w_max,
        max_residual,
        mean_residual,
        worst_a: worst_a.probs().to_vec(),
        worst_b: worst_b.probs().to_vec(),
        pass: max_residual <= config.tolerance,
        tolerance: config.tolerance,
        single_state_pairs: single_count,
        single_state_max_residual: single_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakReport {
    pub w_max: usize,
    pub max_residual: f64,
    pub worst_w: (usize, usize),
}

/// Composability restricted to uniform factors with `1 ≤ W, W' ≤ w_max`.
pub fn weak_composability_check<L: BinaryLaw + ?Sized>(
    entropy: &Entropy,
    law: &L,
    w_max: usize,
) -> Result<WeakReport> {
    if w_max < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "w_max",
            value: w_max as f64,
            reason: "must be at least 2",
        });
    }
    let mut report = WeakReport {
        w_max,
        max_residual: 0.0,
        worst_w: (1, 1),
    };
    for wa in 1..=w_max {
        for wb in 1..=w_max {
            let r = composability_residual(entropy, law, &uniform(wa)?, &uniform(wb)?)?;
            if r > report.max_residual || r.is_nan() {
                report.max_residual = nan_max(report.max_residual, r);
                report.worst_w = (wa, wb);
            }
        }
    }
    Ok(report)
}
