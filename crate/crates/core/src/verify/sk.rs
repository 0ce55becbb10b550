use rayon::prelude::*;
use serde::Serialize;

use super::check_state_range;
use crate::catalog::Entropy;
use crate::error::Result;
use crate::numeric::nan_max;
use crate::simplex::{expand_zero, sample, uniform, Strategy};

/// Allowed excess of `S(p)` over `S(uniform(W))` before SK3 counts a violation.
pub const SK3_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkReport {
    /// Total samples, `n_samples` for each state count in the range.
    pub n_samples: usize,
    /// `max |S(p, 0) − S(p)|`.
    pub sk2_max_residual: f64,
    /// Samples with `S(p) > S(uniform(W)) + SK3_SLACK`.
    pub sk3_violations: usize,
    /// Largest `S(p) − S(uniform(W))` seen; `≤ 0` when uniform is the maximum.
    pub sk3_max_excess: f64,
}

/// Expansibility and uniform maximality over `n_samples` stratified draws per
/// state count in `w_min..=w_max`.
///
/// A sample whose entropy cannot be evaluated counts as an SK3 violation and
/// an infinite SK2 residual.
pub fn sk_checks(
    entropy: &Entropy,
    n_samples: usize,
    w_min: usize,
    w_max: usize,
    seed: u64,
) -> Result<SkReport> {
    check_state_range(w_min, w_max)?;
    let mut report = SkReport {
        n_samples: 0,
        sk2_max_residual: 0.0,
        sk3_violations: 0,
        sk3_max_excess: f64::NEG_INFINITY,
    };
    for w in w_min..=w_max {
        let top = entropy.eval(&uniform(w)?)?;
        let rows: Vec<(f64, f64)> = (0..n_samples as u64)
            .into_par_iter()
            .map(|k| {
                let p = if w == 1 {
                    uniform(1)?
                } else {
                    sample(w, seed, Strategy::Stratified, k)?
                };
                Ok(match (entropy.eval(&p), entropy.eval(&expand_zero(&p))) {
                    (Ok(s), Ok(s0)) => ((s0 - s).abs(), s - top),
                    _ => (f64::INFINITY, f64::INFINITY),
                })
            })
            .collect::<Result<_>>()?;
        for (sk2, excess) in rows {
            report.sk2_max_residual = nan_max(report.sk2_max_residual, sk2);
            report.sk3_max_excess = nan_max(report.sk3_max_excess, excess);
            if !(excess <= SK3_SLACK) {
                report.sk3_violations += 1;
            }
        }
        report.n_samples += n_samples;
    }
    Ok(report)
}
