//! The uniform-distribution functional equation `h(st) = h(s) + h(t) + α h(s) h(t)`
//! with `h(t) = f(t)/t`, sampled at `s = 1/W`, `t = 1/W'`.

use crate::catalog::TraceGenerator;
use crate::error::{Error, Result};
use crate::numeric::nan_max;

/// `(h(st) − h(s) − h(t), h(s) h(t))` for every `2 ≤ W, W' ≤ wmax`.
fn terms(f: &TraceGenerator, wmax: usize) -> Result<Vec<(f64, f64)>> {
    if wmax < 2 {
        return Err(Error::ParameterOutOfRange {
            name: "wmax",
            value: wmax as f64,
            reason: "must be at least 2",
        });
    }
    let h = |t: f64| f.value(t) / t;
    let mut out = Vec::with_capacity((wmax - 1) * (wmax - 1));
    for wa in 2..=wmax {
        for wb in 2..=wmax {
            let (s, t) = (1.0 / wa as f64, 1.0 / wb as f64);
            let st = 1.0 / (wa * wb) as f64;
            let (hs, ht) = (h(s), h(t));
            out.push((h(st) - hs - ht, hs * ht));
        }
    }
    Ok(out)
}

/// Largest violation of the functional equation over `2 ≤ W, W' ≤ wmax`.
pub fn uniform_law_residual(f: &TraceGenerator, alpha: f64, wmax: usize) -> Result<f64> {
    Ok(terms(f, wmax)?
        .into_iter()
        .map(|(lhs, prod)| (lhs - alpha * prod).abs())
        .fold(0.0, nan_max))
}

/// Least-squares `α` for the functional equation over the same grid.
pub fn best_uniform_alpha(f: &TraceGenerator, wmax: usize) -> Result<f64> {
    let t = terms(f, wmax)?;
    let num: f64 = t.iter().map(|(a, b)| a * b).sum();
    let den: f64 = t.iter().map(|(_, b)| b * b).sum();
    if den == 0.0 {
        return Err(Error::RankDeficient { rank: 0 });
    }
    Ok(num / den)
}
