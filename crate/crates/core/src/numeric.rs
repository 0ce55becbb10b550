//! Summation and small numeric helpers shared by every module.

/// Sums `terms` so that the result depends only on the multiset of nonzero terms.
///
/// Exact zeros are dropped, the rest are sorted by `f64::total_cmp` and
/// added with a balanced binary tree. Permuting the input or padding it with
/// zeros therefore yields a bit-identical result.
pub fn pairwise_sum<I>(terms: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut buf: Vec<f64> = terms.into_iter().filter(|&x| x != 0.0).collect();
    buf.sort_by(f64::total_cmp);
    tree_sum(&buf)
}

fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            tree_sum(lo) + tree_sum(hi)
        }
    }
}

/// Maximum that propagates NaN, so a single undefined residual poisons the aggregate.
pub(crate) fn nan_max(acc: f64, x: f64) -> f64 {
    if acc.is_nan() || x.is_nan() {
        f64::NAN
    } else {
        acc.max(x)
    }
}
