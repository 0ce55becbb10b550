//! Numerical checks of composability.
//!
//! Every randomized check draws its `k`-th pair of distributions from
//! [`sample_pair`], a pure function of `(seed, k, state range)`, so results
//! are reproducible bit for bit and independent of thread scheduling.

mod fit;
mod lstsq;
mod scan;
mod sk;
mod uniform;
mod variational;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub use fit::{bilinear_fit, BilinearFit, FitConfig};
pub use lstsq::{solve_least_squares, LeastSquares, CONDITION_TOL};
pub use scan::{
    composability_residual, composability_scan, weak_composability_check, ScanConfig, ScanReport,
    WeakReport,
};
pub use sk::{sk_checks, SkReport, SK3_SLACK};
pub use uniform::{best_uniform_alpha, uniform_law_residual};
pub use variational::{
    first_variation_residual, ode_constant_residual, q_recovery, second_variation_residual,
    DerivativeMode, OdeResidual, VariationalCheck,
};

use crate::error::{Error, Result};
use crate::simplex::{sample, uniform, Distribution, Strategy};

/// Composability scans: rounding over at most a few hundred pairwise-summed terms.
pub const SCAN_TOL: f64 = 1e-10;
/// Closed-form identities evaluated once.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Residual tolerance when derivatives come from finite differences.
pub const FD_TOL: f64 = 1e-5;
/// Minimum number of sampled pairs for the bilinear fit.
pub const MIN_FIT_SAMPLES: usize = 20;
/// Smallest state count used by default when sampling fit data.
pub const FIT_MIN_STATES: usize = 4;

const PAIR_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// State counts and distributions of the `k`-th sampled pair.
///
/// State counts are drawn uniformly from `w_min..=w_max`; the two factors use
/// stratified sample indices `2k` and `2k + 1`. A single-state factor is the
/// point distribution `(1)`.
pub fn sample_pair(
    seed: u64,
    k: u64,
    w_min: usize,
    w_max: usize,
) -> Result<(Distribution, Distribution)> {
    check_state_range(w_min, w_max)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ PAIR_SALT);
    rng.set_stream(k);
    let wa = rng.random_range(w_min..=w_max);
    let wb = rng.random_range(w_min..=w_max);
    let draw = |w: usize, index: u64| {
        if w == 1 {
            uniform(1)
        } else {
            sample(w, seed, Strategy::Stratified, index)
        }
    };
    Ok((draw(wa, 2 * k)?, draw(wb, 2 * k + 1)?))
}

pub(crate) fn check_state_range(w_min: usize, w_max: usize) -> Result<()> {
    if w_min == 0 || w_max < w_min {
        return Err(Error::ParameterOutOfRange {
            name: "w_max",
            value: w_max as f64,
            reason: "state range needs 1 <= w_min <= w_max",
        });
    }
    Ok(())
}
