//! Differential consequences of composability.
//!
//! Perturbing one factor of a composable pair along a straight simplex curve
//! and differentiating yields identities between derivatives of the
//! generator. Their residuals vanish for composable `(f, α)` pairs and are
//! generically nonzero otherwise.
//!
//! Indices `l` and `m` are zero-based and must be below `W - 1` and `W' - 1`;
//! the last state of each factor plays the role of the balancing coordinate.

use serde::Serialize;

use crate::catalog::TraceGenerator;
use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::simplex::{Distribution, INTERIOR_MARGIN};

/// Relative step of the centered first difference.
pub const FD_STEP: f64 = 1e-5;
/// Relative step of the centered second difference (rounding balance sits near ε^¼).
pub const FD_STEP_SECOND: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    #[default]
    Analytic,
    /// Replaces `f'` and `f''` by centered differences of `f`.
    FiniteDifference,
}

/// Residuals of the first- and second-variation identities for one `(f, α, β)`.
///
/// `β` is `h(1)` for the trace part of a non-trace entropy and 0 for trace
/// entropies; it only enters the first-variation identity.
#[derive(Debug, Clone)]
pub struct VariationalCheck<'a> {
    gen: &'a TraceGenerator,
    alpha: f64,
    beta: f64,
    mode: DerivativeMode,
}

impl<'a> VariationalCheck<'a> {
    pub fn new(gen: &'a TraceGenerator, alpha: f64) -> Self {
        VariationalCheck {
            gen,
            alpha,
            beta: 0.0,
            mode: DerivativeMode::Analytic,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    fn d1(&self, t: f64) -> f64 {
        match self.mode {
            DerivativeMode::Analytic => self.gen.first(t),
            DerivativeMode::FiniteDifference => {
                let h = FD_STEP * t;
                (self.gen.value(t + h) - self.gen.value(t - h)) / (2.0 * h)
            }
        }
    }

    /// `t f''(t)`
    fn td2(&self, t: f64) -> f64 {
        match self.mode {
            DerivativeMode::Analytic => self.gen.t_second(t),
            DerivativeMode::FiniteDifference => {
                let h = FD_STEP_SECOND * t;
                let f = |x: f64| self.gen.value(x);
                t * (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
            }
        }
    }

    fn check_inputs(&self, a: &Distribution, b: &Distribution) -> Result<()> {
        if a.states() < 2 || b.states() < 2 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                len: a.states().min(b.states()) - 1,
            });
        }
        let needs_interior =
            !self.gen.smooth_at_zero() || self.mode == DerivativeMode::FiniteDifference;
        if needs_interior {
            let low = a.min_entry().min(b.min_entry());
            if low < INTERIOR_MARGIN {
                return Err(Error::SingularDerivative { t: low });
            }
        }
        Ok(())
    }

    /// `| Σ_j p_j^B [f'(p_l^A p_j^B) − f'(p_W^A p_j^B)]
    ///    − (1 − αβ + α Σ_j f(p_j^B)) [f'(p_l^A) − f'(p_W^A)] |`
    pub fn first_variation(&self, a: &Distribution, b: &Distribution, l: usize) -> Result<f64> {
        self.check_inputs(a, b)?;
        let (pa, pb) = (a.probs(), b.probs());
        let last = pa.len() - 1;
        if l >= last {
            return Err(Error::IndexOutOfRange {
                index: l,
                len: last,
            });
        }
        let (pl, pw) = (pa[l], pa[last]);
        let lhs = pairwise_sum(pb.iter().map(|&q| q * (self.d1(pl * q) - self.d1(pw * q))));
        let factor = 1.0 - self.alpha * self.beta + self.alpha * self.gen.trace(pb);
        let rhs = factor * (self.d1(pl) - self.d1(pw));
        finite((lhs - rhs).abs(), pl.min(pw))
    }

    /// Mixed second variation: the alternating four-point sum of
    /// `f'(t) + t f''(t)` over `{p_l^A, p_W^A} × {p_m^B, p_W'^B}` minus
    /// `α [f'(p_m^B) − f'(p_W'^B)] [f'(p_l^A) − f'(p_W^A)]`.
    pub fn second_variation(
        &self,
        a: &Distribution,
        b: &Distribution,
        l: usize,
        m: usize,
    ) -> Result<f64> {
        self.check_inputs(a, b)?;
        let (pa, pb) = (a.probs(), b.probs());
        let (last_a, last_b) = (pa.len() - 1, pb.len() - 1);
        if l >= last_a {
            return Err(Error::IndexOutOfRange {
                index: l,
                len: last_a,
            });
        }
        if m >= last_b {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: last_b,
            });
        }
        let (pl, pw) = (pa[l], pa[last_a]);
        let (qm, qw) = (pb[m], pb[last_b]);
        let g = |t: f64| self.d1(t) + self.td2(t);
        let lhs = pairwise_sum([g(pl * qm), -g(pl * qw), -g(pw * qm), g(pw * qw)]);
        let rhs = self.alpha * (self.d1(qm) - self.d1(qw)) * (self.d1(pl) - self.d1(pw));
        finite((lhs - rhs).abs(), pl.min(pw).min(qm).min(qw))
    }
}

fn finite(residual: f64, t: f64) -> Result<f64> {
    if residual.is_nan() || residual.is_infinite() {
        Err(Error::SingularDerivative { t })
    } else {
        Ok(residual)
    }
}

/// First-variation residual of a trace generator with composition constant `alpha`.
pub fn first_variation_residual(
    f: &TraceGenerator,
    alpha: f64,
    a: &Distribution,
    b: &Distribution,
    l: usize,
) -> Result<f64> {
    VariationalCheck::new(f, alpha).first_variation(a, b, l)
}

/// Second-variation residual of a trace generator with composition constant `alpha`.
pub fn second_variation_residual(
    f: &TraceGenerator,
    alpha: f64,
    a: &Distribution,
    b: &Distribution,
    l: usize,
    m: usize,
) -> Result<f64> {
    VariationalCheck::new(f, alpha).second_variation(a, b, l, m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeResidual {
    /// `t f''(t) + (1 − q) f'(t)` at each grid point.
    pub values: Vec<f64>,
    /// `max − min` of `values`; 0 exactly when the expression is constant.
    pub spread: f64,
}

/// Evaluates `t f''(t) + (1 − q) f'(t)` on `grid ⊂ (0, 1)`.
///
/// For `f = c (t − t^q)/(q − 1)` the expression is the constant `−c`.
pub fn ode_constant_residual(f: &TraceGenerator, q: f64, grid: &[f64]) -> Result<OdeResidual> {
    if grid.is_empty() {
        return Err(Error::EmptyInput);
    }
    let values = grid
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::DomainViolation(format!(
                    "grid point {t} outside (0, 1)"
                )));
            }
            let r = f.t_second(t) + (1.0 - q) * f.first(t);
            if r.is_finite() {
                Ok(r)
            } else {
                Err(Error::SingularDerivative { t })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OdeResidual {
        values,
        spread: max - min,
    })
}

/// `α (f'(1) − f'(0))`, which recovers the Tsallis index from the composition constant.
pub fn q_recovery(f: &TraceGenerator, alpha: f64) -> Result<f64> {
    if !f.smooth_at_zero() {
        return Err(Error::SingularDerivative { t: 0.0 });
    }
    Ok(alpha * (f.first(1.0) - f.first(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{bg_generator, power_h, tsallis_generator, two_power_generator};
    use crate::composition::tsallis_alpha;
    use crate::simplex::{sample_interior, uniform};

    fn dist(p: &[f64]) -> Distribution {
        Distribution::validate(p, false).unwrap()
    }

    #[test]
    fn first_variation_hand_example() {
        // f'(t) = 1 - 2t: both sides equal -0.312
        let f = tsallis_generator(2.0, 1.0).unwrap();
        let a = dist(&[0.5, 0.3, 0.2]);
        let b = dist(&[0.6, 0.4]);
        let r = first_variation_residual(&f, -1.0, &a, &b, 0).unwrap();
        assert!(r <= 1e-15, "{r}");
    }

    #[test]
    fn symmetric_entries_vanish() {
        let f = two_power_generator(0.5, 1.5).unwrap();
        let a = dist(&[0.3, 0.4, 0.3]);
        let b = dist(&[0.25, 0.35, 0.4]);
        assert_eq!(first_variation_residual(&f, 0.37, &a, &b, 0).unwrap(), 0.0);
        for m in 0..2 {
            assert_eq!(
                second_variation_residual(&f, 0.37, &a, &b, 0, m).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn two_power_first_variation_is_positive() {
        let f = two_power_generator(0.5, 1.5).unwrap();
        let a = sample_interior(4, 5, 0, INTERIOR_MARGIN).unwrap();
        let b = sample_interior(3, 5, 1, INTERIOR_MARGIN).unwrap();
        let worst = (0..3)
            .map(|l| first_variation_residual(&f, -0.5, &a, &b, l).unwrap())
            .fold(0.0, f64::max);
        assert!(worst > 1e-6, "{worst}");
    }

    #[test]
    fn second_variation_for_tsallis_and_bg() {
        for (q, c) in [(2.0, 1.0), (3.0, 1.0), (3.0, 2.0)] {
            let f = tsallis_generator(q, c).unwrap();
            let alpha = tsallis_alpha(q, c).unwrap();
            for k in 0..20 {
                let a = sample_interior(4, 11, 2 * k, INTERIOR_MARGIN).unwrap();
                let b = sample_interior(3, 11, 2 * k + 1, INTERIOR_MARGIN).unwrap();
                for l in 0..3 {
                    for m in 0..2 {
                        let r = second_variation_residual(&f, alpha, &a, &b, l, m).unwrap();
                        assert!(r <= 1e-12, "q={q} c={c}: {r}");
                    }
                }
            }
        }
        let bg = bg_generator(1.0).unwrap();
        let a = sample_interior(4, 1, 0, INTERIOR_MARGIN).unwrap();
        let b = sample_interior(3, 1, 1, INTERIOR_MARGIN).unwrap();
        assert!(second_variation_residual(&bg, 0.0, &a, &b, 2, 1).unwrap() <= 1e-12);
    }

    #[test]
    fn power_trace_identities_with_beta() {
        let p = power_h(0.5, 0.5, 2.0).unwrap();
        let check = VariationalCheck::new(&p.h, 2.0).with_beta(p.beta);
        let a = sample_interior(4, 3, 0, INTERIOR_MARGIN).unwrap();
        let b = sample_interior(3, 3, 1, INTERIOR_MARGIN).unwrap();
        for l in 0..3 {
            assert!(check.first_variation(&a, &b, l).unwrap() <= 1e-12);
            for m in 0..2 {
                assert!(check.second_variation(&a, &b, l, m).unwrap() <= 1e-12);
            }
        }
        // without the β shift the first identity breaks
        let unshifted = VariationalCheck::new(&p.h, 2.0);
        assert!(unshifted.first_variation(&a, &b, 0).unwrap() > 1e-3);
    }

    #[test]
    fn finite_difference_mode_agrees() {
        let f = tsallis_generator(2.5, 1.0).unwrap();
        let alpha = tsallis_alpha(2.5, 1.0).unwrap();
        let check = VariationalCheck::new(&f, alpha).with_mode(DerivativeMode::FiniteDifference);
        for k in 0..10 {
            let a = sample_interior(4, 21, 2 * k, 0.02).unwrap();
            let b = sample_interior(3, 21, 2 * k + 1, 0.02).unwrap();
            assert!(check.first_variation(&a, &b, 1).unwrap() <= 1e-5);
            assert!(check.second_variation(&a, &b, 1, 0).unwrap() <= 1e-5);
        }
    }

    #[test]
    fn index_and_domain_errors() {
        let f = tsallis_generator(2.0, 1.0).unwrap();
        let a = uniform(3).unwrap();
        let b = uniform(2).unwrap();
        assert!(matches!(
            first_variation_residual(&f, -1.0, &a, &b, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            second_variation_residual(&f, -1.0, &a, &b, 0, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
        let bg = bg_generator(1.0).unwrap();
        let edge = dist(&[0.0, 0.5, 0.5]);
        assert!(matches!(
            first_variation_residual(&bg, 0.0, &edge, &b, 0),
            Err(Error::SingularDerivative { .. })
        ));
        // smooth generators accept boundary points
        let smooth = tsallis_generator(3.0, 1.0).unwrap();
        let r = second_variation_residual(&smooth, -2.0, &edge, &b, 0, 0).unwrap();
        assert!(r <= 1e-12);
    }

    #[test]
    fn ode_examples() {
        let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let r = ode_constant_residual(&tsallis_generator(2.0, 1.0).unwrap(), 2.0, &grid).unwrap();
        assert!(r.spread <= 1e-12);
        assert!(r.values.iter().all(|v| (v + 1.0).abs() <= 1e-12));
        let r = ode_constant_residual(&tsallis_generator(3.0, 2.0).unwrap(), 3.0, &grid).unwrap();
        assert!(r.values.iter().all(|v| (v + 2.0).abs() <= 1e-12));
        let tp = two_power_generator(0.5, 1.5).unwrap();
        for q in [0.5, 1.0, 1.5, 2.0, 3.0] {
            assert!(ode_constant_residual(&tp, q, &grid).unwrap().spread > 0.01);
        }
        assert!(ode_constant_residual(&tp, 2.0, &[0.0]).is_err());
        assert!(ode_constant_residual(&tp, 2.0, &[]).is_err());
    }

    #[test]
    fn q_recovery_examples() {
        let f = tsallis_generator(2.0, 1.0).unwrap();
        assert!((q_recovery(&f, -1.0).unwrap() - 2.0).abs() <= 1e-15);
        let f = tsallis_generator(3.0, 1.0).unwrap();
        assert!((q_recovery(&f, -2.0).unwrap() - 3.0).abs() <= 1e-15);
        let f = tsallis_generator(0.5, 1.0).unwrap();
        assert_eq!(
            q_recovery(&f, 0.5),
            Err(Error::SingularDerivative { t: 0.0 })
        );
    }
}
