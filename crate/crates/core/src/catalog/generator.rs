use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::simplex::Distribution;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A one-variable generator `f` on `[0, 1]` together with its first two derivatives.
///
/// Used both as the `f` of a trace-form entropy `Σ f(p_i)` and as the trace
/// part `h` of a non-trace entropy `g(Σ h(p_i))`. For the latter `f(1)` is
/// `β = h(1)` and need not vanish.
#[derive(Clone)]
pub struct TraceGenerator {
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Tsallis {
        q: f64,
        c: f64,
    },
    BoltzmannGibbs {
        c: f64,
    },
    TwoPower {
        q1: f64,
        q2: f64,
    },
    /// `a t + b t^q`
    Power {
        a: f64,
        b: f64,
        q: f64,
    },
    Custom(Arc<Custom>),
}

struct Custom {
    name: String,
    f: RealFn,
    df: RealFn,
    d2f: RealFn,
    smooth_at_zero: bool,
}

fn out_of_range(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::ParameterOutOfRange {
        name,
        value,
        reason,
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(out_of_range(name, value, "must be positive and finite"))
    }
}

/// Tsallis generator `f(t) = c (t - t^q) / (q - 1)`, for `q > 0`, `q != 1`, `c > 0`.
///
/// `q = 1` is rejected; use [`bg_generator`] for the Boltzmann–Gibbs limit.
pub fn tsallis_generator(q: f64, c: f64) -> Result<TraceGenerator> {
    positive("q", q)?;
    positive("c", c)?;
    if q == 1.0 {
        return Err(out_of_range(
            "q",
            q,
            "q = 1 is the Boltzmann-Gibbs generator",
        ));
    }
    Ok(TraceGenerator {
        kind: Kind::Tsallis { q, c },
    })
}

/// Boltzmann–Gibbs generator `f(t) = c t ln(1/t)` with `0 ln 0 = 0`.
pub fn bg_generator(c: f64) -> Result<TraceGenerator> {
    positive("c", c)?;
    Ok(TraceGenerator {
        kind: Kind::BoltzmannGibbs { c },
    })
}

/// `f(t) = (t^q1 - t^q2) / (q2 - q1)` with `0 < q1 < q2` and `q1 != 1`.
///
/// Vanishes at both endpoints but lacks the linear term of the Tsallis
/// shape, so no composition law reproduces it on product systems.
pub fn two_power_generator(q1: f64, q2: f64) -> Result<TraceGenerator> {
    positive("q1", q1)?;
    positive("q2", q2)?;
    if q2 <= q1 {
        return Err(out_of_range("q2", q2, "must exceed q1"));
    }
    if q1 == 1.0 {
        return Err(out_of_range("q1", q1, "q1 = 1 is the Tsallis family"));
    }
    Ok(TraceGenerator {
        kind: Kind::TwoPower { q1, q2 },
    })
}

/// `h(t) = a t + b t^q` without the regularity checks of
/// [`power_h`](super::power_h); `q > 0`, `q != 1`, `b != 0` still required.
pub(crate) fn power_generator(a: f64, b: f64, q: f64) -> Result<TraceGenerator> {
    positive("q", q)?;
    if !a.is_finite() {
        return Err(out_of_range("a", a, "must be finite"));
    }
    if !b.is_finite() {
        return Err(out_of_range("b", b, "must be finite"));
    }
    if b == 0.0 || q == 1.0 {
        return Err(Error::DegenerateH);
    }
    Ok(TraceGenerator {
        kind: Kind::Power { a, b, q },
    })
}

impl TraceGenerator {
    /// A generator from arbitrary closures, mainly for controls and experiments.
    pub fn custom<F, D, D2>(name: &str, f: F, df: D, d2f: D2, smooth_at_zero: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TraceGenerator {
            kind: Kind::Custom(Arc::new(Custom {
                name: name.to_string(),
                f: Arc::new(f),
                df: Arc::new(df),
                d2f: Arc::new(d2f),
                smooth_at_zero,
            })),
        }
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            Kind::Tsallis { .. } => "tsallis",
            Kind::BoltzmannGibbs { .. } => "bg",
            Kind::TwoPower { .. } => "twopower",
            Kind::Power { .. } => "power",
            Kind::Custom(c) => &c.name,
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.kind {
            Kind::Tsallis { q, c } => vec![("q", q), ("c", c)],
            Kind::BoltzmannGibbs { c } => vec![("c", c)],
            Kind::TwoPower { q1, q2 } => vec![("q1", q1), ("q2", q2)],
            Kind::Power { a, b, q } => vec![("a", a), ("b", b), ("q", q)],
            Kind::Custom(_) => Vec::new(),
        }
    }

    /// Whether `f'(0)` is finite.
    pub fn smooth_at_zero(&self) -> bool {
        match &self.kind {
            Kind::Tsallis { q, .. } => *q > 1.0,
            Kind::BoltzmannGibbs { .. } => false,
            Kind::TwoPower { q1, .. } => *q1 > 1.0,
            Kind::Power { q, .. } => *q > 1.0,
            Kind::Custom(c) => c.smooth_at_zero,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return match &self.kind {
                Kind::Custom(c) => (c.f)(0.0),
                _ => 0.0,
            };
        }
        match &self.kind {
            // t - t^q = -t * expm1((q-1) ln t), which stays accurate as q -> 1
            Kind::Tsallis { q, c } => -c * t * ((q - 1.0) * t.ln()).exp_m1() / (q - 1.0),
            Kind::BoltzmannGibbs { c } => -c * t * t.ln(),
            Kind::TwoPower { q1, q2 } => (t.powf(*q1) - t.powf(*q2)) / (q2 - q1),
            Kind::Power { a, b, q } => a * t + b * t.powf(*q),
            Kind::Custom(c) => (c.f)(t),
        }
    }

    /// First derivative; `+inf`/`-inf` at 0 when the generator is not smooth there.
    pub fn first(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Tsallis { q, c } => {
                if t == 0.0 {
                    if *q > 1.0 {
                        c / (q - 1.0)
                    } else {
                        f64::INFINITY
                    }
                } else {
                    // (1 - q x)/(q-1) = (1 - x)/(q-1) - x with x = t^(q-1)
                    let k = q - 1.0;
                    let lt = t.ln();
                    c * (-(k * lt).exp_m1() / k - (k * lt).exp())
                }
            }
            Kind::BoltzmannGibbs { c } => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    c * (-t.ln() - 1.0)
                }
            }
            Kind::TwoPower { q1, q2 } => {
                if t == 0.0 {
                    if *q1 > 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (q1 * t.powf(q1 - 1.0) - q2 * t.powf(q2 - 1.0)) / (q2 - q1)
                }
            }
            Kind::Power { a, b, q } => {
                if t == 0.0 {
                    if *q > 1.0 {
                        *a
                    } else {
                        b.signum() * f64::INFINITY
                    }
                } else {
                    a + b * q * t.powf(q - 1.0)
                }
            }
            Kind::Custom(c) => (c.df)(t),
        }
    }

    pub fn second(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Tsallis { q, c } => -c * q * t.powf(q - 2.0),
            Kind::BoltzmannGibbs { c } => -c / t,
            Kind::TwoPower { q1, q2 } => {
                (q1 * (q1 - 1.0) * t.powf(q1 - 2.0) - q2 * (q2 - 1.0) * t.powf(q2 - 2.0))
                    / (q2 - q1)
            }
            Kind::Power { b, q, .. } => b * q * (q - 1.0) * t.powf(q - 2.0),
            Kind::Custom(c) => (c.d2f)(t),
        }
    }

    /// `t f''(t)`, continued by 0 at the origin for generators smooth there.
    pub fn t_second(&self, t: f64) -> f64 {
        if t == 0.0 && self.smooth_at_zero() {
            0.0
        } else {
            t * self.second(t)
        }
    }

    /// `Σ_i f(p_i)` over the nonzero entries, in pairwise order.
    pub fn trace(&self, probs: &[f64]) -> f64 {
        pairwise_sum(probs.iter().filter(|&&p| p != 0.0).map(|&p| self.value(p)))
    }
}

impl fmt::Debug for TraceGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("TraceGenerator");
        d.field("name", &self.name());
        for (k, v) in self.params() {
            d.field(k, &v);
        }
        d.finish()
    }
}

/// `Σ_i f(p_i)`, with zero entries contributing exactly 0.
pub fn eval_trace(gen: &TraceGenerator, p: &Distribution) -> f64 {
    gen.trace(p.probs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{delta, uniform};
    use approx::assert_abs_diff_eq;

    #[test]
    fn tsallis_values() {
        let f = tsallis_generator(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(f.value(0.5), 0.25, epsilon = 1e-16);
        assert_eq!(f.value(0.0), 0.0);
        assert_eq!(f.value(1.0), 0.0);
        // 1 - Σ p^2
        assert_abs_diff_eq!(eval_trace(&f, &uniform(2).unwrap()), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_trace(&f, &uniform(4).unwrap()), 0.75, epsilon = 1e-15);
        assert!(f.smooth_at_zero());
        assert_eq!(f.first(0.0), 1.0);
        assert_abs_diff_eq!(f.first(1.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tsallis_rejects_bad_parameters() {
        assert!(tsallis_generator(1.0, 1.0).is_err());
        assert!(tsallis_generator(0.0, 1.0).is_err());
        assert!(tsallis_generator(-2.0, 1.0).is_err());
        assert!(tsallis_generator(2.0, 0.0).is_err());
        assert!(tsallis_generator(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn tsallis_near_one_matches_bg() {
        for q in [1.0 + 1e-8, 1.0 - 1e-8] {
            let f = tsallis_generator(q, 1.0).unwrap();
            for k in 1..=9 {
                let t = k as f64 / 10.0;
                assert_abs_diff_eq!(f.value(t), t * (1.0 / t).ln(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn bg_values() {
        let f = bg_generator(1.0).unwrap();
        assert_eq!(f.value(1.0), 0.0);
        assert_eq!(f.value(0.0), 0.0);
        assert!(!f.smooth_at_zero());
        assert_abs_diff_eq!(
            eval_trace(&f, &uniform(2).unwrap()),
            2f64.ln(),
            epsilon = 1e-15
        );
        let f3 = bg_generator(3.0).unwrap();
        for w in 1..=9 {
            assert_abs_diff_eq!(
                eval_trace(&f3, &uniform(w).unwrap()),
                3.0 * (w as f64).ln(),
                epsilon = 1e-14
            );
        }
        assert!(bg_generator(-1.0).is_err());
    }

    #[test]
    fn two_power_values() {
        let f = two_power_generator(0.5, 1.5).unwrap();
        assert_abs_diff_eq!(f.value(0.25), 0.375, epsilon = 1e-16);
        for (q1, q2) in [(0.5, 1.5), (0.7, 1.3), (1.2, 4.0)] {
            assert_eq!(two_power_generator(q1, q2).unwrap().value(1.0), 0.0);
        }
        assert!(two_power_generator(1.0, 2.0).is_err());
        assert!(two_power_generator(2.0, 1.5).is_err());
        assert!(!f.smooth_at_zero());
        assert!(two_power_generator(1.5, 2.5).unwrap().smooth_at_zero());
    }

    #[test]
    fn delta_gives_zero_for_every_generator() {
        let gens = [
            tsallis_generator(0.5, 2.0).unwrap(),
            tsallis_generator(3.0, 1.0).unwrap(),
            bg_generator(1.0).unwrap(),
            two_power_generator(0.5, 1.5).unwrap(),
        ];
        for g in &gens {
            for w in 1..6 {
                assert_eq!(eval_trace(g, &delta(w, 0).unwrap()), 0.0);
            }
        }
    }

    #[test]
    fn derivative_endpoints() {
        let f = tsallis_generator(0.5, 1.0).unwrap();
        assert_eq!(f.first(0.0), f64::INFINITY);
        assert!(f.t_second(0.0).is_nan());
        let g = tsallis_generator(1.5, 1.0).unwrap();
        assert_eq!(g.t_second(0.0), 0.0);
        assert_abs_diff_eq!(g.first(0.0), 2.0, epsilon = 1e-15);
    }
}
