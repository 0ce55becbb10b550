use std::fmt;
use std::sync::Arc;

use super::generator::{power_generator, TraceGenerator};
use crate::error::{Error, Result};
use crate::simplex::Distribution;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The outer map `g` of a non-trace entropy together with its inverse.
#[derive(Clone)]
pub enum Conjugation {
    /// `g(u) = ln(u) / (1 - alpha)`.
    Renyi { alpha: f64 },
    /// `g(u) = ln(u / scale)`.
    ScaledLog { scale: f64 },
    Custom {
        name: String,
        g: RealFn,
        g_inv: RealFn,
    },
}

impl Conjugation {
    pub fn custom<G, Gi>(name: &str, g: G, g_inv: Gi) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        Gi: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Conjugation::Custom {
            name: name.to_string(),
            g: Arc::new(g),
            g_inv: Arc::new(g_inv),
        }
    }

    pub fn g(&self, u: f64) -> Result<f64> {
        let out = match self {
            Conjugation::Renyi { alpha } => {
                log_domain(u)?;
                u.ln() / (1.0 - alpha)
            }
            Conjugation::ScaledLog { scale } => {
                log_domain(u)?;
                (u / scale).ln()
            }
            Conjugation::Custom { g, .. } => g(u),
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::DomainViolation(format!("g({u}) is not finite")))
        }
    }

    pub fn g_inv(&self, x: f64) -> f64 {
        match self {
            Conjugation::Renyi { alpha } => ((1.0 - alpha) * x).exp(),
            Conjugation::ScaledLog { scale } => scale * x.exp(),
            Conjugation::Custom { g_inv, .. } => g_inv(x),
        }
    }
}

fn log_domain(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!(
            "logarithmic g needs a positive argument, got {u}"
        )))
    }
}

impl fmt::Debug for Conjugation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conjugation::Renyi { alpha } => write!(f, "Renyi {{ alpha: {alpha} }}"),
            Conjugation::ScaledLog { scale } => write!(f, "ScaledLog {{ scale: {scale} }}"),
            Conjugation::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// `S(p) = g(Σ_i h(p_i))` with `h(0) = 0` and `g(h(1)) = 0`.
#[derive(Clone, Debug)]
pub struct NonTraceSpec {
    name: String,
    params: Vec<(&'static str, f64)>,
    h: TraceGenerator,
    conj: Conjugation,
    beta: f64,
}

/// `h(t) = a t + b t^q` with `β = a + b`.
#[derive(Clone, Debug)]
pub struct PowerH {
    pub h: TraceGenerator,
    pub beta: f64,
    /// Set for `0 < q < 1`, where `h` is not C¹ at the origin.
    pub below_regularity: bool,
}

/// Trace part of the composable non-trace family.
pub fn power_h(a: f64, b: f64, q: f64) -> Result<PowerH> {
    let h = power_generator(a, b, q)?;
    Ok(PowerH {
        beta: h.value(1.0),
        h,
        below_regularity: q < 1.0,
    })
}

/// Rényi entropy `ln(Σ p_i^α) / (1 - α)`.
pub fn renyi_spec(alpha: f64) -> Result<NonTraceSpec> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            reason: "must be positive and finite",
        });
    }
    if alpha == 1.0 {
        return Err(Error::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            reason: "alpha = 1 is the Boltzmann-Gibbs entropy",
        });
    }
    let h = power_generator(0.0, 1.0, alpha)?;
    Ok(NonTraceSpec {
        name: "renyi".into(),
        params: vec![("alpha", alpha)],
        beta: h.value(1.0),
        h,
        conj: Conjugation::Renyi { alpha },
    })
}

/// `ln(Σ_i h(p_i) / (a + b))` with `h(t) = a t + b t^q`; requires `a + b > 0`.
pub fn log_spec(a: f64, b: f64, q: f64) -> Result<NonTraceSpec> {
    let power = power_h(a, b, q)?;
    let scale = a + b;
    if !(scale > 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "a+b",
            value: scale,
            reason: "g(u) = ln(u/(a+b)) needs a + b > 0",
        });
    }
    Ok(NonTraceSpec {
        name: "logpow".into(),
        params: vec![("a", a), ("b", b), ("q", q)],
        h: power.h,
        beta: power.beta,
        conj: Conjugation::ScaledLog { scale },
    })
}

impl NonTraceSpec {
    /// Assembles a spec from parts; `beta` is taken as `h(1)`.
    pub fn new(name: &str, h: TraceGenerator, conj: Conjugation) -> Self {
        NonTraceSpec {
            name: name.to_string(),
            params: Vec::new(),
            beta: h.value(1.0),
            h,
            conj,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(&'static str, f64)] {
        &self.params
    }

    pub fn h(&self) -> &TraceGenerator {
        &self.h
    }

    pub fn conjugation(&self) -> &Conjugation {
        &self.conj
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Round-trip error and monotonicity of `g` over entropy values in `[lo, hi]`.
    pub fn conjugation_report(&self, lo: f64, hi: f64, points: usize) -> ConjugationReport {
        let points = points.max(2);
        let mut max_roundtrip: f64 = 0.0;
        let mut monotone = true;
        let mut prev: Option<f64> = None;
        let mut direction = 0.0;
        for k in 0..points {
            let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
            let u = self.conj.g_inv(x);
            match self.conj.g(u) {
                Ok(back) => max_roundtrip = max_roundtrip.max((back - x).abs()),
                Err(_) => max_roundtrip = f64::INFINITY,
            }
            // g is monotone on the image of g_inv iff g_inv is monotone here
            if let Some(p) = prev {
                let d = (u - p).signum();
                if d == 0.0 || (direction != 0.0 && d != direction) {
                    monotone = false;
                }
                direction = d;
            }
            prev = Some(u);
        }
        ConjugationReport {
            max_roundtrip,
            monotone,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugationReport {
    pub max_roundtrip: f64,
    pub monotone: bool,
}

/// `g(Σ_i h(p_i))`.
pub fn eval_nontrace(spec: &NonTraceSpec, p: &Distribution) -> Result<f64> {
    let u = spec.h.trace(p.probs());
    spec.conj.g(u)
}
