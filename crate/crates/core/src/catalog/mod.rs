//! Catalog of trace-form and non-trace-form entropies.
//!
//! Identifiers accepted by [`Entropy::parse`]:
//!
//! | id | entropy |
//! |----|---------|
//! | `bg` or `bg:c=<r>` | `c Σ p ln(1/p)` |
//! | `tsallis:q=<r>,c=<r>` | `c Σ (p - p^q)/(q-1)`; `c` defaults to 1 |
//! | `twopower:q1=<r>,q2=<r>` | `Σ (p^q1 - p^q2)/(q2-q1)` |
//! | `renyi:alpha=<r>` | `ln(Σ p^α)/(1-α)` |
//! | `logpow:a=<r>,b=<r>,q=<r>` | `ln(Σ (a p + b p^q) / (a+b))` |

mod generator;
mod nontrace;

use serde::Serialize;

pub use generator::{
    bg_generator, eval_trace, tsallis_generator, two_power_generator, TraceGenerator,
};
pub use nontrace::{
    eval_nontrace, log_spec, power_h, renyi_spec, Conjugation, ConjugationReport, NonTraceSpec,
    PowerH,
};

use crate::error::Result;
use crate::ident::{parse_err, Ident};
use crate::simplex::Distribution;

/// Tolerance of the endpoint conditions `f(0) = f(1) = 0` and `h(0) = g(h(1)) = 0`.
pub const BOUNDARY_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub enum Entropy {
    Trace(TraceGenerator),
    NonTrace(NonTraceSpec),
}

impl Entropy {
    pub fn parse(input: &str) -> Result<Self> {
        let id = Ident::parse(input)?;
        let entropy = match id.name.as_str() {
            "bg" => {
                id.only(&["c"], input)?;
                Entropy::Trace(bg_generator(id.get("c").unwrap_or(1.0))?)
            }
            "tsallis" => {
                id.only(&["q", "c"], input)?;
                let q = id.require("q", input)?;
                Entropy::Trace(tsallis_generator(q, id.get("c").unwrap_or(1.0))?)
            }
            "twopower" => {
                id.only(&["q1", "q2"], input)?;
                Entropy::Trace(two_power_generator(
                    id.require("q1", input)?,
                    id.require("q2", input)?,
                )?)
            }
            "renyi" => {
                id.only(&["alpha"], input)?;
                Entropy::NonTrace(renyi_spec(id.require("alpha", input)?)?)
            }
            "logpow" => {
                id.only(&["a", "b", "q"], input)?;
                Entropy::NonTrace(log_spec(
                    id.require("a", input)?,
                    id.require("b", input)?,
                    id.require("q", input)?,
                )?)
            }
            other => return Err(parse_err(input, &format!("unknown entropy `{other}`"))),
        };
        Ok(entropy)
    }

    pub fn eval(&self, p: &Distribution) -> Result<f64> {
        match self {
            Entropy::Trace(f) => Ok(eval_trace(f, p)),
            Entropy::NonTrace(spec) => eval_nontrace(spec, p),
        }
    }

    /// `f` for trace entropies, `h` for non-trace ones.
    pub fn trace_part(&self) -> &TraceGenerator {
        match self {
            Entropy::Trace(f) => f,
            Entropy::NonTrace(spec) => spec.h(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Entropy::Trace(f) => f.name(),
            Entropy::NonTrace(spec) => spec.name(),
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Entropy::Trace(f) => f.params(),
            Entropy::NonTrace(spec) => spec.params().to_vec(),
        }
    }

    /// Canonical identifier, parseable by [`Entropy::parse`] for catalog members.
    pub fn id(&self) -> String {
        Ident {
            name: self.name().to_string(),
            params: self
                .params()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
        .to_string()
    }

    pub fn check_boundary(&self) -> BoundaryReport {
        match self {
            Entropy::Trace(f) => check_boundary_trace(f),
            Entropy::NonTrace(spec) => check_boundary_nontrace(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryReport {
    /// `|f(0)|` or `|h(0)|`.
    pub at_zero: f64,
    /// `|f(1)|` or `|g(h(1))|`.
    pub at_one: f64,
    pub pass: bool,
}

impl BoundaryReport {
    fn new(at_zero: f64, at_one: f64) -> Self {
        BoundaryReport {
            at_zero,
            at_one,
            pass: at_zero <= BOUNDARY_TOL && at_one <= BOUNDARY_TOL,
        }
    }
}

pub fn check_boundary_trace(f: &TraceGenerator) -> BoundaryReport {
    BoundaryReport::new(f.value(0.0).abs(), f.value(1.0).abs())
}

pub fn check_boundary_nontrace(spec: &NonTraceSpec) -> BoundaryReport {
    let at_one = spec
        .conjugation()
        .g(spec.h().value(1.0))
        .map(f64::abs)
        .unwrap_or(f64::NAN);
    BoundaryReport::new(spec.h().value(0.0).abs(), at_one)
}
