//! Generalized entropies on finite distributions and numerical checks of
//! their composability.
//!
//! - [`simplex`]: distributions, product systems, seeded sampling.
//! - [`catalog`]: trace-form `Σ f(p_i)` and non-trace `g(Σ h(p_i))` entropies.
//! - [`composition`]: composition laws `Φ(x, y)` and group-axiom checks.
//! - [`verify`]: residual scans, the bilinear fit, variational identities.
//! - [`cli`]: the `centropy` command-line front end.

// `!(x > 0.0)` is the NaN-rejecting form of the range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod composition;
pub mod error;
pub mod ident;
pub mod numeric;
pub mod simplex;
pub mod verify;

pub use catalog::{Entropy, NonTraceSpec, TraceGenerator};
pub use composition::{BinaryLaw, CompositionLaw};
pub use error::{Error, Result};
pub use simplex::Distribution;
