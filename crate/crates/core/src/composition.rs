//! Composition laws `Φ(x, y)` and grid checks of the group-law axioms.
//!
//! Three kinds are supported: the additive law `x + y`, the multiplicative
//! law `x + y + α x y`, and the conjugated law obtained from a non-trace
//! entropy's outer map `g`:
//!
//! ```text
//! Φ(x, y) = g( X + Y - β + α (X - β)(Y - β) ),   X = g⁻¹(x), Y = g⁻¹(y)
//! ```
//!
//! whose identity element is `g(β)` rather than 0.

use serde::Serialize;

use crate::catalog::{Conjugation, Entropy, NonTraceSpec};
use crate::error::{Error, Result};
use crate::ident::{parse_err, Ident};

/// Number of grid points per axis used by [`CompositionLaw::default_grid`].
pub const DEFAULT_GRID_POINTS: usize = 9;

/// Tolerance for the group-law residuals of the closed-form laws.
pub const AXIOM_TOL: f64 = 1e-13;

/// A binary law with a declared identity element.
pub trait BinaryLaw {
    fn compose(&self, x: f64, y: f64) -> Result<f64>;
    fn identity(&self) -> Result<f64>;
}

#[derive(Debug, Clone)]
pub enum CompositionLaw {
    Additive,
    Multiplicative {
        alpha: f64,
    },
    RenyiType {
        spec_id: String,
        conj: Conjugation,
        beta: f64,
        alpha: f64,
    },
}

pub fn eval_multiplicative(alpha: f64, x: f64, y: f64) -> f64 {
    x + y + alpha * x * y
}

/// Evaluates the conjugated law.
///
/// The inner expression is regrouped as `(1 - αβ)(X + Y - β) + α X Y`, which
/// is exact on the line `αβ = 1` where `X` and `Y` can be far below `β`.
pub fn eval_renyi_type(conj: &Conjugation, beta: f64, alpha: f64, x: f64, y: f64) -> Result<f64> {
    let gx = conj.g_inv(x);
    let gy = conj.g_inv(y);
    if !gx.is_finite() || !gy.is_finite() {
        return Err(Error::DomainViolation(format!(
            "g inverse undefined at ({x}, {y})"
        )));
    }
    conj.g((1.0 - alpha * beta) * (gx + gy - beta) + alpha * gx * gy)
}

/// The multiplicative constant `(1 - q)/c` of the Tsallis generator `c (t - t^q)/(q - 1)`.
pub fn tsallis_alpha(q: f64, c: f64) -> Result<f64> {
    if !q.is_finite() || q == 1.0 {
        return Err(Error::ParameterOutOfRange {
            name: "q",
            value: q,
            reason: "q must be finite and != 1",
        });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "c",
            value: c,
            reason: "must be positive and finite",
        });
    }
    Ok((1.0 - q) / c)
}

/// Constant `α = 1/b` of the conjugated law for the trace part `h(t) = a t + b t^q`.
///
/// With `T = Σ p^q`, the product system has trace `a + b T_A T_B`, so the
/// trace parts compose as `a + (x - a)(y - a)/b`, which is
/// `x + y - β + (x - β)(y - β)/b` for `β = a + b`.
pub fn power_trace_alpha(b: f64) -> Result<f64> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::DegenerateH);
    }
    Ok(1.0 / b)
}

impl CompositionLaw {
    pub fn multiplicative(alpha: f64) -> Self {
        CompositionLaw::Multiplicative { alpha }
    }

    /// Conjugated law built from the outer map of `spec`.
    pub fn renyi_type(spec: &NonTraceSpec, alpha: f64) -> Self {
        let spec_id = Entropy::NonTrace(spec.clone()).id();
        CompositionLaw::RenyiType {
            spec_id,
            conj: spec.conjugation().clone(),
            beta: spec.beta(),
            alpha,
        }
    }

    /// Parses `additive`, `mult:alpha=<r>` or `renyitype:<spec-id>,alpha=<r>`.
    pub fn parse(input: &str) -> Result<Self> {
        let trimmed = input.trim();
        if let Some(rest) = trimmed.strip_prefix("renyitype:") {
            let (spec_part, alpha_part) = rest
                .rsplit_once(",alpha=")
                .ok_or_else(|| parse_err(input, "expected `renyitype:<spec-id>,alpha=<r>`"))?;
            let alpha: f64 = alpha_part
                .trim()
                .parse()
                .map_err(|_| parse_err(input, "alpha is not a number"))?;
            if !alpha.is_finite() {
                return Err(parse_err(input, "alpha must be finite"));
            }
            return match Entropy::parse(spec_part)? {
                Entropy::NonTrace(spec) => Ok(Self::renyi_type(&spec, alpha)),
                Entropy::Trace(_) => Err(parse_err(
                    input,
                    "renyitype needs a non-trace spec (renyi or logpow)",
                )),
            };
        }
        let id = Ident::parse(trimmed)?;
        match id.name.as_str() {
            "additive" => {
                id.only(&[], input)?;
                Ok(CompositionLaw::Additive)
            }
            "mult" => {
                id.only(&["alpha"], input)?;
                Ok(CompositionLaw::Multiplicative {
                    alpha: id.require("alpha", input)?,
                })
            }
            other => Err(parse_err(input, &format!("unknown law `{other}`"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            CompositionLaw::Additive => "additive".to_string(),
            CompositionLaw::Multiplicative { alpha } => format!("mult:alpha={alpha}"),
            CompositionLaw::RenyiType { spec_id, alpha, .. } => {
                format!("renyitype:{spec_id},alpha={alpha}")
            }
        }
    }

    /// 9 points over `[0, 3]` for trace laws; for conjugated laws the image
    /// under `g` of 9 points over `[β/2, 2β]`.
    pub fn default_grid(&self) -> Result<Vec<f64>> {
        let lin = |lo: f64, hi: f64| -> Vec<f64> {
            let n = DEFAULT_GRID_POINTS;
            (0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect()
        };
        match self {
            CompositionLaw::Additive | CompositionLaw::Multiplicative { .. } => Ok(lin(0.0, 3.0)),
            CompositionLaw::RenyiType { conj, beta, .. } => {
                if !(*beta > 0.0) {
                    return Err(Error::DomainViolation(format!(
                        "default grid needs beta > 0, got {beta}"
                    )));
                }
                lin(beta / 2.0, 2.0 * beta)
                    .into_iter()
                    .map(|u| conj.g(u))
                    .collect()
            }
        }
    }
}

impl BinaryLaw for CompositionLaw {
    fn compose(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            CompositionLaw::Additive => Ok(x + y),
            CompositionLaw::Multiplicative { alpha } => Ok(eval_multiplicative(*alpha, x, y)),
            CompositionLaw::RenyiType {
                conj, beta, alpha, ..
            } => eval_renyi_type(conj, *beta, *alpha, x, y),
        }
    }

    fn identity(&self) -> Result<f64> {
        match self {
            CompositionLaw::Additive | CompositionLaw::Multiplicative { .. } => Ok(0.0),
            CompositionLaw::RenyiType { conj, beta, .. } => conj.g(*beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomResiduals {
    pub comm_max: f64,
    pub id_max: f64,
    pub assoc_max: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.comm_max.max(self.id_max).max(self.assoc_max)
    }
}

/// Exhaustive commutativity, identity and associativity residuals over `grid`.
pub fn axioms_residual<L: BinaryLaw + ?Sized>(law: &L, grid: &[f64]) -> Result<AxiomResiduals> {
    let e = law.identity()?;
    let mut out = AxiomResiduals {
        comm_max: 0.0,
        id_max: 0.0,
        assoc_max: 0.0,
    };
    for &x in grid {
        out.id_max = out.id_max.max((law.compose(x, e)? - x).abs());
        out.id_max = out.id_max.max((law.compose(e, x)? - x).abs());
        for &y in grid {
            let xy = law.compose(x, y)?;
            out.comm_max = out.comm_max.max((xy - law.compose(y, x)?).abs());
            for &z in grid {
                let left = law.compose(x, law.compose(y, z)?)?;
                let right = law.compose(xy, z)?;
                out.assoc_max = out.assoc_max.max((left - right).abs());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{log_spec, renyi_spec};
    use approx::assert_abs_diff_eq;

    struct Broken;

    impl BinaryLaw for Broken {
        fn compose(&self, x: f64, y: f64) -> Result<f64> {
            Ok(x + y + x * y * y)
        }
        fn identity(&self) -> Result<f64> {
            Ok(0.0)
        }
    }

    #[test]
    fn multiplicative_examples() {
        assert_eq!(eval_multiplicative(0.0, 1.2, 0.3), 1.2 + 0.3);
        assert_abs_diff_eq!(eval_multiplicative(0.0, 1.2, 0.3), 1.5, epsilon = 1e-15);
        assert_eq!(eval_multiplicative(-1.0, 0.5, 0.5), 0.75);
        for alpha in [-2.0, -0.3, 0.0, 1.7] {
            for x in [-1.0, 0.0, 0.4, 2.5] {
                assert_eq!(eval_multiplicative(alpha, x, 0.0), x);
            }
        }
    }

    #[test]
    fn renyi_conjugation_is_additive() {
        let spec = renyi_spec(2.0).unwrap();
        let law = CompositionLaw::renyi_type(&spec, 1.0);
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (i as f64 * 0.25, j as f64 * 0.25);
                assert_abs_diff_eq!(law.compose(x, y).unwrap(), x + y, epsilon = 1e-12);
            }
        }
        assert_eq!(law.identity().unwrap(), 0.0);
    }

    #[test]
    fn renyi_conjugation_survives_tiny_inner_values() {
        // g⁻¹(5) = e^-20 for α = 5; the product e^-40 is far below rounding of 1
        let spec = renyi_spec(5.0).unwrap();
        let law = CompositionLaw::renyi_type(&spec, 1.0);
        assert_abs_diff_eq!(law.compose(5.0, 5.0).unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn log_spec_law_example() {
        let spec = log_spec(0.5, 0.5, 2.0).unwrap();
        let alpha = power_trace_alpha(0.5).unwrap();
        let law = CompositionLaw::renyi_type(&spec, alpha);
        let x = 0.75f64.ln();
        // a + (x̃ - a)(ỹ - a)/b with x̃ = ỹ = 0.75
        assert_abs_diff_eq!(law.compose(x, x).unwrap(), 0.625f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(law.compose(x, 0.0).unwrap(), x, epsilon = 1e-15);
    }

    #[test]
    fn renyi_type_domain_violation() {
        let spec = log_spec(0.5, 0.5, 2.0).unwrap();
        let law = CompositionLaw::renyi_type(&spec, -10.0);
        assert!(matches!(
            law.compose(1.0, 1.0),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn alpha_formulas() {
        assert_eq!(tsallis_alpha(2.0, 1.0).unwrap(), -1.0);
        assert_eq!(tsallis_alpha(0.5, 1.0).unwrap(), 0.5);
        assert!(tsallis_alpha(1.0 + 1e-9, 1.0).unwrap().abs() < 1e-8);
        assert!(tsallis_alpha(1.0, 1.0).is_err());
        assert_eq!(power_trace_alpha(1.0).unwrap(), 1.0);
        assert_eq!(power_trace_alpha(0.5).unwrap(), 2.0);
        assert_eq!(
            power_trace_alpha(-1.0).unwrap(),
            tsallis_alpha(2.0, 1.0).unwrap()
        );
        assert_eq!(power_trace_alpha(0.0), Err(Error::DegenerateH));
        // overlap a = c/(q-1), b = -c/(q-1)
        for (q, c) in [(2.0, 1.0), (3.0, 2.0), (0.5, 1.5), (1.5, 0.7)] {
            let b = -c / (q - 1.0);
            assert_abs_diff_eq!(
                power_trace_alpha(b).unwrap(),
                tsallis_alpha(q, c).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn axioms_on_good_and_broken_laws() {
        let grid = CompositionLaw::Additive.default_grid().unwrap();
        let add = axioms_residual(&CompositionLaw::Additive, &grid).unwrap();
        assert_eq!(add.max(), 0.0);
        for alpha in [-1.0, 0.5, 2.0] {
            let r = axioms_residual(&CompositionLaw::multiplicative(alpha), &grid).unwrap();
            assert!(r.max() <= 1e-13, "{alpha}: {r:?}");
        }
        let broken = axioms_residual(&Broken, &grid).unwrap();
        // Φ(1,2) = 7, Φ(2,1) = 5
        assert!(broken.comm_max > 0.1);
        assert_eq!(Broken.compose(1.0, 2.0).unwrap(), 7.0);
        assert_eq!(Broken.compose(2.0, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn axioms_on_conjugated_laws() {
        let spec = log_spec(0.5, 0.5, 2.0).unwrap();
        let law = CompositionLaw::renyi_type(&spec, 2.0);
        let r = axioms_residual(&law, &law.default_grid().unwrap()).unwrap();
        assert!(r.max() <= 1e-12, "{r:?}");
    }

    #[test]
    fn parse_and_id_round_trip() {
        for id in [
            "additive",
            "mult:alpha=-1",
            "renyitype:renyi:alpha=2,alpha=1",
            "renyitype:logpow:a=0.5,b=0.5,q=2,alpha=2",
        ] {
            let law = CompositionLaw::parse(id).unwrap();
            assert_eq!(law.id(), id);
        }
        assert!(CompositionLaw::parse("mult").is_err());
        assert!(CompositionLaw::parse("renyitype:tsallis:q=2,alpha=1").is_err());
        assert!(CompositionLaw::parse("renyitype:renyi:alpha=2").is_err());
        assert!(CompositionLaw::parse("xor").is_err());
    }
}
