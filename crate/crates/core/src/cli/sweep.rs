use std::io::Write;

use serde::{Deserialize, Serialize};

use super::commands::{emit_csv, emit_json};
use super::{parse_entropy, CmdResult, Failure, Format, SweepArgs, EXIT_PASS};
use crate::catalog::Entropy;
use crate::composition::{power_trace_alpha, tsallis_alpha, CompositionLaw};
use crate::ident::Ident;
use crate::verify::{bilinear_fit, composability_scan, FitConfig, ScanConfig, FIT_MIN_STATES};

/// Grid values are rounded to this resolution so `lo + k * step` prints cleanly.
const GRID_RESOLUTION: f64 = 1e12;
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub param: String,
    pub values: Vec<f64>,
}

/// One line of the sweep table. `a3_fit` is empty when the fit is degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub a3_fit: Option<f64>,
}

/// Parses `<param>=<lo>:<hi>:<step>`; the grid includes `hi` when it lies on a step.
pub fn parse_grid(spec: &str) -> std::result::Result<SweepGrid, Failure> {
    let bad = |why: &str| Failure::usage(format!("malformed grid `{spec}`: {why}"));
    let (param, range) = spec
        .split_once('=')
        .ok_or_else(|| bad("expected <param>=<lo>:<hi>:<step>"))?;
    let param = param.trim();
    if param.is_empty() {
        return Err(bad("empty parameter name"));
    }
    let parts: Vec<f64> = range
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("bounds and step must be numbers"))?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad("expected three fields lo:hi:step"));
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(bad("bounds and step must be finite"));
    }
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    if hi < lo {
        return Err(bad("empty grid (hi < lo)"));
    }
    let span = ((hi - lo) / step + 1e-9).floor();
    if span >= MAX_GRID_POINTS as f64 {
        return Err(bad("too many grid points"));
    }
    let values = (0..=span as usize)
        .map(|k| ((lo + k as f64 * step) * GRID_RESOLUTION).round() / GRID_RESOLUTION)
        .collect();
    Ok(SweepGrid {
        param: param.to_string(),
        values,
    })
}

/// The law each catalog family is composable under; `twopower` uses the fitted `a3`.
fn canonical_law(
    entropy: &Entropy,
    a3: Option<f64>,
) -> std::result::Result<CompositionLaw, Failure> {
    let param = |key: &str| {
        entropy
            .params()
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, v)| v)
    };
    let law = match entropy.name() {
        "bg" | "renyi" => CompositionLaw::Additive,
        "tsallis" => CompositionLaw::multiplicative(tsallis_alpha(
            param("q").unwrap_or(1.0),
            param("c").unwrap_or(1.0),
        )?),
        "logpow" => match entropy {
            Entropy::NonTrace(spec) => {
                CompositionLaw::renyi_type(spec, power_trace_alpha(param("b").unwrap_or(0.0))?)
            }
            Entropy::Trace(_) => unreachable!("logpow is non-trace"),
        },
        _ => CompositionLaw::multiplicative(a3.ok_or_else(|| {
            Failure::usage(format!("no default law for `{}`; pass --law", entropy.id()))
        })?),
    };
    Ok(law)
}

pub(super) fn run(args: &SweepArgs, out: &mut dyn Write) -> CmdResult {
    let common = &args.common;
    let grid = parse_grid(&args.sweep)?;
    let base = Ident::parse(common.entropy_id()?)?;
    let fixed_law = common.optional_law()?;
    let (w_min, w_max) = common.state_range(2)?;
    let tolerance = common.tolerance()?;
    let fit_config = FitConfig {
        n_samples: common.samples,
        w_min: w_min.max(FIT_MIN_STATES),
        w_max: w_max.max(FIT_MIN_STATES),
        seed: common.seed,
    };
    let scan_config = ScanConfig {
        n_pairs: common.samples,
        w_min,
        w_max,
        seed: common.seed,
        tolerance,
    };

    let mut rows = Vec::with_capacity(grid.values.len());
    for &v in &grid.values {
        let id = base.clone().with(&grid.param, v).to_string();
        let entropy = parse_entropy(&id)
            .map_err(|f| Failure::usage(format!("grid point {}={v}: {f}", grid.param)))?;
        let a3 = bilinear_fit(entropy.trace_part(), &fit_config)
            .ok()
            .map(|f| f.a3);
        let law = match &fixed_law {
            Some(law) => law.clone(),
            None => canonical_law(&entropy, a3)?,
        };
        let scan = composability_scan(&entropy, &law, &scan_config)?;
        rows.push(SweepRow {
            param: v,
            max_residual: scan.max_residual,
            mean_residual: scan.mean_residual,
            a3_fit: a3,
        });
    }
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => emit_csv(out, &rows)?,
        Format::Json => emit_json(out, &rows)?,
    }
    Ok(EXIT_PASS)
}
