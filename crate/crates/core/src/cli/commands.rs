use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use super::{CmdResult, CommonArgs, Failure, Format, EXIT_FAIL, EXIT_PASS};
use crate::catalog::{BoundaryReport, Conjugation, Entropy};
use crate::composition::{axioms_residual, BinaryLaw, CompositionLaw, AXIOM_TOL};
use crate::error::Result;
use crate::simplex::{
    parse_distributions, product, sample_interior, Distribution, INTERIOR_MARGIN,
};
use crate::verify::{
    bilinear_fit, composability_scan, ode_constant_residual, q_recovery, sk_checks,
    weak_composability_check, BilinearFit, FitConfig, ScanConfig, ScanReport, SkReport,
    VariationalCheck, WeakReport, FIT_MIN_STATES,
};

/// Interior pairs drawn for the derivative identities reported by `verify`.
const VARIATIONAL_PAIRS: usize = 100;
/// Factor sizes of those pairs.
const VARIATIONAL_STATES: (usize, usize) = (4, 3);
/// Grid of the constant-ODE check, 17 points over `[0.05, 0.95]`.
const ODE_GRID: (f64, f64, usize) = (0.05, 0.95, 17);

pub(super) fn read_input(
    path: Option<&Path>,
    stdin: &mut dyn BufRead,
) -> std::result::Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| Failure::io(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut text = String::new();
            stdin.read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn read_distributions(
    args: &CommonArgs,
    stdin: &mut dyn BufRead,
) -> std::result::Result<Vec<Distribution>, Failure> {
    let text = read_input(args.input.as_deref(), stdin)?;
    Ok(parse_distributions(&text)?)
}

pub(super) fn emit_json<T: Serialize + ?Sized>(
    out: &mut dyn Write,
    value: &T,
) -> std::result::Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Failure::io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub(super) fn emit_csv<T: Serialize>(
    out: &mut dyn Write,
    rows: &[T],
) -> std::result::Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Failure::io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub(super) fn compute(
    args: &CommonArgs,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
) -> CmdResult {
    let entropy = args.entropy()?;
    let dists = read_distributions(args, stdin)?;
    let values = dists
        .iter()
        .map(|p| entropy.eval(p))
        .collect::<Result<Vec<f64>>>()?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(out, &values)?,
        Format::Csv => {
            for v in values {
                writeln!(out, "{v}")?;
            }
        }
    }
    Ok(EXIT_PASS)
}

#[derive(Debug, Serialize)]
struct ComposeRow {
    joint: f64,
    composed: f64,
    residual: f64,
}

/// Exit status 1 when any pair misses the law by more than `--tol`.
pub(super) fn compose(
    args: &CommonArgs,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
) -> CmdResult {
    let entropy = args.entropy()?;
    let law = args.law()?;
    let tol = args.tolerance()?;
    let dists = read_distributions(args, stdin)?;
    if dists.len() % 2 != 0 {
        return Err(Failure::usage(format!(
            "compose reads distributions in pairs, got {} lines",
            dists.len()
        )));
    }
    let rows = dists
        .chunks(2)
        .map(|pair| {
            let joint = entropy.eval(&product(&pair[0], &pair[1]))?;
            let composed = law.compose(entropy.eval(&pair[0])?, entropy.eval(&pair[1])?)?;
            Ok(ComposeRow {
                joint,
                composed,
                residual: (joint - composed).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json(out, &rows)?,
        Format::Csv => emit_csv(out, &rows)?,
    }
    Ok(if rows.iter().all(|r| r.residual <= tol) {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    #[serde(flatten)]
    scan: ScanReport,
    weak: WeakReport,
    variational: Option<VariationalSummary>,
}

#[derive(Debug, Serialize)]
struct VariationalSummary {
    alpha: f64,
    beta: f64,
    pairs: usize,
    first_max: f64,
    second_max: f64,
    ode_q: Option<f64>,
    ode_spread: Option<f64>,
}

#[derive(Debug, Serialize)]
struct VerifyRow<'a> {
    entropy: &'a str,
    law: &'a str,
    seed: u64,
    n_pairs: usize,
    w_min: usize,
    w_max: usize,
    max_residual: f64,
    mean_residual: f64,
    pass: bool,
    tolerance: f64,
    weak_max_residual: f64,
}

/// `(α, β)` of the multiplicative law obeyed by the trace part, when the
/// pair `(entropy, law)` determines one.
fn trace_law_constants(entropy: &Entropy, law: &CompositionLaw) -> Option<(f64, f64)> {
    match (entropy, law) {
        (Entropy::Trace(_), CompositionLaw::Additive) => Some((0.0, 0.0)),
        (Entropy::Trace(_), CompositionLaw::Multiplicative { alpha }) => Some((*alpha, 0.0)),
        (Entropy::NonTrace(spec), CompositionLaw::RenyiType { alpha, .. }) => {
            Some((*alpha, spec.beta()))
        }
        // a logarithmic outer map turns additivity into Σh_AB = Σh_A Σh_B / β
        (Entropy::NonTrace(spec), CompositionLaw::Additive) => match spec.conjugation() {
            Conjugation::Renyi { .. } | Conjugation::ScaledLog { .. } => {
                Some((1.0 / spec.beta(), spec.beta()))
            }
            Conjugation::Custom { .. } => None,
        },
        _ => None,
    }
}

fn variational_summary(
    entropy: &Entropy,
    law: &CompositionLaw,
    seed: u64,
) -> Option<VariationalSummary> {
    let (alpha, beta) = trace_law_constants(entropy, law)?;
    let gen = entropy.trace_part();
    let check = VariationalCheck::new(gen, alpha).with_beta(beta);
    let (wa, wb) = VARIATIONAL_STATES;
    let mut first_max: f64 = 0.0;
    let mut second_max: f64 = 0.0;
    for k in 0..VARIATIONAL_PAIRS as u64 {
        let a = sample_interior(wa, seed, 2 * k, INTERIOR_MARGIN).ok()?;
        let b = sample_interior(wb, seed, 2 * k + 1, INTERIOR_MARGIN).ok()?;
        for l in 0..wa - 1 {
            first_max = first_max.max(check.first_variation(&a, &b, l).ok()?);
            for m in 0..wb - 1 {
                second_max = second_max.max(check.second_variation(&a, &b, l, m).ok()?);
            }
        }
    }
    let q = q_recovery(gen, alpha).ok().or_else(|| {
        entropy
            .params()
            .iter()
            .find(|(k, _)| *k == "q")
            .map(|&(_, v)| v)
    });
    let (lo, hi, n) = ODE_GRID;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let spread = q.and_then(|q| ode_constant_residual(gen, q, &grid).ok().map(|r| r.spread));
    Some(VariationalSummary {
        alpha,
        beta,
        pairs: VARIATIONAL_PAIRS,
        first_max,
        second_max,
        ode_q: q,
        ode_spread: spread,
    })
}

/// The verdict is the strict scan; weak and derivative checks are informational.
pub(super) fn verify(args: &CommonArgs, out: &mut dyn Write) -> CmdResult {
    let entropy = args.entropy()?;
    let law = args.law()?;
    let (w_min, w_max) = args.state_range(2)?;
    let config = ScanConfig {
        n_pairs: args.samples,
        w_min,
        w_max,
        seed: args.seed,
        tolerance: args.tolerance()?,
    };
    let scan = composability_scan(&entropy, &law, &config)?;
    let weak = weak_composability_check(&entropy, &law, w_max.max(2))?;
    let pass = scan.pass;
    match args.format.unwrap_or(Format::Json) {
        Format::Json => {
            let report = VerifyReport {
                variational: variational_summary(&entropy, &law, args.seed),
                scan,
                weak,
            };
            emit_json(out, &report)?
        }
        Format::Csv => emit_csv(
            out,
            &[VerifyRow {
                entropy: &scan.entropy_id,
                law: &scan.law_id,
                seed: scan.seed,
                n_pairs: scan.n_pairs,
                w_min: scan.w_min,
                w_max: scan.w_max,
                max_residual: scan.max_residual,
                mean_residual: scan.mean_residual,
                pass: scan.pass,
                tolerance: scan.tolerance,
                weak_max_residual: weak.max_residual,
            }],
        )?,
    }
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    entropy: &'a str,
    seed: u64,
    w_min: usize,
    w_max: usize,
    n_samples: usize,
    a0: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    rms_residual: f64,
    max_residual: f64,
    condition_flag: bool,
}

/// Fits the trace part (`f`, or `h` for non-trace entropies). Always exits 0 on success.
pub(super) fn fit(args: &CommonArgs, out: &mut dyn Write) -> CmdResult {
    let entropy = args.entropy()?;
    let (w_min, w_max) = args.state_range(FIT_MIN_STATES)?;
    let config = FitConfig {
        n_samples: args.samples,
        w_min,
        w_max,
        seed: args.seed,
    };
    let BilinearFit {
        a0,
        a1,
        a2,
        a3,
        rms_residual,
        max_residual,
        n_samples,
        condition_flag,
    } = bilinear_fit(entropy.trace_part(), &config)?;
    let id = entropy.id();
    let report = FitReport {
        entropy: &id,
        seed: args.seed,
        w_min,
        w_max,
        n_samples,
        a0,
        a1,
        a2,
        a3,
        rms_residual,
        max_residual,
        condition_flag,
    };
    match args.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(out, &report)?,
        Format::Csv => emit_csv(out, &[report])?,
    }
    Ok(EXIT_PASS)
}

#[derive(Debug, Serialize)]
struct AxiomsReport {
    entropy: String,
    boundary: BoundaryReport,
    law: Option<LawAxioms>,
    sk: SkSummary,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct LawAxioms {
    id: String,
    grid_points: usize,
    comm_max: f64,
    id_max: f64,
    assoc_max: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct SkSummary {
    #[serde(flatten)]
    report: SkReport,
    pass: bool,
}

pub(super) fn axioms(args: &CommonArgs, out: &mut dyn Write) -> CmdResult {
    if args.format == Some(Format::Csv) {
        return Err(Failure::usage("axioms only supports --format json"));
    }
    let entropy = args.entropy()?;
    let (w_min, w_max) = args.state_range(2)?;
    let boundary = entropy.check_boundary();
    let law = match args.optional_law()? {
        Some(law) => {
            let grid = law.default_grid()?;
            let r = axioms_residual(&law, &grid)?;
            Some(LawAxioms {
                id: law.id(),
                grid_points: grid.len(),
                comm_max: r.comm_max,
                id_max: r.id_max,
                assoc_max: r.assoc_max,
                tolerance: AXIOM_TOL,
                pass: r.max() <= AXIOM_TOL,
            })
        }
        None => None,
    };
    let sk = sk_checks(&entropy, args.samples, w_min, w_max, args.seed)?;
    let sk = SkSummary {
        pass: sk.sk2_max_residual == 0.0 && sk.sk3_violations == 0,
        report: sk,
    };
    let pass = boundary.pass && sk.pass && law.as_ref().is_none_or(|l| l.pass);
    let report = AxiomsReport {
        entropy: entropy.id(),
        boundary,
        law,
        sk,
        pass,
    };
    emit_json(out, &report)?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}
