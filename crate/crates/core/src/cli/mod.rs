//! The `centropy` command-line front end.
//!
//! Exit codes are shared by every subcommand: [`EXIT_PASS`], [`EXIT_FAIL`],
//! [`EXIT_USAGE`], [`EXIT_IO`] and [`EXIT_DEGENERATE`].

mod commands;
mod sweep;

use std::ffi::OsString;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::catalog::{bg_generator, Entropy};
use crate::composition::CompositionLaw;
use crate::error::Error;
use crate::ident::Ident;

pub use sweep::{parse_grid, SweepGrid, SweepRow};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "centropy",
    version,
    about = "Evaluate generalized entropies and check their composability"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the entropy of each distribution in the input, one per line
    Compute(CommonArgs),
    /// Compare S(A x B) with the law applied to S(A), S(B) for consecutive input lines
    Compose(CommonArgs),
    /// Randomized composability scan; exits 1 when the residual exceeds --tol
    Verify(CommonArgs),
    /// Least-squares bilinear law for the trace part of an entropy
    Fit(CommonArgs),
    /// Endpoint conditions, group-law axioms and expansibility/maximality checks
    Axioms(CommonArgs),
    /// Residual table over a one-parameter grid
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Entropy id, e.g. `bg`, `tsallis:q=2,c=1`, `renyi:alpha=2`
    #[arg(long)]
    pub entropy: Option<String>,
    /// Law id: `additive`, `mult:alpha=<r>`, `renyitype:<spec>,alpha=<r>`
    #[arg(long)]
    pub law: Option<String>,
    /// Distribution file; standard input when omitted or `-`
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Smallest state count sampled (default 2, or 4 for `fit`)
    #[arg(long)]
    pub wmin: Option<usize>,
    #[arg(long)]
    pub wmax: Option<usize>,
    #[arg(long, default_value_t = crate::verify::SCAN_TOL)]
    pub tol: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid `<param>=<lo>:<hi>:<step>`, e.g. `q=1.1:3:0.1`
    #[arg(long)]
    pub sweep: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A failed command: the exit code and a one-line diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::io(e.to_string())
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::AtLine { source, .. } => exit_code(source),
        Error::RankDeficient { .. }
        | Error::SingularDerivative { .. }
        | Error::DomainViolation(_)
        | Error::DegenerateH => EXIT_DEGENERATE,
        _ => EXIT_USAGE,
    }
}

pub(crate) type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
///
/// Standard input is read only by `compute` and `compose` without `--input`.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Compute(a) => commands::compute(a, stdin, stdout),
        Command::Compose(a) => commands::compose(a, stdin, stdout),
        Command::Verify(a) => commands::verify(a, stdout),
        Command::Fit(a) => commands::fit(a, stdout),
        Command::Axioms(a) => commands::axioms(a, stdout),
        Command::Sweep(a) => sweep::run(a, stdout),
    };
    match result.and_then(|code| stdout.flush().map(|_| code).map_err(Failure::from)) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "centropy: {f}");
            f.code
        }
    }
}

/// Parses an entropy id, mapping `tsallis` with `q = 1` to Boltzmann-Gibbs.
pub fn parse_entropy(id: &str) -> std::result::Result<Entropy, Failure> {
    let ident = Ident::parse(id)?;
    if ident.name == "tsallis" && ident.get("q") == Some(1.0) {
        if let Some((k, _)) = ident.params.iter().find(|(k, _)| k != "q" && k != "c") {
            return Err(Failure::usage(format!(
                "cannot parse `{id}`: unknown parameter `{k}`"
            )));
        }
        return Ok(Entropy::Trace(bg_generator(ident.get("c").unwrap_or(1.0))?));
    }
    Ok(Entropy::parse(id)?)
}

impl CommonArgs {
    pub(crate) fn entropy(&self) -> std::result::Result<Entropy, Failure> {
        parse_entropy(self.entropy_id()?)
    }

    pub(crate) fn entropy_id(&self) -> std::result::Result<&str, Failure> {
        self.entropy
            .as_deref()
            .ok_or_else(|| Failure::usage("--entropy is required"))
    }

    pub(crate) fn law(&self) -> std::result::Result<CompositionLaw, Failure> {
        let id = self
            .law
            .as_deref()
            .ok_or_else(|| Failure::usage("--law is required"))?;
        Ok(CompositionLaw::parse(id)?)
    }

    pub(crate) fn optional_law(&self) -> std::result::Result<Option<CompositionLaw>, Failure> {
        self.law.as_ref().map(|_| self.law()).transpose()
    }

    pub(crate) fn state_range(
        &self,
        default_min: usize,
    ) -> std::result::Result<(usize, usize), Failure> {
        let w_min = self.wmin.unwrap_or(default_min);
        let w_max = self.wmax.unwrap_or(8.max(w_min));
        if w_min == 0 || w_max < w_min {
            return Err(Failure::usage(format!(
                "state range needs 1 <= wmin <= wmax, got {w_min}..{w_max}"
            )));
        }
        Ok((w_min, w_max))
    }

    pub(crate) fn tolerance(&self) -> std::result::Result<f64, Failure> {
        if self.tol > 0.0 && self.tol.is_finite() {
            Ok(self.tol)
        } else {
            Err(Failure::usage(format!(
                "--tol must be positive, got {}",
                self.tol
            )))
        }
    }
}
