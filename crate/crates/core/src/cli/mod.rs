//! Command-line front end: reads a JSON system specification, runs one
//! computation and writes a text report plus CSV artifacts.

mod commands;
pub mod spec;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use spec::{parse_spec, Kind, SpecFile, System, Task};

/// Success.
pub const EXIT_OK: i32 = 0;
/// The spec file could not be read or an artifact could not be written.
pub const EXIT_IO: i32 = 1;
/// Malformed specification or a system that fails validation.
pub const EXIT_VALIDATION: i32 = 2;
/// A computation failed: root not bracketed, budget exceeded, too few samples.
pub const EXIT_NUMERIC: i32 = 3;
/// Unknown command or bad flags.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "skewdim", version, about = "Dimensions of self-similar, self-affine and skew-product repellers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Directory for CSV artifacts; nothing is written without it.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "K")]
    pub workers: Option<usize>,
    /// Word length, product level or Monte Carlo steps.
    #[arg(long, global = true, value_name = "N")]
    pub n: Option<usize>,
    /// Deepest level for Markov-subsystem extraction.
    #[arg(long = "n-max", global = true, value_name = "N")]
    pub n_max: Option<usize>,
    /// Number of sample points.
    #[arg(long, global = true, value_name = "N")]
    pub points: Option<usize>,
    /// Grid of `s` values as LO:HI:STEP.
    #[arg(long = "s-grid", global = true, value_name = "LO:HI:STEP")]
    pub s_grid: Option<String>,
    /// Root-finding or cross-check tolerance.
    #[arg(long, global = true, value_name = "X")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Similarity dimension, or the dimension of a weighted self-similar measure.
    Simdim { spec: PathBuf },
    /// Affinity dimension from the subadditive pressure of the singular value function.
    Affdim { spec: PathBuf },
    /// Lyapunov exponents of a Bernoulli cocycle and the Lyapunov dimension.
    Lyapdim { spec: PathBuf },
    /// Dimension of a skew-product repeller from the pressure zero.
    #[command(name = "barnsley-dim")]
    BarnsleyDim { spec: PathBuf },
    /// Lower and upper pressure bounds over a grid of `s`.
    #[command(name = "pressure-curve")]
    PressureCurve { spec: PathBuf },
    /// Separation sequence Δ_n of a self-similar system on the line.
    Hesc { spec: PathBuf },
    /// Topological, measure-theoretic and lap-number entropies.
    Entropy { spec: PathBuf },
    /// Box-counting slope of a sampled attractor, checked against the theory.
    Boxcount { spec: PathBuf },
    /// Parse and validate the spec, then print diagnostics.
    Validate { spec: PathBuf },
}

impl Command {
    fn spec(&self) -> &Path {
        match self {
            Command::Simdim { spec }
            | Command::Affdim { spec }
            | Command::Lyapdim { spec }
            | Command::BarnsleyDim { spec }
            | Command::PressureCurve { spec }
            | Command::Hesc { spec }
            | Command::Entropy { spec }
            | Command::Boxcount { spec }
            | Command::Validate { spec } => spec,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Simdim { .. } => "simdim",
            Command::Affdim { .. } => "affdim",
            Command::Lyapdim { .. } => "lyapdim",
            Command::BarnsleyDim { .. } => "barnsley-dim",
            Command::PressureCurve { .. } => "pressure-curve",
            Command::Hesc { .. } => "hesc",
            Command::Entropy { .. } => "entropy",
            Command::Boxcount { .. } => "boxcount",
            Command::Validate { .. } => "validate",
        }
    }
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Io(String),
    Validation { path: Option<String>, message: String },
    Numeric(String),
}

impl CliError {
    pub fn validation(path: Option<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            path,
            message: message.into(),
        }
    }

    /// Attaches a field path to a validation error that has none.
    pub fn at(self, path: String) -> Self {
        match self {
            CliError::Validation { path: None, message } => CliError::Validation {
                path: Some(path),
                message,
            },
            other => other,
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            CliError::Validation { path, .. } => path.as_deref(),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Validation { path: Some(p), message } => write!(f, "invalid spec at `{p}`: {message}"),
            CliError::Validation { path: None, message } => write!(f, "invalid spec: {message}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::validation(None, e.to_string())
        }
    }
}

/// A named CSV artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Report text and artifacts of a successful run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub artifacts: Vec<Artifact>,
}

/// Runs `command` on an already parsed spec.
pub fn execute(command: &Command, spec: &SpecFile, flags: &Flags) -> Result<Outcome, CliError> {
    let run = || commands::dispatch(command, spec, flags);
    match flags.workers {
        Some(0) => Err(CliError::validation(None, "--workers must be positive")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start {k} workers: {e}")))?
            .install(run),
        None => run(),
    }
}

fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn run_parsed(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let path = cli.command.spec();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let spec = parse_spec(&text)?;
    let outcome = execute(&cli.command, &spec, &cli.flags)?;
    write!(stdout, "{}", outcome.report).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(dir) = &cli.flags.out {
        write_artifacts(dir, &outcome.artifacts)?;
        for a in &outcome.artifacts {
            writeln!(stdout, "wrote {}", dir.join(&a.name).display()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run_parsed(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "skewdim {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
