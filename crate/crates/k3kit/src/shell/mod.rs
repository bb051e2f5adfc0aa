//! Command-line front end. `run` never exits the process, so it can be driven
//! from tests; `main` only forwards its outcome.

mod commands;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::counting::CountError;
use crate::lattice::LatticeError;
use crate::mirror::MirrorError;
use crate::orbit::OrbitError;
use crate::period::PeriodError;
use crate::spectral::SpectralError;

pub const DEFAULT_SEED: u64 = 20240229;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "k3kit",
    version,
    about = "Lattice, period-domain and q-series computations"
)]
pub struct Cli {
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: one per processor).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Numeric tolerance.
    #[arg(long, global = true, env = "K3KIT_TOL", default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Describe a lattice given by a descriptor such as "U+E8(-1)".
    Lattice(LatticeArgs),
    /// Enumerate vectors of a given norm, optionally with one pairing condition.
    Roots(RootsArgs),
    /// Carry roots to the canonical root f1 - f2 and print certificates.
    Reduce(ReduceArgs),
    /// Flat coordinates of a period point, its Gram determinant and an automorphy residual.
    Coords(CoordsArgs),
    /// Embed a point of the tube domain as an isotropic vector.
    Tube(TubeArgs),
    /// Exchange Picard and transcendental blocks through a marked U.
    Mirror(MirrorArgs),
    /// Count roots by degree against a polarization.
    Count(CountArgs),
    /// Print an exact q-series.
    Qseries(QseriesArgs),
    /// Regularized determinant of a flat torus against the eta closed form.
    Etadet(EtadetArgs),
    /// Gram determinant times |exp(phi)|^2 at a period point.
    Assemble(AssembleArgs),
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long)]
    pub lattice: String,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[arg(long)]
    pub lattice: String,
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    pub norm: i64,
    /// Pairing vector as a JSON array.
    #[arg(long)]
    pub pair: Option<String>,
    /// Required value of the pairing.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub value: i64,
    /// Box bound on every coordinate.
    #[arg(long)]
    pub bound: Option<i64>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long, default_value = "U^2+E8(-1)")]
    pub lattice: String,
    /// Root as a JSON array.
    #[arg(long, conflicts_with_all = ["random", "replay"])]
    pub root: Option<String>,
    /// Reduce this many seeded random roots.
    #[arg(long, conflicts_with = "replay")]
    pub random: Option<usize>,
    /// Coefficient size for random roots.
    #[arg(long, default_value_t = 3)]
    pub size: i64,
    #[arg(long, default_value_t = crate::orbit::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Replay certificates from a JSON file.
    #[arg(long)]
    pub replay: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoordsArgs {
    #[arg(long, default_value = crate::mirror::K3_DESCRIPTOR)]
    pub lattice: String,
    /// Period point file: "p q" then p rows of q entries. Random if absent.
    #[arg(long)]
    pub point: Option<std::path::PathBuf>,
    /// Length of the random isometry used for the residual.
    #[arg(long, default_value_t = 5)]
    pub word_length: usize,
}

#[derive(Debug, Args)]
pub struct TubeArgs {
    #[arg(long)]
    pub lattice: String,
    /// JSON array of [re, im] pairs; entries are integers or "p/q".
    #[arg(long)]
    pub w: String,
}

#[derive(Debug, Args)]
pub struct MirrorArgs {
    #[arg(long, default_value = crate::mirror::K3_DESCRIPTOR)]
    pub ambient: String,
    /// Picard block indices as a JSON array.
    #[arg(long)]
    pub picard: String,
    /// Index of the marked U block.
    #[arg(long)]
    pub u: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Theta,
    ShortVectors,
    Direct,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub lattice: String,
    /// Polarization as a JSON array.
    #[arg(long)]
    pub l: String,
    #[arg(long, default_value_t = 10)]
    pub max_n: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    pub strategy: StrategyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    Euler,
    Product,
    LogDerivative,
}

#[derive(Debug, Args)]
pub struct QseriesArgs {
    #[arg(long, value_enum, default_value_t = SeriesKind::Euler)]
    pub kind: SeriesKind,
    #[arg(long, default_value_t = 20, allow_hyphen_values = true)]
    pub order: i64,
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long)]
    pub l: Option<String>,
    /// Exponent of the leading monomial, "p/q".
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub weyl: String,
}

#[derive(Debug, Args)]
pub struct EtadetArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub re: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub im: f64,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    #[arg(long)]
    pub point: Option<std::path::PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_im: f64,
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
}

#[derive(Debug, Error)]
pub enum ShellError {
    #[error("{0}")]
    Usage(String),
    #[error("{0} output is not available for this command")]
    UnsupportedFormat(&'static str),
    #[error("{detail}")]
    Domain { code: &'static str, detail: String },
}

impl ShellError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Usage(_) => "Usage",
            Self::UnsupportedFormat(_) => "UnsupportedFormat",
            Self::Domain { code, .. } => code,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn domain(code: &'static str, detail: impl Into<String>) -> Self {
        Self::Domain {
            code,
            detail: detail.into(),
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for ShellError {
            fn from(e: $t) -> Self {
                Self::domain(e.code(), e.to_string())
            }
        }
    )*};
}

domain_from!(
    LatticeError,
    OrbitError,
    PeriodError,
    MirrorError,
    CountError,
    SpectralError
);

/// What a run produced; `main` writes the streams and exits with `code`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match commands::dispatch(&cli) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("ERROR {}: {}\n", e.code(), e.to_string().replace('\n', " ")),
        },
    }
}
