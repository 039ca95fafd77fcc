use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::OutputFormat;

#[derive(Parser, Debug)]
#[command(
    name = "vbcast",
    version,
    about = "Approximate virtual broadcasting: overheads, error trade-offs and simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Optimal overhead of exact virtual broadcasting.
    Exact {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Several dimensions at once; overrides --dim.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
    },
    /// Overhead over a grid of error thresholds (a, b) in [0, 1]².
    SweepAb {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
    /// Smallest balanced error reachable with overhead at most gamma.
    MinError {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Minimal error for every pair in a budget list and dimension list.
    Tradeoff {
        #[arg(long, value_delimiter = ',', default_value = "1,1.8")]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
    },
    /// Run the acceptance suite.
    Verify,
    /// Sample a virtual broadcasting protocol on |0⟩ measuring Z.
    Simulate {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Budget of the explicit discard-and-prepare decomposition.
        #[arg(long, conflicts_with = "delta")]
        gamma: Option<f64>,
        /// Use the optimal decomposition for balanced error delta instead.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        shots: u64,
        /// Receiver whose marginal is measured.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        receiver: u8,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Output file; defaults to $VBCAST_OUT_DIR/<command>.<ext> when that is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_gap: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_feas: f64,
    #[arg(long, global = true, default_value_t = 200)]
    pub max_iter: usize,
    /// Worker threads for sweeps; all cores when omitted.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Lift the dimension guard (d ≤ 4).
    #[arg(long, global = true)]
    pub allow_large_dim: bool,
}
