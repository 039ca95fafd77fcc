//! Command-line front end: sweeps over the broadcasting SDPs, protocol
//! simulation and the acceptance suite.

pub mod args;
pub mod commands;
pub mod record;

use std::io;

use thiserror::Error;

pub use args::{Cli, Command};
pub use commands::{dispatch, RunConfig};
pub use record::{format_sig, read_csv, write_records, OutputFormat, RecordStatus, SweepRecord, HEADER};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "VBCAST_OUT_DIR";

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] vbcast_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed table: {0}")]
    Parse(String),

    #[error("{failed} of {total} acceptance criteria failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use vbcast_core::Error as E;
        match self {
            CliError::VerifyFailed { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Core(
                E::InvalidArgument(_)
                | E::TooLarge { .. }
                | E::DimensionLimit { .. }
                | E::Layout(_)
                | E::DimensionMismatch { .. },
            ) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Parse(_) => 4,
        }
    }
}
