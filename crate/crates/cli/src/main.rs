use std::io;
use std::process::ExitCode;

use clap::Parser;
use vbcast_cli::{dispatch, Cli, RunConfig, OUT_DIR_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(Into::into);
    let result = RunConfig::from_cli(cli, out_dir).and_then(|cfg| dispatch(&cfg, &mut io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
