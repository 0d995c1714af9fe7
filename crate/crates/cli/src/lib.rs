//! Batch driver for the hierarchical MRF engine: frame ingestion, the five
//! run modes, and their on-disk outputs.

pub mod args;
pub mod bench;
pub mod config;
pub mod error;
pub mod frames;
pub mod manifest;
pub mod modes;
pub mod records;

use clap::Parser;

pub use args::Args;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use manifest::{Mode, RunManifest};
pub use modes::{run, ModeOptions, RunSummary};

/// Parses `argv`, runs the requested mode and returns the process exit code:
/// 0 on success, 1 on a configuration error, 2 on an I/O error (including a
/// run in which every frame failed).
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(summary) => {
            log::info!("{}", summary.message);
            if summary.processed == 0 && summary.failed > 0 {
                eprintln!("error: every frame failed ({} of {})", summary.failed, summary.failed);
                return 2;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(args: &Args) -> CliResult<RunSummary> {
    let cfg = args.run_config()?;
    let opts = args.mode_options()?;
    let manifest = args.manifest()?;
    run(&manifest, &cfg, &opts)
}
