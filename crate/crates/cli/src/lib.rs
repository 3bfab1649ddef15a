//! Command-line front end: argument parsing, experiment dispatch, CSV/JSON
//! rendering and the acceptance report.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on usage or
//! configuration errors.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod report;

use std::io::Write;
use std::time::Instant;

pub use args::{parse_args, parse_args_with_jobs_env, RunConfig};
pub use commands::{run, Artifact};
pub use error::CliError;
pub use report::ReportBundle;

/// Runs `cfg` and writes the artifact to `out_path` (plus its `.meta.json`
/// sibling) or to stdout.
pub fn execute(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let start = Instant::now();
    let art = run(cfg)?;
    match &cfg.out_path {
        Some(path) => {
            output::write_file(path, &art.body)?;
            output::write_file(
                &output::meta_path(path),
                &output::meta_json(cfg, start.elapsed()),
            )?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(art.body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(art.warnings)
}

/// Full program behavior for `argv` (without the program name); returns the
/// exit status.
pub fn main_with_args<S: AsRef<str>>(argv: &[S]) -> u8 {
    let cfg = match parse_args(argv) {
        Ok(cfg) => cfg,
        Err(CliError::Info(text)) => {
            print!("{text}");
            return 0;
        }
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match execute(&cfg) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
