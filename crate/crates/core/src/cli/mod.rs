//! The `oval-lab` command line.
//!
//! Exit status: 0 success, 1 invalid input or configuration, 2 numerical
//! failure, 3 conjecture-violation candidate (dump written).

mod commands;
mod config;
mod grid;
mod report;

use std::io::Write as _;

use clap::error::ErrorKind;

pub use commands::{execute, Outcome};
pub use config::{
    command, parse_config_file, resolve, OutputFormat, RunConfig, Subcommand, SEED_ENV,
};
pub use grid::parse_grid;
pub use report::Report;

use crate::OvalError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

fn exit_code(e: &OvalError) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses `argv` (program name first), runs, writes the report, and returns
/// the process exit status.
pub fn run(argv: &[String]) -> i32 {
    let matches = match command().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
        }
    };
    let Some((name, sub_matches)) = matches.subcommand() else {
        eprintln!("error: a subcommand is required");
        return EXIT_INPUT;
    };
    let sub = config::subcommand_by_name(name).expect("clap only accepts known subcommands");
    let cfg = match resolve(sub, sub_matches) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_INPUT;
        }
    };
    let outcome = match pool.install(|| execute(&cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let text = outcome.report.render(&cfg);
    let written = match &cfg.output_path {
        Some(p) => std::fs::write(p, &text).map_err(|e| (p.clone(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err((std::path::PathBuf::from("<stdout>"), e))
                }
                _ => Ok(()),
            }
        }
    };
    if let Err((p, e)) = written {
        eprintln!("error: cannot write {}: {e}", p.display());
        return EXIT_INPUT;
    }
    for (p, body) in &outcome.side_files {
        if let Err(e) = std::fs::write(p, body) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return EXIT_INPUT;
        }
    }
    if !outcome.dumps.is_empty() {
        for d in &outcome.dumps {
            eprintln!(
                "conjecture-violation candidate: dump written to {}",
                d.display()
            );
        }
        return EXIT_VIOLATION;
    }
    EXIT_OK
}
