//! `tn-neutral`: batch verification front-end.
//!
//! Exit status: 0 when every gating residual is within tolerance, 1 when
//! some residual is out of tolerance, 2 for usage and input errors, 3 for
//! geometric failures such as a degenerate Hessian or a curve leaving its
//! chart.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{split_tolerances, Cli};
use commands::CliError;

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TN_NEUTRAL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::Usage(format!("TN_NEUTRAL_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let (argv, tolerances) = match split_tolerances(std::env::args().collect()) {
        Ok(split) => split,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let mut cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    cli.command.common_mut().tolerances = tolerances;

    let outcome = configure_threads()
        .and_then(|()| commands::run(&cli.command))
        .and_then(|report| commands::emit(&report, &cli.command).map(|()| report));
    match outcome {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(report) => {
            for r in report.residuals.iter().filter(|r| !r.informational && !r.pass) {
                eprintln!(
                    "out of tolerance: {} = {:e} (tolerance {:e})",
                    r.name, r.value, r.tolerance
                );
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
