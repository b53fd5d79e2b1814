//! `tabxai` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or schema error, 4 numeric
//! or fit error. Diagnostics go to standard error.

mod args;
mod commands;
mod error;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use tabxai::par;

use args::{Cli, Command, Explain};
use error::CliResult;
use report::{Outcome, RunReport, Timing};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::GenData(_) => "gen-data",
        Command::Train(_) => "train",
        Command::Tune(_) => "tune",
        Command::Evaluate(_) => "evaluate",
        Command::Explain(Explain::Shap(_)) => "explain shap",
        Command::Explain(Explain::Pgm(_)) => "explain pgm",
    }
}

fn run(command: &Command) -> CliResult<Outcome> {
    match command {
        Command::GenData(a) => commands::gen_data(a),
        Command::Train(a) => commands::train(a),
        Command::Tune(a) => commands::tune(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Explain(Explain::Shap(a)) => commands::shap(a),
        Command::Explain(Explain::Pgm(a)) => commands::pgm(a),
    }
}

fn dispatch(argv: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let start = Instant::now();
    let result = par::with_threads(cli.threads, || run(&cli.command));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(path) = &cli.report {
        let report = RunReport {
            command: command_name(&cli.command).to_string(),
            argv: argv.iter().skip(1).cloned().collect(),
            seed: outcome.seed,
            config: outcome.config,
            outputs: outcome.outputs,
            warnings: outcome.warnings,
            timing: cli.timing.then(|| Timing {
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                threads: cli.threads,
            }),
        };
        if let Err(e) = report::write_report(path, &report) {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    }
    0
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args().collect()))
}
