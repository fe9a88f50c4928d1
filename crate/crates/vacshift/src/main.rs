use std::process::ExitCode;

use clap::Parser;
use vacshift::cli::Cli;
use vacshift::output::write_artifact;

fn main() -> ExitCode {
    // clap would exit with 2 on bad usage; 2 is reserved for invariant violations
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command.run() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    for artifact in &outcome.artifacts {
        if let Err(e) = write_artifact(artifact) {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    }
    if outcome.violations.is_empty() {
        return ExitCode::SUCCESS;
    }
    for v in &outcome.violations {
        eprintln!("invariant violated: {v}");
    }
    ExitCode::from(2)
}
