use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use errdist_cli::commands::{run, Cli, Output};
use errdist_cli::CliError;

fn emit(output: &Output) -> Result<(), CliError> {
    let bytes = output.table.to_csv()?;
    match &output.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => match std::io::stdout().lock().write_all(&bytes) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|output| {
        emit(&output)?;
        match output.violation {
            Some(v) => Err(CliError::Violation(v)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("errdist: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
