use std::process::ExitCode;

use clap::Parser;
use masterfield_cli::{run, CliError, RunConfig};

fn emit(cfg: &RunConfig, csv: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, csv).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let result = run(&cfg);
    let outcome = match result {
        Ok(csv) => emit(&cfg, &csv),
        Err(CliError::CheckFailed { csv, message }) => {
            emit(&cfg, &csv).and(Err(CliError::Usage(message)))
        }
        Err(e) => Err(e),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
