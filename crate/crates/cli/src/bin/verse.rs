use std::process::ExitCode;

use clap::Parser;
use verse_cli::cli::{run, Cli, ErrorReport};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let report = ErrorReport {
                error: "UsageError".into(),
                message: e.to_string(),
            };
            eprintln!(
                "{}",
                serde_json::to_string(&report).expect("plain strings serialize")
            );
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::to_string(&ErrorReport::from(&e)).expect("plain strings serialize")
            );
            ExitCode::from(2)
        }
    }
}
