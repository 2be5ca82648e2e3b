mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use tracking_error::Error;

use args::{Cli, Command};

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Argument(_) | Error::Configuration(_) | Error::Dominance { .. } => 1,
        Error::Infeasible(_) => 3,
        _ => 2,
    }
}

fn fail(message: &str, code: u8) -> ExitCode {
    let line = message.lines().next().unwrap_or("").trim();
    let line = line.strip_prefix("error:").map(str::trim_start).unwrap_or(line);
    eprintln!("error: {line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&e.to_string(), 1),
    };
    let result = match cli.command {
        Command::Predict(a) => args::resolve(a).and_then(|a| commands::predict(&a)),
        Command::Tune(a) => args::resolve(a).and_then(|a| commands::tune(&a)),
        Command::SimLti(a) => args::resolve(a).and_then(|a| commands::sim_lti(&a)),
        Command::Fly(a) => args::resolve(a).and_then(|a| commands::fly(&a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e.to_string(), exit_code(&e)),
    }
}
