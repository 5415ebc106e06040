mod args;
mod run;

use std::io::Write;
use std::process::ExitCode;

use bartool::Error;
use clap::Parser;

use args::Cli;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation { .. }
        | Error::UnknownId { .. }
        | Error::Schema(_)
        | Error::Parse { .. }
        | Error::UnsupportedDirection { .. }
        | Error::KindNotSupported { .. }
        | Error::MalformedCode { .. }
        | Error::PrefixOutOfRange { .. }
        | Error::NoNetCandidate { .. } => 2,
        Error::NotFoundWithinBudget { .. }
        | Error::LevelCapExceeded { .. }
        | Error::SearchCapExceeded { .. }
        | Error::VerificationFailed { .. }
        | Error::NoCommitment { .. } => 3,
        _ => 4,
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    match run::run(&cli) {
        Ok(out) => {
            emit(&out.to_string());
            ExitCode::SUCCESS
        }
        Err(run::Failure { error, certificate }) => {
            if let Some(c) = certificate {
                emit(&c.to_string());
            }
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}
