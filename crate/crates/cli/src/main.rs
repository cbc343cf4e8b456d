mod args;
mod commands;
mod input;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{output_path, Cli};
use commands::{Sink, SCHEMA};

#[derive(Debug)]
pub enum CliError {
    Domain(fuchskit::Error),
    Io(String),
}

impl From<fuchskit::Error> for CliError {
    fn from(e: fuchskit::Error) -> Self {
        CliError::Domain(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.kind(),
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Domain(e) => e.to_string(),
            CliError::Io(m) => m.clone(),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema: &'static str,
    command: &'a str,
    error: ErrorBody<'a>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let name = cli.command.name();

    let mut out: Box<dyn Write> = match output_path(&cli.output) {
        None => Box::new(std::io::stdout().lock()),
        Some(p) => match File::create(&p) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::from(1);
            }
        },
    };

    let result = {
        let mut sink = Sink { command: name, out: &mut *out };
        commands::run(&cli.command, &mut sink)
    };
    match result.and_then(|_| out.flush().map_err(|e| CliError::Io(e.to_string()))) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = ErrorReport {
                schema: SCHEMA,
                command: name,
                error: ErrorBody { kind: err.kind(), message: err.message() },
            };
            let text = serde_json::to_string_pretty(&report).expect("error report serialises");
            let _ = writeln!(out, "{text}");
            let _ = out.flush();
            ExitCode::from(1)
        }
    }
}
