mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::Cli;
use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(nvrelax_core::Error),
}

impl From<nvrelax_core::Error> for CliError {
    fn from(e: nvrelax_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Core(_) => 1,
        }
    }

    fn diagnostics(&self) -> serde_json::Value {
        match self {
            CliError::Usage(m) => json!({"error": "usage", "message": m}),
            CliError::Io(m) => json!({"error": "io", "message": m}),
            CliError::Core(e) => {
                let mut v = json!({"error": e.kind(), "message": e.to_string()});
                match e {
                    nvrelax_core::Error::FitNotConverged { best, .. } => {
                        v["best"] = serde_json::to_value(best.as_ref()).unwrap_or_default();
                    }
                    nvrelax_core::Error::QuadratureNotConverged { estimate, .. } => {
                        v["estimate"] = output::num_value(*estimate);
                    }
                    _ => {}
                }
                v
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let report = commands::run(&cli.command, &cfg)?;
    let format = cfg.format.unwrap_or(report.default_format);
    let text = report.render(format);
    let dest = output::destination(cfg.output.as_ref(), report.subcommand, format);
    output::emit(&text, dest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostics());
            ExitCode::from(e.exit_code())
        }
    }
}
