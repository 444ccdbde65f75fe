//! `bevt`: extract extremes from CSV series, fit Bayesian GEV/GPD models,
//! derive return levels, VaR and ES, and run simulation studies.

mod args;
mod artifact;
mod commands;
mod ingest;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use crate::args::Cli;
use crate::ingest::InputError;

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(b) = e.downcast_ref::<bevt::Error>() {
        b.kind()
    } else if e.downcast_ref::<InputError>().is_some() {
        "input"
    } else if e.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else if e.downcast_ref::<serde_json::Error>().is_some() || e.downcast_ref::<csv::Error>().is_some() {
        "parse"
    } else {
        "error"
    }
}

fn report_error(kind: &str, message: String) {
    eprintln!("{}", json!({ "error": { "kind": kind, "message": message } }));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", e.render().to_string().trim_end().to_string());
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            report_error(error_kind(&e), format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
