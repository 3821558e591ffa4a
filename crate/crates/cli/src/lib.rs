//! Command-line driver: configuration, dispatch and reproducible reports.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use serde::Serialize;

pub use config::{Cli, Format, Parameters, RunConfig, Subcommand};
pub use error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A rendered report and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub exit_code: i32,
}

#[derive(Serialize)]
struct Report<'a> {
    artifact: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a RunConfig,
    result: &'a serde_json::Value,
}

/// Runs one experiment and renders its report. The output depends only on
/// the configuration, never on the thread count.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let computed = commands::dispatch(config)?;
    let report = match (config.output.format, &computed.table) {
        (Format::Csv, Some((header, rows))) => {
            let mut out = String::new();
            out.push_str(&format!("# branchsum {VERSION} seed={}\n", config.parameters.seed));
            out.push_str(&format!("# config={}\n", to_json(config, false)?));
            for note in &computed.notes {
                out.push_str(&format!("# {note}\n"));
            }
            out.push_str(&csv_table(header, rows)?);
            out
        }
        _ => {
            let report = Report {
                artifact: "branchsum",
                version: VERSION,
                seed: config.parameters.seed,
                config,
                result: &computed.result,
            };
            to_json(&report, true)? + "\n"
        }
    };
    Ok(Outcome {
        report,
        exit_code: computed.exit_code,
    })
}

fn to_json<T: Serialize>(v: &T, pretty: bool) -> Result<String, CliError> {
    let s = if pretty {
        serde_json::to_string_pretty(v)
    } else {
        serde_json::to_string(v)
    };
    s.map_err(|e| CliError::config(format!("cannot serialize report: {e}")))
}

fn csv_table(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::config(format!("cannot write CSV: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::config(e.to_string()))
}

/// Every default parameter and per-subcommand output format.
pub fn defaults_document() -> String {
    #[derive(Serialize)]
    struct Defaults {
        version: &'static str,
        parameters: Parameters,
        formats: std::collections::BTreeMap<&'static str, Format>,
    }
    let subs = [
        ("check", Subcommand::Check),
        ("nullspace", Subcommand::Nullspace),
        ("count", Subcommand::Count),
        ("paths", Subcommand::Paths),
        ("propagate", Subcommand::Propagate),
        ("toy01", Subcommand::Toy01),
        ("collapse", Subcommand::Collapse),
        ("born", Subcommand::Born),
        ("deficit", Subcommand::Deficit),
        ("nonlinearity", Subcommand::Nonlinearity),
    ];
    let d = Defaults {
        version: VERSION,
        parameters: Parameters::default(),
        formats: subs.iter().map(|&(n, s)| (n, config::default_format(s))).collect(),
    };
    serde_json::to_string_pretty(&d).expect("defaults serialize") + "\n"
}

fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::config(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::config(e.to_string())),
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let Some(config) = config::from_cli(cli)? else {
        emit(&defaults_document(), cli.output.as_deref())?;
        return Ok(error::EXIT_OK);
    };
    let outcome = match config.threads {
        Some(0) => return Err(CliError::config("--threads must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(e.to_string()))?
            .install(|| run(&config))?,
        None => run(&config)?,
    };
    emit(&outcome.report, config.output.path.as_deref())?;
    Ok(outcome.exit_code)
}

/// Parses arguments, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { error::EXIT_CONFIG } else { error::EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
