//! Run configuration: command-line flags resolved against documented
//! defaults into a serializable [`RunConfig`].

use std::path::PathBuf;

use branchsum::action::ModelKind;
use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Check,
    Nullspace,
    Count,
    Paths,
    Propagate,
    Toy01,
    Collapse,
    Born,
    Deficit,
    Nonlinearity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub format: Format,
    /// Where the report goes; not echoed so reports do not depend on it.
    #[serde(skip)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Parameters {
    pub seed: u64,
    pub budget: u64,
    pub cap: usize,
    /// Exact rationals as strings; `None` defers to the input file.
    pub lower_bound: Option<String>,
    pub total_weight: Option<String>,
    pub dw: String,
    /// Weight override for `check`, in column order.
    pub weights: Option<Vec<String>>,
    pub k: f64,
    pub hbar: f64,
    pub w_e: f64,
    /// `None` means `1 / |ensemble|`.
    pub zeta: Option<f64>,
    pub alpha: f64,
    pub b: f64,
    pub model: ModelKind,
    pub m: f64,
    pub omega: f64,
    pub eps: f64,
    pub a: f64,
    pub center: f64,
    pub table: Option<Vec<f64>>,
    pub sites: usize,
    pub steps: usize,
    pub source: usize,
    pub sink: Option<usize>,
    pub n_samples: u64,
    pub list_paths: bool,
    pub probs: Vec<f64>,
    pub n_trials: u64,
    pub initial_weights: Vec<f64>,
    pub step_scale: f64,
    pub threshold: f64,
    pub max_steps: u64,
    pub drift: f64,
    pub cluster_size: usize,
    pub volumes: Vec<usize>,
    pub u0: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub u_points: usize,
    pub d0: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            seed: 0,
            budget: branchsum::weights::DEFAULT_BUDGET,
            cap: branchsum::paths::DEFAULT_PATH_CAP,
            lower_bound: None,
            total_weight: None,
            dw: "1".into(),
            weights: None,
            k: 0.0,
            hbar: 1.0,
            w_e: 1.0,
            zeta: None,
            alpha: 1.0,
            b: std::f64::consts::LN_2,
            model: ModelKind::FreeParticle,
            m: 1.0,
            omega: 0.0,
            eps: 1.0,
            a: 1.0,
            center: 0.0,
            table: None,
            sites: 5,
            steps: 4,
            source: 0,
            sink: None,
            n_samples: 100_000,
            list_paths: false,
            probs: vec![0.25, 0.75],
            n_trials: 100_000,
            initial_weights: vec![0.25, 0.75],
            step_scale: 0.05,
            threshold: 0.0,
            max_steps: 10_000_000,
            drift: 0.0,
            cluster_size: 2,
            volumes: (2..=10).collect(),
            u0: 1.0,
            u_min: -3.0,
            u_max: 3.0,
            u_points: 61,
            d0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub input_path: Option<PathBuf>,
    pub parameters: Parameters,
    pub output: OutputSpec,
    /// Worker threads; results never depend on it, so it is not echoed.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        RunConfig {
            subcommand,
            input_path: None,
            parameters: Parameters::default(),
            output: OutputSpec {
                format: default_format(subcommand),
                path: None,
            },
            threads: None,
        }
        .resolved()
    }

    /// Fills subcommand-specific defaults that depend on other values.
    pub fn resolved(mut self) -> Self {
        let p = &mut self.parameters;
        match self.subcommand {
            Subcommand::Toy01 if p.total_weight.is_none() => p.total_weight = Some("6".into()),
            Subcommand::Born if p.total_weight.is_none() => p.total_weight = Some("1".into()),
            Subcommand::Propagate if p.sink.is_none() && self.input_path.is_none() => {
                p.sink = Some(p.sites.saturating_sub(1))
            }
            _ => {}
        }
        self
    }
}

/// Series go to CSV by default, structured results to JSON.
pub fn default_format(sub: Subcommand) -> Format {
    match sub {
        Subcommand::Collapse | Subcommand::Deficit | Subcommand::Nonlinearity => Format::Csv,
        _ => Format::Json,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "branchsum",
    version,
    about = "Branched-complex path sums: constraints, exact counts, propagators and collapse statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Complex-description JSON file
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Report destination [default: stdout]
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Report format [default: csv for collapse, deficit, nonlinearity; json otherwise]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Random seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results are identical for any value [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Node budget for exact counting [default: 10000000]
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Load a run configuration (or a previous report) and re-run it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub params: ParamFlags,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// Verify conservation and bounds of a weighted complex
    Check,
    /// Exact null space of the boundary matrix
    Nullspace,
    /// Count lattice weight configurations and their entropy
    Count,
    /// Enumerate paths and the incidence matrix
    Paths,
    /// Path sums: exact, entropy-weighted, transfer matrix and Monte Carlo
    Propagate,
    /// Two-branch sample model entropies and the collapse threshold
    Toy01,
    /// One collapse walk trajectory
    Collapse,
    /// Outcome frequencies of many collapse walks
    Born,
    /// Null-space deficit of partitioned versus intersecting clusters
    Deficit,
    /// Saturating response and log-odds statistics
    Nonlinearity,
    /// Write every default parameter as JSON
    Defaults,
}

impl Command {
    pub fn subcommand(&self) -> Option<Subcommand> {
        Some(match self {
            Command::Check => Subcommand::Check,
            Command::Nullspace => Subcommand::Nullspace,
            Command::Count => Subcommand::Count,
            Command::Paths => Subcommand::Paths,
            Command::Propagate => Subcommand::Propagate,
            Command::Toy01 => Subcommand::Toy01,
            Command::Collapse => Subcommand::Collapse,
            Command::Born => Subcommand::Born,
            Command::Deficit => Subcommand::Deficit,
            Command::Nonlinearity => Subcommand::Nonlinearity,
            Command::Defaults => return None,
        })
    }
}

#[derive(Debug, Args, Default)]
pub struct ParamFlags {
    /// Path cap for enumeration [default: 100000]
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Lower weight bound L, e.g. 1 or 1/2 [default: from input, else 1]
    #[arg(long = "lower-bound", global = true)]
    pub lower_bound: Option<String>,
    /// Total weight w_T [default: from input; toy01 6; born 1]
    #[arg(long = "total-weight", global = true)]
    pub total_weight: Option<String>,
    /// Weight resolution dw [default: 1]
    #[arg(long, global = true)]
    pub dw: Option<String>,
    /// Comma-separated weights for check, in simplex order
    #[arg(long, global = true, value_delimiter = ',')]
    pub weights: Option<Vec<String>>,
    /// Entropic damping k [default: 0]
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Reduced Planck constant [default: 1]
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// Ensemble weight w_E [default: 1]
    #[arg(long = "w-e", global = true)]
    pub w_e: Option<f64>,
    /// Normalization zeta [default: 1 / ensemble size]
    #[arg(long, global = true)]
    pub zeta: Option<f64>,
    /// Entropy-to-action scale alpha [default: 1]
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Field entropy rate b in nats [default: ln 2]
    #[arg(long, global = true)]
    pub b: Option<f64>,
    /// Action model [default: free_particle]
    #[arg(long, global = true, value_parser = parse_model)]
    pub model: Option<ModelKind>,
    /// Mass [default: 1]
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Oscillator frequency [default: 0]
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Time step [default: 1]
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Lattice spacing [default: 1]
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Lattice label at position zero [default: 0]
    #[arg(long, global = true)]
    pub center: Option<f64>,
    /// Comma-separated per-path actions for the table model
    #[arg(long, global = true, value_delimiter = ',')]
    pub table: Option<Vec<f64>>,
    /// Lattice sites [default: 5]
    #[arg(long, global = true)]
    pub sites: Option<usize>,
    /// Time steps T [default: 4]
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Source site [default: 0]
    #[arg(long, global = true)]
    pub source: Option<usize>,
    /// Sink site [default: sites - 1]
    #[arg(long, global = true)]
    pub sink: Option<usize>,
    /// Monte Carlo samples [default: 100000]
    #[arg(long = "n-samples", global = true)]
    pub n_samples: Option<u64>,
    /// Include the path listing in the paths report
    #[arg(long = "list", global = true)]
    pub list_paths: bool,
    /// Comma-separated outcome probabilities |psi_r|^2 [default: 0.25,0.75]
    #[arg(long = "p", global = true, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    /// Collapse trials [default: 100000]
    #[arg(long = "n", global = true)]
    pub n_trials: Option<u64>,
    /// Comma-separated initial outcome weights [default: 0.25,0.75]
    #[arg(long = "initial", global = true, value_delimiter = ',')]
    pub initial_weights: Option<Vec<f64>>,
    /// Largest weight moved per walk step [default: 0.05]
    #[arg(long = "step-scale", global = true)]
    pub step_scale: Option<f64>,
    /// Outcomes at or below this weight are dead [default: 0]
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Walk step limit [default: 10000000]
    #[arg(long = "max-steps", global = true)]
    pub max_steps: Option<u64>,
    /// Entropy-gradient drift strength; 0 is unbiased [default: 0]
    #[arg(long, global = true)]
    pub drift: Option<f64>,
    /// Strands per cluster [default: 2]
    #[arg(long = "cluster-size", global = true)]
    pub cluster_size: Option<usize>,
    /// Comma-separated volumes [default: 2..10]
    #[arg(long, global = true, value_delimiter = ',')]
    pub volumes: Option<Vec<usize>>,
    /// Saturation scale u0 [default: 1]
    #[arg(long, global = true)]
    pub u0: Option<f64>,
    /// Grid start [default: -3]
    #[arg(long = "u-min", global = true, allow_hyphen_values = true)]
    pub u_min: Option<f64>,
    /// Grid end [default: 3]
    #[arg(long = "u-max", global = true, allow_hyphen_values = true)]
    pub u_max: Option<f64>,
    /// Grid points [default: 61]
    #[arg(long = "u-points", global = true)]
    pub u_points: Option<usize>,
    /// Log-odds at u = 0 [default: 0]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub d0: Option<f64>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown model `{s}` (free_particle, harmonic_oscillator, entropic, table)"))
}

macro_rules! overlay {
    ($p:expr, $f:expr, $($field:ident),*) => {
        $( if let Some(v) = $f.$field.clone() { $p.$field = v; } )*
    };
}

/// Loads a configuration file: a bare `RunConfig` or a report with a
/// `config` member.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::config(e.to_string()))?;
    let value = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))
}

/// Builds the resolved configuration from parsed flags.
pub fn from_cli(cli: &Cli) -> Result<Option<RunConfig>, CliError> {
    let base = match &cli.config {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let sub = match (&cli.command, &base) {
        (Some(cmd), _) => match cmd.subcommand() {
            Some(s) => s,
            None => return Ok(None),
        },
        (None, Some(b)) => b.subcommand,
        (None, None) => return Err(CliError::config("no subcommand given (see --help)")),
    };
    let mut config = match base {
        Some(mut b) => {
            b.subcommand = sub;
            b
        }
        None => RunConfig {
            subcommand: sub,
            input_path: None,
            parameters: Parameters::default(),
            output: OutputSpec {
                format: default_format(sub),
                path: None,
            },
            threads: None,
        },
    };
    if let Some(i) = &cli.input {
        config.input_path = Some(i.clone());
    }
    if let Some(f) = cli.format {
        config.output.format = f;
    }
    config.output.path = cli.output.clone();
    config.threads = cli.threads;
    let p = &mut config.parameters;
    if let Some(s) = cli.seed {
        p.seed = s;
    }
    if let Some(b) = cli.budget {
        p.budget = b;
    }
    let f = &cli.params;
    overlay!(
        p, f, cap, dw, k, hbar, w_e, alpha, b, model, m, omega, eps, a, center, sites, steps, source, n_samples,
        probs, n_trials, initial_weights, step_scale, threshold, max_steps, drift, cluster_size, volumes, u0, u_min,
        u_max, u_points, d0
    );
    if f.lower_bound.is_some() {
        p.lower_bound = f.lower_bound.clone();
    }
    if f.total_weight.is_some() {
        p.total_weight = f.total_weight.clone();
    }
    if f.weights.is_some() {
        p.weights = f.weights.clone();
    }
    if f.zeta.is_some() {
        p.zeta = f.zeta;
    }
    if f.table.is_some() {
        p.table = f.table.clone();
    }
    if f.sink.is_some() {
        p.sink = f.sink;
    }
    if f.list_paths {
        p.list_paths = true;
    }
    Ok(Some(config.resolved()))
}
