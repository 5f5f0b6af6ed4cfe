//! `nvlab` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical error. On failure
//! a single JSON error record is written to stderr.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{parse_complex, Config, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] nvlab::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) if e.is_config() => 2,
            CliError::Core(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => e.kind(),
        }
    }

    fn record(&self) -> serde_json::Value {
        let detail = match self {
            CliError::Core(e) => serde_json::to_value(e).unwrap_or(serde_json::Value::Null),
            _ => serde_json::Value::Null,
        };
        json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
            "detail": detail,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "nvlab", version, about = "Numerical experiments for the Novikov-Veselov equation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// flat TOML config; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// write here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// p1, p2, zero, constant or sampled
    #[arg(long, global = true)]
    profile: Option<String>,
    /// CSV of Re l, Im l, Re b, Im b for the sampled profile
    #[arg(long, global = true)]
    profile_file: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    r_min: Option<f64>,
    #[arg(long, global = true)]
    r_max: Option<f64>,
    #[arg(long, global = true)]
    radial_panels: Option<usize>,
    #[arg(long, global = true)]
    angular_panels: Option<usize>,
    /// Gauss order per panel
    #[arg(long, global = true)]
    order: Option<usize>,
    /// node budget per grid
    #[arg(long, global = true)]
    budget: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the stationary points of the phase at u = z/t.
    Classify {
        #[arg(long = "u", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        u: Vec<[f64; 2]>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Linearized solution integral I(t, u).
    Linsolve {
        #[arg(long = "t", required = true, allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long = "u", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        u: Vec<[f64; 2]>,
    },
    /// Sup over u of |I(t, u)| for each t.
    Supscan {
        #[arg(long = "t-list", required = true, value_delimiter = ',', allow_hyphen_values = true)]
        t_list: Vec<f64>,
        /// scan these u instead of the default grid
        #[arg(long = "u", allow_hyphen_values = true, value_parser = parse_complex)]
        u: Vec<[f64; 2]>,
    },
    /// Power-law fit of a decay series read from CSV.
    Decayfit {
        #[arg(long)]
        input: PathBuf,
        /// value column; `t` is always the time column
        #[arg(long)]
        column: Option<String>,
    },
    /// Reconstruct v(z, t) by the dbar method.
    Reconstruct {
        #[arg(long = "z", required = true, allow_hyphen_values = true, value_parser = parse_complex)]
        z: Vec<[f64; 2]>,
        #[arg(long = "t", required = true, allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Compare t^{3/4} I(t, -18) against the leading-order constant.
    Optimality {
        #[arg(long = "t-list", required = true, value_delimiter = ',', allow_hyphen_values = true)]
        t_list: Vec<f64>,
    },
}

impl Cli {
    fn name(&self) -> &'static str {
        match self.command {
            Command::Classify { .. } => "classify",
            Command::Linsolve { .. } => "linsolve",
            Command::Supscan { .. } => "supscan",
            Command::Decayfit { .. } => "decayfit",
            Command::Reconstruct { .. } => "reconstruct",
            Command::Optimality { .. } => "optimality",
        }
    }

    fn flags(&self) -> Config {
        let c = &self.common;
        let mut cfg = Config {
            profile: c.profile.clone(),
            profile_file: c.profile_file.clone(),
            theta: c.theta,
            format: c.format,
            output: c.output.clone(),
            r_min: c.r_min,
            r_max: c.r_max,
            radial_panels: c.radial_panels,
            angular_panels: c.angular_panels,
            order: c.order,
            budget: c.budget,
            ..Config::default()
        };
        let some = |v: &Vec<f64>| (!v.is_empty()).then(|| v.clone());
        let somec = |v: &Vec<[f64; 2]>| (!v.is_empty()).then(|| v.clone());
        match &self.command {
            Command::Classify { u, tol } => {
                cfg.u_list = somec(u);
                cfg.tol = *tol;
            }
            Command::Linsolve { t, u } => {
                cfg.t_list = some(t);
                cfg.u_list = somec(u);
            }
            Command::Supscan { t_list, u } => {
                cfg.t_list = some(t_list);
                cfg.u_list = somec(u);
            }
            Command::Decayfit { input, column } => {
                cfg.input = Some(input.clone());
                cfg.column = column.clone();
            }
            Command::Reconstruct { z, t, depth } => {
                cfg.z_list = somec(z);
                cfg.t_list = some(t);
                cfg.depth = *depth;
            }
            Command::Optimality { t_list } => cfg.t_list = some(t_list),
        }
        cfg
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NV_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::Config(format!("NV_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(format!("cannot set up {n} threads: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    cfg.merge(&cli.flags());
    let cfg = cfg.resolve(cli.name())?;
    let table = commands::run(cli.name(), &cfg)?;
    let bytes = output::render(&table, &cfg)?;
    output::emit(&bytes, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Config(e.to_string().trim_end().to_string());
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.record());
            ExitCode::from(err.exit_code())
        }
    }
}
