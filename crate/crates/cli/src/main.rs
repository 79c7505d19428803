//! Command-line driver for the burgers-alpha toolkit.

mod commands;
mod config;
mod profile;

use std::path::PathBuf;
use std::process::ExitCode;

use burgers_alpha::Error;
use clap::Parser;
use serde_json::json;
use toml::Value;

use commands::{write_json, Run};
use config::{Command, RunConfig};

/// Environment variable naming the directory that holds run outputs.
const OUT_ROOT_VAR: &str = "BURGERS_ALPHA_OUT";

#[derive(Debug, Parser)]
#[command(name = "burgers-alpha", version, about = "Controllability experiments for the Burgers-alpha systems")]
struct Cli {
    command: Command,
    /// Flat TOML file of configuration keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    length: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    n: Option<i64>,
    #[arg(long)]
    m: Option<i64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    reference_alpha: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    tau_fractions: Option<Vec<f64>>,
    /// Constant target state.
    #[arg(long = "N")]
    target_constant: Option<f64>,
    /// zero | const:c | sin:k:amp | bump:center:width:amp | csv:path, summed with '+'.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    target: Option<String>,
    /// viscous | inviscid (simulate only).
    #[arg(long)]
    system: Option<String>,
    /// Output directory, relative to the output root.
    #[arg(long)]
    out: Option<String>,
    /// Write every stride-th trajectory frame.
    #[arg(long)]
    stride: Option<i64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<i64>,
    #[arg(long)]
    startup_steps: Option<i64>,
    #[arg(long)]
    monitor_tol: Option<f64>,
    #[arg(long)]
    terminal_factor: Option<f64>,
    #[arg(long)]
    hum_ratio: Option<f64>,
    #[arg(long)]
    delta_hat: Option<f64>,
    #[arg(long)]
    delta_hat2: Option<f64>,
    #[arg(long)]
    delta_hat_v: Option<f64>,
}

impl Cli {
    fn flags(&self) -> Vec<(&'static str, Value)> {
        let mut out = Vec::new();
        let float = |out: &mut Vec<_>, k, v: Option<f64>| {
            if let Some(v) = v {
                out.push((k, Value::Float(v)));
            }
        };
        let int = |out: &mut Vec<_>, k, v: Option<i64>| {
            if let Some(v) = v {
                out.push((k, Value::Integer(v)));
            }
        };
        let text = |out: &mut Vec<_>, k, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, Value::String(v.clone())));
            }
        };
        let list = |out: &mut Vec<_>, k, v: &Option<Vec<f64>>| {
            if let Some(v) = v {
                out.push((k, Value::Array(v.iter().map(|x| Value::Float(*x)).collect())));
            }
        };
        float(&mut out, "L", self.length);
        float(&mut out, "T", self.horizon);
        int(&mut out, "n", self.n);
        int(&mut out, "m", self.m);
        float(&mut out, "alpha", self.alpha);
        list(&mut out, "alphas", &self.alphas);
        float(&mut out, "reference_alpha", self.reference_alpha);
        float(&mut out, "eta", self.eta);
        float(&mut out, "tau", self.tau);
        list(&mut out, "tau_fractions", &self.tau_fractions);
        float(&mut out, "N", self.target_constant);
        text(&mut out, "profile", &self.profile);
        text(&mut out, "target", &self.target);
        text(&mut out, "system", &self.system);
        text(&mut out, "out", &self.out);
        int(&mut out, "stride", self.stride);
        float(&mut out, "tol", self.tol);
        int(&mut out, "max_iter", self.max_iter);
        int(&mut out, "startup_steps", self.startup_steps);
        float(&mut out, "monitor_tol", self.monitor_tol);
        float(&mut out, "terminal_factor", self.terminal_factor);
        float(&mut out, "hum_ratio", self.hum_ratio);
        float(&mut out, "delta_hat", self.delta_hat);
        float(&mut out, "delta_hat2", self.delta_hat2);
        float(&mut out, "delta_hat_v", self.delta_hat_v);
        out
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_MONITOR: u8 = 4;
const EXIT_NONCONVERGENCE: u8 = 5;

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) | Error::GridMismatch(_) => EXIT_CONFIG,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_SOLVER,
    }
}

fn resolve(cli: &Cli) -> burgers_alpha::Result<RunConfig> {
    let file = match &cli.config {
        Some(path) => config::read_file(path)?,
        None => Default::default(),
    };
    config::resolve(cli.command, file, cli.flags())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let root = std::env::var_os(OUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
    let dir = root.join(&cfg.out);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(EXIT_SOLVER);
    }
    if let Err(e) = write_json(&dir, "config.resolved.json", &cfg) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_SOLVER);
    }

    let mut run = Run::new(&cfg, dir.clone());
    let result = run.execute();
    let mut failed: Vec<&str> = run.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if let Err(Error::NonConvergence { what, .. }) = result.as_ref().map_err(Error::root) {
        failed.push(what);
    }
    let code = match &result {
        Err(e) => exit_code(e),
        Ok(()) if !failed.is_empty() => EXIT_MONITOR,
        Ok(()) => 0,
    };
    let verdict = json!({
        "command": cfg.command,
        "pass": code == 0,
        "exit_code": code,
        "error": result.as_ref().err().map(|e| e.to_string()),
        "failed": failed,
        "checks": run.checks,
        "artifacts": run.artifacts,
    });
    if let Err(e) = write_json(&dir, "verdict.json", &verdict) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_SOLVER);
    }
    match &result {
        Err(e) => eprintln!("error: {e}"),
        Ok(()) if !failed.is_empty() => eprintln!("monitor violation: {}", failed.join(", ")),
        Ok(()) => {}
    }
    println!("{}: {} ({})", cfg.command.name(), if code == 0 { "pass" } else { "fail" }, dir.display());
    ExitCode::from(code)
}
