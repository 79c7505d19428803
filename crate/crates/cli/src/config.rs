use std::collections::BTreeMap;
use std::path::Path;

use burgers_alpha::{Error, Result};
use clap::ValueEnum;
use serde::Serialize;
use toml::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    ControlInviscid,
    ControlViscous,
    Smooth,
    Approx,
    LocalExact,
    Pipeline,
    AlphaLimit,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::ControlInviscid => "control-inviscid",
            Command::ControlViscous => "control-viscous",
            Command::Smooth => "smooth",
            Command::Approx => "approx",
            Command::LocalExact => "local-exact",
            Command::Pipeline => "pipeline",
            Command::AlphaLimit => "alpha-limit",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
    Floats,
    Text,
}

/// Every accepted key with its type.
const KEYS: &[(&str, Kind)] = &[
    ("L", Kind::Float),
    ("T", Kind::Float),
    ("n", Kind::Int),
    ("m", Kind::Int),
    ("alpha", Kind::Float),
    ("alphas", Kind::Floats),
    ("reference_alpha", Kind::Float),
    ("eta", Kind::Float),
    ("tau", Kind::Float),
    ("tau_fractions", Kind::Floats),
    ("N", Kind::Float),
    ("profile", Kind::Text),
    ("target", Kind::Text),
    ("system", Kind::Text),
    ("out", Kind::Text),
    ("stride", Kind::Int),
    ("tol", Kind::Float),
    ("max_iter", Kind::Int),
    ("startup_steps", Kind::Int),
    ("monitor_tol", Kind::Float),
    ("terminal_factor", Kind::Float),
    ("hum_ratio", Kind::Float),
    ("delta_hat", Kind::Float),
    ("delta_hat2", Kind::Float),
    ("delta_hat_v", Kind::Float),
];

pub fn valid_keys() -> Vec<&'static str> {
    KEYS.iter().map(|(k, _)| *k).collect()
}

/// Fully resolved run configuration, as written to `config.resolved.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub alphas: Vec<f64>,
    pub reference_alpha: f64,
    pub eta: f64,
    pub tau: Option<f64>,
    /// Approximate-control windows as fractions of `T`.
    pub tau_fractions: Vec<f64>,
    #[serde(rename = "N")]
    pub target_constant: f64,
    pub profile: String,
    pub target: String,
    pub system: String,
    pub out: String,
    pub stride: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub startup_steps: usize,
    pub monitor_tol: f64,
    pub terminal_factor: f64,
    pub hum_ratio: f64,
    pub delta_hat: Option<f64>,
    pub delta_hat2: Option<f64>,
    pub delta_hat_v: Option<f64>,
    /// Keys whose file value was replaced by a flag.
    pub overridden: Vec<String>,
    pub version: String,
}

fn defaults(cmd: Command) -> BTreeMap<String, Value> {
    let mut d: BTreeMap<String, Value> = BTreeMap::new();
    let mut set = |k: &str, v: Value| {
        d.insert(k.to_string(), v);
    };
    let floats = |v: &[f64]| Value::Array(v.iter().map(|x| Value::Float(*x)).collect());
    set("L", Value::Float(1.0));
    set("T", Value::Float(1.0));
    set("n", Value::Integer(201));
    set("alpha", Value::Float(0.1));
    set("alphas", floats(&[0.4, 0.2, 0.1, 0.05]));
    set("reference_alpha", Value::Float(1e-3));
    set("eta", Value::Float(0.25));
    set("tau_fractions", floats(&[0.32, 0.16, 0.08, 0.04]));
    set("N", Value::Float(0.3));
    set("profile", Value::String("sin:1:1".into()));
    set("target", Value::String("zero".into()));
    set("system", Value::String("viscous".into()));
    set("out", Value::String(cmd.name().into()));
    set("stride", Value::Integer(1));
    set("tol", Value::Float(1e-10));
    set("max_iter", Value::Integer(30));
    set("startup_steps", Value::Integer(2));
    set("monitor_tol", Value::Float(1e-8));
    set("terminal_factor", Value::Float(20.0));
    set("hum_ratio", Value::Float(1e-4));
    match cmd {
        Command::ControlInviscid => {
            set("profile", Value::String("sin:1:0.05".into()));
        }
        Command::Approx => {
            set("T", Value::Float(0.05));
            set("profile", Value::String("const:0.2".into()));
            set("target", Value::String("const:-0.1".into()));
        }
        Command::LocalExact => {
            set("T", Value::Float(0.5));
            set("profile", Value::String("const:0.3+sin:2:0.01".into()));
        }
        Command::Pipeline => {
            set("profile", Value::String("sin:2:1".into()));
        }
        Command::Sweep => {
            set("T", Value::Float(0.02));
            set("n", Value::Integer(401));
            set("alphas", floats(&[0.05, 0.5]));
            set("profile", Value::String("const:0.2".into()));
            set("target", Value::String("const:-0.1".into()));
        }
        _ => {}
    }
    d
}

fn normalize(key: &str, value: Value) -> Result<Value> {
    let kind = KEYS
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, kind)| *kind)
        .ok_or_else(|| unknown(key))?;
    let bad = |v: &Value| Error::config(format!("key '{key}' expects {kind:?}, got {v}"));
    let float = |v: &Value| match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    Ok(match kind {
        Kind::Float => Value::Float(float(&value).ok_or_else(|| bad(&value))?),
        Kind::Int => match value {
            Value::Integer(i) if i >= 0 => value,
            Value::Integer(_) => return Err(Error::config(format!("key '{key}' must be non-negative"))),
            _ => return Err(bad(&value)),
        },
        Kind::Floats => match &value {
            Value::Array(items) => Value::Array(
                items
                    .iter()
                    .map(|v| float(v).map(Value::Float).ok_or_else(|| bad(&value)))
                    .collect::<Result<_>>()?,
            ),
            v => Value::Array(vec![Value::Float(float(v).ok_or_else(|| bad(v))?)]),
        },
        Kind::Text => match value {
            Value::String(_) => value,
            _ => return Err(bad(&value)),
        },
    })
}

fn unknown(key: &str) -> Error {
    Error::config(format!("unknown key '{key}'; valid keys: {}", valid_keys().join(", ")))
}

/// Reads a flat TOML table of overrides.
pub fn read_file(path: &Path) -> Result<BTreeMap<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    Ok(table.into_iter().collect())
}

/// Applies file values, then flag values, over the command's defaults.
pub fn resolve(
    cmd: Command,
    file: BTreeMap<String, Value>,
    flags: Vec<(&'static str, Value)>,
) -> Result<RunConfig> {
    let mut map = defaults(cmd);
    let mut overridden = Vec::new();
    let file = file
        .into_iter()
        .map(|(k, v)| normalize(&k, v).map(|v| (k, v)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    for (k, v) in &file {
        map.insert(k.clone(), v.clone());
    }
    for (k, v) in flags {
        let v = normalize(k, v)?;
        if file.contains_key(k) && file[k] != v {
            overridden.push(k.to_string());
        }
        map.insert(k.to_string(), v);
    }
    let f = |k: &str| map.get(k).and_then(Value::as_float);
    let i = |k: &str| map.get(k).and_then(Value::as_integer).map(|v| v as usize);
    let s = |k: &str| map.get(k).and_then(Value::as_str).unwrap_or_default().to_string();
    let list = |k: &str| -> Vec<f64> {
        map.get(k)
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_float).collect())
            .unwrap_or_default()
    };
    let n = i("n").unwrap_or(0);
    let cfg = RunConfig {
        command: cmd,
        length: f("L").unwrap_or(f64::NAN),
        horizon: f("T").unwrap_or(f64::NAN),
        n,
        m: i("m").unwrap_or(2 * n.saturating_sub(1)),
        alpha: f("alpha").unwrap_or(f64::NAN),
        alphas: list("alphas"),
        reference_alpha: f("reference_alpha").unwrap_or(f64::NAN),
        eta: f("eta").unwrap_or(f64::NAN),
        tau: f("tau"),
        tau_fractions: list("tau_fractions"),
        target_constant: f("N").unwrap_or(f64::NAN),
        profile: s("profile"),
        target: s("target"),
        system: s("system"),
        out: s("out"),
        stride: i("stride").unwrap_or(1),
        tol: f("tol").unwrap_or(f64::NAN),
        max_iter: i("max_iter").unwrap_or(0),
        startup_steps: i("startup_steps").unwrap_or(0),
        monitor_tol: f("monitor_tol").unwrap_or(f64::NAN),
        terminal_factor: f("terminal_factor").unwrap_or(f64::NAN),
        hum_ratio: f("hum_ratio").unwrap_or(f64::NAN),
        delta_hat: f("delta_hat"),
        delta_hat2: f("delta_hat2"),
        delta_hat_v: f("delta_hat_v"),
        overridden,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("L", self.length),
            ("T", self.horizon),
            ("eta", self.eta),
            ("reference_alpha", self.reference_alpha),
            ("tol", self.tol),
            ("terminal_factor", self.terminal_factor),
            ("hum_ratio", self.hum_ratio),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{k} must be positive and finite, got {v}")));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::config(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if self.n < 3 {
            return Err(Error::config(format!("n must be at least 3, got {}", self.n)));
        }
        if self.m < 1 {
            return Err(Error::config("m must be at least 1"));
        }
        if !(self.eta < 0.5 * self.length) {
            return Err(Error::config(format!("eta must satisfy 0 < eta < L/2, got eta = {} with L = {}", self.eta, self.length)));
        }
        if !(self.monitor_tol >= 0.0) || !self.target_constant.is_finite() {
            return Err(Error::config("monitor_tol must be non-negative and N finite"));
        }
        if let Some(t) = self.tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config(format!("tau must be positive, got {t}")));
            }
        }
        for (k, v) in [("delta_hat", self.delta_hat), ("delta_hat2", self.delta_hat2), ("delta_hat_v", self.delta_hat_v)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config(format!("{k} must be positive, got {v}")));
                }
            }
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::config("alphas must be a non-empty list of positive values"));
        }
        if self.tau_fractions.is_empty() || self.tau_fractions.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::config("tau_fractions must be a non-empty list in (0, 1]"));
        }
        if !matches!(self.system.as_str(), "viscous" | "inviscid") {
            return Err(Error::config(format!("system must be 'viscous' or 'inviscid', got '{}'", self.system)));
        }
        if self.out.is_empty() {
            return Err(Error::config("out must not be empty"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("max_iter must be at least 1"));
        }
        crate::profile::Profile::parse(&self.profile)?;
        crate::profile::Profile::parse(&self.target)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_are_recorded() {
        let mut file = BTreeMap::new();
        file.insert("n".to_string(), Value::Integer(51));
        file.insert("T".to_string(), Value::Integer(2));
        let cfg = resolve(Command::Simulate, file, vec![("n", Value::Integer(41))]).unwrap();
        assert_eq!(cfg.n, 41);
        assert_eq!(cfg.m, 80);
        assert_eq!(cfg.horizon, 2.0);
        assert_eq!(cfg.overridden, vec!["n".to_string()]);
        assert_eq!(cfg.eta, 0.25);
        assert_eq!(cfg.alpha, 0.1);
    }

    #[test]
    fn unknown_keys_list_the_valid_ones() {
        let err = normalize("gamma", Value::Float(1.0)).unwrap_err().to_string();
        assert!(err.contains("gamma") && err.contains("alpha") && err.contains("eta"));
    }

    #[test]
    fn degenerate_meshes_and_types_are_rejected() {
        assert!(resolve(Command::Simulate, BTreeMap::new(), vec![("n", Value::Integer(2))]).is_err());
        assert!(normalize("n", Value::Float(3.5)).is_err());
        assert!(normalize("profile", Value::Integer(1)).is_err());
        assert_eq!(normalize("alphas", Value::Integer(1)).unwrap(), Value::Array(vec![Value::Float(1.0)]));
    }
}
