//! Flat `key = value` configuration. Later sources override earlier ones:
//! defaults, then the config file, then `--set` pairs, then dedicated flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Yamabe,
    Prescribe,
    Cheeger,
    Canonical,
    Approx,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Yamabe => "yamabe",
            Command::Prescribe => "prescribe",
            Command::Cheeger => "cheeger",
            Command::Canonical => "canonical",
            Command::Approx => "approx",
        }
    }

    fn default_preset(self) -> &'static str {
        match self {
            Command::Cheeger => "su2-biinvariant",
            Command::Canonical => "negative-round",
            _ => "round-fiber",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "classify" => Command::Classify,
            "yamabe" => Command::Yamabe,
            "prescribe" => Command::Prescribe,
            "cheeger" => Command::Cheeger,
            "canonical" => Command::Canonical,
            "approx" => Command::Approx,
            _ => return Err(format!("unknown command '{s}'")),
        })
    }
}

/// Every key the runner understands. Keys absent from a run keep their
/// preset or solver defaults.
pub const KEYS: &[&str] = &[
    "model.preset",
    "model.N",
    "model.L",
    "model.k",
    "model.cF",
    "model.f",
    "solver.tol",
    "solver.max_iter",
    "run.seed",
    "run.outdir",
    "yamabe.c",
    "yamabe.negative",
    "prescribe.target",
    "prescribe.p",
    "prescribe.eps",
    "cheeger.t_max",
    "cheeger.steps",
    "canonical.sweep",
    "approx.f",
    "approx.target",
    "approx.p",
    "approx.eps",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub command: Command,
    pub preset: String,
    pub n: usize,
    pub length: Option<f64>,
    pub k: Option<usize>,
    pub c_f: Option<f64>,
    pub f: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub outdir: PathBuf,
    pub yamabe_c: Option<f64>,
    pub yamabe_negative: bool,
    pub prescribe_target: String,
    pub prescribe_p: f64,
    pub prescribe_eps: f64,
    pub cheeger_t_max: f64,
    pub cheeger_steps: usize,
    pub canonical_sweep: (f64, f64, usize),
    pub approx_f: Option<String>,
    pub approx_target: Option<String>,
    pub approx_p: f64,
    pub approx_eps: f64,
    /// Every explicitly given key with its raw value.
    pub given: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("{origin}:{}: expected 'key = value', got '{line}'", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_set(arg: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = arg.split_once('=').ok_or_else(|| bad(format!("--set expects KEY=VALUE, got '{arg}'")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| bad(format!("{key}: cannot parse '{v}'")))
}

fn positive(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = num(key, v)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(format!("{key} must be positive and finite, got {v}")))
    }
}

fn flag(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(format!("{key}: expected true or false, got '{v}'"))),
    }
}

/// `s_min:s_max:steps`.
pub fn parse_sweep(v: &str) -> Result<(f64, f64, usize), ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(format!("canonical.sweep expects s_min:s_max:steps, got '{v}'")));
    }
    let lo = positive("canonical.sweep s_min", parts[0])?;
    let hi = positive("canonical.sweep s_max", parts[1])?;
    let steps: usize = num("canonical.sweep steps", parts[2])?;
    if hi < lo || steps < 2 {
        return Err(bad(format!("canonical.sweep needs s_min <= s_max and at least 2 steps, got '{v}'")));
    }
    Ok((lo, hi, steps))
}

impl ScenarioConfig {
    pub fn defaults(command: Command) -> Self {
        ScenarioConfig {
            command,
            preset: command.default_preset().to_string(),
            n: 128,
            length: None,
            k: None,
            c_f: None,
            f: None,
            tol: None,
            max_iter: None,
            seed: 0,
            outdir: PathBuf::from("scalab-out"),
            yamabe_c: None,
            yamabe_negative: false,
            prescribe_target: "6*(1+0.1*sin(r))".to_string(),
            prescribe_p: 2.0,
            prescribe_eps: 1e-2,
            cheeger_t_max: 1e4,
            cheeger_steps: 41,
            canonical_sweep: (0.05, 2.0, 40),
            approx_f: None,
            approx_target: None,
            approx_p: 2.0,
            approx_eps: 1e-2,
            given: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "model.preset" => self.preset = v.to_string(),
            "model.N" => {
                let n: usize = num(key, v)?;
                if n < 16 {
                    return Err(bad(format!("model.N must be at least 16, got {n}")));
                }
                self.n = n;
            }
            "model.L" => self.length = Some(positive(key, v)?),
            "model.k" => self.k = Some(num(key, v)?),
            "model.cF" => self.c_f = Some(num(key, v)?),
            "model.f" => self.f = Some(v.to_string()),
            "solver.tol" => self.tol = Some(positive(key, v)?),
            "solver.max_iter" => self.max_iter = Some(num(key, v)?),
            "run.seed" => self.seed = num(key, v)?,
            "run.outdir" => self.outdir = PathBuf::from(v),
            "yamabe.c" => self.yamabe_c = Some(num(key, v)?),
            "yamabe.negative" => self.yamabe_negative = flag(key, v)?,
            "prescribe.target" => self.prescribe_target = v.to_string(),
            "prescribe.p" => self.prescribe_p = positive(key, v)?,
            "prescribe.eps" => self.prescribe_eps = positive(key, v)?,
            "cheeger.t_max" => self.cheeger_t_max = positive(key, v)?,
            "cheeger.steps" => {
                self.cheeger_steps = num(key, v)?;
                if self.cheeger_steps < 2 {
                    return Err(bad("cheeger.steps must be at least 2"));
                }
            }
            "canonical.sweep" => self.canonical_sweep = parse_sweep(v)?,
            "approx.f" => self.approx_f = Some(v.to_string()),
            "approx.target" => self.approx_target = Some(v.to_string()),
            "approx.p" => self.approx_p = positive(key, v)?,
            "approx.eps" => self.approx_eps = positive(key, v)?,
            _ => return Err(bad(format!("unknown config key '{key}'"))),
        }
        self.given.insert(key.to_string(), v.to_string());
        Ok(())
    }

    /// Defaults, then the file, then the overrides in order.
    pub fn resolve(command: Command, file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(command);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
            for (k, v) in parse_pairs(&text, &path.display().to_string())? {
                cfg.set(&k, &v)?;
            }
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        if (cfg.prescribe_p < 1.0) || (cfg.approx_p < 1.0) {
            return Err(bad("p must be at least 1"));
        }
        Ok(cfg)
    }

    /// Resolved values of every key, for the report.
    pub fn echo(&self) -> Vec<(String, String)> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "default".to_string());
        let (lo, hi, steps) = self.canonical_sweep;
        vec![
            ("model.preset".into(), self.preset.clone()),
            ("model.N".into(), self.n.to_string()),
            ("model.L".into(), opt(self.length.map(|v| v.to_string()))),
            ("model.k".into(), opt(self.k.map(|v| v.to_string()))),
            ("model.cF".into(), opt(self.c_f.map(|v| v.to_string()))),
            ("model.f".into(), opt(self.f.clone())),
            ("solver.tol".into(), opt(self.tol.map(|v| v.to_string()))),
            ("solver.max_iter".into(), opt(self.max_iter.map(|v| v.to_string()))),
            ("run.seed".into(), self.seed.to_string()),
            ("yamabe.c".into(), opt(self.yamabe_c.map(|v| v.to_string()))),
            ("yamabe.negative".into(), self.yamabe_negative.to_string()),
            ("prescribe.target".into(), self.prescribe_target.clone()),
            ("prescribe.p".into(), self.prescribe_p.to_string()),
            ("prescribe.eps".into(), self.prescribe_eps.to_string()),
            ("cheeger.t_max".into(), self.cheeger_t_max.to_string()),
            ("cheeger.steps".into(), self.cheeger_steps.to_string()),
            ("canonical.sweep".into(), format!("{lo}:{hi}:{steps}")),
            ("approx.f".into(), opt(self.approx_f.clone())),
            ("approx.target".into(), opt(self.approx_target.clone())),
            ("approx.p".into(), self.approx_p.to_string()),
            ("approx.eps".into(), self.approx_eps.to_string()),
        ]
    }
}
