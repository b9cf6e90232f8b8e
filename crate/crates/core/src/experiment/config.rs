//! Flat `key = value` experiment configuration with `--set key=value`
//! overrides.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a trailing comment. Numbers accept a rational form `a/b` so that
//! `q = 4/3` is exact to rounding. Lists are comma-separated.

use crate::error::{Result, SccError};
use crate::interferometer::SequenceKind;
use crate::model::ModelParams;
use std::f64::consts::PI;
use std::path::PathBuf;

/// Raw `(key, value)` pairs in file order.
pub type RawConfig = Vec<(String, String)>;

fn config_err(msg: impl Into<String>) -> SccError {
    SccError::Config(msg.into())
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn split_pair(text: &str) -> Option<(String, String)> {
    let (key, value) = text.split_once('=')?;
    let key = key.trim();
    let value = value.trim();
    if !valid_key(key) || value.is_empty() {
        return None;
    }
    Some((key.to_string(), value.to_string()))
}

/// Parses a config file. Keys may appear at most once.
pub fn parse_config(text: &str) -> Result<RawConfig> {
    let mut pairs: RawConfig = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let content = line
            .split_once('#')
            .map_or(line, |(before, _)| before)
            .trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = split_pair(content).ok_or_else(|| {
            config_err(format!(
                "line {}: expected `key = value`, got {:?}",
                no + 1,
                line.trim()
            ))
        })?;
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(config_err(format!(
                "line {}: duplicate key `{key}`",
                no + 1
            )));
        }
        pairs.push((key, value));
    }
    Ok(pairs)
}

/// Parses one `key=value` override.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    split_pair(text).ok_or_else(|| config_err(format!("override {text:?} is not `key=value`")))
}

/// Replaces or appends each override in `raw`.
pub fn apply_overrides(raw: &mut RawConfig, overrides: &[(String, String)]) {
    for (key, value) in overrides {
        match raw.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value.clone(),
            None => raw.push((key.clone(), value.clone())),
        }
    }
}

/// Parses `x` or `a/b`.
pub fn parse_number(text: &str) -> Result<f64> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| config_err(format!("bad number {text:?}")))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| config_err(format!("bad number {text:?}")))?;
            if b == 0.0 {
                return Err(config_err(format!("zero denominator in {text:?}")));
            }
            a / b
        }
        None => text
            .parse()
            .map_err(|_| config_err(format!("bad number {text:?}")))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(config_err(format!("non-finite number {text:?}")))
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(parse_number).collect()
}

fn parse_count(text: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| config_err(format!("bad count {text:?}")))
}

fn parse_bool(text: &str) -> Result<bool> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(config_err(format!("bad boolean {other:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceChoice {
    Free,
    Quasifree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_bosons: usize,
    pub lambda: f64,
    pub q: f64,
    pub nu0: usize,
    pub nu1: usize,

    pub sequence: SequenceChoice,
    pub omega: f64,
    pub omega0: f64,
    pub q_prime: f64,
    pub t: f64,

    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    /// Couplings for the seed sweep; `q` alone when empty.
    pub q_list: Vec<f64>,

    pub u_min: f64,
    pub u_max: f64,
    pub u_steps: usize,

    pub phi_min: f64,
    pub phi_max: f64,
    pub phi_steps: usize,
    pub delta: f64,

    pub t_list: Vec<f64>,
    pub q_prime_list: Vec<f64>,
    pub include_free: bool,

    /// Seeding time at which each quasifree `Ω` is calibrated in the `η₁` sweep.
    pub calibration_t: f64,
    /// Calibration window; `16π/|q'|` when absent.
    pub calibration_u_max: Option<f64>,
    pub calibration_steps: usize,

    /// Added to every rapidity offset before validation (negative testing).
    pub perturb_rapidity: f64,

    pub output: PathBuf,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_bosons: 100,
            lambda: 1.0,
            q: 4.0 / 3.0,
            nu0: 0,
            nu1: 0,
            sequence: SequenceChoice::Free,
            omega: 1000.0,
            omega0: 0.0,
            q_prime: 1000.0,
            t: 0.006,
            t_min: 0.0,
            t_max: 0.1,
            t_steps: 201,
            q_list: Vec::new(),
            u_min: 0.0,
            u_max: 0.03,
            u_steps: 1024,
            phi_min: 0.0,
            phi_max: 2.0 * PI,
            phi_steps: 629,
            delta: 1e-5,
            t_list: vec![0.002, 0.004, 0.006, 0.008, 0.01, 0.015, 0.02, 0.025, 0.03],
            q_prime_list: vec![125.0, 250.0, 500.0, 1000.0],
            include_free: true,
            calibration_t: 0.006,
            calibration_u_max: None,
            calibration_steps: 2048,
            perturb_rapidity: 0.0,
            output: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    pub fn from_pairs(pairs: &RawConfig) -> Result<Self> {
        let mut cfg = Self::default();
        for (key, value) in pairs {
            let v = value.as_str();
            match key.as_str() {
                "n_bosons" => cfg.n_bosons = parse_count(v)?,
                "lambda" => cfg.lambda = parse_number(v)?,
                "q" => cfg.q = parse_number(v)?,
                "nu0" => cfg.nu0 = parse_count(v)?,
                "nu1" => cfg.nu1 = parse_count(v)?,
                "sequence" => {
                    cfg.sequence = match v {
                        "free" => SequenceChoice::Free,
                        "quasifree" => SequenceChoice::Quasifree,
                        _ => {
                            return Err(config_err(format!(
                                "sequence must be free or quasifree, got {v:?}"
                            )))
                        }
                    }
                }
                "omega" => cfg.omega = parse_number(v)?,
                "omega0" => cfg.omega0 = parse_number(v)?,
                "q_prime" => cfg.q_prime = parse_number(v)?,
                "t" => cfg.t = parse_number(v)?,
                "t_min" => cfg.t_min = parse_number(v)?,
                "t_max" => cfg.t_max = parse_number(v)?,
                "t_steps" => cfg.t_steps = parse_count(v)?,
                "q_list" => cfg.q_list = parse_list(v)?,
                "u_min" => cfg.u_min = parse_number(v)?,
                "u_max" => cfg.u_max = parse_number(v)?,
                "u_steps" => cfg.u_steps = parse_count(v)?,
                "phi_min" => cfg.phi_min = parse_number(v)?,
                "phi_max" => cfg.phi_max = parse_number(v)?,
                "phi_steps" => cfg.phi_steps = parse_count(v)?,
                "delta" => cfg.delta = parse_number(v)?,
                "t_list" => cfg.t_list = parse_list(v)?,
                "q_prime_list" => cfg.q_prime_list = parse_list(v)?,
                "include_free" => cfg.include_free = parse_bool(v)?,
                "calibration_t" => cfg.calibration_t = parse_number(v)?,
                "calibration_u_max" => cfg.calibration_u_max = Some(parse_number(v)?),
                "calibration_steps" => cfg.calibration_steps = parse_count(v)?,
                "perturb_rapidity" => cfg.perturb_rapidity = parse_number(v)?,
                "output" => cfg.output = PathBuf::from(v),
                "format" => {
                    cfg.format = match v {
                        "csv" => OutputFormat::Csv,
                        "json" => OutputFormat::Json,
                        _ => {
                            return Err(config_err(format!(
                                "format must be csv or json, got {v:?}"
                            )))
                        }
                    }
                }
                other => return Err(config_err(format!("unknown key `{other}`"))),
            }
        }
        cfg.check_common()?;
        Ok(cfg)
    }

    /// Parses a config file and applies overrides on top.
    pub fn load(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut raw = parse_config(text)?;
        apply_overrides(&mut raw, overrides);
        Self::from_pairs(&raw)
    }

    fn check_common(&self) -> Result<()> {
        self.model()?;
        if !(self.t >= 0.0) {
            return Err(config_err(format!("t = {} must be >= 0", self.t)));
        }
        if self.sequence == SequenceChoice::Quasifree && self.q_prime == 0.0 {
            return Err(config_err("q_prime must be nonzero"));
        }
        if !(self.delta > 0.0) {
            return Err(config_err(format!("delta = {} must be > 0", self.delta)));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::with_seniorities(self.n_bosons, self.lambda, self.q, self.nu0, self.nu1)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn model_at(&self, q: f64) -> Result<ModelParams> {
        self.model()?
            .with_q(q)
            .map_err(|e| config_err(e.to_string()))
    }

    pub fn sequence_kind(&self) -> SequenceKind {
        match self.sequence {
            SequenceChoice::Free => SequenceKind::Free {
                omega: self.omega,
                omega0: self.omega0,
            },
            SequenceChoice::Quasifree => SequenceKind::Quasifree {
                q_prime: self.q_prime,
            },
        }
    }

    pub fn calibration_window(&self, q_prime: f64) -> f64 {
        self.calibration_u_max.unwrap_or(16.0 * PI / q_prime.abs())
    }

    fn check_range(name: &str, lo: f64, hi: f64, steps: usize) -> Result<()> {
        if steps < 2 {
            return Err(config_err(format!("{name}_steps = {steps} must be >= 2")));
        }
        if !(hi > lo) {
            return Err(config_err(format!("{name} range [{lo}, {hi}] is empty")));
        }
        Ok(())
    }

    pub fn check_seed_sweep(&self) -> Result<()> {
        Self::check_range("t", self.t_min, self.t_max, self.t_steps)?;
        if self.t_min < 0.0 {
            return Err(config_err("t_min must be >= 0"));
        }
        for &q in &self.q_list {
            self.model_at(q)?;
        }
        Ok(())
    }

    pub fn check_dwell_sweep(&self) -> Result<()> {
        Self::check_range("u", self.u_min, self.u_max, self.u_steps)?;
        if self.u_min < 0.0 {
            return Err(config_err("u_min must be >= 0"));
        }
        Ok(())
    }

    pub fn check_phase_sweep(&self) -> Result<()> {
        Self::check_range("phi", self.phi_min, self.phi_max, self.phi_steps)?;
        if self.phi_min < 0.0 {
            return Err(config_err("phi_min must be >= 0"));
        }
        self.check_calibration()
    }

    pub fn check_eta1_sweep(&self) -> Result<()> {
        if self.t_list.is_empty() {
            return Err(config_err("t_list is empty"));
        }
        if self.t_list.iter().any(|&t| !(t > 0.0)) {
            return Err(config_err("t_list entries must be > 0"));
        }
        if self.q_prime_list.is_empty() && !self.include_free {
            return Err(config_err("q_prime_list is empty and include_free = false"));
        }
        if self.q_prime_list.iter().any(|&q| q == 0.0) {
            return Err(config_err("q_prime_list entries must be nonzero"));
        }
        self.check_calibration()
    }

    fn check_calibration(&self) -> Result<()> {
        if self.calibration_steps < 64 {
            return Err(config_err("calibration_steps must be >= 64"));
        }
        if let Some(u) = self.calibration_u_max {
            if !(u > 0.0) {
                return Err(config_err("calibration_u_max must be > 0"));
            }
        }
        if !(self.calibration_t >= 0.0) {
            return Err(config_err("calibration_t must be >= 0"));
        }
        Ok(())
    }

    /// Every key with its effective value, in a fixed order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        let seq = match self.sequence {
            SequenceChoice::Free => "free",
            SequenceChoice::Quasifree => "quasifree",
        };
        let q_list = if self.q_list.is_empty() {
            vec![self.q]
        } else {
            self.q_list.clone()
        };
        let entries: Vec<(&str, String)> = vec![
            ("n_bosons", self.n_bosons.to_string()),
            ("lambda", self.lambda.to_string()),
            ("q", self.q.to_string()),
            ("nu0", self.nu0.to_string()),
            ("nu1", self.nu1.to_string()),
            ("sequence", seq.to_string()),
            ("omega", self.omega.to_string()),
            ("omega0", self.omega0.to_string()),
            ("q_prime", self.q_prime.to_string()),
            ("t", self.t.to_string()),
            ("t_min", self.t_min.to_string()),
            ("t_max", self.t_max.to_string()),
            ("t_steps", self.t_steps.to_string()),
            ("q_list", join(&q_list)),
            ("u_min", self.u_min.to_string()),
            ("u_max", self.u_max.to_string()),
            ("u_steps", self.u_steps.to_string()),
            ("phi_min", self.phi_min.to_string()),
            ("phi_max", self.phi_max.to_string()),
            ("phi_steps", self.phi_steps.to_string()),
            ("delta", self.delta.to_string()),
            ("t_list", join(&self.t_list)),
            ("q_prime_list", join(&self.q_prime_list)),
            ("include_free", self.include_free.to_string()),
            ("calibration_t", self.calibration_t.to_string()),
            (
                "calibration_u_max",
                self.calibration_u_max
                    .map_or_else(|| "auto".to_string(), |u| u.to_string()),
            ),
            ("calibration_steps", self.calibration_steps.to_string()),
            ("perturb_rapidity", self.perturb_rapidity.to_string()),
            ("output", self.output.display().to_string()),
            ("format", self.format.extension().to_string()),
        ];
        entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}
