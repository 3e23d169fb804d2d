//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use thiserror::Error;

use crate::numfmt::fmt_f64;

/// Experiments the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Simulate,
    Dirac,
    Predict,
    Spectrum,
    SweepDelay,
    Fig1,
    Fig2,
    Fig3,
    Mechanism,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Dirac => "dirac",
            Experiment::Predict => "predict",
            Experiment::Spectrum => "spectrum",
            Experiment::SweepDelay => "sweep-delay",
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Mechanism => "mechanism",
        }
    }

    /// Overrides applied on top of the global defaults before any file or
    /// command-line value.
    fn preset(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::Fig1 => &[("omega", "1"), ("jump", "0.1"), ("delta_t", "0.5"), ("theta0", "0.75,0.3"), ("t_end", "20")],
            Experiment::Dirac => &[("omega", "1"), ("jump", "0.1"), ("delta_t", "0.5"), ("t_end", "20")],
            Experiment::Mechanism => &[("phi0", "0.1"), ("t_end", "2")],
            _ => &[],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Known keys with their defaults and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("n", "2", "number of oscillators"),
    ("coupling", "all_to_all", "all_to_all | ring_laplacian | file"),
    ("coupling_a", "1", "edge weight a of the named coupling constructors"),
    ("coupling_file", "", "CSV matrix used when coupling = file"),
    ("omega", "2", "natural frequency"),
    ("xi", "1.01", "pulse period"),
    ("w", "0.1", "pulse width"),
    ("delta_t", "0.01", "transmission lag"),
    ("inset_delta_t", "0.1", "second lag of the fig2 experiment"),
    ("jump", "0.1", "phase jump per Dirac pulse"),
    ("h", "auto", "requested step; auto = min(psi/200, delta_t/4)"),
    ("t_end", "auto", "final time; auto picks a length from the predicted decay"),
    ("history", "constant_rate", "constant_rate | frozen"),
    ("method", "rk4", "rk4 | euler (euler only without lag)"),
    ("verify_halving", "false", "recompute each run at half the step and compare"),
    ("init", "auto", "auto | list | pair | random"),
    ("theta0", "", "comma-separated initial phases for init = list"),
    ("phi0", "0.05", "initial half phase difference (theta_1 - theta_2) / 2 for init = pair"),
    ("theta_bar0", "auto", "initial mean phase for init = pair; auto = xi/2"),
    ("seed", "1", "seed of the initial-phase generator for init = random"),
    ("sample_every", "1", "write every k-th grid node"),
    ("sample_dt", "0.01", "sampling interval of event-driven trajectories"),
    ("sweep_min", "0.002", "smallest lag of delay sweeps"),
    ("sweep_max", "0.1", "largest lag of delay sweeps"),
    ("sweep_points", "12", "number of lags in delay sweeps"),
    ("sweep_scale", "log", "log | linear spacing of delay sweeps"),
    ("fit_upper", "0.9", "upper end of the fitted decay band, relative to the start"),
    ("fit_lower", "0.01", "lower end of the fitted decay band, relative to the start"),
    ("sync_tol", "auto", "strong-synchronization tolerance; auto = 1e-3 xi"),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{key}` ({origin})")]
    UnknownKey { key: String, origin: String },
    #[error("{origin}: expected `key = value`, found `{text}`")]
    Syntax { origin: String, text: String },
    #[error("key `{key}`: invalid value `{value}`, expected {expected}")]
    Invalid { key: String, value: String, expected: String },
    #[error("missing value for override `--{key}`")]
    MissingValue { key: String },
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    experiment: Experiment,
    values: BTreeMap<&'static str, String>,
}

fn canonical(key: &str) -> Option<&'static str> {
    let key = key.trim().replace('-', "_");
    KEYS.iter().map(|k| k.0).find(|k| *k == key)
}

impl Config {
    /// Defaults plus the experiment preset.
    pub fn new(experiment: Experiment) -> Self {
        let mut values: BTreeMap<&'static str, String> = KEYS.iter().map(|k| (k.0, k.1.to_string())).collect();
        for (k, v) in experiment.preset() {
            values.insert(canonical(k).expect("preset keys are known"), v.to_string());
        }
        Self { experiment, values }
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment
    }

    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        let k = canonical(key).ok_or_else(|| ConfigError::UnknownKey { key: key.trim().to_string(), origin: origin.to_string() })?;
        self.values.insert(k, value.trim().to_string());
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        for (no, line) in text.lines().enumerate() {
            let origin = format!("{source}:{}", no + 1);
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { origin: origin.clone(), text: line.to_string() })?;
            self.set(k, v, &origin)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `--key value` pairs.
    pub fn apply_overrides(&mut self, args: &[String]) -> Result<(), ConfigError> {
        let mut it = args.iter();
        while let Some(flag) = it.next() {
            let key = flag.strip_prefix("--").ok_or_else(|| ConfigError::Syntax {
                origin: "command line".into(),
                text: flag.clone(),
            })?;
            if let Some((k, v)) = key.split_once('=') {
                self.set(k, v, "command line")?;
                continue;
            }
            let value = it.next().ok_or_else(|| ConfigError::MissingValue { key: key.to_string() })?;
            self.set(key, value, "command line")?;
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("key is known")
    }

    fn invalid(&self, key: &str, expected: &str) -> ConfigError {
        ConfigError::Invalid { key: key.to_string(), value: self.raw(key).to_string(), expected: expected.to_string() }
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.raw(key).parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| self.invalid(key, "a finite number"))
    }

    /// `None` for `auto`.
    pub fn auto_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.raw(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.raw(key).parse().map_err(|_| self.invalid(key, "a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        self.raw(key).parse().map_err(|_| self.invalid(key, "an unsigned 64-bit integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(self.invalid(key, "true or false")),
        }
    }

    /// One of `choices`.
    pub fn choice(&self, key: &str, choices: &[&str]) -> Result<&str, ConfigError> {
        let v = self.raw(key);
        if choices.contains(&v) {
            Ok(v)
        } else {
            Err(self.invalid(key, &choices.join(" | ")))
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.invalid(key, "comma-separated numbers"))
    }

    /// Manifest text: the experiment, every key in sorted order, then the
    /// values resolved at run time.
    pub fn manifest(&self, resolved: &[(String, String)]) -> String {
        let mut out = format!("experiment = {}\n", self.experiment);
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        if !resolved.is_empty() {
            out.push_str("\n# resolved\n");
            for (k, v) in resolved {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

/// `(key, value)` pair for the resolved section of a manifest.
pub fn resolved(key: &str, value: f64) -> (String, String) {
    (key.to_string(), fmt_f64(value))
}
