//! INI-style run configuration.
//!
//! ```text
//! [system]
//! n_t = 16
//! n_r = 32
//! coherence = 5760
//! training_len = 32
//! snr_db = 20
//! delta = 0, 0.15
//!
//! [power]          ; watts, except the last three
//! p_tx = 1
//! p_rx = 0.3
//! p_static = 2
//! amp_efficiency = 0.3
//! noise_energy = 1e-20
//! symbol_time = 1.1111111111e-7
//!
//! [optimizer]
//! ee_threshold = 1e-10
//! max_outer_iters = 200
//! line_search_tol = 1e-6
//! beta_upper = 8
//!
//! [lattice]
//! n_t_max = 64
//! n_r_max = 256
//! t_p_max = 512
//!
//! [sweep]
//! variable = snr_db      ; or n_t
//! start = -10
//! stop = 40
//! points = 11
//! spacing = linear       ; or log
//!
//! [run]
//! output = out.csv
//! seed = 1
//! trials = 10000
//! ```
//!
//! Every key is optional. Unknown sections or keys are rejected with the line
//! they appear on.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::closed_forms::{PowerModel, TABLE_ONE_COHERENCE};
use crate::optimizer::{LatticeBounds, OptimizerSettings};

/// A configuration problem, with the file position when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(source: &str, line: usize, field: Option<String>, message: impl Into<String>) -> Self {
        Self {
            source: source.to_string(),
            line: Some(line),
            field,
            message: message.into(),
        }
    }

    fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            source: String::new(),
            line: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.source.is_empty() {
            write!(f, "{}", self.source)?;
            if let Some(line) = self.line {
                write!(f, ":{line}")?;
            }
            write!(f, ": ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    NT,
    SnrDb,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::NT => "n_t",
            SweepVariable::SnrDb => "snr_db",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let u = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + u * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(u),
                }
            })
            .collect()
    }

    /// Sweep values rounded to integers, with repeats dropped.
    pub fn integer_values(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for v in self.values() {
            let n = v.round() as usize;
            if out.last() != Some(&n) {
                out.push(n);
            }
        }
        out
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.points == 0 {
            return Err(ConfigError::field("sweep.points", "must be at least 1"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(ConfigError::field(
                "sweep.start",
                "start and stop must be finite",
            ));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(ConfigError::field(
                "sweep.spacing",
                "log spacing needs positive start and stop",
            ));
        }
        if self.variable == SweepVariable::NT && self.start.min(self.stop) < 0.5 {
            return Err(ConfigError::field(
                "sweep.start",
                "n_t sweep must stay at 1 or above",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSection {
    pub n_t: usize,
    pub n_r: usize,
    pub coherence: usize,
    pub training_len: usize,
    pub snr_db: f64,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSection {
    pub p_tx: f64,
    pub p_rx: f64,
    pub p_static: f64,
    pub amp_efficiency: f64,
    pub noise_energy: f64,
    pub symbol_time: f64,
}

impl PowerSection {
    pub fn model(&self) -> Result<PowerModel<f64>, ConfigError> {
        PowerModel::from_watts(
            self.p_tx,
            self.p_rx,
            self.p_static,
            self.amp_efficiency,
            self.noise_energy,
            self.symbol_time,
        )
        .map_err(|e| ConfigError::field("power", e.to_string()))
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemSection,
    pub power: PowerSection,
    pub optimizer: OptimizerSettings<f64>,
    pub lattice: (usize, usize, usize),
    /// `None` means the command's default axis.
    pub sweep: Option<SweepAxis>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemSection {
                n_t: 16,
                n_r: 32,
                coherence: TABLE_ONE_COHERENCE,
                training_len: 32,
                snr_db: 20.0,
                delta: vec![0.0, 0.15],
            },
            power: PowerSection {
                p_tx: 1.0,
                p_rx: 0.3,
                p_static: 2.0,
                amp_efficiency: 0.3,
                noise_energy: 1e-20,
                symbol_time: 1.0 / 9.0e6,
            },
            optimizer: OptimizerSettings::default(),
            lattice: (64, 256, 512),
            sweep: None,
            output: None,
            seed: 1,
            trials: 10_000,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: path.display().to_string(),
            line: None,
            field: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, &path.display().to_string(), overrides)
    }

    /// Parses `text` (named `source` in diagnostics) and applies `--set`
    /// overrides of the form `section.key=value`.
    pub fn parse(text: &str, source: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut sweep = SweepBuilder::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        ConfigError::at(source, line_no, None, "unterminated section header")
                    })?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::at(
                        source,
                        line_no,
                        None,
                        format!(
                            "unknown section [{name}]; expected one of {}",
                            SECTIONS.join(", ")
                        ),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::at(source, line_no, None, "expected `key = value`"))?;
            let sec = section.as_deref().ok_or_else(|| {
                ConfigError::at(source, line_no, None, "key outside of any section")
            })?;
            let field = format!("{sec}.{}", key.trim());
            cfg.set(sec, key.trim(), value.trim(), &mut sweep)
                .map_err(|m| ConfigError::at(source, line_no, Some(field), m))?;
        }
        for ov in overrides {
            let (path, value) = ov.split_once('=').ok_or_else(|| {
                ConfigError::field(ov, "override must look like section.key=value")
            })?;
            let (sec, key) = path
                .trim()
                .split_once('.')
                .ok_or_else(|| ConfigError::field(path, "override must name section.key"))?;
            if !SECTIONS.contains(&sec) {
                return Err(ConfigError::field(path, format!("unknown section [{sec}]")));
            }
            cfg.set(sec, key, value.trim(), &mut sweep)
                .map_err(|m| ConfigError::field(path.trim(), m))?;
        }
        cfg.sweep = sweep.build()?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        sweep: &mut SweepBuilder,
    ) -> Result<(), String> {
        match (section, key) {
            ("system", "n_t") => self.system.n_t = num(value)?,
            ("system", "n_r") => self.system.n_r = num(value)?,
            ("system", "coherence") => self.system.coherence = num(value)?,
            ("system", "training_len") => self.system.training_len = num(value)?,
            ("system", "snr_db") => self.system.snr_db = num(value)?,
            ("system", "delta") => self.system.delta = list(value)?,
            ("power", "p_tx") => self.power.p_tx = num(value)?,
            ("power", "p_rx") => self.power.p_rx = num(value)?,
            ("power", "p_static") => self.power.p_static = num(value)?,
            ("power", "amp_efficiency") => self.power.amp_efficiency = num(value)?,
            ("power", "noise_energy") => self.power.noise_energy = num(value)?,
            ("power", "symbol_time") => self.power.symbol_time = num(value)?,
            ("optimizer", "ee_threshold") => self.optimizer.ee_threshold = num(value)?,
            ("optimizer", "max_outer_iters") => self.optimizer.max_outer_iters = num(value)?,
            ("optimizer", "line_search_tol") => self.optimizer.line_search_tol = num(value)?,
            ("optimizer", "beta_upper") => self.optimizer.beta_upper = num(value)?,
            ("lattice", "n_t_max") => self.lattice.0 = num(value)?,
            ("lattice", "n_r_max") => self.lattice.1 = num(value)?,
            ("lattice", "t_p_max") => self.lattice.2 = num(value)?,
            ("sweep", "variable") => {
                sweep.variable = Some(match value {
                    "n_t" => SweepVariable::NT,
                    "snr_db" => SweepVariable::SnrDb,
                    _ => return Err(format!("expected n_t or snr_db, got '{value}'")),
                })
            }
            ("sweep", "start") => sweep.start = Some(num(value)?),
            ("sweep", "stop") => sweep.stop = Some(num(value)?),
            ("sweep", "points") => sweep.points = Some(num(value)?),
            ("sweep", "spacing") => {
                sweep.spacing = Some(match value {
                    "linear" => Spacing::Linear,
                    "log" => Spacing::Log,
                    _ => return Err(format!("expected linear or log, got '{value}'")),
                })
            }
            ("run", "output") => self.output = Some(PathBuf::from(value)),
            ("run", "seed") => self.seed = num(value)?,
            ("run", "trials") => self.trials = num(value)?,
            _ => return Err(format!("unknown key '{key}' in [{section}]")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.system;
        if s.n_t == 0 {
            return Err(ConfigError::field("system.n_t", "must be at least 1"));
        }
        if s.n_r <= s.n_t {
            return Err(ConfigError::field(
                "system.n_r",
                format!("must exceed n_t = {}", s.n_t),
            ));
        }
        if s.training_len < s.n_t || s.training_len > s.coherence {
            return Err(ConfigError::field(
                "system.training_len",
                format!(
                    "must lie in [n_t, coherence] = [{}, {}]",
                    s.n_t, s.coherence
                ),
            ));
        }
        if !s.snr_db.is_finite() {
            return Err(ConfigError::field("system.snr_db", "must be finite"));
        }
        if s.delta.is_empty() {
            return Err(ConfigError::field(
                "system.delta",
                "needs at least one value",
            ));
        }
        if let Some(d) = s.delta.iter().find(|d| !(**d >= 0.0 && **d < 1.0)) {
            return Err(ConfigError::field(
                "system.delta",
                format!("values must lie in [0, 1), got {d}"),
            ));
        }
        self.power.model()?;
        self.optimizer
            .validate()
            .map_err(|e| ConfigError::field("optimizer", e.to_string()))?;
        if self.lattice.0 == 0 || self.lattice.1 == 0 || self.lattice.2 == 0 {
            return Err(ConfigError::field("lattice", "bounds must be positive"));
        }
        if self.trials == 0 {
            return Err(ConfigError::field("run.trials", "must be at least 1"));
        }
        if let Some(axis) = &self.sweep {
            axis.validate()?;
        }
        Ok(())
    }

    pub fn lattice_bounds(&self) -> LatticeBounds {
        LatticeBounds::up_to(self.lattice.0, self.lattice.1, self.lattice.2)
    }

    /// The configured sweep, or `default` when the file has none. A sweep over
    /// a different variable is a configuration error.
    pub fn sweep_or(&self, default: SweepAxis) -> Result<SweepAxis, ConfigError> {
        match self.sweep {
            None => Ok(default),
            Some(axis) if axis.variable == default.variable => Ok(axis),
            Some(axis) => Err(ConfigError::field(
                "sweep.variable",
                format!(
                    "this command sweeps {}, config asks for {}",
                    default.variable, axis.variable
                ),
            )),
        }
    }
}

const SECTIONS: [&str; 6] = ["system", "power", "optimizer", "lattice", "sweep", "run"];

#[derive(Default)]
struct SweepBuilder {
    variable: Option<SweepVariable>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    spacing: Option<Spacing>,
}

impl SweepBuilder {
    fn build(self) -> Result<Option<SweepAxis>, ConfigError> {
        let any = self.start.is_some()
            || self.stop.is_some()
            || self.points.is_some()
            || self.spacing.is_some();
        let Some(variable) = self.variable else {
            if any {
                return Err(ConfigError::field(
                    "sweep.variable",
                    "missing; required when [sweep] is given",
                ));
            }
            return Ok(None);
        };
        let start = self
            .start
            .ok_or_else(|| ConfigError::field("sweep.start", "missing"))?;
        let stop = self.stop.unwrap_or(start);
        let points = self.points.unwrap_or(if stop == start { 1 } else { 2 });
        Ok(Some(SweepAxis {
            variable,
            start,
            stop,
            points,
            spacing: self.spacing.unwrap_or(Spacing::Linear),
        }))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find([';', '#']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn num<V: FromStr>(value: &str) -> Result<V, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse '{value}' as {}", std::any::type_name::<V>()))
}

fn list(value: &str) -> Result<Vec<f64>, String> {
    value.split(',').map(|v| num(v.trim())).collect()
}
