//! The `mimo-ee-opt` front end: sweeps that produce CSV tables for the
//! spectral-efficiency comparison, the optimal configurations, the
//! optimizer-vs-lattice comparison, and a self-check suite.

mod config;

pub use config::{
    ConfigError, PowerSection, RunConfig, Spacing, SweepAxis, SweepVariable, SystemSection,
};

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::channel::{pilot_matrix, SystemConfig, TrainingModel};
use crate::closed_forms::{
    deterministic_rate, ee_deterministic, estimation_stats, sinr_equivalent, EeContext,
};
use crate::error::Error;
use crate::montecarlo::{ergodic_rate, estimation_statistics, lemma1_experiment, sweep_config};
use crate::numerics::ComplexMatrix;
use crate::optimizer::{default_initial, grid_search, iterate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SeCurve,
    Optimize,
    CompareOracle,
    Validate,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::SeCurve => "se-curve",
            Command::Optimize => "optimize",
            Command::CompareOracle => "compare-oracle",
            Command::Validate => "validate",
        })
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// A CSV table held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

/// Formats a float with 12 significant digits, choosing fixed or exponent
/// notation like C's `%.12g`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim_fraction(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn default_nt_axis() -> SweepAxis {
    SweepAxis {
        variable: SweepVariable::NT,
        start: 4.0,
        stop: 64.0,
        points: 5,
        spacing: Spacing::Log,
    }
}

fn default_snr_axis() -> SweepAxis {
    SweepAxis {
        variable: SweepVariable::SnrDb,
        start: -10.0,
        stop: 40.0,
        points: 11,
        spacing: Spacing::Linear,
    }
}

fn template(cfg: &RunConfig, snr_db: f64, delta: f64) -> Result<SystemConfig<f64>, CliError> {
    let s = &cfg.system;
    Ok(SystemConfig::new(
        s.n_t,
        s.n_r,
        s.coherence,
        s.training_len,
        db_to_linear(snr_db),
        delta,
    )?)
}

fn ee_context(cfg: &RunConfig, snr_db: f64, delta: f64) -> Result<EeContext<f64>, CliError> {
    Ok(EeContext::new(
        db_to_linear(snr_db),
        delta,
        cfg.system.coherence,
        cfg.power.model()?,
    ))
}

/// Monte Carlo and deterministic rate for each swept `n_t` and impairment
/// level. `n_r` follows `round(beta n_t)` and `T_p` keeps the configured
/// `T_p / N_t` ratio.
pub fn cmd_se_curve(cfg: &RunConfig) -> Result<Table, CliError> {
    let axis = cfg.sweep_or(default_nt_axis())?;
    let beta = cfg.system.n_r as f64 / cfg.system.n_t as f64;
    let mut table = Table::new(vec![
        "n_t",
        "n_r",
        "snr_db",
        "delta",
        "mc_rate",
        "mc_stderr",
        "det_rate",
        "rel_error",
    ]);
    for n_t in axis.integer_values() {
        for &delta in &cfg.system.delta {
            let point = sweep_config(&template(cfg, cfg.system.snr_db, delta)?, n_t, beta)?;
            let mc = ergodic_rate(&point, cfg.trials, cfg.seed)?;
            let det = deterministic_rate(&point)?;
            table.rows.push(vec![
                n_t.to_string(),
                point.n_r.to_string(),
                format_float(cfg.system.snr_db),
                format_float(delta),
                format_float(mc.mean),
                format_float(mc.std_error),
                format_float(det),
                format_float((mc.mean - det).abs() / det),
            ]);
        }
    }
    Ok(table)
}

fn snr_delta_points(cfg: &RunConfig) -> Result<Vec<(f64, f64)>, CliError> {
    let axis = cfg.sweep_or(default_snr_axis())?;
    Ok(axis
        .values()
        .into_iter()
        .flat_map(|snr| cfg.system.delta.iter().map(move |&d| (snr, d)))
        .collect())
}

/// Energy-efficient configuration for each SNR and impairment level.
pub fn cmd_optimize(cfg: &RunConfig) -> Result<Table, CliError> {
    let points = snr_delta_points(cfg)?;
    let rows = points
        .par_iter()
        .map(|&(snr_db, delta)| -> Result<Vec<String>, CliError> {
            let ctx = ee_context(cfg, snr_db, delta)?;
            let r = iterate(&cfg.optimizer, default_initial(&ctx), &ctx)?;
            Ok(vec![
                format_float(snr_db),
                format_float(delta),
                r.t_p_star.to_string(),
                format_float(r.t_a_star),
                r.n_t_star.to_string(),
                r.n_r_star.to_string(),
                format_float(r.beta_star),
                format_float(r.ee_star),
                r.iterations.to_string(),
                r.converged.to_string(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(vec![
        "snr_db",
        "delta",
        "t_p_star",
        "t_a_star",
        "n_t_star",
        "n_r_star",
        "beta_star",
        "ee_star",
        "iterations",
        "converged",
    ]);
    table.rows = rows;
    Ok(table)
}

/// Iterative optimum against the exhaustive lattice optimum.
pub fn cmd_compare_oracle(cfg: &RunConfig) -> Result<Table, CliError> {
    let bounds = cfg.lattice_bounds();
    let mut table = Table::new(vec![
        "snr_db",
        "delta",
        "ee_iterative",
        "ee_grid",
        "rel_gap",
    ]);
    for (snr_db, delta) in snr_delta_points(cfg)? {
        let ctx = ee_context(cfg, snr_db, delta)?;
        let it = iterate(&cfg.optimizer, default_initial(&ctx), &ctx)?;
        let grid = grid_search(&ctx, &bounds)?;
        table.rows.push(vec![
            format_float(snr_db),
            format_float(delta),
            format_float(it.ee_star),
            format_float(grid.ee_star),
            format_float((grid.ee_star - it.ee_star) / grid.ee_star),
        ]);
    }
    Ok(table)
}

/// One row of the validation suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured >= threshold,
        }
    }
}

/// Largest increase of `values` after it has started to decrease, relative to
/// the largest magnitude. Zero for unimodal sequences.
fn unimodality_violation(values: &[f64]) -> f64 {
    let scale = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut falling = false;
    let mut worst = 0.0f64;
    for w in values.windows(2) {
        let step = w[1] - w[0];
        if step < -1e-12 * scale {
            falling = true;
        } else if falling && step > 0.0 {
            worst = worst.max(step / scale);
        }
    }
    worst
}

/// Largest positive second difference on an even grid, relative to the
/// largest magnitude. Zero for concave sequences.
fn concavity_violation(values: &[f64]) -> f64 {
    let scale = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    values
        .windows(3)
        .map(|w| (w[0] + w[2] - 2.0 * w[1]) / scale)
        .fold(0.0, f64::max)
}

fn sample_line(
    lo: f64,
    hi: f64,
    n: usize,
    f: impl Fn(f64) -> crate::Result<f64>,
) -> crate::Result<Vec<f64>> {
    (0..n)
        .map(|i| f(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

pub const STRUCTURE_SLACK: f64 = 1e-9;

/// Range where the Monte Carlo rate is expected to match the closed form to 2%.
pub const MC_AGREEMENT_MAX_DELTA: f64 = 0.175;
pub const MC_AGREEMENT_MIN_NT: usize = 16;

/// Runs the self-check suite on the configured operating point.
pub fn validation_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let s = &cfg.system;
    let mut checks = Vec::new();

    let pilots: ComplexMatrix<f64> = pilot_matrix(s.n_t, s.training_len)?;
    let gram = pilots.matmul(&pilots.adjoint())?;
    let target = ComplexMatrix::identity(s.n_t).scale(s.training_len as f64);
    let dev = gram.max_abs_diff(&target).unwrap_or(f64::INFINITY) / s.training_len as f64;
    checks.push(Check::at_most("pilot_gram", dev, 1e-9));

    checks.push(Check::at_least(
        "lemma1_fraction",
        lemma1_experiment(512, 1000, cfg.seed)?,
        0.95,
    ));

    for &delta in &s.delta {
        let tag = |name: &str| format!("{name}[delta={}]", format_float(delta));
        let base = template(cfg, s.snr_db, delta)?;
        let (n_t, t_p) = (s.n_t as f64, s.training_len as f64);

        let st = estimation_stats(n_t, t_p, base.snr, delta);
        checks.push(Check::at_most(
            tag("variance_partition"),
            (st.var_estimate + st.var_error - 1.0).abs(),
            1e-12,
        ));

        if delta > 0.0 {
            let mut worst = 0.0f64;
            for tp_mult in [1.0, 10.0, s.coherence as f64 / n_t] {
                for beta in [1.5, 10.0, 1000.0] {
                    for snr in [1.0, 1e3, 1e9] {
                        let g = sinr_equivalent(n_t, beta * n_t, tp_mult * n_t, snr, delta)?;
                        worst = worst.max(g * delta * delta);
                    }
                }
            }
            checks.push(Check::at_most(tag("sinr_ceiling"), worst, 1.0));

            let high = SystemConfig::new(s.n_t, s.n_r, s.coherence, s.training_len, 1e6, delta)?;
            let floor = estimation_stats(n_t, t_p, 1e6, delta).error_floor;
            let mc = estimation_statistics(&high, cfg.trials, cfg.seed, TrainingModel::default())?;
            checks.push(Check::at_most(
                tag("error_floor"),
                (mc.var_error.mean - floor).abs() / floor,
                0.05,
            ));
        } else {
            let lo = sinr_equivalent(n_t, s.n_r as f64, t_p, 1e3, 0.0)?;
            let hi = sinr_equivalent(n_t, s.n_r as f64, t_p, 1e9, 0.0)?;
            checks.push(Check::at_least(tag("sinr_unbounded"), hi / lo, 10.0));
        }

        // The closed form ignores the correlation that the shared pilot
        // distortion puts on the estimate, which stops being negligible for
        // large delta no matter how big the arrays are.
        if delta <= MC_AGREEMENT_MAX_DELTA && s.n_t >= MC_AGREEMENT_MIN_NT {
            let mc = ergodic_rate(&base, cfg.trials, cfg.seed)?;
            let det = deterministic_rate(&base)?;
            checks.push(Check::at_most(
                tag("mc_det_rate_gap"),
                (mc.mean - det).abs() / det,
                0.02,
            ));
        }

        let ctx = ee_context(cfg, s.snr_db, delta)?;
        let beta = s.n_r as f64 / n_t;
        let t_a = t_p - n_t;
        let coh = s.coherence as f64;
        let ta_line = sample_line(0.0, coh - n_t, 400, |x| {
            ee_deterministic(n_t, beta, x, &ctx)
        })?;
        checks.push(Check::at_most(
            tag("concave_t_a"),
            concavity_violation(&ta_line),
            STRUCTURE_SLACK,
        ));
        let beta_line = sample_line(1.0 + 1e-6, 64.0, 400, |b| {
            ee_deterministic(n_t, b, t_a, &ctx)
        })?;
        checks.push(Check::at_most(
            tag("unimodal_beta"),
            unimodality_violation(&beta_line),
            STRUCTURE_SLACK,
        ));
        let nt_line = sample_line(1.0, ((coh - t_a) / 2.0).max(1.0), 400, |n| {
            ee_deterministic(n, beta, t_a, &ctx)
        })?;
        checks.push(Check::at_most(
            tag("unimodal_n_t"),
            unimodality_violation(&nt_line),
            STRUCTURE_SLACK,
        ));

        let run = iterate(&cfg.optimizer, default_initial(&ctx), &ctx)?;
        let drop = run
            .trace
            .windows(2)
            .map(|w| w[0].ee - w[1].ee)
            .fold(0.0, f64::max);
        checks.push(Check::at_most(
            tag("trace_monotone"),
            drop,
            cfg.optimizer.ee_threshold,
        ));
    }
    Ok(checks)
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<(Table, bool), CliError> {
    let checks = validation_checks(cfg)?;
    let all = checks.iter().all(|c| c.pass);
    let mut table = Table::new(vec!["check", "measured", "threshold", "pass"]);
    table.rows = checks
        .into_iter()
        .map(|c| {
            vec![
                c.name,
                format_float(c.measured),
                format_float(c.threshold),
                c.pass.to_string(),
            ]
        })
        .collect();
    Ok((table, all))
}

/// Parsed command-line request.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl Invocation {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path, &self.overrides)?,
            None => RunConfig::parse("", "<defaults>", &self.overrides)?,
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs a command and writes its CSV. Returns the process exit code.
pub fn execute(inv: &Invocation) -> Result<i32, CliError> {
    let cfg = inv.resolve()?;
    let (table, ok) = match inv.command {
        Command::SeCurve => (cmd_se_curve(&cfg)?, true),
        Command::Optimize => (cmd_optimize(&cfg)?, true),
        Command::CompareOracle => (cmd_compare_oracle(&cfg)?, true),
        Command::Validate => cmd_validate(&cfg)?,
    };
    match &cfg.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
            table.write_to(std::io::BufWriter::new(file))?;
        }
        None => table.write_to(std::io::stdout().lock())?,
    }
    Ok(if ok { 0 } else { 1 })
}
