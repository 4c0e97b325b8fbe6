//! Monte Carlo averages over independent coherence blocks, and the trace
//! concentration experiment for Haar columns.
//!
//! Trial `i` always draws from `RngStream::new(seed, i)`. Trials run on the
//! rayon pool, but results are collected in trial order and summed
//! sequentially, so every estimate is bit-identical for any thread count.

use rayon::prelude::*;

use crate::channel::{
    mean_error_power, mean_power, sample_estimate, zf_sinr_from_estimate, SystemConfig,
    TrainingModel,
};
use crate::closed_forms::{deterministic_rate, deterministic_sinr};
use crate::error::{Error, Result};
use crate::numerics::{diagonal_quadratic_form, haar_column, RngStream};
use crate::scalar::Scalar;

/// Redraws allowed per trial before a singular Gram matrix becomes an error.
pub const MAX_RESAMPLES: u64 = 16;

/// Sample mean of a per-block quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(trials)`; zero for one trial.
    pub std_error: T,
    pub trials: usize,
    pub seed: u64,
    /// Trials that hit a numerically singular Gram matrix and were redrawn.
    pub resampled: usize,
}

impl<T: Scalar> McEstimate<T> {
    fn from_samples(samples: &[T], seed: u64, resampled: usize) -> Self {
        let n = samples.len();
        let nf = T::of_usize(n);
        let mean = samples.iter().copied().sum::<T>() / nf;
        let std_error = if n > 1 {
            let ss: T = samples.iter().map(|&x| (x - mean) * (x - mean)).sum();
            (ss / T::of_usize(n - 1)).sqrt() / nf.sqrt()
        } else {
            T::zero()
        };
        Self {
            mean,
            std_error,
            trials: n,
            seed,
            resampled,
        }
    }

    /// `|mean - reference| / std_error`; infinite when the error is zero but
    /// the mean is off.
    pub fn z_score(&self, reference: T) -> T {
        let gap = (self.mean - reference).abs();
        if gap == T::zero() {
            T::zero()
        } else {
            gap / self.std_error
        }
    }
}

/// Runs `trials` independent evaluations of `f`, redrawing a trial from a fresh
/// sub-stream when it reports a singular matrix.
fn run_trials<R, F>(trials: usize, seed: u64, f: F) -> Result<(Vec<R>, usize)>
where
    R: Send,
    F: Fn(&mut RngStream) -> Result<R> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let outcomes: Vec<(R, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let base = RngStream::new(seed, trial);
            let mut last = None;
            for attempt in 0..=MAX_RESAMPLES {
                let mut rng = base.substream(attempt);
                match f(&mut rng) {
                    Ok(v) => return Ok((v, attempt as usize)),
                    Err(e @ Error::NotPositiveDefinite { .. }) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.expect("at least one attempt"))
        })
        .collect::<Result<_>>()?;
    let resampled = outcomes.iter().filter(|(_, a)| *a > 0).count();
    Ok((outcomes.into_iter().map(|(v, _)| v).collect(), resampled))
}

/// Ergodic ZF spectral efficiency `(T_d / T) E[sum_k log2(1 + gamma_k)]` with
/// the default (projected) training sampler.
pub fn ergodic_rate<T: Scalar>(
    cfg: &SystemConfig<T>,
    trials: usize,
    seed: u64,
) -> Result<McEstimate<T>> {
    ergodic_rate_with(cfg, trials, seed, TrainingModel::default())
}

pub fn ergodic_rate_with<T: Scalar>(
    cfg: &SystemConfig<T>,
    trials: usize,
    seed: u64,
    model: TrainingModel,
) -> Result<McEstimate<T>> {
    cfg.validate()?;
    let prelog = T::of_usize(cfg.data_len()) / T::of_usize(cfg.coherence);
    let (samples, resampled) = run_trials(trials, seed, |rng| {
        let est = sample_estimate(cfg, rng, model)?;
        let sinr = zf_sinr_from_estimate(&est.h_bar, cfg)?;
        Ok(prelog * sinr.into_iter().map(|g| (T::one() + g).log2()).sum::<T>())
    })?;
    Ok(McEstimate::from_samples(&samples, seed, resampled))
}

/// Mean per-stream ZF SINR (averaged over streams and blocks).
pub fn mean_sinr<T: Scalar>(
    cfg: &SystemConfig<T>,
    trials: usize,
    seed: u64,
) -> Result<McEstimate<T>> {
    cfg.validate()?;
    let (samples, resampled) = run_trials(trials, seed, |rng| {
        let est = sample_estimate(cfg, rng, TrainingModel::default())?;
        let sinr = zf_sinr_from_estimate(&est.h_bar, cfg)?;
        Ok(sinr.iter().copied().sum::<T>() / T::of_usize(sinr.len()))
    })?;
    Ok(McEstimate::from_samples(&samples, seed, resampled))
}

/// Empirical per-entry variances of the LMMSE estimate and of its error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationMc<T> {
    pub var_error: McEstimate<T>,
    pub var_estimate: McEstimate<T>,
}

pub fn estimation_statistics<T: Scalar>(
    cfg: &SystemConfig<T>,
    blocks: usize,
    seed: u64,
    model: TrainingModel,
) -> Result<EstimationMc<T>> {
    cfg.validate()?;
    let (samples, resampled) = run_trials(blocks, seed, |rng| {
        let est = sample_estimate(cfg, rng, model)?;
        Ok((
            mean_error_power(&est.h, &est.h_hat)?,
            mean_power(&est.h_hat),
        ))
    })?;
    let err: Vec<T> = samples.iter().map(|s| s.0).collect();
    let var: Vec<T> = samples.iter().map(|s| s.1).collect();
    Ok(EstimationMc {
        var_error: McEstimate::from_samples(&err, seed, resampled),
        var_estimate: McEstimate::from_samples(&var, seed, resampled),
    })
}

/// One row of [`convergence_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub n_t: usize,
    pub n_r: usize,
    pub training_len: usize,
    pub mc: McEstimate<T>,
    pub det_rate: T,
    /// `|mc - det| / det`.
    pub rel_error: T,
}

/// Derives the configuration used for `n_t` in a sweep: `n_r = round(beta n_t)`
/// and a training length that keeps the template's `T_p / N_t` ratio.
pub fn sweep_config<T: Scalar>(
    template: &SystemConfig<T>,
    n_t: usize,
    beta: T,
) -> Result<SystemConfig<T>> {
    let n_r = (beta * T::of_usize(n_t)).round().to_usize().unwrap_or(0);
    let ratio = template.training_len as f64 / template.n_t as f64;
    let t_p = ((ratio * n_t as f64).round() as usize).max(n_t);
    SystemConfig::new(
        n_t,
        n_r,
        template.coherence,
        t_p,
        template.snr,
        template.impairment,
    )
}

/// Monte Carlo rate against the deterministic equivalent for a list of
/// transmit array sizes.
pub fn convergence_sweep<T: Scalar>(
    template: &SystemConfig<T>,
    n_ts: &[usize],
    beta: T,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow<T>>> {
    n_ts.iter()
        .map(|&n_t| {
            if n_t < 2 {
                return Err(Error::InvalidConfig(format!(
                    "sweep needs n_t >= 2, got {n_t}"
                )));
            }
            let cfg = sweep_config(template, n_t, beta)?;
            let mc = ergodic_rate(&cfg, trials, seed)?;
            let det_rate = deterministic_rate(&cfg)?;
            Ok(SweepRow {
                n_t,
                n_r: cfg.n_r,
                training_len: cfg.training_len,
                mc,
                det_rate,
                rel_error: (mc.mean - det_rate).abs() / det_rate,
            })
        })
        .collect()
}

/// Relative deviations `|x^H A x - tr(A)/n| / (tr(A)/n)` of `draws` Haar
/// columns for a diagonal `A`.
pub fn trace_deviations<T: Scalar>(diag: &[T], draws: usize, seed: u64) -> Result<Vec<T>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Domain("empty diagonal".into()));
    }
    let normalized_trace = diag.iter().copied().sum::<T>() / T::of_usize(n);
    if normalized_trace == T::zero() {
        return Err(Error::Domain("tr(A) must be nonzero".into()));
    }
    let (devs, _) = run_trials(draws, seed, |rng| {
        let x = haar_column::<T>(rng, n);
        let q = diagonal_quadratic_form(&x, diag);
        Ok(((q - normalized_trace) / normalized_trace).abs())
    })?;
    Ok(devs)
}

/// Fraction of Haar-column draws whose quadratic form with `A = diag(1..n)`
/// lies within 10% of `tr(A)/n`.
pub fn lemma1_experiment(n: usize, draws: usize, seed: u64) -> Result<f64> {
    if n < 16 {
        return Err(Error::Domain(format!("n must be at least 16, got {n}")));
    }
    let diag: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let devs = trace_deviations(&diag, draws, seed)?;
    Ok(devs.iter().filter(|&&d| d < 0.1).count() as f64 / draws as f64)
}

/// Deterministic-equivalent SINR for convenience next to [`mean_sinr`].
pub fn sinr_reference<T: Scalar>(cfg: &SystemConfig<T>) -> Result<T> {
    deterministic_sinr(cfg)
}
