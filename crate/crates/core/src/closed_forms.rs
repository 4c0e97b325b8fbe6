//! Deterministic equivalents: estimation variances, the large-array ZF SINR,
//! spectral efficiency, the power consumption model and energy efficiency.
//!
//! Antenna counts and training lengths are accepted as reals here so the
//! optimizer can work on a continuous relaxation; [`SystemConfig`] wrappers
//! exist for the integer case.

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coherence block length for the reference parameter set: 32 ms at 180 kHz.
pub const TABLE_ONE_COHERENCE: usize = 5760;

/// Channel-estimate statistics implied by the training configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationStats<T> {
    /// Effective training SNR, `rho T_p / (N_t (rho delta^2 + 1))`.
    pub epsilon: T,
    /// Per-entry variance of the LMMSE estimate.
    pub var_estimate: T,
    /// Per-entry variance of the estimation error.
    pub var_error: T,
    /// Limit of `var_error` as the SNR grows without bound.
    pub error_floor: T,
}

pub fn effective_training_snr<T: Scalar>(n_t: T, t_p: T, snr: T, impairment: T) -> T {
    snr * t_p / (n_t * (snr * impairment * impairment + T::one()))
}

/// Estimation statistics for real-valued `n_t` and `t_p`.
pub fn estimation_stats<T: Scalar>(n_t: T, t_p: T, snr: T, impairment: T) -> EstimationStats<T> {
    let epsilon = effective_training_snr(n_t, t_p, snr, impairment);
    let var_error = (T::one() + epsilon).recip();
    let d2 = impairment * impairment;
    let error_floor = if d2 > T::zero() {
        (T::one() + t_p / (n_t * d2)).recip()
    } else {
        T::zero()
    };
    EstimationStats {
        epsilon,
        var_estimate: T::one() - var_error,
        var_error,
        error_floor,
    }
}

pub fn estimation_variances<T: Scalar>(cfg: &SystemConfig<T>) -> EstimationStats<T> {
    estimation_stats(
        T::of_usize(cfg.n_t),
        T::of_usize(cfg.training_len),
        cfg.snr,
        cfg.impairment,
    )
}

/// Per-antenna noise-plus-estimation-error constant `(rho + rho delta^2 + 1 + eps) / (rho eps)`.
///
/// The ZF SINR uses `N_t` times this value.
pub fn zf_noise_constant<T: Scalar>(n_t: T, t_p: T, snr: T, impairment: T) -> T {
    let eps = effective_training_snr(n_t, t_p, snr, impairment);
    (snr + snr * impairment * impairment + T::one() + eps) / (snr * eps)
}

/// Large-array equivalent of the per-stream ZF SINR.
pub fn sinr_equivalent<T: Scalar>(n_t: T, n_r: T, t_p: T, snr: T, impairment: T) -> Result<T> {
    if !(n_r > n_t) {
        return Err(Error::BetaOutOfRange {
            n_t: n_t.as_f64(),
            n_r: n_r.as_f64(),
        });
    }
    let d2 = impairment * impairment;
    let c1 = zf_noise_constant(n_t, t_p, snr, impairment);
    Ok((n_r - n_t) / (d2 * n_r + (c1 - d2) * n_t))
}

pub fn deterministic_sinr<T: Scalar>(cfg: &SystemConfig<T>) -> Result<T> {
    sinr_equivalent(
        T::of_usize(cfg.n_t),
        T::of_usize(cfg.n_r),
        T::of_usize(cfg.training_len),
        cfg.snr,
        cfg.impairment,
    )
}

/// Deterministic spectral efficiency in bits per channel use.
pub fn rate_equivalent<T: Scalar>(
    n_t: T,
    n_r: T,
    t_p: T,
    coherence: T,
    snr: T,
    impairment: T,
) -> Result<T> {
    if t_p > coherence {
        return Err(Error::InvalidConfig(format!(
            "training length {t_p} exceeds coherence length {coherence}"
        )));
    }
    let sinr = sinr_equivalent(n_t, n_r, t_p, snr, impairment)?;
    Ok((T::one() - t_p / coherence) * n_t * sinr.ln_1p() / T::LN_2())
}

pub fn deterministic_rate<T: Scalar>(cfg: &SystemConfig<T>) -> Result<T> {
    rate_equivalent(
        T::of_usize(cfg.n_t),
        T::of_usize(cfg.n_r),
        T::of_usize(cfg.training_len),
        T::of_usize(cfg.coherence),
        cfg.snr,
        cfg.impairment,
    )
}

/// Circuit and RF power consumption parameters, all energies in Joule per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel<T> {
    /// Per transmit RF chain.
    pub p_tx: T,
    /// Per receive RF chain.
    pub p_rx: T,
    /// Static circuit consumption.
    pub p_static: T,
    /// Power-amplifier efficiency in (0, 1].
    pub amp_efficiency: T,
    /// Receiver noise energy; the radiated energy for SNR `rho` is `rho * noise_energy`.
    pub noise_energy: T,
    /// Seconds per channel use.
    pub symbol_time: T,
}

impl<T: Scalar> PowerModel<T> {
    /// Builds a model from chain powers given in watts.
    pub fn from_watts(
        p_tx_watts: T,
        p_rx_watts: T,
        p_static_watts: T,
        amp_efficiency: T,
        noise_energy: T,
        symbol_time: T,
    ) -> Result<Self> {
        let pm = Self {
            p_tx: p_tx_watts * symbol_time,
            p_rx: p_rx_watts * symbol_time,
            p_static: p_static_watts * symbol_time,
            amp_efficiency,
            noise_energy,
            symbol_time,
        };
        pm.validate()?;
        Ok(pm)
    }

    /// Reference parameters: S = 1/(9e6) s, P_tx = 1 W, P_rx = 0.3 W, P_0 = 2 W,
    /// eta = 0.3 and noise energy 1e-20 J per channel use.
    pub fn table_one() -> Self {
        let s = T::of(1.0 / 9.0e6);
        Self {
            p_tx: s,
            p_rx: T::of(0.3) * s,
            p_static: T::of(2.0) * s,
            amp_efficiency: T::of(0.3),
            noise_energy: T::of(1e-20),
            symbol_time: s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("p_tx", self.p_tx),
            ("p_rx", self.p_rx),
            ("p_static", self.p_static),
        ];
        for (name, v) in nonneg {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if !(self.amp_efficiency > T::zero() && self.amp_efficiency <= T::one()) {
            return Err(Error::InvalidConfig(format!(
                "amp_efficiency must lie in (0, 1], got {}",
                self.amp_efficiency
            )));
        }
        if !(self.noise_energy > T::zero()) || !(self.symbol_time > T::zero()) {
            return Err(Error::InvalidConfig(
                "noise_energy and symbol_time must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Radiated RF energy per channel use that yields receive SNR `snr`.
    #[inline]
    pub fn rf_power(&self, snr: T) -> T {
        snr * self.noise_energy
    }

    /// Multiplies every energy term (including the noise energy) by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            p_tx: self.p_tx * factor,
            p_rx: self.p_rx * factor,
            p_static: self.p_static * factor,
            noise_energy: self.noise_energy * factor,
            ..*self
        }
    }
}

/// Total consumed energy per channel use.
pub fn power_total<T: Scalar>(n_t: T, n_r: T, snr: T, pm: &PowerModel<T>) -> T {
    n_t * pm.p_tx + n_r * pm.p_rx + pm.p_static + pm.rf_power(snr) / pm.amp_efficiency
}

/// Closed-form SINR, rate, power and energy efficiency at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterministicPoint<T> {
    pub sinr: T,
    /// bits per channel use
    pub rate: T,
    /// Joule per channel use
    pub power: T,
    /// bits per Joule
    pub ee: T,
}

pub fn evaluate<T: Scalar>(
    cfg: &SystemConfig<T>,
    pm: &PowerModel<T>,
) -> Result<DeterministicPoint<T>> {
    let sinr = deterministic_sinr(cfg)?;
    let rate = deterministic_rate(cfg)?;
    let power = power_total(T::of_usize(cfg.n_t), T::of_usize(cfg.n_r), cfg.snr, pm);
    Ok(DeterministicPoint {
        sinr,
        rate,
        power,
        ee: rate / power,
    })
}

/// Everything the energy efficiency depends on apart from `(N_t, beta, T_a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeContext<T> {
    /// Linear SNR.
    pub snr: T,
    pub impairment: T,
    /// Coherence block length in channel uses.
    pub coherence: T,
    pub power: PowerModel<T>,
}

impl<T: Scalar> EeContext<T> {
    pub fn new(snr: T, impairment: T, coherence: usize, power: PowerModel<T>) -> Self {
        Self {
            snr,
            impairment,
            coherence: T::of_usize(coherence),
            power,
        }
    }

    fn check(&self, n_t: T, beta: T, t_a: T) -> Result<()> {
        if !(self.snr > T::zero()) || !(self.impairment >= T::zero()) {
            return Err(Error::Domain(format!(
                "need snr > 0 and impairment >= 0, got {} and {}",
                self.snr, self.impairment
            )));
        }
        if !(n_t >= T::one() && n_t <= self.coherence) {
            return Err(Error::Domain(format!(
                "n_t = {n_t} outside [1, {}]",
                self.coherence
            )));
        }
        if !(beta > T::one()) {
            return Err(Error::Domain(format!("beta = {beta} must exceed 1")));
        }
        if !(t_a >= T::zero() && t_a <= self.coherence - n_t) {
            return Err(Error::Domain(format!(
                "t_a = {t_a} outside [0, {}]",
                self.coherence - n_t
            )));
        }
        Ok(())
    }

    fn denominator(&self, n_t: T, beta: T) -> T {
        let pm = &self.power;
        n_t * pm.p_tx
            + beta * n_t * pm.p_rx
            + pm.p_static
            + pm.rf_power(self.snr) / pm.amp_efficiency
    }
}

/// Deterministic energy efficiency in bits/Joule as a function of
/// `(N_t, beta = N_r/N_t, T_a = T_p - N_t)`.
pub fn ee_deterministic<T: Scalar>(n_t: T, beta: T, t_a: T, ctx: &EeContext<T>) -> Result<T> {
    ctx.check(n_t, beta, t_a)?;
    let d2 = ctx.impairment * ctx.impairment;
    let inv_snr = ctx.snr.recip();
    let t_p = n_t + t_a;
    let bm1 = beta - T::one();
    let sinr = bm1 / (d2 * bm1 + n_t / t_p * (d2 + inv_snr) * (d2 + inv_snr + T::one()) + inv_snr);
    let rate = (T::one() - t_p / ctx.coherence) * n_t * sinr.ln_1p() / T::LN_2();
    Ok(rate / ctx.denominator(n_t, beta))
}

/// High-SNR approximation of [`ee_deterministic`] that drops the `delta^4`,
/// `1/rho^2` and `2 delta^2 / rho` terms from the SINR denominator.
///
/// Accurate to well under 1% from roughly 30 dB upward. At 0 dB and below the
/// dropped `1/rho^2` term is comparable to the kept ones and the gap can exceed 10%.
pub fn ee_high_snr_approx<T: Scalar>(n_t: T, beta: T, t_a: T, ctx: &EeContext<T>) -> Result<T> {
    ctx.check(n_t, beta, t_a)?;
    let d2 = ctx.impairment * ctx.impairment;
    let inv_snr = ctx.snr.recip();
    let t_p = n_t + t_a;
    let bm1 = beta - T::one();
    let sinr = bm1 / (d2 * bm1 + n_t / t_p * (d2 + inv_snr) + inv_snr);
    let rate = (T::one() - t_p / ctx.coherence) * n_t * sinr.ln_1p() / T::LN_2();
    Ok(rate / ctx.denominator(n_t, beta))
}
