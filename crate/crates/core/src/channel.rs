//! One coherence block of the training-based link: pilot transmission through
//! impaired transmit hardware, LMMSE channel estimation and the per-stream
//! zero-forcing SINR.

use num_complex::Complex;

use crate::closed_forms::{estimation_variances, EstimationStats};
use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_inverse_diagonal, sample_cscg_matrix, Cholesky, ComplexMatrix, RngStream,
};
use crate::scalar::Scalar;

/// Link parameters for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig<T> {
    /// Transmit antennas.
    pub n_t: usize,
    /// Receive antennas, strictly more than `n_t`.
    pub n_r: usize,
    /// Coherence block length in channel uses.
    pub coherence: usize,
    /// Pilot length `T_p`, with `n_t <= T_p <= coherence`.
    pub training_len: usize,
    /// Average receive SNR, linear.
    pub snr: T,
    /// Transmit distortion level (EVM), in `[0, 1)`.
    pub impairment: T,
}

impl<T: Scalar> SystemConfig<T> {
    pub fn new(
        n_t: usize,
        n_r: usize,
        coherence: usize,
        training_len: usize,
        snr: T,
        impairment: T,
    ) -> Result<Self> {
        let cfg = Self {
            n_t,
            n_r,
            coherence,
            training_len,
            snr,
            impairment,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::InvalidConfig("n_t must be positive".into()));
        }
        if self.training_len < self.n_t {
            return Err(Error::InvalidConfig(format!(
                "training length {} is shorter than n_t = {}",
                self.training_len, self.n_t
            )));
        }
        if self.training_len > self.coherence {
            return Err(Error::InvalidConfig(format!(
                "training length {} exceeds coherence length {}",
                self.training_len, self.coherence
            )));
        }
        if self.n_r <= self.n_t {
            return Err(Error::BetaOutOfRange {
                n_t: self.n_t as f64,
                n_r: self.n_r as f64,
            });
        }
        if !(self.snr > T::zero()) || !self.snr.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "snr must be positive, got {}",
                self.snr
            )));
        }
        if !(self.impairment >= T::zero() && self.impairment < T::one()) {
            return Err(Error::InvalidConfig(format!(
                "impairment must lie in [0, 1), got {}",
                self.impairment
            )));
        }
        Ok(())
    }

    pub fn beta(&self) -> T {
        T::of_usize(self.n_r) / T::of_usize(self.n_t)
    }

    /// Data channel uses per block, `T - T_p`.
    pub fn data_len(&self) -> usize {
        self.coherence - self.training_len
    }

    /// `sqrt(rho / N_t)`, the per-antenna amplitude.
    pub fn amplitude(&self) -> T {
        (self.snr / T::of_usize(self.n_t)).sqrt()
    }
}

/// The matrices of one simulated training phase.
#[derive(Debug, Clone)]
pub struct ChannelBlock<T> {
    /// True channel, `N_r x N_t`.
    pub h: ComplexMatrix<T>,
    /// Pilots, `N_t x T_p`.
    pub s_p: ComplexMatrix<T>,
    /// Pilot distortion, `N_t x T_p`.
    pub delta_p: ComplexMatrix<T>,
    /// Receiver noise, `N_r x T_p`.
    pub v_p: ComplexMatrix<T>,
    /// Received pilots, `N_r x T_p`.
    pub y_p: ComplexMatrix<T>,
    /// LMMSE estimate, `N_r x N_t`.
    pub h_hat: ComplexMatrix<T>,
    /// Estimate rescaled to unit-variance entries.
    pub h_bar: ComplexMatrix<T>,
}

/// Channel and its estimate without the pilot-domain matrices.
#[derive(Debug, Clone)]
pub struct Estimate<T> {
    pub h: ComplexMatrix<T>,
    pub h_hat: ComplexMatrix<T>,
    pub h_bar: ComplexMatrix<T>,
}

impl<T: Scalar> From<ChannelBlock<T>> for Estimate<T> {
    fn from(b: ChannelBlock<T>) -> Self {
        Self {
            h: b.h,
            h_hat: b.h_hat,
            h_bar: b.h_bar,
        }
    }
}

/// How a training phase is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainingModel {
    /// Draw `Delta_p` and `V_p` in full and form `Y_p` explicitly.
    Full,
    /// Draw `Y_p S_p^H / sqrt(T_p)` directly.
    ///
    /// With orthogonal pilots, `V_p S_p^H / sqrt(T_p)` and `Delta_p S_p^H / sqrt(T_p)`
    /// are again i.i.d. CSCG with the original variances (a unitary change of
    /// basis), so the estimate has exactly the same distribution as under
    /// [`TrainingModel::Full`] at roughly a third of the cost.
    #[default]
    Projected,
}

/// `N_t x T_p` pilot matrix made of the first `N_t` rows of the unnormalized
/// `T_p`-point DFT, so that `S S^H = T_p I`.
pub fn pilot_matrix<T: Scalar>(n_t: usize, t_p: usize) -> Result<ComplexMatrix<T>> {
    if n_t == 0 || t_p < n_t {
        return Err(Error::InvalidConfig(format!(
            "pilot matrix needs 1 <= n_t <= T_p, got n_t = {n_t}, T_p = {t_p}"
        )));
    }
    let tp = t_p as f64;
    Ok(ComplexMatrix::from_fn(n_t, t_p, |k, t| {
        // reduce k*t before scaling to keep the phase accurate for long blocks
        let phase = -2.0 * std::f64::consts::PI * ((k * t) % t_p) as f64 / tp;
        Complex::new(T::of(phase.cos()), T::of(phase.sin()))
    }))
}

pub fn build_pilots<T: Scalar>(cfg: &SystemConfig<T>) -> Result<ComplexMatrix<T>> {
    pilot_matrix(cfg.n_t, cfg.training_len)
}

fn lmmse_regularizer<T: Scalar>(snr: T, impairment: T) -> T {
    impairment * impairment * snr + T::one()
}

fn check_estimator_dims<T: Scalar>(y_p: &ComplexMatrix<T>, s_p: &ComplexMatrix<T>) -> Result<()> {
    if y_p.cols() != s_p.cols() {
        return Err(Error::DimensionMismatch {
            op: "lmmse_estimate",
            left: y_p.shape(),
            right: s_p.shape(),
        });
    }
    Ok(())
}

/// LMMSE channel estimate from received pilots.
///
/// With `a = sqrt(rho / N_t)` the estimate is
/// `a Y_p (a^2 S_p^H S_p + (delta^2 rho + 1) I_{T_p})^{-1} S_p^H`, evaluated
/// literally with a `T_p x T_p` Cholesky solve. It holds for any pilot matrix.
pub fn lmmse_estimate<T: Scalar>(
    y_p: &ComplexMatrix<T>,
    s_p: &ComplexMatrix<T>,
    snr: T,
    impairment: T,
) -> Result<ComplexMatrix<T>> {
    check_estimator_dims(y_p, s_p)?;
    let n_t = s_p.rows();
    let t_p = s_p.cols();
    let a = (snr / T::of_usize(n_t)).sqrt();
    let s_h = s_p.adjoint();
    let mut gram = s_h.matmul(s_p)?.scale(a * a);
    let reg = lmmse_regularizer(snr, impairment);
    for i in 0..t_p {
        gram[(i, i)].re = gram[(i, i)].re + reg;
    }
    let x = Cholesky::factor(&gram)?.solve(&s_h)?;
    Ok(y_p.matmul(&x)?.scale(a))
}

/// Gain `a / (a^2 T_p + delta^2 rho + 1)` of the estimator when `S_p S_p^H = T_p I`.
pub fn orthogonal_estimator_gain<T: Scalar>(n_t: usize, t_p: usize, snr: T, impairment: T) -> T {
    let a2 = snr / T::of_usize(n_t);
    a2.sqrt() / (a2 * T::of_usize(t_p) + lmmse_regularizer(snr, impairment))
}

/// [`lmmse_estimate`] specialised to orthogonal pilots: `gain * Y_p S_p^H`.
pub fn lmmse_estimate_orthogonal<T: Scalar>(
    y_p: &ComplexMatrix<T>,
    s_p: &ComplexMatrix<T>,
    snr: T,
    impairment: T,
) -> Result<ComplexMatrix<T>> {
    check_estimator_dims(y_p, s_p)?;
    let gain = orthogonal_estimator_gain(s_p.rows(), s_p.cols(), snr, impairment);
    Ok(y_p.matmul(&s_p.adjoint())?.scale(gain))
}

fn normalize_estimate<T: Scalar>(
    h_hat: &ComplexMatrix<T>,
    stats: &EstimationStats<T>,
) -> ComplexMatrix<T> {
    h_hat.scale(stats.var_estimate.sqrt().recip())
}

/// Simulates one training phase literally: draws `H`, `Delta_p` and `V_p` (in
/// that order), forms `Y_p`, and estimates the channel.
pub fn simulate_training<T: Scalar>(
    cfg: &SystemConfig<T>,
    rng: &mut RngStream,
) -> Result<ChannelBlock<T>> {
    cfg.validate()?;
    let s_p = build_pilots(cfg)?;
    let h = sample_cscg_matrix(rng, cfg.n_r, cfg.n_t, T::one());
    let delta_p = sample_cscg_matrix(
        rng,
        cfg.n_t,
        cfg.training_len,
        cfg.impairment * cfg.impairment,
    );
    let v_p = sample_cscg_matrix(rng, cfg.n_r, cfg.training_len, T::one());
    let y_p = h
        .matmul(&s_p.add(&delta_p)?)?
        .scale(cfg.amplitude())
        .add(&v_p)?;
    let h_hat = lmmse_estimate_orthogonal(&y_p, &s_p, cfg.snr, cfg.impairment)?;
    let h_bar = normalize_estimate(&h_hat, &estimation_variances(cfg));
    Ok(ChannelBlock {
        h,
        s_p,
        delta_p,
        v_p,
        y_p,
        h_hat,
        h_bar,
    })
}

/// Samples the channel estimate in the pilot-projected domain; see
/// [`TrainingModel::Projected`].
pub fn simulate_projected<T: Scalar>(
    cfg: &SystemConfig<T>,
    rng: &mut RngStream,
) -> Result<Estimate<T>> {
    cfg.validate()?;
    let tp = T::of_usize(cfg.training_len);
    let root_tp = tp.sqrt();
    let h = sample_cscg_matrix(rng, cfg.n_r, cfg.n_t, T::one());
    let d = sample_cscg_matrix(rng, cfg.n_t, cfg.n_t, cfg.impairment * cfg.impairment);
    let v = sample_cscg_matrix(rng, cfg.n_r, cfg.n_t, T::one());
    // Y_p S_p^H = sqrt(T_p) (a H (sqrt(T_p) I + D) + V), scaled by the estimator gain
    let mut h_hat = if cfg.impairment > T::zero() {
        h.matmul(&d)?
    } else {
        ComplexMatrix::zeros(cfg.n_r, cfg.n_t)
    };
    let g = orthogonal_estimator_gain(cfg.n_t, cfg.training_len, cfg.snr, cfg.impairment) * root_tp;
    let ag = cfg.amplitude() * g;
    for ((o, &hv), &vv) in h_hat
        .as_mut_slice()
        .iter_mut()
        .zip(h.as_slice())
        .zip(v.as_slice())
    {
        *o = (*o + hv * root_tp) * ag + vv * g;
    }
    let h_bar = normalize_estimate(&h_hat, &estimation_variances(cfg));
    Ok(Estimate { h, h_hat, h_bar })
}

pub fn sample_estimate<T: Scalar>(
    cfg: &SystemConfig<T>,
    rng: &mut RngStream,
    model: TrainingModel,
) -> Result<Estimate<T>> {
    match model {
        TrainingModel::Full => simulate_training(cfg, rng).map(Estimate::from),
        TrainingModel::Projected => simulate_projected(cfg, rng),
    }
}

/// Per-stream ZF SINR from a unit-variance estimate `H_bar`:
/// `1 / (delta^2 + c0 [(H_bar^H H_bar)^{-1}]_{kk})` with
/// `c0 = N_t (rho + rho delta^2 + 1 + eps) / (rho eps)`.
pub fn zf_sinr_from_estimate<T: Scalar>(
    h_bar: &ComplexMatrix<T>,
    cfg: &SystemConfig<T>,
) -> Result<Vec<T>> {
    if h_bar.shape() != (cfg.n_r, cfg.n_t) {
        return Err(Error::DimensionMismatch {
            op: "zf_sinr",
            left: h_bar.shape(),
            right: (cfg.n_r, cfg.n_t),
        });
    }
    let eps = estimation_variances(cfg).epsilon;
    let snr = cfg.snr;
    let d2 = cfg.impairment * cfg.impairment;
    let c0 = T::of_usize(cfg.n_t) * (snr + snr * d2 + T::one() + eps) / (snr * eps);
    let inv_diag = hermitian_inverse_diagonal(&h_bar.gram())?;
    Ok(inv_diag
        .into_iter()
        .map(|x| (d2 + c0 * x).recip())
        .collect())
}

pub fn zf_sinr_per_stream<T: Scalar>(
    block: &ChannelBlock<T>,
    cfg: &SystemConfig<T>,
) -> Result<Vec<T>> {
    zf_sinr_from_estimate(&block.h_bar, cfg)
}

/// Per-stream ZF SINR of one freshly simulated block.
///
/// The data-phase symbols, distortion and noise do not enter the SINR, which
/// conditions on the channel estimate only, so none of them are drawn here and
/// the result equals `zf_sinr_per_stream(simulate_training(cfg, rng))`.
pub fn simulate_data_sinr<T: Scalar>(cfg: &SystemConfig<T>, rng: &mut RngStream) -> Result<Vec<T>> {
    let block = simulate_training(cfg, rng)?;
    zf_sinr_per_stream(&block, cfg)
}

/// Data-phase matrices of one block.
#[derive(Debug, Clone)]
pub struct DataPhase<T> {
    pub s_d: ComplexMatrix<T>,
    pub delta_d: ComplexMatrix<T>,
    pub v_d: ComplexMatrix<T>,
    pub y_d: ComplexMatrix<T>,
}

/// Draws `T_d` data symbols through the block's channel. Only used for
/// end-to-end sanity checks; the SINR path never needs it.
pub fn simulate_data_phase<T: Scalar>(
    cfg: &SystemConfig<T>,
    h: &ComplexMatrix<T>,
    rng: &mut RngStream,
) -> Result<DataPhase<T>> {
    let t_d = cfg.data_len();
    if t_d == 0 {
        return Err(Error::InvalidConfig(
            "block has no data channel uses".into(),
        ));
    }
    let s_d = sample_cscg_matrix(rng, cfg.n_t, t_d, T::one());
    let delta_d = sample_cscg_matrix(rng, cfg.n_t, t_d, cfg.impairment * cfg.impairment);
    let v_d = sample_cscg_matrix(rng, cfg.n_r, t_d, T::one());
    let y_d = h
        .matmul(&s_d.add(&delta_d)?)?
        .scale(cfg.amplitude())
        .add(&v_d)?;
    Ok(DataPhase {
        s_d,
        delta_d,
        v_d,
        y_d,
    })
}

/// Mean squared magnitude of the entries of `m`.
pub fn mean_power<T: Scalar>(m: &ComplexMatrix<T>) -> T {
    m.frobenius_norm_sqr() / T::of_usize(m.rows() * m.cols())
}

/// Mean squared magnitude of `a - b`, i.e. the empirical per-entry error power.
pub fn mean_error_power<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    Ok(mean_power(&a.sub(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::deterministic_sinr;
    use num_traits::Zero;

    fn is_zero_matrix(m: &ComplexMatrix<f64>) -> bool {
        m.as_slice().iter().all(|z| z.is_zero())
    }

    fn cfg(n_t: usize, n_r: usize, t_p: usize, snr: f64, delta: f64) -> SystemConfig<f64> {
        SystemConfig::new(n_t, n_r, 5760.max(t_p), t_p, snr, delta).unwrap()
    }

    fn pilot_gram_error(n_t: usize, t_p: usize) -> f64 {
        let s = pilot_matrix::<f64>(n_t, t_p).unwrap();
        let g = s.matmul(&s.adjoint()).unwrap();
        let target = ComplexMatrix::<f64>::identity(n_t).scale(t_p as f64);
        g.max_abs_diff(&target).unwrap() / t_p as f64
    }

    #[test]
    fn config_validation() {
        assert!(SystemConfig::new(4, 8, 100, 3, 1.0, 0.1).is_err());
        assert!(SystemConfig::new(4, 8, 100, 101, 1.0, 0.1).is_err());
        assert!(matches!(
            SystemConfig::new(4, 4, 100, 8, 1.0, 0.1),
            Err(Error::BetaOutOfRange { .. })
        ));
        assert!(SystemConfig::new(4, 8, 100, 8, 0.0, 0.1).is_err());
        assert!(SystemConfig::new(4, 8, 100, 8, 1.0, 1.0).is_err());
        assert!(SystemConfig::new(0, 8, 100, 8, 1.0, 0.1).is_err());
        let c = SystemConfig::new(4, 8, 100, 8, 1.0, 0.1).unwrap();
        assert_eq!(c.beta(), 2.0);
        assert_eq!(c.data_len(), 92);
    }

    #[test]
    fn scalar_pilot() {
        let s = pilot_matrix::<f64>(1, 1).unwrap();
        assert_eq!(s.as_slice(), &[Complex::new(1.0, 0.0)]);
        assert!(pilot_matrix::<f64>(3, 2).is_err());
    }

    #[test]
    fn pilot_gram_small_cases() {
        assert!(pilot_gram_error(2, 4) < 1e-12);
        let s = pilot_matrix::<f64>(4, 4).unwrap();
        let target = ComplexMatrix::<f64>::identity(4).scale(4.0);
        assert!(
            s.adjoint()
                .matmul(&s)
                .unwrap()
                .max_abs_diff(&target)
                .unwrap()
                < 1e-12
        );
        assert!(
            s.matmul(&s.adjoint())
                .unwrap()
                .max_abs_diff(&target)
                .unwrap()
                < 1e-12
        );
    }

    #[test]
    fn pilot_gram_sweep() {
        for t_p in (1..=512).step_by(7).chain([256, 511, 512]) {
            for n_t in [1, t_p / 3 + 1, t_p] {
                let n_t = n_t.min(t_p);
                assert!(pilot_gram_error(n_t, t_p) < 1e-9, "n_t={n_t} t_p={t_p}");
                let s = pilot_matrix::<f64>(n_t, t_p).unwrap();
                let tr = s.matmul(&s.adjoint()).unwrap().trace().re;
                assert!(((tr - (n_t * t_p) as f64) / (n_t * t_p) as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn estimator_is_linear_at_zero() {
        let s = pilot_matrix::<f64>(2, 4).unwrap();
        let y = ComplexMatrix::<f64>::zeros(3, 4);
        let h = lmmse_estimate(&y, &s, 5.0, 0.1).unwrap();
        assert!(is_zero_matrix(&h));
        assert!(lmmse_estimate(&ComplexMatrix::<f64>::zeros(3, 5), &s, 5.0, 0.1).is_err());
    }

    #[test]
    fn reduced_and_inverse_forms_agree() {
        for (n_t, t_p, snr, delta) in [
            (2, 2, 1.0, 0.1),
            (4, 8, 10.0, 0.15),
            (3, 16, 1e4, 0.0),
            (8, 8, 0.1, 0.175),
        ] {
            let c = cfg(n_t, n_t + 3, t_p, snr, delta);
            let block = simulate_training(&c, &mut RngStream::new(5, 1)).unwrap();
            let literal = lmmse_estimate(&block.y_p, &block.s_p, snr, delta).unwrap();
            let scale = literal
                .as_slice()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(literal.max_abs_diff(&block.h_hat).unwrap() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn ideal_hardware_matches_classical_estimator() {
        // delta = 0: classical LMMSE a/(a^2 T_p + 1) Y S^H
        let c = cfg(2, 4, 4, 3.0, 0.0);
        let block = simulate_training(&c, &mut RngStream::new(8, 0)).unwrap();
        let a = (3.0f64 / 2.0).sqrt();
        let direct = block
            .y_p
            .matmul(&block.s_p.adjoint())
            .unwrap()
            .scale(a / (a * a * 4.0 + 1.0));
        assert!(direct.max_abs_diff(&block.h_hat).unwrap() < 1e-12);
    }

    #[test]
    fn two_by_two_elementwise() {
        let (snr, delta) = (1.0, 0.1);
        let c = cfg(2, 3, 2, snr, delta);
        let b = simulate_training(&c, &mut RngStream::new(17, 0)).unwrap();
        let y = &b.y_p;
        // S = [[1, 1], [1, -1]]; S^H S = 2I, so the estimate is a/(a^2*2 + d^2 rho + 1) Y S^H
        let a = (snr / 2.0f64).sqrt();
        let g = a / (a * a * 2.0 + delta * delta * snr + 1.0);
        for r in 0..3 {
            let e0 = (y[(r, 0)] + y[(r, 1)]) * g;
            let e1 = (y[(r, 0)] - y[(r, 1)]) * g;
            assert!((b.h_hat[(r, 0)] - e0).norm() < 1e-12);
            assert!((b.h_hat[(r, 1)] - e1).norm() < 1e-12);
        }
        let lit = lmmse_estimate(y, &b.s_p, snr, delta).unwrap();
        assert!(lit.max_abs_diff(&b.h_hat).unwrap() < 1e-12);
    }

    #[test]
    fn received_pilots_follow_the_model() {
        let c = cfg(3, 5, 6, 20.0, 0.1);
        let b = simulate_training(&c, &mut RngStream::new(2, 3)).unwrap();
        let rebuilt =
            b.h.matmul(&b.s_p.add(&b.delta_p).unwrap())
                .unwrap()
                .scale(c.amplitude())
                .add(&b.v_p)
                .unwrap();
        assert_eq!(rebuilt, b.y_p);
    }

    #[test]
    fn near_perfect_estimate_at_huge_snr() {
        let c = cfg(4, 8, 4, 1e12, 0.0);
        let mut total = 0.0;
        for i in 0..50 {
            let b = simulate_training(&c, &mut RngStream::new(1, i)).unwrap();
            total += mean_error_power(&b.h, &b.h_hat).unwrap();
        }
        assert!(total / 50.0 < 1e-5);
    }

    #[test]
    fn sinr_with_orthogonal_columns() {
        // H_bar with orthogonal columns of squared norm g, ideal hardware
        let (n_t, n_r, g) = (2usize, 4usize, 3.0f64);
        let c = cfg(n_t, n_r, 4, 10.0, 0.0);
        let h_bar = ComplexMatrix::from_fn(n_r, n_t, |i, j| {
            if i == j {
                Complex::new(g.sqrt(), 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let eps = 10.0 * 4.0 / 2.0;
        let expected = 10.0 * eps * g / (n_t as f64 * (10.0 + 1.0 + eps));
        for s in zf_sinr_from_estimate(&h_bar, &c).unwrap() {
            assert!((s - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn sinr_ceiling_and_shape() {
        let c = cfg(4, 8, 8, 1e3, 0.15);
        for i in 0..200 {
            let s = simulate_data_sinr(&c, &mut RngStream::new(9, i)).unwrap();
            assert_eq!(s.len(), 4);
            assert!(s.iter().all(|&x| x > 0.0 && x < 1.0 / 0.0225));
        }
    }

    #[test]
    fn data_sinr_is_the_composition() {
        let c = cfg(4, 8, 8, 10.0, 0.1);
        let a = simulate_data_sinr(&c, &mut RngStream::new(3, 3)).unwrap();
        let block = simulate_training(&c, &mut RngStream::new(3, 3)).unwrap();
        assert_eq!(a, zf_sinr_per_stream(&block, &c).unwrap());
    }

    #[test]
    fn sinr_dimension_mismatch() {
        let c = cfg(4, 8, 8, 10.0, 0.1);
        assert!(zf_sinr_from_estimate(&ComplexMatrix::<f64>::zeros(8, 3), &c).is_err());
        assert!(matches!(
            zf_sinr_from_estimate(&ComplexMatrix::<f64>::zeros(8, 4), &c),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn ideal_hardware_sinr_concentrates() {
        // delta = 0, beta = 2: per-stream SINRs sit near the deterministic value
        let c = cfg(64, 128, 128, 10.0, 0.0);
        let target = deterministic_sinr(&c).unwrap();
        let s = simulate_data_sinr(&c, &mut RngStream::new(21, 0)).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!(((mean - target) / target).abs() < 0.1, "{mean} vs {target}");
    }

    #[test]
    fn data_phase_follows_the_model() {
        let c = SystemConfig::new(2, 3, 10, 4, 5.0, 0.1).unwrap();
        let block = simulate_training(&c, &mut RngStream::new(4, 0)).unwrap();
        let d = simulate_data_phase(&c, &block.h, &mut RngStream::new(4, 1)).unwrap();
        assert_eq!(d.y_d.shape(), (3, 6));
        let rebuilt = block
            .h
            .matmul(&d.s_d.add(&d.delta_d).unwrap())
            .unwrap()
            .scale(c.amplitude())
            .add(&d.v_d)
            .unwrap();
        assert_eq!(rebuilt, d.y_d);
        let full = SystemConfig::new(2, 3, 4, 4, 5.0, 0.1).unwrap();
        assert!(simulate_data_phase(&full, &block.h, &mut RngStream::new(4, 2)).is_err());
    }

    #[test]
    fn projected_model_has_the_right_shapes() {
        let c = cfg(3, 7, 9, 10.0, 0.1);
        let e = simulate_projected(&c, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(e.h.shape(), (7, 3));
        assert_eq!(e.h_hat.shape(), (7, 3));
        assert_eq!(e.h_bar.shape(), (7, 3));
    }

    #[test]
    fn works_in_f32() {
        let c = SystemConfig::<f32>::new(4, 8, 100, 8, 10.0, 0.1).unwrap();
        let s = simulate_data_sinr(&c, &mut RngStream::new(3, 0)).unwrap();
        let s64 = simulate_data_sinr(
            &SystemConfig::<f64>::new(4, 8, 100, 8, 10.0, 0.1).unwrap(),
            &mut RngStream::new(3, 0),
        )
        .unwrap();
        for (a, b) in s.iter().zip(&s64) {
            assert!(((*a as f64 - b) / b).abs() < 1e-3);
        }
    }
}
