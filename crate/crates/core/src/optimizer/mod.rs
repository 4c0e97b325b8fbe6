//! Sequential maximization of the deterministic energy efficiency over the
//! training surplus `T_a = T_p - N_t`, the antenna ratio `beta = N_r / N_t`
//! and the transmit antenna count `N_t`, plus an exhaustive lattice oracle.
//!
//! Each coordinate step is a golden-section search: EE is concave in `T_a`,
//! quasiconcave in `beta`, and quasiconcave in `N_t` on `[1, (T - T_a)/2]`
//! while decreasing beyond it. A full cycle of the three steps is repeated
//! until the EE gain of a cycle drops below the threshold, then the
//! continuous optimum is snapped to the best neighbouring integer configuration.

mod golden;
mod grid;

pub use golden::{golden_section_max, LineMax};
pub use grid::{grid_search, LatticeBounds};

use crate::closed_forms::{ee_deterministic, EeContext};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Hard stop for the automatic expansion of the `beta` search interval.
pub const BETA_LIMIT: f64 = 65_536.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings<T> {
    /// Stop once a full cycle improves EE by less than this (bits/Joule).
    pub ee_threshold: T,
    pub max_outer_iters: usize,
    /// Relative bracket width at which line searches stop.
    pub line_search_tol: T,
    /// Initial upper end of the `beta` search; doubled as needed.
    pub beta_upper: T,
}

impl<T: Scalar> Default for OptimizerSettings<T> {
    fn default() -> Self {
        Self {
            ee_threshold: T::of(1e-10),
            max_outer_iters: 200,
            line_search_tol: T::of(1e-6),
            beta_upper: T::of(8.0),
        }
    }
}

impl<T: Scalar> OptimizerSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.ee_threshold > T::zero()) {
            return Err(Error::InvalidConfig("ee_threshold must be positive".into()));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::InvalidConfig(
                "max_outer_iters must be positive".into(),
            ));
        }
        if !(self.line_search_tol > T::zero()) {
            return Err(Error::InvalidConfig(
                "line_search_tol must be positive".into(),
            ));
        }
        if !(self.beta_upper > T::one() + self.line_search_tol) {
            return Err(Error::InvalidConfig(format!(
                "beta_upper must exceed 1 + line_search_tol, got {}",
                self.beta_upper
            )));
        }
        Ok(())
    }
}

/// A point of the continuous problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxedPoint<T> {
    pub t_a: T,
    pub beta: T,
    pub n_t: T,
    pub ee: T,
}

/// Which coordinate a trace entry updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    /// The starting point, recorded once as iteration 0.
    Initial,
    TrainingSurplus,
    AntennaRatio,
    TransmitAntennas,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry<T> {
    pub iteration: usize,
    pub parameter: Parameter,
    pub ee: T,
}

/// Outcome of [`iterate`] or [`grid_search`].
///
/// `t_p_star`, `n_t_star`, `n_r_star` and `ee_star` describe the integer
/// configuration that is returned. `t_a_star` and `beta_star` are the
/// continuous optimum found before integer refinement; `relaxed` holds the
/// whole continuous point.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult<T> {
    pub t_p_star: usize,
    pub t_a_star: T,
    pub n_t_star: usize,
    pub beta_star: T,
    pub n_r_star: usize,
    pub ee_star: T,
    pub trace: Vec<TraceEntry<T>>,
    pub converged: bool,
    /// Outer cycles performed.
    pub iterations: usize,
    pub relaxed: RelaxedPoint<T>,
}

/// Maximizes EE over `T_a` on `[0, T - n_t]`.
pub fn optimize_ta<T: Scalar>(
    n_t: T,
    beta: T,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
) -> Result<T> {
    line_ta(n_t, beta, ctx, settings).map(|m| m.arg)
}

fn line_ta<T: Scalar>(
    n_t: T,
    beta: T,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
) -> Result<LineMax<T>> {
    let hi = ctx.coherence - n_t;
    if !(hi >= T::zero()) {
        return Err(Error::InfeasibleInterval {
            lo: 0.0,
            hi: hi.as_f64(),
        });
    }
    golden_section_max(
        |t_a| ee_deterministic(n_t, beta, t_a, ctx),
        T::zero(),
        hi,
        settings.line_search_tol,
    )
}

/// Maximizes EE over `beta` in `(1, beta_upper]`, doubling `beta_upper` until
/// the interval brackets the maximum.
pub fn optimize_beta<T: Scalar>(
    n_t: T,
    t_a: T,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
) -> Result<T> {
    line_beta(n_t, t_a, ctx, settings).map(|m| m.arg)
}

fn line_beta<T: Scalar>(
    n_t: T,
    t_a: T,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
) -> Result<LineMax<T>> {
    let ee = |beta| ee_deterministic(n_t, beta, t_a, ctx);
    let lo = T::one() + settings.line_search_tol;
    let limit = T::of(BETA_LIMIT);
    let mut hi = settings.beta_upper.max(lo + settings.line_search_tol);
    loop {
        let mid = (lo + hi) / T::of(2.0);
        if ee(hi)? < ee(mid)? {
            break;
        }
        hi = hi * T::of(2.0);
        if hi > limit {
            return Err(Error::BracketingFailure { limit: BETA_LIMIT });
        }
    }
    golden_section_max(ee, lo, hi, settings.line_search_tol)
}

/// Maximizes EE over `n_t` on `[1, (T - t_a)/2]`, which is also the maximum on
/// `[1, T - t_a]` because EE decreases past the midpoint.
pub fn optimize_nt<T: Scalar>(
    beta: T,
    t_a: T,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
) -> Result<T> {
    line_nt(beta, t_a, ctx, settings).map(|m| m.arg)
}

fn line_nt<T: Scalar>(
    beta: T,
    t_a: T,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
) -> Result<LineMax<T>> {
    let room = ctx.coherence - t_a;
    if !(room >= T::one()) {
        return Err(Error::InfeasibleInterval {
            lo: 1.0,
            hi: room.as_f64(),
        });
    }
    let hi = (room / T::of(2.0)).max(T::one());
    golden_section_max(
        |n_t| ee_deterministic(n_t, beta, t_a, ctx),
        T::one(),
        hi,
        settings.line_search_tol,
    )
}

/// Runs the three line searches in turn until a full cycle gains less than
/// `ee_threshold`, then refines to integers.
///
/// An update is only accepted when it raises EE, so the recorded trace is
/// nondecreasing. Hitting `max_outer_iters` is reported through
/// `converged = false` rather than as an error.
pub fn iterate<T: Scalar>(
    settings: &OptimizerSettings<T>,
    initial: RelaxedPoint<T>,
    ctx: &EeContext<T>,
) -> Result<OptimizationResult<T>> {
    settings.validate()?;
    let mut p = initial;
    p.ee = ee_deterministic(p.n_t, p.beta, p.t_a, ctx)?;
    let mut trace = vec![TraceEntry {
        iteration: 0,
        parameter: Parameter::Initial,
        ee: p.ee,
    }];
    let (converged, iterations) = ascend(&mut p, ctx, settings, true, Some(&mut trace))?;
    let refined = refine_to_integers(&p, ctx, settings)?;
    Ok(OptimizationResult {
        t_p_star: refined.t_p,
        t_a_star: p.t_a,
        n_t_star: refined.n_t,
        beta_star: p.beta,
        n_r_star: refined.n_r,
        ee_star: refined.ee,
        trace,
        converged,
        iterations,
        relaxed: p,
    })
}

/// Cycles of line searches from `p`, over `n_t` too when `move_nt` is set.
/// Returns `(converged, cycles)`.
fn ascend<T: Scalar>(
    p: &mut RelaxedPoint<T>,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
    move_nt: bool,
    mut trace: Option<&mut Vec<TraceEntry<T>>>,
) -> Result<(bool, usize)> {
    let mut iterations = 0;
    while iterations < settings.max_outer_iters {
        iterations += 1;
        let start = p.ee;
        let mut record = |p: &RelaxedPoint<T>, parameter| {
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceEntry {
                    iteration: iterations,
                    parameter,
                    ee: p.ee,
                });
            }
        };

        let m = line_ta(p.n_t, p.beta, ctx, settings)?;
        if m.value > p.ee {
            p.t_a = m.arg;
            p.ee = m.value;
            record(p, Parameter::TrainingSurplus);
        }
        let m = line_beta(p.n_t, p.t_a, ctx, settings)?;
        if m.value > p.ee {
            p.beta = m.arg;
            p.ee = m.value;
            record(p, Parameter::AntennaRatio);
        }
        if move_nt {
            let m = line_nt(p.beta, p.t_a, ctx, settings)?;
            if m.value > p.ee {
                p.n_t = m.arg;
                p.ee = m.value;
                record(p, Parameter::TransmitAntennas);
            }
        }

        if p.ee - start < settings.ee_threshold {
            return Ok((true, iterations));
        }
    }
    Ok((false, iterations))
}

/// The default starting point `(T/10, 2, 8)`, pulled inside the feasible set
/// for very short blocks.
pub fn default_initial<T: Scalar>(ctx: &EeContext<T>) -> RelaxedPoint<T> {
    let n_t = T::of(8.0).min(ctx.coherence / T::of(2.0)).max(T::one());
    let t_a = (ctx.coherence / T::of(10.0))
        .min(ctx.coherence - n_t)
        .max(T::zero());
    RelaxedPoint {
        t_a,
        beta: T::of(2.0),
        n_t,
        ee: T::zero(),
    }
}

#[derive(Debug, Clone, Copy)]
struct IntegerPoint<T> {
    n_t: usize,
    n_r: usize,
    t_p: usize,
    ee: T,
}

/// Best feasible integer configuration near a continuous optimum.
///
/// For each of the two integers around `n_t` the remaining two coordinates are
/// re-optimized with `n_t` held fixed. For each of the two integers around the
/// resulting `beta n_t`, `T_a` is optimized once more; EE is concave in `T_a`,
/// so its floor or ceiling is the best integer surplus for those antenna counts.
fn refine_to_integers<T: Scalar>(
    p: &RelaxedPoint<T>,
    ctx: &EeContext<T>,
    settings: &OptimizerSettings<T>,
) -> Result<IntegerPoint<T>> {
    let coherence = ctx.coherence.to_usize().unwrap_or(0);
    let floor_ceil = |x: T| {
        let f = x.floor().to_usize().unwrap_or(0);
        let c = x.ceil().to_usize().unwrap_or(0);
        if f == c {
            vec![f]
        } else {
            vec![f, c]
        }
    };
    let mut best: Option<IntegerPoint<T>> = None;
    for n_t in floor_ceil(p.n_t) {
        if n_t == 0 || n_t > coherence {
            continue;
        }
        let nt = T::of_usize(n_t);
        let mut q = RelaxedPoint {
            n_t: nt,
            t_a: p.t_a.min(ctx.coherence - nt).max(T::zero()),
            ..*p
        };
        q.ee = ee_deterministic(q.n_t, q.beta, q.t_a, ctx)?;
        ascend(&mut q, ctx, settings, false, None)?;
        for n_r in floor_ceil(q.beta * nt) {
            let n_r = n_r.max(n_t + 1);
            let beta = T::of_usize(n_r) / nt;
            let t_a = line_ta(nt, beta, ctx, settings)?.arg;
            for t_a in floor_ceil(t_a) {
                let t_p = n_t + t_a;
                if t_p > coherence {
                    continue;
                }
                let ee = ee_deterministic(nt, beta, T::of_usize(t_a), ctx)?;
                if best.is_none_or(|b| ee > b.ee) {
                    best = Some(IntegerPoint { n_t, n_r, t_p, ee });
                }
            }
        }
    }
    best.ok_or(Error::EmptyFeasibleSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{PowerModel, TABLE_ONE_COHERENCE};

    fn ctx(snr_db: f64, delta: f64) -> EeContext<f64> {
        EeContext::new(
            10f64.powf(snr_db / 10.0),
            delta,
            TABLE_ONE_COHERENCE,
            PowerModel::table_one(),
        )
    }

    fn settings() -> OptimizerSettings<f64> {
        OptimizerSettings::default()
    }

    #[test]
    fn settings_validation() {
        assert!(settings().validate().is_ok());
        let mut s = settings();
        s.beta_upper = 1.0;
        assert!(s.validate().is_err());
        let mut s = settings();
        s.ee_threshold = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn ta_is_a_stationary_point() {
        let c = ctx(20.0, 0.1);
        let t = optimize_ta(10.0, 4.0, &c, &settings()).unwrap();
        assert!(t > 0.0 && t < 5750.0);
        let f = |x: f64| ee_deterministic(10.0, 4.0, x, &c).unwrap();
        let h = 1e-2;
        let slope = (f(t + h) - f(t - h)) / (2.0 * h);
        let scale = f(t) / 100.0;
        assert!(slope.abs() < 1e-3 * scale, "slope {slope}");
    }

    #[test]
    fn ta_shrinks_with_snr_for_ideal_hardware() {
        let s = settings();
        let t3 = optimize_ta(10.0, 4.0, &ctx(30.0, 0.0), &s).unwrap();
        let t6 = optimize_ta(10.0, 4.0, &ctx(60.0, 0.0), &s).unwrap();
        let t9 = optimize_ta(10.0, 4.0, &ctx(90.0, 0.0), &s).unwrap();
        assert!(t3 > t6 && t6 > t9, "{t3} {t6} {t9}");
    }

    #[test]
    fn ta_impaired_needs_more_training_at_high_snr() {
        let s = settings();
        let ideal = optimize_ta(10.0, 4.0, &ctx(60.0, 0.0), &s).unwrap();
        let impaired = optimize_ta(10.0, 4.0, &ctx(60.0, 0.15), &s).unwrap();
        assert!(impaired > ideal, "{impaired} vs {ideal}");
    }

    #[test]
    fn ta_infeasible_interval() {
        let c = ctx(20.0, 0.1);
        assert!(matches!(
            line_ta(5761.0, 2.0, &c, &settings()),
            Err(Error::InfeasibleInterval { .. }) | Err(Error::Domain(_))
        ));
    }

    #[test]
    fn beta_fails_to_bracket_without_receive_power() {
        let mut c = ctx(20.0, 0.0);
        c.power.p_rx = 0.0;
        assert!(matches!(
            optimize_beta(10.0, 50.0, &c, &settings()),
            Err(Error::BracketingFailure { .. })
        ));
    }

    #[test]
    fn beta_receive_array_smaller_under_impairments() {
        let s = settings();
        let ideal = optimize_beta(10.0, 100.0, &ctx(20.0, 0.0), &s).unwrap();
        let impaired = optimize_beta(10.0, 100.0, &ctx(20.0, 0.15), &s).unwrap();
        assert!(impaired * 10.0 < ideal * 10.0, "{impaired} vs {ideal}");
    }

    #[test]
    fn beta_argmax_invariant_to_power_scaling() {
        let s = settings();
        let c = ctx(10.0, 0.1);
        let mut scaled = c;
        scaled.power = c.power.scaled(7.5);
        let a = optimize_beta(12.0, 80.0, &c, &s).unwrap();
        let b = optimize_beta(12.0, 80.0, &scaled, &s).unwrap();
        assert!((a - b).abs() < 1e-9 * a);
        let ea = ee_deterministic(12.0, a, 80.0, &c).unwrap();
        let eb = ee_deterministic(12.0, b, 80.0, &scaled).unwrap();
        assert!((ea / eb - 7.5).abs() < 1e-9);
    }

    #[test]
    fn nt_single_feasible_point() {
        let c = ctx(20.0, 0.1);
        assert_eq!(optimize_nt(2.0, 5758.0, &c, &settings()).unwrap(), 1.0);
        assert!(optimize_nt(2.0, 5759.5, &c, &settings()).is_err());
    }

    #[test]
    fn nt_grows_with_snr_for_ideal_hardware() {
        let s = settings();
        let n: Vec<f64> = [10.0, 20.0, 30.0]
            .iter()
            .map(|&db| optimize_nt(4.0, 100.0, &ctx(db, 0.0), &s).unwrap())
            .collect();
        assert!(n[0] <= n[1] && n[1] <= n[2], "{n:?}");
    }

    #[test]
    fn nt_fewer_transmit_antennas_under_impairments() {
        let s = settings();
        let ideal = optimize_nt(4.0, 100.0, &ctx(40.0, 0.0), &s).unwrap();
        let impaired = optimize_nt(4.0, 100.0, &ctx(40.0, 0.15), &s).unwrap();
        assert!(impaired < ideal, "{impaired} vs {ideal}");
    }

    #[test]
    fn iterate_trace_is_monotone_and_feasible() {
        let s = settings();
        for (db, delta) in [(-10.0, 0.0), (20.0, 0.15), (40.0, 0.1)] {
            let c = ctx(db, delta);
            let r = iterate(&s, default_initial(&c), &c).unwrap();
            assert!(r.converged);
            for w in r.trace.windows(2) {
                assert!(w[1].ee >= w[0].ee - s.ee_threshold);
            }
            assert!(r.n_t_star >= 1 && r.n_r_star > r.n_t_star);
            assert!(r.t_p_star >= r.n_t_star && r.t_p_star <= TABLE_ONE_COHERENCE);
            assert!(r.relaxed.beta > 1.0 && r.relaxed.t_a >= 0.0);
        }
    }

    #[test]
    fn iterate_restart_at_optimum_is_a_fixed_point() {
        let s = settings();
        let c = ctx(10.0, 0.0);
        let first = iterate(&s, default_initial(&c), &c).unwrap();
        let again = iterate(&s, first.relaxed, &c).unwrap();
        assert!(again.converged);
        assert_eq!(again.iterations, 1);
        assert_eq!(again.trace.len(), 1);
        assert_eq!(again.relaxed, first.relaxed);
    }

    #[test]
    fn iterate_matches_grid_on_reference_parameters() {
        let s = settings();
        let c = ctx(20.0, 0.0);
        let it = iterate(&s, default_initial(&c), &c).unwrap();
        let grid = grid_search(&c, &LatticeBounds::up_to(64, 256, 512)).unwrap();
        assert!(grid.ee_star >= it.ee_star * (1.0 - 1e-12));
        assert!((grid.ee_star - it.ee_star) / grid.ee_star < 0.01);
    }

    #[test]
    fn refined_point_is_the_lattice_optimum() {
        let s = settings();
        let bounds = LatticeBounds::up_to(64, 256, 512);
        for (db, delta) in [(-10.0, 0.0), (0.0, 0.15), (30.0, 0.0), (30.0, 0.15)] {
            let c = ctx(db, delta);
            let it = iterate(&s, default_initial(&c), &c).unwrap();
            let grid = grid_search(&c, &bounds).unwrap();
            assert_eq!(
                (it.n_t_star, it.n_r_star, it.t_p_star),
                (grid.n_t_star, grid.n_r_star, grid.t_p_star),
                "{db} dB, delta {delta}"
            );
        }
    }

    #[test]
    fn iterate_rejects_infeasible_start() {
        let c = ctx(10.0, 0.1);
        let bad = RelaxedPoint {
            t_a: 10.0,
            beta: 0.5,
            n_t: 4.0,
            ee: 0.0,
        };
        assert!(iterate(&settings(), bad, &c).is_err());
    }

    #[test]
    fn iterate_reports_non_convergence() {
        let mut s = settings();
        s.max_outer_iters = 1;
        let c = ctx(20.0, 0.15);
        let r = iterate(&s, default_initial(&c), &c).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn grid_single_point() {
        let c = ctx(10.0, 0.1);
        let r = grid_search(&c, &LatticeBounds::new(3..=3, 7..=7, 20..=20)).unwrap();
        assert_eq!((r.n_t_star, r.n_r_star, r.t_p_star), (3, 7, 20));
        assert_eq!(
            r.ee_star,
            ee_deterministic(3.0, 7.0 / 3.0, 17.0, &c).unwrap()
        );
    }

    #[test]
    fn grid_empty_lattice() {
        let c = ctx(10.0, 0.1);
        assert!(matches!(
            grid_search(&c, &LatticeBounds::new(5..=5, 2..=5, 10..=20)),
            Err(Error::EmptyFeasibleSet)
        ));
    }

    #[test]
    fn grid_matches_brute_force() {
        for (db, delta) in [(0.0, 0.0), (25.0, 0.15), (-5.0, 0.08)] {
            let c = ctx(db, delta);
            let r = grid_search(&c, &LatticeBounds::up_to(8, 16, 32)).unwrap();
            let mut best = (f64::MIN, 0, 0, 0);
            for n_t in 1..=8usize {
                for n_r in n_t + 1..=16 {
                    for t_p in n_t..=32 {
                        let v = ee_deterministic(
                            n_t as f64,
                            n_r as f64 / n_t as f64,
                            (t_p - n_t) as f64,
                            &c,
                        )
                        .unwrap();
                        if v > best.0 {
                            best = (v, n_t, n_r, t_p);
                        }
                    }
                }
            }
            assert_eq!((r.ee_star, r.n_t_star, r.n_r_star, r.t_p_star), best);
        }
    }
}
