use std::ops::RangeInclusive;

use rayon::prelude::*;

use super::{OptimizationResult, RelaxedPoint};
use crate::closed_forms::{ee_deterministic, EeContext};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inclusive integer ranges searched by [`grid_search`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBounds {
    pub n_t: RangeInclusive<usize>,
    pub n_r: RangeInclusive<usize>,
    pub t_p: RangeInclusive<usize>,
}

impl LatticeBounds {
    pub fn new(
        n_t: RangeInclusive<usize>,
        n_r: RangeInclusive<usize>,
        t_p: RangeInclusive<usize>,
    ) -> Self {
        Self { n_t, n_r, t_p }
    }

    /// `1..=n_t_max`, `1..=n_r_max`, `1..=t_p_max`.
    pub fn up_to(n_t_max: usize, n_r_max: usize, t_p_max: usize) -> Self {
        Self::new(1..=n_t_max, 1..=n_r_max, 1..=t_p_max)
    }
}

#[derive(Debug, Clone, Copy)]
struct Best<T> {
    ee: T,
    n_t: usize,
    n_r: usize,
    t_p: usize,
}

fn better<T: Scalar>(cur: Option<Best<T>>, cand: Best<T>) -> Option<Best<T>> {
    match cur {
        Some(c) if c.ee >= cand.ee => Some(c),
        _ => Some(cand),
    }
}

/// Exhaustive maximization of the deterministic energy efficiency over an
/// integer lattice, skipping points with `n_r <= n_t`, `t_p < n_t` or
/// `t_p > T`.
///
/// Ties go to the lexicographically smallest `(n_t, n_r, t_p)`, independent of
/// how the `n_t` slices are scheduled across threads.
pub fn grid_search<T: Scalar>(
    ctx: &EeContext<T>,
    bounds: &LatticeBounds,
) -> Result<OptimizationResult<T>> {
    let coherence = ctx.coherence.to_usize().unwrap_or(0);
    let n_ts: Vec<usize> = bounds.n_t.clone().filter(|&n| n >= 1).collect();
    let slices: Vec<Option<Best<T>>> = n_ts
        .par_iter()
        .map(|&n_t| -> Result<Option<Best<T>>> {
            let nt = T::of_usize(n_t);
            let r_lo = (*bounds.n_r.start()).max(n_t + 1);
            let p_lo = (*bounds.t_p.start()).max(n_t);
            let p_hi = (*bounds.t_p.end()).min(coherence);
            let mut best = None;
            for n_r in r_lo..=*bounds.n_r.end() {
                let beta = T::of_usize(n_r) / nt;
                for t_p in p_lo..=p_hi {
                    let ee = ee_deterministic(nt, beta, T::of_usize(t_p - n_t), ctx)?;
                    best = better(best, Best { ee, n_t, n_r, t_p });
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let best = slices
        .into_iter()
        .flatten()
        .fold(None, better)
        .ok_or(Error::EmptyFeasibleSet)?;
    let beta = T::of_usize(best.n_r) / T::of_usize(best.n_t);
    let t_a = T::of_usize(best.t_p - best.n_t);
    Ok(OptimizationResult {
        t_p_star: best.t_p,
        t_a_star: t_a,
        n_t_star: best.n_t,
        beta_star: beta,
        n_r_star: best.n_r,
        ee_star: best.ee,
        trace: Vec::new(),
        converged: true,
        iterations: 0,
        relaxed: RelaxedPoint {
            t_a,
            beta,
            n_t: T::of_usize(best.n_t),
            ee: best.ee,
        },
    })
}
