use crate::error::Result;
use crate::scalar::Scalar;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_STEPS: usize = 400;

/// Location and value of a one-dimensional maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMax<T> {
    pub arg: T,
    pub value: T,
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// The bracket shrinks until its width is at most `tol * max(1, |lo|, |hi|)`.
/// A bracket that starts narrower than that returns its midpoint. Otherwise the
/// interior estimate is compared against both end points, so monotone
/// functions return the better boundary.
pub fn golden_section_max<T: Scalar>(
    mut f: impl FnMut(T) -> Result<T>,
    lo: T,
    hi: T,
    tol: T,
) -> Result<LineMax<T>> {
    let width_tol = |a: T, b: T| tol * T::one().max(a.abs()).max(b.abs());
    let two = T::of(2.0);
    if hi - lo <= width_tol(lo, hi) {
        let mid = (lo + hi) / two;
        return Ok(LineMax {
            arg: mid,
            value: f(mid)?,
        });
    }

    let r = T::of(INV_PHI);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..MAX_STEPS {
        if b - a <= width_tol(a, b) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    let mut best = if f1 >= f2 {
        LineMax { arg: x1, value: f1 }
    } else {
        LineMax { arg: x2, value: f2 }
    };
    for end in [lo, hi] {
        let v = f(end)?;
        if v > best.value {
            best = LineMax { arg: end, value: v };
        }
    }
    Ok(best)
}
