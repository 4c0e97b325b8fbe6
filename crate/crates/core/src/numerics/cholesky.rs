use num_complex::Complex;
use num_traits::Zero;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative pivot floor: pivots at or below this times `trace(A)/n` are rejected.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Lower-triangular factor `L` with `A = L L^H` and a real positive diagonal.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: ComplexMatrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factorizes a Hermitian positive-definite matrix, reading only its lower triangle.
    pub fn factor(a: &ComplexMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                op: "cholesky",
                left: a.shape(),
                right: (n, n),
            });
        }
        let threshold = T::of(PIVOT_FLOOR) * a.trace().re / T::of_usize(n);
        let mut l = ComplexMatrix::<T>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d = d - l[(j, k)].norm_sqr();
            }
            // NaN pivots fail this test too.
            if !(d > threshold) {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: d.as_f64(),
                    threshold: threshold.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex::new(djj, T::zero());
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &ComplexMatrix<T> {
        &self.l
    }

    /// Solves `A X = B` by forward then backward substitution.
    pub fn solve(&self, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let n = self.l.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                op: "cholesky solve",
                left: self.l.shape(),
                right: b.shape(),
            });
        }
        let l = &self.l;
        let mut x = b.clone();
        for c in 0..b.cols() {
            // L y = b
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s = s - l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)].re;
            }
            // L^H x = y
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s = s - l[(k, i)].conj() * x[(k, c)];
                }
                x[(i, c)] = s / l[(i, i)].re;
            }
        }
        Ok(x)
    }

    /// Diagonal of `A^{-1} = L^{-H} L^{-1}`: entry k is the squared norm of column k of `L^{-1}`.
    pub fn inverse_diagonal(&self) -> Vec<T> {
        let n = self.l.rows();
        let l = &self.l;
        let mut col = vec![Complex::<T>::zero(); n];
        (0..n)
            .map(|k| {
                // Column k of L^{-1} is zero above row k.
                col[k] = Complex::new(l[(k, k)].re.recip(), T::zero());
                let mut acc = col[k].norm_sqr();
                for i in k + 1..n {
                    let mut s = Complex::zero();
                    for m in k..i {
                        s = s + l[(i, m)] * col[m];
                    }
                    col[i] = -s / l[(i, i)].re;
                    acc = acc + col[i].norm_sqr();
                }
                acc
            })
            .collect()
    }
}

/// Real diagonal of the inverse of a Hermitian positive-definite matrix.
pub fn hermitian_inverse_diagonal<T: Scalar>(a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    Ok(Cholesky::factor(a)?.inverse_diagonal())
}
