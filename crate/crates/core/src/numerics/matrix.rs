use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                op: "ComplexMatrix::new",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); n])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let n = rhs.cols;
        // Split planes keep the inner loops on contiguous reals so they vectorize.
        let (b_re, b_im) = split(&rhs.data);
        let mut acc_re = vec![T::zero(); n];
        let mut acc_im = vec![T::zero(); n];
        let mut out = Self::zeros(self.rows, n);
        for (i, out_row) in out.data.chunks_exact_mut(n).enumerate() {
            acc_re.fill(T::zero());
            acc_im.fill(T::zero());
            for (k, &a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let br = &b_re[k * n..(k + 1) * n];
                let bi = &b_im[k * n..(k + 1) * n];
                axpy_complex(&mut acc_re, &mut acc_im, a, br, bi);
            }
            for ((o, &re), &im) in out_row.iter_mut().zip(&acc_re).zip(&acc_im) {
                *o = Complex::new(re, im);
            }
        }
        Ok(out)
    }

    /// `self^H * self`, exactly Hermitian by construction.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g_re = vec![T::zero(); n * n];
        let mut g_im = vec![T::zero(); n * n];
        let mut row_re = vec![T::zero(); n];
        let mut row_im = vec![T::zero(); n];
        for i in 0..self.rows {
            for ((r, im), z) in row_re.iter_mut().zip(row_im.iter_mut()).zip(self.row(i)) {
                *r = z.re;
                *im = z.im;
            }
            // upper triangle, row j: g[j][l] += conj(x_j) x_l for l >= j
            for j in 0..n {
                let a = Complex::new(row_re[j], -row_im[j]);
                let span = j * n + j..(j + 1) * n;
                axpy_complex(
                    &mut g_re[span.clone()],
                    &mut g_im[span],
                    a,
                    &row_re[j..],
                    &row_im[j..],
                );
            }
        }
        let mut g = Self::zeros(n, n);
        for j in 0..n {
            g.data[j * n + j] = Complex::new(g_re[j * n + j], T::zero());
            for l in j + 1..n {
                let z = Complex::new(g_re[j * n + l], g_im[j * n + l]);
                g.data[j * n + l] = z;
                g.data[l * n + j] = z.conj();
            }
        }
        g
    }

    pub fn scale(&self, factor: T) -> Self {
        self.map(|z| z * factor)
    }

    pub fn map(&self, mut f: impl FnMut(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Self,
        op: &'static str,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Sum of diagonal entries; square matrices only.
    pub fn trace(&self) -> Complex<T> {
        debug_assert_eq!(self.rows, self.cols);
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::zero(), |acc, z| acc + z)
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Option<T> {
        if self.shape() != rhs.shape() {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| (a - b).norm())
                .fold(T::zero(), T::max),
        )
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..=i).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

fn split<T: Scalar>(data: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    (
        data.iter().map(|z| z.re).collect(),
        data.iter().map(|z| z.im).collect(),
    )
}

/// `acc += a * b` on split complex planes.
#[inline]
fn axpy_complex<T: Scalar>(
    acc_re: &mut [T],
    acc_im: &mut [T],
    a: Complex<T>,
    b_re: &[T],
    b_im: &[T],
) {
    let (ar, ai) = (a.re, a.im);
    let n = acc_re.len();
    let (acc_im, b_re, b_im) = (&mut acc_im[..n], &b_re[..n], &b_im[..n]);
    for j in 0..n {
        acc_re[j] = acc_re[j] + ar * b_re[j] - ai * b_im[j];
        acc_im[j] = acc_im[j] + ar * b_im[j] + ai * b_re[j];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn new_rejects_bad_length() {
        assert!(ComplexMatrix::<f64>::new(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::<f64>::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn matmul_small() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 1.0), c(0.0, 2.0), c(3.0, 0.0), c(1.0, -1.0)],
        )
        .unwrap();
        let b = ComplexMatrix::new(2, 1, vec![c(2.0, 0.0), c(0.0, 1.0)]).unwrap();
        let p = a.matmul(&b).unwrap();
        // (1+i)2 + 2i*i = 2+2i-2 = 2i ; 3*2 + (1-i)i = 6 + i + 1 = 7+i
        assert_eq!(p.as_slice(), &[c(0.0, 2.0), c(7.0, 1.0)]);
        assert!(b.matmul(&b).is_err());
    }

    #[test]
    fn gram_matches_adjoint_product() {
        let a = ComplexMatrix::from_fn(5, 3, |i, j| {
            c((i * 3 + j) as f64 * 0.3 - 1.0, (i as f64) - 0.7 * j as f64)
        });
        let g = a.gram();
        let reference = a.adjoint().matmul(&a).unwrap();
        assert!(g.max_abs_diff(&reference).unwrap() < 1e-12);
        assert!(g.is_hermitian(0.0));
    }

    #[test]
    fn trace_and_identity() {
        let i3 = ComplexMatrix::<f64>::identity(3);
        assert_eq!(i3.trace(), c(3.0, 0.0));
        assert_eq!(i3.frobenius_norm_sqr(), 3.0);
    }
}
