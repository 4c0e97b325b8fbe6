//! Complex matrices, Gaussian sampling and the Cholesky-based inverse diagonal
//! used by the zero-forcing SINR.

mod cholesky;
mod matrix;
mod rng;

pub use cholesky::{hermitian_inverse_diagonal, Cholesky, PIVOT_FLOOR};
pub use matrix::ComplexMatrix;
pub use rng::RngStream;

use num_complex::Complex;

use crate::scalar::Scalar;

/// Draws a matrix with i.i.d. circularly-symmetric complex Gaussian entries of
/// the given variance (real and imaginary parts each carry `variance / 2`).
pub fn sample_cscg_matrix<T: Scalar>(
    rng: &mut RngStream,
    rows: usize,
    cols: usize,
    variance: T,
) -> ComplexMatrix<T> {
    if variance <= T::zero() {
        return ComplexMatrix::zeros(rows, cols);
    }
    let sd = (variance.as_f64() * 0.5).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| cscg(rng, sd))
}

#[inline]
fn cscg<T: Scalar>(rng: &mut RngStream, sd: f64) -> Complex<T> {
    let re = rng.standard_normal() * sd;
    let im = rng.standard_normal() * sd;
    Complex::new(T::of(re), T::of(im))
}

/// A unit-norm vector distributed as one column of a Haar unitary matrix.
pub fn haar_column<T: Scalar>(rng: &mut RngStream, n: usize) -> Vec<Complex<T>> {
    let sd = 0.5f64.sqrt();
    loop {
        let v: Vec<Complex<f64>> = (0..n).map(|_| cscg(rng, sd)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v
                .into_iter()
                .map(|z| Complex::new(T::of(z.re / norm), T::of(z.im / norm)))
                .collect();
        }
    }
}

/// `x^H A x` for a real diagonal `A`.
pub fn diagonal_quadratic_form<T: Scalar>(x: &[Complex<T>], diag: &[T]) -> T {
    x.iter().zip(diag).map(|(z, &d)| z.norm_sqr() * d).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use num_traits::Zero;
    use proptest::prelude::*;

    /// Full inverse by Gauss-Jordan elimination with partial pivoting.
    fn gauss_jordan_inverse(a: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        let n = a.rows();
        let mut m = a.clone();
        let mut inv = ComplexMatrix::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| m[(x, col)].norm().partial_cmp(&m[(y, col)].norm()).unwrap())
                .unwrap();
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(piv, j)];
                m[(piv, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(piv, j)];
                inv[(piv, j)] = t;
            }
            let p = m[(col, col)];
            for j in 0..n {
                m[(col, j)] /= p;
                inv[(col, j)] /= p;
            }
            for i in 0..n {
                if i != col {
                    let f = m[(i, col)];
                    for j in 0..n {
                        let mj = m[(col, j)];
                        let ij = inv[(col, j)];
                        m[(i, j)] -= f * mj;
                        inv[(i, j)] -= f * ij;
                    }
                }
            }
        }
        inv
    }

    fn random_gram(seed: u64, n: usize) -> ComplexMatrix<f64> {
        let mut rng = RngStream::new(seed, 0);
        sample_cscg_matrix::<f64>(&mut rng, n + 3, n, 1.0).gram()
    }

    #[test]
    fn zero_variance_gives_zero_matrix() {
        let mut rng = RngStream::new(1, 0);
        let m = sample_cscg_matrix::<f64>(&mut rng, 2, 2, 0.0);
        assert!(m.as_slice().iter().all(|z| z.is_zero()));
    }

    #[test]
    fn unit_variance_second_moment() {
        let mut rng = RngStream::new(7, 0);
        let m = sample_cscg_matrix::<f64>(&mut rng, 64, 64, 1.0);
        let mean = m.frobenius_norm_sqr() / 4096.0;
        assert!((mean - 1.0).abs() < 0.05, "mean |z|^2 = {mean}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_cscg_matrix::<f64>(&mut RngStream::new(7, 0), 5, 4, 2.0);
        let b = sample_cscg_matrix::<f64>(&mut RngStream::new(7, 0), 5, 4, 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn f32_and_f64_draw_the_same_stream() {
        let a = sample_cscg_matrix::<f64>(&mut RngStream::new(3, 9), 3, 3, 1.0);
        let b = sample_cscg_matrix::<f32>(&mut RngStream::new(3, 9), 3, 3, 1.0);
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x.re - y.re as f64).abs() < 1e-6);
            assert!((x.im - y.im as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn real_and_imaginary_covariance() {
        let v = 3.0;
        let n = 20_000usize;
        let mut rng = RngStream::new(42, 0);
        let m = sample_cscg_matrix::<f64>(&mut rng, n, 1, v);
        let nf = n as f64;
        let (mut srr, mut sii, mut sri, mut sr, mut si) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for z in m.as_slice() {
            srr += z.re * z.re;
            sii += z.im * z.im;
            sri += z.re * z.im;
            sr += z.re;
            si += z.im;
        }
        let (mr, mi) = (sr / nf, si / nf);
        let var_re = srr / nf - mr * mr;
        let var_im = sii / nf - mi * mi;
        let cov = sri / nf - mr * mi;
        // Standard error of a Gaussian sample variance is s^2 sqrt(2/n).
        let half = v / 2.0;
        let se_var = half * (2.0 / nf).sqrt();
        let se_cov = half / nf.sqrt();
        assert!((var_re - half).abs() < 3.0 * se_var, "var_re {var_re}");
        assert!((var_im - half).abs() < 3.0 * se_var, "var_im {var_im}");
        assert!(cov.abs() < 3.0 * se_cov, "cov {cov}");
    }

    #[test]
    fn inverse_diagonal_of_identity_and_diagonal() {
        let d = hermitian_inverse_diagonal(&ComplexMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(d, vec![1.0, 1.0, 1.0]);
        let d =
            hermitian_inverse_diagonal(&ComplexMatrix::<f64>::from_diagonal(&[2.0, 4.0])).unwrap();
        assert!(
            (d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.25).abs() < 1e-15,
            "{d:?}"
        );
    }

    #[test]
    fn inverse_diagonal_matches_gauss_jordan_5x5() {
        let g = random_gram(5, 5);
        let fast = hermitian_inverse_diagonal(&g).unwrap();
        let oracle = gauss_jordan_inverse(&g);
        for (k, &v) in fast.iter().enumerate() {
            let o = oracle[(k, k)];
            assert!(o.im.abs() < 1e-10);
            assert!(((v - o.re) / o.re).abs() < 1e-10, "{v} vs {}", o.re);
            assert!(v > 0.0);
        }
    }

    #[test]
    fn singular_gram_rejected() {
        // rank one: every column equal
        let col = ComplexMatrix::<f64>::from_fn(4, 3, |i, _| Complex::new(i as f64 + 1.0, 0.5));
        match hermitian_inverse_diagonal(&col.gram()) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert!(pivot >= 1),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
        assert!(hermitian_inverse_diagonal(&ComplexMatrix::<f64>::zeros(2, 2)).is_err());
        assert!(hermitian_inverse_diagonal(&ComplexMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn cholesky_solve_recovers_rhs() {
        let g = random_gram(9, 6);
        let chol = Cholesky::factor(&g).unwrap();
        let b = sample_cscg_matrix::<f64>(&mut RngStream::new(2, 2), 6, 2, 1.0);
        let x = chol.solve(&b).unwrap();
        let back = g.matmul(&x).unwrap();
        assert!(back.max_abs_diff(&b).unwrap() < 1e-10);
    }

    #[test]
    fn haar_column_scalar_and_norm() {
        let mut rng = RngStream::new(1, 1);
        let x = haar_column::<f64>(&mut rng, 1);
        assert!((x[0].norm() - 1.0).abs() < 1e-12);
        let x = haar_column::<f64>(&mut rng, 37);
        let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_quadratic_form_mean() {
        let n = 256;
        let diag: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let mut rng = RngStream::new(3, 0);
        let mean = (0..200)
            .map(|_| diagonal_quadratic_form(&haar_column::<f64>(&mut rng, n), &diag))
            .sum::<f64>()
            / 200.0;
        assert!((mean - 128.5).abs() < 2.0, "mean = {mean}");
    }

    #[test]
    fn haar_concentration_n512() {
        let n = 512;
        let diag: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        let target = diag.iter().sum::<f64>() / n as f64;
        let mut rng = RngStream::new(4, 0);
        let hits = (0..1000)
            .filter(|_| {
                let q = diagonal_quadratic_form(&haar_column::<f64>(&mut rng, n), &diag);
                ((q - target) / target).abs() < 0.1
            })
            .count();
        assert!(hits >= 950, "hits = {hits}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn inverse_diagonal_agrees_with_oracle(seed in any::<u64>(), n in 1usize..=16) {
            let g = random_gram(seed, n);
            let fast = hermitian_inverse_diagonal(&g).unwrap();
            let oracle = gauss_jordan_inverse(&g);
            for (k, &v) in fast.iter().enumerate() {
                let o = oracle[(k, k)].re;
                prop_assert!(((v - o) / o).abs() < 1e-10);
            }
        }
    }
}
