//! Dense complex matrix primitives.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`, stored column-major, so
//! `vec` is a plain copy of the storage slice: `vec A = (a_1^T, ..., a_n^T)^T`
//! with `a_k` the k-th column.

mod eig;
mod hermitian;
mod power;

pub use eig::{herm_eig, EigenDecomposition};
pub use hermitian::Hermitian;
pub(crate) use power::{decomposition_is_pd, power_of};
pub use power::{frac_power, is_pd, lambda_max, lambda_min, pd_threshold};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lifts a real matrix to a complex one.
pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Kronecker product `A ⊗ B = (a_ij B)`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

/// Inverse of [`vec`] for square `n x n` matrices.
pub fn unvec(v: &CVec, n: usize) -> Result<CMat> {
    if v.len() != n * n {
        return Err(Error::shape("unvec", n * n, v.len()));
    }
    Ok(CMat::from_column_slice(n, n, v.as_slice()))
}

/// The vec-permutation matrix `Π` of order `n²` with `Π vec A = vec Aᵀ`.
pub fn vec_perm(n: usize) -> RMat {
    let mut pi = RMat::zeros(n * n, n * n);
    for r in 0..n {
        for c in 0..n {
            // A[(r, c)] sits at c*n + r in vec A and at r*n + c in vec Aᵀ.
            pi[(r * n + c, c * n + r)] = 1.0;
        }
    }
    pi
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn spectral_norm_real(a: &RMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Smallest singular value (square input).
pub fn sigma_min(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().min()
}

pub fn fro_norm(a: &CMat) -> f64 {
    a.norm()
}

pub fn is_real(a: &CMat) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

pub fn real_part(a: &CMat) -> RMat {
    a.map(|z| z.re)
}

pub fn imag_part(a: &CMat) -> RMat {
    a.map(|z| z.im)
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::shape(
            "linear solve",
            format!("{0}x{0} system", b.nrows()),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::InvalidArgument("singular linear system".into()))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &CMat::identity(a.nrows(), a.ncols()))
}

pub(crate) fn check_square(context: &'static str, a: &CMat, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::shape(
            context,
            format!("{n}x{n}"),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: usize, cols: usize, seed: u64) -> CMat {
        // small deterministic LCG; keeps the test independent of the rng module
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        CMat::from_fn(rows, cols, |_, _| {
            let mut next = || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            c64(next(), next())
        })
    }

    #[test]
    fn kron_of_identities() {
        let i2 = CMat::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMat::identity(4, 4));
    }

    #[test]
    fn vec_is_column_stacking() {
        let a = CMat::from_row_slice(2, 2, &[c64(1., 0.), c64(3., 0.), c64(2., 0.), c64(4., 0.)]);
        let v: Vec<f64> = vec(&a).iter().map(|z| z.re).collect();
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(unvec(&vec(&a), 2).unwrap(), a);
    }

    #[test]
    fn vec_of_triple_product() {
        let (a, w, b) = (sample(3, 3, 1), sample(3, 3, 2), sample(3, 3, 3));
        let lhs = vec(&(&a * &w * &b));
        let rhs = kron(&b.transpose(), &a) * vec(&w);
        assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn vec_perm_small_cases() {
        assert_eq!(vec_perm(1), RMat::identity(1, 1));
        let pi = vec_perm(2);
        let expected = RMat::from_row_slice(
            4,
            4,
            &[
                1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.,
            ],
        );
        assert_eq!(pi, expected);
    }

    #[test]
    fn vec_perm_transposes_exactly() {
        let n = 4;
        let a = sample(n, n, 9);
        let pi = complexify(&vec_perm(n));
        assert_eq!(&pi * vec(&a), vec(&a.transpose()));
        assert_eq!(&pi * &pi, CMat::identity(n * n, n * n));
        assert_eq!(pi.transpose(), pi);
    }

    #[test]
    fn norms() {
        let a = CMat::from_row_slice(2, 2, &[c64(3., 0.), c64(0., 0.), c64(0., 0.), c64(0., 4.)]);
        assert!((spectral_norm(&a) - 4.0).abs() < 1e-14);
        assert!((fro_norm(&a) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn unvec_rejects_bad_length() {
        assert!(unvec(&CVec::zeros(5), 2).is_err());
    }
}
