use super::{EigenDecomposition, Hermitian};
use crate::error::{Error, Result};

/// Smallest eigenvalue that still counts as positive: `n·ε·max(1, λ_max)`.
pub fn pd_threshold(n: usize, lambda_max: f64) -> f64 {
    n as f64 * f64::EPSILON * lambda_max.max(1.0)
}

pub fn lambda_min(h: &Hermitian) -> Result<f64> {
    Ok(h.eig()?.min())
}

pub fn lambda_max(h: &Hermitian) -> Result<f64> {
    Ok(h.eig()?.max())
}

pub fn is_pd(h: &Hermitian) -> Result<bool> {
    let e = h.eig()?;
    Ok(decomposition_is_pd(&e))
}

pub(crate) fn decomposition_is_pd(e: &EigenDecomposition) -> bool {
    e.dim() > 0 && e.min() > pd_threshold(e.dim(), e.max())
}

/// `M^p = U diag(mu^p) U*` for Hermitian positive definite `M`.
///
/// Any finite real `p` is accepted; negative powers are used throughout the
/// analysis (`X^{-1/2}`, `X^{p-1}`).
pub fn frac_power(m: &Hermitian, p: f64) -> Result<Hermitian> {
    if !p.is_finite() {
        return Err(Error::InvalidExponent {
            value: p,
            reason: "exponent must be finite",
        });
    }
    let e = m.eig()?;
    power_of(&e, p)
}

pub(crate) fn power_of(e: &EigenDecomposition, p: f64) -> Result<Hermitian> {
    if !decomposition_is_pd(e) {
        return Err(Error::NotPositiveDefinite {
            lambda_min: e.min(),
        });
    }
    Ok(e.map(|mu| mu.powf(p)))
}

impl Hermitian {
    pub fn is_pd(&self) -> Result<bool> {
        is_pd(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, CMat, RMat};
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> Hermitian {
        Hermitian::from_real(&RMat::from_diagonal(&DVector::from_row_slice(v))).unwrap()
    }

    #[test]
    fn diagonal_square_root() {
        let r = frac_power(&diag(&[4.0, 9.0]), 0.5).unwrap();
        assert!((r.as_matrix() - diag(&[2.0, 3.0]).as_matrix()).norm() < 1e-14);
    }

    #[test]
    fn identity_any_power() {
        for p in [0.1, 0.5, 1.0 / 3.0, 2.5] {
            let r = frac_power(&Hermitian::identity(3), p).unwrap();
            assert!((r.as_matrix() - CMat::identity(3, 3)).norm() < 1e-14);
        }
    }

    #[test]
    fn non_pd_rejected_with_lambda_min() {
        match frac_power(&diag(&[1.0, -2.0]), 0.5) {
            Err(Error::NotPositiveDefinite { lambda_min }) => assert_eq!(lambda_min, -2.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            frac_power(&diag(&[1.0, 0.0]), 0.5),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn pd_threshold_is_scale_aware() {
        assert!(is_pd(&diag(&[1e-10, 2e-10])).unwrap());
        assert!(!is_pd(&diag(&[1e-20, 1e3])).unwrap());
    }

    #[test]
    fn complex_power_matches_product() {
        let m = CMat::from_row_slice(2, 2, &[c64(3., 0.), c64(1., -1.), c64(1., 1.), c64(4., 0.)]);
        let h = Hermitian::new(m).unwrap();
        let half = frac_power(&h, 0.5).unwrap();
        let sq = half.as_matrix() * half.as_matrix();
        assert!((sq - h.as_matrix()).norm() < 1e-13);
    }
}
