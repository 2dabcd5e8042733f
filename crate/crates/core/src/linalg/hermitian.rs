use num_complex::Complex64;

use super::{check_square, CMat, EigenDecomposition, RMat};
use crate::error::{Error, Result};

/// A square complex matrix with exact Hermitian structure.
///
/// Construction always stores `(M + M*)/2`; the discarded anti-Hermitian part
/// is kept as `asymmetry = ||M - M*||_F / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian {
    mat: CMat,
    asymmetry: f64,
}

impl Hermitian {
    /// Relative tolerance on `||M - M*||_F / 2` accepted by [`Hermitian::new`].
    pub const TOLERANCE: f64 = 1e-12;

    /// Accepts `m` when it is Hermitian to within `TOLERANCE * ||M||_F`.
    pub fn new(m: CMat) -> Result<Self> {
        let h = Self::symmetrize(m)?;
        let tol = Self::TOLERANCE * h.mat.norm().max(f64::MIN_POSITIVE);
        if h.asymmetry > tol {
            return Err(Error::NotHermitian {
                defect: h.asymmetry,
                tolerance: tol,
            });
        }
        Ok(h)
    }

    /// Always succeeds for finite square input; records the discarded part.
    pub fn symmetrize(m: CMat) -> Result<Self> {
        check_square("Hermitian", &m, m.nrows())?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let adj = m.adjoint();
        let asymmetry = (&m - &adj).norm() / 2.0;
        let mat = (m + adj).scale(0.5);
        Ok(Self { mat, asymmetry })
    }

    pub fn from_real(m: &RMat) -> Result<Self> {
        Self::new(super::complexify(m))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: CMat::identity(n, n),
            asymmetry: 0.0,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mat: CMat::zeros(n, n),
            asymmetry: 0.0,
        }
    }

    /// Internal constructor for results that are Hermitian by construction up
    /// to rounding, e.g. `A* X A`.
    pub(crate) fn from_computed(m: CMat) -> Self {
        let adj = m.adjoint();
        let asymmetry = (&m - &adj).norm() / 2.0;
        Self {
            mat: (m + adj).scale(0.5),
            asymmetry,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn is_real(&self) -> bool {
        super::is_real(&self.mat)
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        super::herm_eig(self)
    }

    pub fn power(&self, p: f64) -> Result<Hermitian> {
        super::frac_power(self, p)
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        let e = self.eig()?;
        Ok(e.values().iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
    }

    pub fn fro_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        Hermitian::from_computed(&self.mat + &other.mat)
    }

    pub fn sub(&self, other: &Hermitian) -> Hermitian {
        Hermitian::from_computed(&self.mat - &other.mat)
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian::from_computed(self.mat.scale(s))
    }

    /// `A* self A`.
    pub fn congruence(&self, a: &CMat) -> Hermitian {
        Hermitian::from_computed(a.adjoint() * &self.mat * a)
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.mat[(r, c)]
    }
}

impl AsRef<CMat> for Hermitian {
    fn as_ref(&self) -> &CMat {
        &self.mat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn symmetrize_records_deviation() {
        let q = CMat::from_row_slice(2, 2, &[c64(1., 0.), c64(1., 0.), c64(0., 0.), c64(1., 0.)]);
        assert!(matches!(
            Hermitian::new(q.clone()),
            Err(Error::NotHermitian { .. })
        ));
        let h = Hermitian::symmetrize(q).unwrap();
        assert!((h.asymmetry() - 0.5_f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.entry(0, 1), c64(0.5, 0.));
        assert_eq!(h.entry(1, 0), c64(0.5, 0.));
    }

    #[test]
    fn rejects_non_square_and_nan() {
        assert!(Hermitian::new(CMat::zeros(2, 3)).is_err());
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert_eq!(Hermitian::symmetrize(m), Err(Error::NonFinite));
    }

    #[test]
    fn complex_hermitian_accepted() {
        let m = CMat::from_row_slice(2, 2, &[c64(2., 0.), c64(1., -1.), c64(1., 1.), c64(3., 0.)]);
        let h = Hermitian::new(m.clone()).unwrap();
        assert_eq!(h.as_matrix(), &m);
        assert_eq!(h.asymmetry(), 0.0);
    }
}
