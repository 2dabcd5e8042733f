use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{CMat, Hermitian};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 10_000;

/// `M = U diag(mu) U*` with ascending `mu`.
///
/// Each column of `U` is scaled so that its largest-magnitude entry (first one
/// on ties) is real and positive, which makes the factors reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDecomposition {
    vectors: CMat,
    values: Vec<f64>,
}

impl EigenDecomposition {
    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// `U diag(f(mu)) U*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &mu) in self.values.iter().enumerate() {
            let s = f(mu);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        Hermitian::from_computed(scaled * self.vectors.adjoint())
    }

    pub fn reconstruct(&self) -> Hermitian {
        self.map(|mu| mu)
    }

    /// `U* A U`, the representation of `A` in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMat) -> CMat {
        self.vectors.adjoint() * a * &self.vectors
    }

    /// `U A U*`.
    pub fn from_eigenbasis(&self, a: &CMat) -> CMat {
        &self.vectors * a * self.vectors.adjoint()
    }
}

pub fn herm_eig(m: &Hermitian) -> Result<EigenDecomposition> {
    let n = m.dim();
    if n == 0 {
        return Ok(EigenDecomposition {
            vectors: CMat::zeros(0, 0),
            values: Vec::new(),
        });
    }
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, MAX_SWEEPS).ok_or(
        Error::EigenNoConvergence {
            iterations: MAX_SWEEPS,
        },
    )?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let peak = col.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let pivot = col
            .iter()
            .find(|z| z.norm() >= peak * (1.0 - 1e-12))
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    Ok(EigenDecomposition { vectors, values })
}
