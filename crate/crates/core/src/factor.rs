//! Existence factorizations of the coefficients.
//!
//! Gram form: `A_i = X^{-p_i/2} Y_i X^{1/2}` with `X = W*W` and the stack
//! `(Z; Y_1; …; Y_m)`, `Z = Q^{1/2} X^{-1/2}`, column orthonormal.
//!
//! Spectral form: `A_i = X^{-p_i/2} V_i N U` with `X = U* M U`, `M` diagonal,
//! `N = (M - U Q U*)^{1/2}` and `Σ V_i* V_i = I`.
//!
//! Either form certifies that `X` solves the equation; [`verify_factorization`]
//! runs the converse direction from the factors alone.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, EigenDecomposition, Hermitian};
use crate::problem::ProblemInstance;

#[derive(Clone, Debug)]
pub struct GramFactorization {
    pub w: CMat,
    pub y: Vec<CMat>,
    pub z: CMat,
}

#[derive(Clone, Debug)]
pub struct SpectralFactorization {
    pub u: CMat,
    pub m: Vec<f64>,
    pub n: Hermitian,
    pub v: Vec<CMat>,
}

#[derive(Clone, Debug)]
pub enum Factorization {
    Gram(GramFactorization),
    Spectral(SpectralFactorization),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// `||X - Σ Â_i* X^{p_i} Â_i - Q||` with `Â_i` rebuilt from the factors.
    pub equation_defect: f64,
    /// `||S* S - I||` for the stacked orthonormal block.
    pub orthonormality_defect: f64,
    /// `||Â_i - A_i||` per term.
    pub reconstruction_defect: Vec<f64>,
    /// `||M - N² - U Q U*||`; zero for the Gram form.
    pub shift_defect: f64,
}

impl VerificationReport {
    pub fn max_defect(&self) -> f64 {
        self.reconstruction_defect.iter().copied().fold(
            self.equation_defect
                .max(self.orthonormality_defect)
                .max(self.shift_defect),
            f64::max,
        )
    }
}

fn require_solution(inst: &ProblemInstance, x: &Hermitian) -> Result<EigenDecomposition> {
    inst.check_dim(x)?;
    let e = x.eig()?;
    let residual = inst.residual_from(x, &e)?.spectral_norm()?;
    // accepts solver output at default tolerance, rejects non-solutions
    let gate = 1e-8 * e.max().abs().max(1.0);
    if residual > gate {
        return Err(Error::NotASolution { residual, gate });
    }
    Ok(e)
}

pub fn factor_gram(inst: &ProblemInstance, x: &Hermitian) -> Result<GramFactorization> {
    let e = require_solution(inst, x)?;
    let w = linalg::power_of(&e, 0.5)?.into_matrix();
    let x_inv_half = linalg::power_of(&e, -0.5)?;
    let y = inst
        .terms()
        .iter()
        .map(|t| {
            Ok(linalg::power_of(&e, t.p() / 2.0)?.as_matrix() * t.a() * x_inv_half.as_matrix())
        })
        .collect::<Result<Vec<_>>>()?;
    let z = inst.q().power(0.5)?.as_matrix() * x_inv_half.as_matrix();
    Ok(GramFactorization { w, y, z })
}

pub fn factor_spectral(inst: &ProblemInstance, x: &Hermitian) -> Result<SpectralFactorization> {
    let n = inst.n();
    for (index, t) in inst.terms().iter().enumerate() {
        let sv = t.a().clone().singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if smin <= n as f64 * f64::EPSILON * smax || smax == 0.0 {
            return Err(Error::SingularCoefficient {
                index: index + 1,
                sigma_min: smin,
                sigma_max: smax,
            });
        }
    }
    let e = require_solution(inst, x)?;
    // X = V Λ V*, so U = V* and M = Λ
    let u = e.vectors().adjoint();
    let m = e.values().to_vec();
    let shifted = Hermitian::from_computed(
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            m.iter().map(|&v| linalg::c64(v, 0.0)),
        )) - &u * inst.q().as_matrix() * u.adjoint(),
    );
    let se = shifted.eig()?;
    if !linalg::decomposition_is_pd(&se) {
        return Err(Error::FactorizationNotPositive {
            lambda_min: se.min(),
        });
    }
    let n_mat = linalg::power_of(&se, 0.5)?;
    let n_inv = linalg::power_of(&se, -0.5)?;
    let v = inst
        .terms()
        .iter()
        .map(|t| {
            Ok(linalg::power_of(&e, t.p() / 2.0)?.as_matrix()
                * t.a()
                * u.adjoint()
                * n_inv.as_matrix())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralFactorization { u, m, n: n_mat, v })
}

fn stack_defect(blocks: &[&CMat]) -> f64 {
    let n = blocks[0].ncols();
    let mut gram = -CMat::identity(n, n);
    for b in blocks {
        gram += b.adjoint() * *b;
    }
    gram.norm()
}

/// Rebuilds `X` and every `A_i` from the factors and measures how far they
/// are from satisfying the equation. Report-only; never fails on defects.
pub fn verify_factorization(
    inst: &ProblemInstance,
    f: &Factorization,
) -> Result<VerificationReport> {
    let n = inst.n();
    let (x, rebuilt, orthonormality_defect, shift_defect) = match f {
        Factorization::Gram(g) => {
            check_count(inst, g.y.len())?;
            let x = Hermitian::from_computed(g.w.adjoint() * &g.w);
            let e = x.eig()?;
            let half = linalg::power_of(&e, 0.5)?;
            let rebuilt = inst
                .terms()
                .iter()
                .zip(&g.y)
                .map(|(t, y)| {
                    Ok(linalg::power_of(&e, -t.p() / 2.0)?.as_matrix() * y * half.as_matrix())
                })
                .collect::<Result<Vec<_>>>()?;
            let mut blocks = vec![&g.z];
            blocks.extend(g.y.iter());
            (x, rebuilt, stack_defect(&blocks), 0.0)
        }
        Factorization::Spectral(s) => {
            check_count(inst, s.v.len())?;
            let m = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                s.m.iter().map(|&v| linalg::c64(v, 0.0)),
            ));
            let x = Hermitian::from_computed(s.u.adjoint() * &m * &s.u);
            let e = x.eig()?;
            let rebuilt =
                inst.terms()
                    .iter()
                    .zip(&s.v)
                    .map(|(t, v)| {
                        Ok(linalg::power_of(&e, -t.p() / 2.0)?.as_matrix()
                            * v
                            * s.n.as_matrix()
                            * &s.u)
                    })
                    .collect::<Result<Vec<_>>>()?;
            let blocks: Vec<&CMat> = s.v.iter().collect();
            let nn = s.n.as_matrix() * s.n.as_matrix();
            let shift = (&m - nn - &s.u * inst.q().as_matrix() * s.u.adjoint()).norm();
            (x, rebuilt, stack_defect(&blocks), shift)
        }
    };
    let e = x.eig()?;
    let mut lhs = x.as_matrix() - inst.q().as_matrix();
    for (t, a) in inst.terms().iter().zip(&rebuilt) {
        lhs -= a.adjoint() * linalg::power_of(&e, t.p())?.as_matrix() * a;
    }
    let reconstruction_defect = inst
        .terms()
        .iter()
        .zip(&rebuilt)
        .map(|(t, a)| linalg::spectral_norm(&(a - t.a())))
        .collect();
    Ok(VerificationReport {
        equation_defect: linalg::spectral_norm(&lhs),
        orthonormality_defect,
        reconstruction_defect,
        shift_defect,
    })
}

fn check_count(inst: &ProblemInstance, found: usize) -> Result<()> {
    if found != inst.m() {
        return Err(Error::shape("factor count", inst.m(), found));
    }
    Ok(())
}
