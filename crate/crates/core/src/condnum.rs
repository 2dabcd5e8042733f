//! Condition numbers of the solution under weighted Frobenius perturbations.
//!
//! `c(X) = σ_max([ρ S, η_1 U_1, …, η_m U_m]) / ξ` where `S` is the real
//! representation of `L⁻¹` and `U_i` that of `P_i`. Complex data use the
//! `(Re, Im)` split of every block; real data use `L⁻¹` directly.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, RMat};
use crate::operator::{self, MatrixSpace, OperatorRep, RealLinearMap};
use crate::problem::ProblemInstance;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Complex,
    Real,
}

/// Weights `ξ` on the solution, `η_i` on `A_i`, `ρ` on `Q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondScalars {
    pub xi: f64,
    pub eta: Vec<f64>,
    pub rho: f64,
}

impl CondScalars {
    pub fn absolute(m: usize) -> Self {
        Self {
            xi: 1.0,
            eta: vec![1.0; m],
            rho: 1.0,
        }
    }

    /// `ξ = ||X||_F`, `η_i = ||A_i||_F`, `ρ = ||Q||_F`.
    pub fn relative(inst: &ProblemInstance, rep: &OperatorRep) -> Self {
        Self {
            xi: rep.x.fro_norm(),
            eta: inst
                .terms()
                .iter()
                .map(|t| linalg::fro_norm(t.a()))
                .collect(),
            rho: inst.q().fro_norm(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub field: Field,
    pub value: f64,
    pub scalars: CondScalars,
    /// `S_c` (`2n² x 2n²`) or `S_r` (`n² x n²`).
    pub s: RMat,
    pub u: Vec<RMat>,
}

fn check_scalars(inst: &ProblemInstance, scalars: &CondScalars) -> Result<()> {
    if scalars.eta.len() != inst.m() {
        return Err(Error::shape(
            "condition weights",
            inst.m(),
            scalars.eta.len(),
        ));
    }
    if scalars.xi.is_nan() || scalars.xi <= 0.0 {
        return Err(Error::InvalidArgument(
            "solution weight must be positive".into(),
        ));
    }
    Ok(())
}

fn block_row(scalars: &CondScalars, s: &RMat, u: &[RMat]) -> RMat {
    let rows = s.nrows();
    let cols = s.ncols() + u.iter().map(|b| b.ncols()).sum::<usize>();
    let mut row = RMat::zeros(rows, cols);
    row.view_mut((0, 0), (rows, s.ncols()))
        .copy_from(&(s * scalars.rho));
    let mut at = s.ncols();
    for (b, eta) in u.iter().zip(&scalars.eta) {
        row.view_mut((0, at), (rows, b.ncols()))
            .copy_from(&(b * *eta));
        at += b.ncols();
    }
    row
}

pub fn cond_complex(
    inst: &ProblemInstance,
    rep: &OperatorRep,
    scalars: &CondScalars,
) -> Result<ConditionReport> {
    check_scalars(inst, scalars)?;
    let n2 = rep.n() * rep.n();
    let (sr, si) = (linalg::real_part(&rep.linv), linalg::imag_part(&rep.linv));
    let mut s = RMat::zeros(2 * n2, 2 * n2);
    s.view_mut((0, 0), (n2, n2)).copy_from(&sr);
    s.view_mut((0, n2), (n2, n2)).copy_from(&(-&si));
    s.view_mut((n2, 0), (n2, n2)).copy_from(&si);
    s.view_mut((n2, n2), (n2, n2)).copy_from(&sr);
    let u = (0..inst.m())
        .map(|i| Ok(operator::build_p(rep, i)?.matrix))
        .collect::<Result<Vec<_>>>()?;
    let value = linalg::spectral_norm_real(&block_row(scalars, &s, &u)) / scalars.xi;
    Ok(ConditionReport {
        field: Field::Complex,
        value,
        scalars: scalars.clone(),
        s,
        u,
    })
}

pub fn cond_real(
    inst: &ProblemInstance,
    rep: &OperatorRep,
    scalars: &CondScalars,
) -> Result<ConditionReport> {
    check_scalars(inst, scalars)?;
    if !inst.is_real() {
        return Err(Error::ComplexInput);
    }
    let n = rep.n();
    // real data give a real L; drop rounding noise in the imaginary part
    let s = linalg::real_part(&rep.linv);
    let id = RMat::identity(n, n);
    let pi = linalg::vec_perm(n);
    let u = rep
        .b
        .iter()
        .map(|b| {
            let g = linalg::real_part(&b.transpose());
            &s * (id.kronecker(&g) + g.kronecker(&id) * &pi)
        })
        .collect::<Vec<_>>();
    let value = linalg::spectral_norm_real(&block_row(scalars, &s, &u)) / scalars.xi;
    Ok(ConditionReport {
        field: Field::Real,
        value,
        scalars: scalars.clone(),
        s,
        u,
    })
}

/// Lower bound on `c(X)` straight from its defining supremum.
///
/// Evaluates `||L⁻¹(ρH + Σ η_i (B_i* E_i + E_i* B_i))||_F / ||(E_1, …, E_m, H)||_F`
/// for Hermitian `H` and complex `E_i` on `samples` random directions, then
/// refines the best direction by power iteration on the tabulated map.
pub fn cond_sup_oracle(
    inst: &ProblemInstance,
    rep: &OperatorRep,
    scalars: &CondScalars,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_scalars(inst, scalars)?;
    let n = rep.n();
    let n2 = n * n;
    let h_map = RealLinearMap::from_fn(n, MatrixSpace::Hermitian, |h| {
        rep.apply_inverse(&(h * linalg::c64(scalars.rho, 0.0)))
            .expect("square")
    });
    let mut blocks = vec![h_map.matrix];
    for (i, eta) in scalars.eta.iter().enumerate() {
        let e_map = RealLinearMap::from_fn(n, MatrixSpace::Complex, |e| {
            let b = &rep.b[i];
            let w: CMat = (b.adjoint() * e + e.adjoint() * b) * linalg::c64(*eta, 0.0);
            rep.apply_inverse(&w).expect("square")
        });
        blocks.push(e_map.matrix);
    }
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut t = RMat::zeros(2 * n2, cols);
    let mut at = 0;
    for b in &blocks {
        t.view_mut((0, at), (2 * n2, b.ncols())).copy_from(b);
        at += b.ncols();
    }

    let ratio = |v: &nalgebra::DVector<f64>| {
        let d = v.norm();
        if d == 0.0 {
            0.0
        } else {
            (&t * v).norm() / d
        }
    };
    let mut r = rng::stream(seed, 0);
    let mut best_v =
        nalgebra::DVector::from_fn(cols, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
    let mut best = ratio(&best_v);
    for _ in 1..samples.max(1) {
        let v =
            nalgebra::DVector::from_fn(cols, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
        let f = ratio(&v);
        if f > best {
            best = f;
            best_v = v;
        }
    }
    let gram = t.transpose() * &t;
    for _ in 0..500 {
        let next = &gram * &best_v;
        let nn = next.norm();
        if nn == 0.0 {
            break;
        }
        let next = next / nn;
        let f = ratio(&next);
        let gain = f - best;
        best_v = next;
        best = best.max(f);
        if gain.abs() <= 1e-15 * best {
            break;
        }
    }
    Ok(best / scalars.xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, Hermitian};
    use crate::operator::{build_l, OperatorForm};
    use crate::problem::Term;
    use crate::solver::{solve_fixed_point, SolveOptions};

    fn solved_rep(inst: &ProblemInstance, form: OperatorForm) -> OperatorRep {
        let x = solve_fixed_point(inst, None, &SolveOptions::with_tol(1e-14))
            .unwrap()
            .x;
        build_l(inst, &x, form).unwrap()
    }

    #[test]
    fn zero_coefficients_relative_is_one() {
        let q = Hermitian::from_real(&RMat::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 1.0])).unwrap();
        let inst = ProblemInstance::new(q, vec![Term::new(CMat::zeros(2, 2), 0.5)]).unwrap();
        let rep = solved_rep(&inst, OperatorForm::Exact);
        let s = CondScalars::relative(&inst, &rep);
        assert!((cond_complex(&inst, &rep, &s).unwrap().value - 1.0).abs() < 1e-12);
        assert!((cond_real(&inst, &rep, &s).unwrap().value - 1.0).abs() < 1e-12);
        assert!((cond_sup_oracle(&inst, &rep, &s, 50, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_reduction() {
        // n = m = 1: c_abs = √(1 + (2 x^p α)²) / |1 - α² p x^{p-1}| for the real case
        let (alpha, p) = (0.6_f64, 0.3_f64);
        let inst = ProblemInstance::new(
            Hermitian::identity(1),
            vec![Term::new(CMat::from_element(1, 1, c64(alpha, 0.0)), p)],
        )
        .unwrap();
        let rep = solved_rep(&inst, OperatorForm::Exact);
        let x = rep.x.entry(0, 0).re;
        let expected = (1.0 + (2.0 * x.powf(p) * alpha).powi(2)).sqrt()
            / (1.0 - alpha * alpha * p * x.powf(p - 1.0));
        let r = cond_real(&inst, &rep, &CondScalars::absolute(1)).unwrap();
        assert!(
            (r.value - expected).abs() < 1e-12,
            "{} vs {expected}",
            r.value
        );
    }

    #[test]
    fn oracle_is_dominated_and_tight_on_complex_instance() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                c64(0.2, 0.1),
                c64(-0.1, 0.05),
                c64(0.05, 0.2),
                c64(0.3, -0.1),
            ],
        );
        let inst = ProblemInstance::new(Hermitian::identity(2), vec![Term::new(a, 0.4)]).unwrap();
        for form in [OperatorForm::Exact, OperatorForm::Printed] {
            let rep = solved_rep(&inst, form);
            let s = CondScalars::relative(&inst, &rep);
            let c = cond_complex(&inst, &rep, &s).unwrap().value;
            let o = cond_sup_oracle(&inst, &rep, &s, 200, 7).unwrap();
            assert!(o <= c + 1e-9 && o >= 0.95 * c, "{o} vs {c}");
        }
        assert_eq!(
            cond_real(
                &inst,
                &solved_rep(&inst, OperatorForm::Exact),
                &CondScalars::absolute(1)
            )
            .err(),
            Some(Error::ComplexInput)
        );
    }
}
