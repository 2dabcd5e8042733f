//! The three worked examples and their perturbation generators.

use rand::Rng;

use crate::error::Result;
use crate::linalg::{self, c64, complexify, CMat, Hermitian, RMat};
use crate::problem::{Perturbation, ProblemInstance, Term};
use crate::rng;

/// Weights of the two terms relative to `||A||`.
const WEIGHTS: [f64; 2] = [1.0 / 3.0 + 0.02, 1.0 / 6.0 + 0.03];

fn normalized_pair(a: &RMat, ps: [f64; 2]) -> Vec<Term> {
    let na = linalg::spectral_norm_real(a);
    WEIGHTS
        .iter()
        .zip(ps)
        .map(|(w, p)| Term::new(complexify(a).scale(w / na), p))
        .collect()
}

pub fn example1_base() -> RMat {
    RMat::from_row_slice(2, 2, &[2.0, 0.95, 0.0, 1.0])
}

/// `X - A_1* X^{1/2} A_1 - A_2* X^{1/3} A_2 = I`, 2x2.
pub fn example1() -> ProblemInstance {
    ProblemInstance::new(
        Hermitian::identity(2),
        normalized_pair(&example1_base(), [0.5, 1.0 / 3.0]),
    )
    .expect("example 1 is valid")
}

/// `S = Cᵀ + C` with `C` standard normal; `ΔA_1 = 10^{-j} S/||S||`,
/// `ΔA_2 = 3·10^{-j-1} S/||S||`, `ΔQ = 0`.
pub fn example1_perturbation(j: i32, rng: &mut impl Rng) -> Perturbation {
    let c = rng::randn(rng, 2, 2);
    let s = c.transpose() + &c;
    let unit = complexify(&s).scale(1.0 / linalg::spectral_norm_real(&s));
    Perturbation {
        da: vec![
            unit.scale(10f64.powi(-j)),
            unit.scale(3.0 * 10f64.powi(-j - 1)),
        ],
        dq: Hermitian::zeros(2),
    }
}

/// Perturbation norms of Example 1, exact by construction.
pub fn example1_norms(j: i32) -> crate::problem::PerturbationNorms {
    crate::problem::PerturbationNorms {
        da: vec![10f64.powi(-j), 3.0 * 10f64.powi(-j - 1)],
        dq: 0.0,
    }
}

/// Tridiagonal `(1, 2, 1)` of order 5.
pub fn example2_base() -> RMat {
    RMat::from_fn(5, 5, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => 1.0,
        _ => 0.0,
    })
}

/// `X - A_1* X^{0.5} A_1 - A_2* X^{0.25} A_2 = I`, 5x5.
pub fn example2() -> ProblemInstance {
    ProblemInstance::new(
        Hermitian::identity(5),
        normalized_pair(&example2_base(), [0.5, 0.25]),
    )
    .expect("example 2 is valid")
}

/// Initial window `X_1 = A`, `X_2 = 2A`.
pub fn example2_initials() -> [Hermitian; 2] {
    let a = example2_base();
    [
        Hermitian::from_real(&a).expect("symmetric"),
        Hermitian::from_real(&a.scale(2.0)).expect("symmetric"),
    ]
}

/// `Q` of Example 3 exactly as printed; it is not symmetric.
pub fn example3_q_printed() -> RMat {
    RMat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])
}

/// Example 3 with `Q ← (Q + Qᵀ)/2`. Returns the instance and the discarded
/// antisymmetric part `||Q - Qᵀ||_F / 2`.
pub fn example3(k: i32) -> Result<(ProblemInstance, f64)> {
    let q = Hermitian::symmetrize(complexify(&example3_q_printed()))?;
    let asymmetry = q.asymmetry();
    let mut a1 = CMat::zeros(2, 2);
    a1[(0, 1)] = c64(0.55 + 10f64.powi(-k), 0.0);
    let a2 = a1.scale(0.5);
    let inst = ProblemInstance::new(q, vec![Term::new(a1, 0.5), Term::new(a2, 1.0 / 3.0)])?;
    Ok((inst, asymmetry))
}
