//! Seeded random streams.
//!
//! Every consumer draws from `ChaCha8Rng::seed_from_u64(seed)` with the
//! ChaCha stream id set to a per-task index, so results do not depend on
//! scheduling or on how many tasks run in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, CMat, Hermitian, RMat};
use crate::problem::{ProblemInstance, Term};

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Real matrix with i.i.d. standard normal entries (MATLAB `randn`).
pub fn randn(rng: &mut impl Rng, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn randn_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, complex: bool) -> Hermitian {
    let g = if complex {
        randn_complex(rng, n, n)
    } else {
        crate::linalg::complexify(&randn(rng, n, n))
    };
    Hermitian::symmetrize((&g + g.adjoint()).scale(0.5)).expect("finite square input")
}

/// `G G*/n + shift·I`, positive definite with `λ_min ≥ shift`.
pub fn random_pd(rng: &mut impl Rng, n: usize, shift: f64, complex: bool) -> Hermitian {
    let g = if complex {
        randn_complex(rng, n, n)
    } else {
        crate::linalg::complexify(&randn(rng, n, n))
    };
    let m = &g * g.adjoint() / c64(n as f64, 0.0) + CMat::identity(n, n) * c64(shift, 0.0);
    Hermitian::symmetrize(m).expect("finite square input")
}

/// A random analysis-ready instance with `||A_i|| = scale_i`, `scale_i` drawn
/// uniformly from `scale_range`, and `Q = G G^T/n + I/2`.
pub fn random_instance(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
    scale_range: (f64, f64),
    complex: bool,
) -> ProblemInstance {
    let q = random_pd(rng, n, 0.5, complex);
    let terms = (0..m)
        .map(|_| {
            let raw = if complex {
                randn_complex(rng, n, n)
            } else {
                crate::linalg::complexify(&randn(rng, n, n))
            };
            let target = rng.random_range(scale_range.0..scale_range.1);
            let a = &raw * c64(target / crate::linalg::spectral_norm(&raw), 0.0);
            let p = rng.random_range(0.1..0.9);
            Term::new(a, p)
        })
        .collect();
    ProblemInstance::new(q, terms).expect("random instance is valid")
}
