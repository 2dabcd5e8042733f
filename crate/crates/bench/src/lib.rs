//! Fixtures shared by the benchmarks.

use fracmateq::rng::{random_instance, stream};
use fracmateq::{Hermitian, ProblemInstance, SolveOptions};

/// A seeded complex instance of order `n` with two terms, and its solution.
pub fn solved_instance(n: usize) -> (ProblemInstance, Hermitian) {
    let inst = random_instance(&mut stream(1, n as u64), n, 2, (0.1, 0.4), true);
    let x = fracmateq::solve_fixed_point(&inst, None, &SolveOptions::with_tol(1e-12))
        .expect("random instance solves")
        .x;
    (inst, x)
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixture_is_a_solution() {
        let (inst, x) = super::solved_instance(3);
        assert!(inst.residual(&x).unwrap().spectral_norm().unwrap() < 1e-12);
    }
}
