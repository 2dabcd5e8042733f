//! Fixed-point iteration `X_{s+m+1} = Q + Σ_i A_i* X_{s+i}^{p_i} A_i`.
//!
//! The window holds the `m` most recent iterates, oldest first; term `i`
//! (1-based) reads window slot `i`, so with `m = 2` the first term uses the
//! older iterate and the second term the newer one.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{self, EigenDecomposition, Hermitian};
use crate::problem::{NormKind, ProblemInstance};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub norm: NormKind,
    /// Record the whole sequence `X_1, X_2, …` including the initial window.
    pub keep_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            norm: NormKind::Spectral,
            keep_iterates: false,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub x: Hermitian,
    /// Number of updates performed (initial window excluded).
    pub iterations: usize,
    /// `||R(X_k)||` after each update.
    pub residual_history: Vec<f64>,
    pub beta: f64,
    pub converged: bool,
    /// 1-based sequence `X_1 … X_K` stored 0-based; empty unless requested.
    pub iterates: Vec<Hermitian>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .copied()
            .unwrap_or(f64::INFINITY)
    }
}

struct Slot {
    x: Hermitian,
    eig: EigenDecomposition,
}

/// Runs the iteration until `||R(X_k)|| < tol` or `max_iter` updates.
///
/// `initials` defaults to `m` copies of `Q`. Non-convergence is reported
/// through `converged = false`, not as an error.
pub fn solve_fixed_point(
    inst: &ProblemInstance,
    initials: Option<&[Hermitian]>,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    inst.require_analysis_ready()?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let m = inst.m();
    let beta = inst.beta()?;
    let start: Vec<Hermitian> = match initials {
        Some(xs) => {
            if xs.len() != m {
                return Err(Error::shape("initial window", m, xs.len()));
            }
            xs.to_vec()
        }
        None => vec![inst.q().clone(); m],
    };

    let mut window = VecDeque::with_capacity(m);
    for x in start {
        inst.check_dim(&x)?;
        let eig = x.eig()?;
        if !linalg::decomposition_is_pd(&eig) {
            return Err(Error::NotPositiveDefinite {
                lambda_min: eig.min(),
            });
        }
        window.push_back(Slot { x, eig });
    }

    let mut iterates: Vec<Hermitian> = if opts.keep_iterates {
        window.iter().map(|s| s.x.clone()).collect()
    } else {
        Vec::new()
    };
    let mut history = Vec::new();
    let q = inst.q().as_matrix();

    for iteration in 1..=opts.max_iter {
        let mut next = q.clone();
        for (t, slot) in inst.terms().iter().zip(&window) {
            let xp = linalg::power_of(&slot.eig, t.p())?;
            next += t.a().adjoint() * xp.as_matrix() * t.a();
        }
        let x = Hermitian::from_computed(next);
        let eig = x.eig()?;
        if !linalg::decomposition_is_pd(&eig) {
            return Err(Error::IterateNotPositive {
                iteration: m + iteration,
                lambda_min: eig.min(),
            });
        }
        let r = inst.residual_from(&x, &eig)?;
        let rn = opts.norm.of(r.as_matrix());
        history.push(rn);
        if opts.keep_iterates {
            iterates.push(x.clone());
        }
        window.pop_front();
        window.push_back(Slot { x, eig });
        if rn < opts.tol {
            return Ok(finish(window, iteration, history, beta, true, iterates));
        }
    }
    Ok(finish(
        window,
        opts.max_iter,
        history,
        beta,
        false,
        iterates,
    ))
}

fn finish(
    mut window: VecDeque<Slot>,
    iterations: usize,
    residual_history: Vec<f64>,
    beta: f64,
    converged: bool,
    iterates: Vec<Hermitian>,
) -> SolveReport {
    let x = window.pop_back().expect("window holds m >= 1 iterates").x;
    SolveReport {
        x,
        iterations,
        residual_history,
        beta,
        converged,
        iterates,
    }
}
