//! Randomized property suites shared by the `selftest` command and the
//! acceptance target. Each suite reports its worst observed defect against a
//! fixed threshold.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::factor::{self, Factorization};
use crate::linalg::{self, c64, CMat, Hermitian};
use crate::operator::{self, build_l, MultistartOptions, NormMode, OperatorForm};
use crate::perturb::{self, OperatorNorms};
use crate::problem::{Perturbation, ProblemInstance};
use crate::rng::{self, StreamRng};
use crate::solver::{solve_fixed_point, SolveOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    /// Worst defect, or for ratio checks the ratio farthest from the centre.
    pub worst: f64,
    pub threshold: String,
    pub passed: bool,
}

impl SuiteResult {
    fn below(name: &'static str, cases: usize, worst: f64, limit: f64) -> Self {
        Self {
            name,
            cases,
            worst,
            threshold: format!("<= {limit:e}"),
            passed: worst <= limit,
        }
    }
}

fn small_instance(r: &mut StreamRng, n: usize, m: usize) -> ProblemInstance {
    let complex = r.random_bool(0.5);
    rng::random_instance(r, n, m, (0.05, 0.4), complex)
}

fn reference(inst: &ProblemInstance) -> Result<Hermitian> {
    Ok(solve_fixed_point(inst, None, &SolveOptions::with_tol(1e-13))?.x)
}

/// `A ≥ B > 0` implies `A^γ ≥ B^γ` for `γ ∈ [0, 1]`.
pub fn loewner_heinz(pairs: usize, seed: u64) -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    for k in 0..pairs {
        let mut r = rng::stream(seed, k as u64);
        let n = r.random_range(2..=4);
        let complex = r.random_bool(0.5);
        let b = rng::random_pd(&mut r, n, 0.1, complex);
        let gap = rng::random_pd(&mut r, n, 0.0, complex);
        let a = b.add(&gap);
        let gamma = r.random_range(0.0..=1.0);
        let diff = a.power(gamma)?.sub(&b.power(gamma)?);
        worst = worst.max(-diff.eig()?.min());
    }
    Ok(SuiteResult::below("loewner_heinz", pairs, worst, 1e-10))
}

/// Closed-form `L` against quadrature of its integral, both forms.
pub fn kernel_vs_quadrature(instances: usize, seed: u64) -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    for k in 0..instances {
        let mut r = rng::stream(seed, k as u64);
        let n = r.random_range(1..=4);
        let m = r.random_range(1..=3);
        let inst = small_instance(&mut r, n, m);
        let x = reference(&inst)?;
        for form in [OperatorForm::Exact, OperatorForm::Printed] {
            let closed = build_l(&inst, &x, form)?;
            let (quad, _) = operator::l_quadrature(&inst, &x, form, 24)?;
            worst = worst.max((&closed.l - quad).norm());
        }
    }
    Ok(SuiteResult::below(
        "kernel_vs_quadrature",
        instances,
        worst,
        1e-8,
    ))
}

pub fn factorization_round_trip(instances: usize, seed: u64) -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    for k in 0..instances {
        let mut r = rng::stream(seed, k as u64);
        let n = r.random_range(1..=4);
        let m = r.random_range(1..=3);
        let inst = small_instance(&mut r, n, m);
        let x = reference(&inst)?;
        let gram = Factorization::Gram(factor::factor_gram(&inst, &x)?);
        worst = worst.max(factor::verify_factorization(&inst, &gram)?.max_defect());
        let spectral = Factorization::Spectral(factor::factor_spectral(&inst, &x)?);
        worst = worst.max(factor::verify_factorization(&inst, &spectral)?.max_defect());
    }
    Ok(SuiteResult::below(
        "factorization_round_trip",
        instances,
        worst,
        1e-9,
    ))
}

/// Three different initial windows reach the same solution.
pub fn solver_uniqueness(instances: usize, seed: u64) -> Result<SuiteResult> {
    let tol = 1e-12;
    let opts = SolveOptions::with_tol(tol);
    let mut worst = 0.0f64;
    for k in 0..instances {
        let mut r = rng::stream(seed, k as u64);
        let n = r.random_range(2..=4);
        let m = r.random_range(1..=3);
        let inst = small_instance(&mut r, n, m);
        let scaled: Vec<Hermitian> = (0..m)
            .map(|i| Hermitian::identity(n).scale(3.0 + i as f64))
            .collect();
        let random: Vec<Hermitian> = (0..m)
            .map(|_| rng::random_pd(&mut r, n, 0.2, !inst.is_real()))
            .collect();
        let xs = [
            solve_fixed_point(&inst, None, &opts)?.x,
            solve_fixed_point(&inst, Some(&scaled), &opts)?.x,
            solve_fixed_point(&inst, Some(&random), &opts)?.x,
        ];
        for a in &xs {
            for b in &xs {
                worst = worst.max(linalg::spectral_norm(&(a.as_matrix() - b.as_matrix())));
            }
        }
    }
    Ok(SuiteResult::below(
        "solver_uniqueness",
        instances,
        worst,
        10.0 * tol,
    ))
}

/// `||X(t) - X - t δX||` is second order: halving `t` divides it by about 4.
pub fn first_order_defect_ratio(instances: usize, seed: u64) -> Result<SuiteResult> {
    let opts = SolveOptions::with_tol(1e-15);
    let mut farthest = 4.0f64;
    for k in 0..instances {
        let mut r = rng::stream(seed, k as u64);
        let n = r.random_range(2..=3);
        let m = r.random_range(1..=2);
        let inst = small_instance(&mut r, n, m);
        let complex = !inst.is_real();
        let x = solve_fixed_point(&inst, None, &opts)?.x;
        let rep = build_l(&inst, &x, OperatorForm::Exact)?;
        let unit = |a: CMat| {
            let s = linalg::spectral_norm(&a);
            a * c64(1.0 / s, 0.0)
        };
        let dir = Perturbation {
            da: (0..m)
                .map(|_| {
                    unit(if complex {
                        rng::randn_complex(&mut r, n, n)
                    } else {
                        linalg::complexify(&rng::randn(&mut r, n, n))
                    })
                })
                .collect(),
            dq: rng::random_hermitian(&mut r, n, complex),
        };
        let norms = OperatorNorms::compute(
            &rep,
            NormMode::Rigorous,
            &MultistartOptions {
                starts: 1,
                ..Default::default()
            },
        )?;
        let lin = perturb::first_order_bound(&inst, &rep, &norms, &dir)?.delta_x;
        let defect = |t: f64| -> Result<f64> {
            let xt = solve_fixed_point(&inst.perturbed(&dir.scaled(t))?, None, &opts)?.x;
            Ok(linalg::spectral_norm(
                &(xt.as_matrix() - x.as_matrix() - lin.as_matrix() * c64(t, 0.0)),
            ))
        };
        let ratio = defect(1e-2)? / defect(5e-3)?;
        if (ratio - 4.0).abs() > (farthest - 4.0).abs() {
            farthest = ratio;
        }
    }
    Ok(SuiteResult {
        name: "first_order_defect_ratio",
        cases: instances,
        worst: farthest,
        threshold: "in [3.5, 4.5]".into(),
        passed: (3.5..=4.5).contains(&farthest),
    })
}

/// `L` maps Hermitian matrices to Hermitian matrices, both forms.
pub fn hermitian_preservation(instances: usize, seed: u64) -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    for k in 0..instances {
        let mut r = rng::stream(seed, k as u64);
        let n = r.random_range(1..=4);
        let m = r.random_range(1..=3);
        let inst = small_instance(&mut r, n, m);
        let x = reference(&inst)?;
        for form in [OperatorForm::Exact, OperatorForm::Printed] {
            let rep = build_l(&inst, &x, form)?;
            let w = rng::random_hermitian(&mut r, n, true);
            for out in [rep.apply(w.as_matrix())?, rep.apply_inverse(w.as_matrix())?] {
                worst = worst.max((&out - out.adjoint()).norm() / out.norm().max(1.0));
            }
        }
    }
    Ok(SuiteResult::below(
        "hermitian_preservation",
        instances,
        worst,
        1e-12,
    ))
}

/// `Π² = I` and `Π vec A = vec Aᵀ`, both bit-exact.
pub fn vec_permutation(max_n: usize, seed: u64) -> Result<SuiteResult> {
    let mut mismatches = 0usize;
    for n in 1..=max_n {
        let pi = linalg::vec_perm(n);
        if &pi * &pi != linalg::RMat::identity(n * n, n * n) {
            mismatches += 1;
        }
        let a = rng::randn_complex(&mut rng::stream(seed, n as u64), n, n);
        if linalg::complexify(&pi) * linalg::vec(&a) != linalg::vec(&a.transpose()) {
            mismatches += 1;
        }
    }
    Ok(SuiteResult {
        name: "vec_permutation",
        cases: max_n,
        worst: mismatches as f64,
        threshold: "exact".into(),
        passed: mismatches == 0,
    })
}

/// Outcome of checking rigorous bounds against re-solved errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certification {
    pub applicable: usize,
    pub attempts: usize,
    pub nu_violations: usize,
    pub xi1_violations: usize,
    /// Largest `error / bound` over both bounds.
    pub worst_ratio: f64,
}

impl Certification {
    pub fn passed(&self, required: usize) -> bool {
        self.applicable >= required && self.nu_violations == 0 && self.xi1_violations == 0
    }
}

/// Random 2x2 and 3x3 instances with small perturbations: counts how often the
/// rigorous `ν` (exact linearization) and `ξ₁` fail to bound the true error.
/// Instances where either bound is inapplicable are skipped.
pub fn rigorous_certification(required: usize, seed: u64) -> Result<Certification> {
    let opts = SolveOptions::with_tol(1e-14);
    let mut cert = Certification {
        applicable: 0,
        attempts: 0,
        nu_violations: 0,
        xi1_violations: 0,
        worst_ratio: 0.0,
    };
    while cert.applicable < required && cert.attempts < 20 * required {
        let mut r = rng::stream(seed, cert.attempts as u64);
        cert.attempts += 1;
        let n = 2 + cert.attempts % 2;
        let m = r.random_range(1..=2);
        let inst = small_instance(&mut r, n, m);
        let complex = !inst.is_real();
        let size = 10f64.powf(r.random_range(-6.0..-2.0));
        let pert = Perturbation {
            da: (0..m)
                .map(|_| {
                    let g = if complex {
                        rng::randn_complex(&mut r, n, n)
                    } else {
                        linalg::complexify(&rng::randn(&mut r, n, n))
                    };
                    &g * c64(size / linalg::spectral_norm(&g), 0.0)
                })
                .collect(),
            dq: rng::random_hermitian(&mut r, n, complex).scale(size / 3.0),
        };
        let x = solve_fixed_point(&inst, None, &opts)?.x;
        let rep = build_l(&inst, &x, OperatorForm::Exact)?;
        let op_norms =
            OperatorNorms::compute(&rep, NormMode::Rigorous, &MultistartOptions::default())?;
        let norms = pert.norms(crate::problem::NormKind::Spectral);
        let b41 = perturb::bound_thm41(&inst, &norms)?;
        let b42 = perturb::bound_thm42(&inst, &rep, &op_norms, &norms)?;
        let (Some(xi1), Some(nu)) = (b41.relative, b42.absolute) else {
            continue;
        };
        let Ok(perturbed) = inst.perturbed(&pert) else {
            continue;
        };
        let xt = solve_fixed_point(&perturbed, None, &opts)?.x;
        let err = linalg::spectral_norm(&(xt.as_matrix() - x.as_matrix()));
        let rel = err / x.spectral_norm()?;
        cert.applicable += 1;
        cert.nu_violations += usize::from(err > nu);
        cert.xi1_violations += usize::from(rel > xi1);
        cert.worst_ratio = cert.worst_ratio.max(err / nu).max(rel / xi1);
    }
    Ok(cert)
}

pub fn run_all(seed: u64) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        loewner_heinz(200, seed)?,
        kernel_vs_quadrature(50, seed)?,
        factorization_round_trip(50, seed)?,
        solver_uniqueness(30, seed)?,
        first_order_defect_ratio(20, seed)?,
        hermitian_preservation(30, seed)?,
        vec_permutation(6, seed)?,
    ])
}
