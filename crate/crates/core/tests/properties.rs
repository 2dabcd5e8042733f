//! Randomized invariants of the public API.

use fracmateq::condnum::{cond_complex, cond_real, cond_sup_oracle, CondScalars};
use fracmateq::linalg::{self, frac_power, herm_eig, lambda_max, lambda_min, CMat, Hermitian};
use fracmateq::operator::{build_l, linv_map, op_norm, MultistartOptions, NormMode, OperatorForm};
use fracmateq::perturb::{backward_error_bound, bound_thm41};
use fracmateq::problem::Term;
use fracmateq::rng::{randn_complex, random_hermitian, random_instance, random_pd, stream};
use fracmateq::table::sig5;
use fracmateq::{
    instances, reproduce, solve_fixed_point, PerturbationNorms, ProblemInstance, SolveOptions,
};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn pd(seed: u64, n: usize, complex: bool) -> Hermitian {
    random_pd(&mut stream(seed, 0), n, 0.1, complex)
}

fn instance(seed: u64, n: usize, complex: bool) -> ProblemInstance {
    random_instance(&mut stream(seed, 1), n, 2, (0.05, 0.45), complex)
}

fn solve(inst: &ProblemInstance, tol: f64) -> Hermitian {
    let r = solve_fixed_point(inst, None, &SolveOptions::with_tol(tol)).unwrap();
    assert!(r.converged);
    r.x
}

fn herm_norm(h: &Hermitian) -> f64 {
    h.spectral_norm().unwrap()
}

/// `(||X^{-1/2}A*((X+ΔX)^q - X^q)AX^{-1/2}||, ||X^{-1/2}ΔXX^{-1/2}||, ν, ||X^{q/2}AX^{-1/2}||)`
/// with `ν = λ_max(X^{1/2}(X+ΔX)^{-1}X^{1/2})`.
fn power_difference_terms(x: &Hermitian, dx: &Hermitian, a: &CMat, q: f64) -> (f64, f64, f64, f64) {
    let xt = x.add(dx);
    let x_half = x.power(0.5).unwrap();
    let x_mhalf = x.power(-0.5).unwrap();
    let nu = lambda_max(&xt.power(-1.0).unwrap().congruence(x_half.as_matrix())).unwrap();
    let d = herm_norm(&dx.congruence(x_mhalf.as_matrix()));
    let diff = xt.power(q).unwrap().sub(&x.power(q).unwrap());
    let inner = a.adjoint() * diff.as_matrix() * a;
    let lhs = linalg::spectral_norm(&(x_mhalf.as_matrix() * inner * x_mhalf.as_matrix()));
    let sandwich =
        linalg::spectral_norm(&(x.power(q / 2.0).unwrap().as_matrix() * a * x_mhalf.as_matrix()));
    (lhs, d, nu, sandwich)
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn loewner_heinz_order(seed in any::<u64>(), n in 1usize..5, complex in any::<bool>()) {
        let b = pd(seed, n, complex);
        let gap = random_pd(&mut stream(seed, 7), n, 0.0, complex).scale(0.3);
        let a = b.add(&gap);
        for g in [0.25, 0.5, 0.75] {
            let d = frac_power(&a, g).unwrap().sub(&frac_power(&b, g).unwrap());
            prop_assert!(lambda_min(&d).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn powers_add(seed in any::<u64>(), n in 1usize..6, p in -1.0f64..1.0, q in -1.0f64..1.0) {
        let m = pd(seed, n, true);
        let lhs = frac_power(&m, p).unwrap().as_matrix() * frac_power(&m, q).unwrap().as_matrix();
        let rhs = frac_power(&m, p + q).unwrap();
        let scale = herm_norm(&rhs).max(1.0);
        prop_assert!(linalg::fro_norm(&(lhs - rhs.as_matrix())) <= 1e-10 * scale);
    }

    #[test]
    fn power_round_trip(seed in any::<u64>(), n in 1usize..6, p in 0.1f64..1.0) {
        let m = pd(seed, n, true);
        let back = frac_power(&frac_power(&m, p).unwrap(), 1.0 / p).unwrap();
        prop_assert!(back.sub(&m).fro_norm() <= 1e-9 * m.fro_norm().max(1.0));
    }

    #[test]
    fn eigendecomposition_is_orthonormal_sorted_and_exact(seed in any::<u64>(), n in 1usize..7) {
        let m = random_hermitian(&mut stream(seed, 2), n, true);
        let e = herm_eig(&m).unwrap();
        let u = e.vectors();
        prop_assert!(linalg::fro_norm(&(u.adjoint() * u - CMat::identity(n, n))) <= 1e-10);
        prop_assert!(e.reconstruct().sub(&m).fro_norm() <= 1e-10 * m.fro_norm().max(1.0));
        prop_assert!(e.values().windows(2).all(|w| w[0] <= w[1]));
        let again = herm_eig(&m).unwrap();
        prop_assert_eq!(again.vectors(), u);
    }

    // Holds with the first-order coefficient q; the scalar counterexample
    // below rules out the coefficient (1 - q).
    #[test]
    fn power_difference_inequality(
        seed in any::<u64>(),
        n in 1usize..5,
        q in 0.05f64..0.95,
        step in -0.9f64..0.9,
    ) {
        let x = pd(seed, n, true);
        let h = random_hermitian(&mut stream(seed, 3), n, true);
        let dx = h.scale(step * lambda_min(&x).unwrap() / herm_norm(&h));
        let a = randn_complex(&mut stream(seed, 4), n, n);
        let (lhs, d, nu, sandwich) = power_difference_terms(&x, &dx, &a, q);
        let rhs = q * (d + nu * d * d) * sandwich * sandwich;
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-10, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn vec_permutation_is_an_involution(n in 1usize..7) {
        let pi = linalg::vec_perm(n);
        let sq = &pi * &pi;
        prop_assert_eq!(sq, fracmateq::RMat::identity(n * n, n * n));
    }

    #[test]
    fn sig5_keeps_five_significant_digits(x in prop_oneof![1e-12f64..1e-3, 1e-3f64..1e5, 1e5f64..1e12], neg in any::<bool>()) {
        let x = if neg { -x } else { x };
        let back: f64 = sig5(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-5 * x.abs(), "{x} -> {}", sig5(x));
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn solver_certificate(seed in any::<u64>(), n in 1usize..5, complex in any::<bool>()) {
        let inst = instance(seed, n, complex);
        let tol = 1e-11;
        let x = solve(&inst, tol);
        let beta = inst.beta().unwrap();
        let r = inst.residual(&x).unwrap();
        prop_assert!(herm_norm(&r) < tol);
        prop_assert!(r.asymmetry() <= 1e-15 * r.fro_norm().max(1.0));
        let shifted = x.sub(&Hermitian::identity(n).scale(beta));
        prop_assert!(lambda_min(&shifted).unwrap() >= -(beta * 1e-8 + tol));

        let window = vec![x.clone(); inst.m()];
        let again = solve_fixed_point(&inst, Some(&window), &SolveOptions::with_tol(tol)).unwrap();
        prop_assert!(again.converged && again.iterations <= 2);
    }

    #[test]
    fn operator_is_invertible_and_hermitian_preserving(seed in any::<u64>(), n in 1usize..5, exact in any::<bool>()) {
        let inst = instance(seed, n, true);
        let x = solve(&inst, 1e-12);
        let form = if exact { OperatorForm::Exact } else { OperatorForm::Printed };
        let rep = build_l(&inst, &x, form).unwrap();
        let eye = CMat::identity(n * n, n * n);
        prop_assert!(linalg::fro_norm(&(&rep.l * &rep.linv - eye)) <= 1e-8 * linalg::fro_norm(&rep.l));
        let w = random_hermitian(&mut stream(seed, 5), n, true);
        let lw = rep.apply(w.as_matrix()).unwrap();
        prop_assert!(linalg::fro_norm(&(&lw - lw.adjoint())) <= 1e-10 * linalg::fro_norm(&lw).max(1.0));
    }

    #[test]
    fn norm_bracket_contains_estimate(seed in any::<u64>(), n in 1usize..4) {
        let inst = instance(seed, n, true);
        let rep = build_l(&inst, &solve(&inst, 1e-12), OperatorForm::Exact).unwrap();
        let opts = MultistartOptions { starts: 8, seed, ..MultistartOptions::default() };
        let est = op_norm(&linv_map(&rep), NormMode::Estimate, &opts);
        prop_assert!(est.lower <= est.estimate && est.estimate <= est.upper);
        prop_assert!(est.upper <= n as f64 * est.lower * (1.0 + 1e-12));
    }

    #[test]
    fn condition_number_properties(seed in any::<u64>(), n in 1usize..4) {
        let inst = instance(seed, n, false);
        let rep = build_l(&inst, &solve(&inst, 1e-13), OperatorForm::Exact).unwrap();
        let scalars = CondScalars::relative(&inst, &rep);
        prop_assert!((scalars.xi - rep.x.fro_norm()).abs() == 0.0);
        prop_assert!((scalars.rho - inst.q().fro_norm()).abs() == 0.0);
        for (e, t) in scalars.eta.iter().zip(inst.terms()) {
            prop_assert_eq!(*e, linalg::fro_norm(t.a()));
        }
        let complex = cond_complex(&inst, &rep, &scalars).unwrap().value;
        let real = cond_real(&inst, &rep, &scalars).unwrap().value;
        prop_assert!(real >= 0.0 && real <= complex + 1e-9);
        let oracle = cond_sup_oracle(&inst, &rep, &scalars, 16, seed).unwrap();
        prop_assert!(oracle <= complex + 1e-9);

        // V*(.)V with V unitary leaves both condition numbers unchanged
        let v = randn_complex(&mut stream(seed, 6), n, n).qr().q();
        let rotated = ProblemInstance::new(
            inst.q().congruence(&v),
            inst.terms().iter().map(|t| Term::new(v.adjoint() * t.a() * &v, t.p())).collect(),
        ).unwrap();
        let rrep = build_l(&rotated, &solve(&rotated, 1e-13), OperatorForm::Exact).unwrap();
        let abs = |i: &ProblemInstance, r| cond_complex(i, r, &CondScalars::absolute(i.m())).unwrap().value;
        let rel = |i: &ProblemInstance, r| cond_complex(i, r, &CondScalars::relative(i, r)).unwrap().value;
        prop_assert!((abs(&inst, &rep) - abs(&rotated, &rrep)).abs() <= 1e-8 * abs(&inst, &rep).max(1.0));
        prop_assert!((rel(&inst, &rep) - rel(&rotated, &rrep)).abs() <= 1e-8 * rel(&inst, &rep).max(1.0));
    }

    #[test]
    fn zero_coefficients_give_unit_relative_condition(seed in any::<u64>(), n in 1usize..4, p in 0.1f64..0.9) {
        let q = pd(seed, n, true);
        let inst = ProblemInstance::new(q, vec![Term::new(CMat::zeros(n, n), p)]).unwrap();
        let rep = build_l(&inst, &solve(&inst, 1e-14), OperatorForm::Exact).unwrap();
        let c = cond_complex(&inst, &rep, &CondScalars::relative(&inst, &rep)).unwrap().value;
        prop_assert!((c - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn bound_applicability_matches_margins(da0 in 0.0f64..0.3, da1 in 0.0f64..0.3, dq in 0.0f64..0.3) {
        let r = bound_thm41(&instances::example1(), &PerturbationNorms { da: vec![da0, da1], dq }).unwrap();
        let all_positive = r.conditions.iter().all(|c| c.margin > 0.0);
        // the discriminant condition is non-strict; equality has measure zero here
        prop_assert_eq!(r.applicable, all_positive);
        prop_assert_eq!(r.relative.is_some(), r.applicable);
        if let Some(xi) = r.relative {
            prop_assert!(xi >= 0.0);
        }
    }

    #[test]
    fn xi1_vanishes_linearly(da0 in 1e-6f64..1e-2, da1 in 1e-6f64..1e-2, dq in 0.0f64..1e-2) {
        let inst = instances::example1();
        let base = PerturbationNorms { da: vec![da0, da1], dq };
        let xi = |t: f64| bound_thm41(&inst, &base.scaled(t)).unwrap().relative.unwrap();
        let c = 2.0 * xi(1.0);
        for t in [1.0, 0.5, 0.25, 0.125] {
            prop_assert!(xi(t) <= c * t);
        }
        prop_assert_eq!(xi(0.0), 0.0);
    }

    #[test]
    fn xi1_is_monotone_in_each_norm(
        da0 in 0.0f64..0.05,
        da1 in 0.0f64..0.05,
        dq in 0.0f64..0.05,
        which in 0usize..3,
        bump in 1e-6f64..0.02,
    ) {
        let inst = instances::example1();
        let lo = PerturbationNorms { da: vec![da0, da1], dq };
        let mut hi = lo.clone();
        match which {
            0 => hi.da[0] += bump,
            1 => hi.da[1] += bump,
            _ => hi.dq += bump,
        }
        let (a, b) = (bound_thm41(&inst, &lo).unwrap(), bound_thm41(&inst, &hi).unwrap());
        if let (Some(a), Some(b)) = (a.relative, b.relative) {
            prop_assert!(a <= b * (1.0 + 1e-12), "{a} > {b}");
        }
    }
}

#[test]
fn backward_error_bound_holds_along_example2_trajectory() {
    let inst = instances::example2();
    let x = solve(&inst, reproduce::REFERENCE_TOL);
    let seq = reproduce::iterate_sequence(&inst, &instances::example2_initials(), 40).unwrap();
    let mut applicable = 0;
    for xk in &seq {
        let r = backward_error_bound(&inst, xk).unwrap();
        if let Some(bound) = r.bound {
            applicable += 1;
            assert!(r.sigma < 1.0 && r.theta1 > 0.0 && r.residual_norm < r.residual_threshold);
            let err = linalg::spectral_norm(&(xk.as_matrix() - x.as_matrix()));
            assert!(err <= bound + 1e-12, "error {err} above bound {bound}");
        }
    }
    assert!(applicable >= 30);
}

#[test]
fn power_difference_with_complementary_coefficient_fails_on_scalars() {
    // x = 1, Δx = -0.57, a = 1, q = 0.87: 1 - 0.43^0.87 ≈ 0.52 exceeds 0.13·(0.57 + 0.57²/0.43) ≈ 0.17
    let one = Hermitian::identity(1);
    let (lhs, d, nu, sandwich) =
        power_difference_terms(&one, &one.scale(-0.57), &CMat::identity(1, 1), 0.87);
    let complementary = (1.0 - 0.87) * (d + nu * d * d) * sandwich * sandwich;
    let first_order = 0.87 * (d + nu * d * d) * sandwich * sandwich;
    assert!(lhs > 2.0 * complementary);
    assert!(lhs <= first_order);
}
