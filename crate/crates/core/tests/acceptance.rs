//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed; exits non-zero if any fails.

use std::time::{Duration, Instant};

use fracmateq::reproduce::{self, ReproduceOptions, TABLE4_TOLERANCE};
use fracmateq::selftest;

const CON123: [[f64; 3]; 4] = [
    [1.1139, 0.9358, 0.8751],
    [1.1141, 0.9358, 0.8755],
    [1.1141, 0.9357, 0.8756],
    [1.1141, 0.9357, 0.8756],
];
const CON5_RANGE: (f64, f64) = (0.7955, 0.7957);
const XI1: [f64; 4] = [1.9765e-4, 2.3869e-5, 1.8133e-6, 2.1028e-7];
const XI2: [f64; 4] = [6.5069e-5, 7.6524e-6, 6.0514e-7, 6.9911e-8];
const TRUE_ERR: [f64; 4] = [3.9885e-5, 5.1141e-6, 3.6513e-7, 4.6136e-8];
const MU_R: [f64; 4] = [7.2094e-4, 4.8224e-5, 3.1670e-6, 2.0506e-7];
const ITER_ERR: [f64; 4] = [6.1091e-4, 4.0865e-5, 2.6837e-6, 1.7372e-7];

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fmt(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.4e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn table1(rep: &mut Report) {
    let opts = ReproduceOptions {
        runs: 1,
        ..ReproduceOptions::default()
    };
    let (rows, dt) = timed(|| reproduce::example1_rows(&opts).expect("example 1"));
    let mut con123 = 0.0f64;
    let mut con4 = 0.0f64;
    let mut con5 = 0.0f64;
    for (row, want) in rows.iter().zip(CON123) {
        for (got, want) in row.con[..3].iter().zip(want) {
            con123 = con123.max((got - want).abs());
        }
        con4 = con4.max((row.con[3] - 1.0).abs());
        let c5 = row.con[4];
        con5 = con5.max((CON5_RANGE.0 - c5).max(c5 - CON5_RANGE.1).max(0.0));
    }
    let cons = |i: usize| fmt(&rows.iter().map(|r| r.con[i]).collect::<Vec<_>>());
    rep.line(
        "1a table1 con1-con3",
        con123 <= 5e-4,
        format!(
            "max abs deviation {con123:.2e} (tol 5e-4); con1 [{}] con2 [{}] con3 [{}]",
            cons(0),
            cons(1),
            cons(2)
        ),
    );
    rep.line(
        "1b table1 con4",
        con4 <= 1e-4,
        format!("max |con4 - 1| {con4:.2e} (tol 1e-4); [{}]", cons(3)),
    );
    rep.line(
        "1c table1 con5 (estimate mode)",
        con5 <= 2e-2,
        format!(
            "distance to [0.7955, 0.7957] {con5:.3e} (tol 2e-2); [{}]",
            cons(4)
        ),
    );
    rep.line(
        "1d table1 runtime",
        dt.as_secs_f64() < 10.0,
        format!("{:.2} s (< 10 s)", dt.as_secs_f64()),
    );
}

fn table2(rep: &mut Report) {
    let opts = ReproduceOptions::default();
    let (rows, dt) = timed(|| reproduce::example1_rows(&opts).expect("example 1"));
    let xi1: Vec<f64> = rows.iter().map(|r| r.xi1.unwrap_or(f64::NAN)).collect();
    let xi2: Vec<f64> = rows.iter().map(|r| r.xi2.unwrap_or(f64::NAN)).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.geometric_mean()).collect();
    let worst1 = xi1
        .iter()
        .zip(XI1)
        .map(|(a, b)| rel(*a, b))
        .fold(0.0, f64::max);
    let worst2 = xi2
        .iter()
        .zip(XI2)
        .map(|(a, b)| rel(*a, b))
        .fold(0.0, f64::max);
    rep.line(
        "2a table2 xi1",
        worst1 <= 0.01,
        format!(
            "max rel deviation {worst1:.3e} (tol 1e-2); got [{}] want [{}]",
            fmt(&xi1),
            fmt(&XI1)
        ),
    );
    rep.line(
        "2b table2 xi2 (estimate mode)",
        worst2 <= 0.25,
        format!(
            "max rel deviation {worst2:.3e} (tol 0.25); got [{}] want [{}]",
            fmt(&xi2),
            fmt(&XI2)
        ),
    );
    let oom = err.iter().zip(TRUE_ERR).all(|(a, b)| {
        (a.log10().floor() - b.log10().floor()).abs() < 0.5 || (a / b).log10().abs() < 1.0
    });
    rep.line(
        "2c table2 true error order of magnitude",
        oom,
        format!("geometric means [{}] want [{}]", fmt(&err), fmt(&TRUE_ERR)),
    );
    let runs: usize = rows.iter().map(|r| r.rel_errors.len()).sum();
    let valid = rows.iter().all(|r| r.within(r.xi1) && r.within(r.xi2))
        && rows.iter().all(|r| r.rel_errors.len() == 10);
    rep.line(
        "2d table2 every run within xi1 and xi2",
        valid,
        format!(
            "{runs} runs; max error [{}]",
            fmt(&rows.iter().map(|r| r.max_error()).collect::<Vec<_>>())
        ),
    );
    rep.line(
        "2e table2 runtime",
        dt.as_secs_f64() < 60.0,
        format!("{:.2} s (< 60 s)", dt.as_secs_f64()),
    );
}

fn table3(rep: &mut Report) {
    let (rows, dt) =
        timed(|| reproduce::example2_rows(&ReproduceOptions::default()).expect("example 2"));
    let bound: Vec<f64> = rows.iter().map(|r| r.bound.unwrap_or(f64::NAN)).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let wb = bound
        .iter()
        .zip(MU_R)
        .map(|(a, b)| rel(*a, b))
        .fold(0.0, f64::max);
    let we = err
        .iter()
        .zip(ITER_ERR)
        .map(|(a, b)| rel(*a, b))
        .fold(0.0, f64::max);
    rep.line(
        "3a table3 mu*||R||",
        wb <= 5e-3,
        format!(
            "max rel deviation {wb:.3e} (tol 5e-3); got [{}] want [{}]",
            fmt(&bound),
            fmt(&MU_R)
        ),
    );
    rep.line(
        "3b table3 iterate error",
        we <= 5e-3,
        format!(
            "max rel deviation {we:.3e} (tol 5e-3); got [{}] want [{}]",
            fmt(&err),
            fmt(&ITER_ERR)
        ),
    );
    let valid = rows
        .iter()
        .filter(|r| r.applicable)
        .all(|r| r.bound.is_some_and(|b| r.error <= b));
    let applicable = rows.iter().filter(|r| r.applicable).count();
    rep.line(
        "3c table3 error <= mu*||R||",
        valid,
        format!("{applicable} of {} labels applicable", rows.len()),
    );
    rep.line(
        "3d table3 runtime",
        dt.as_secs_f64() < 10.0,
        format!("{:.2} s (< 10 s)", dt.as_secs_f64()),
    );
}

fn table4(rep: &mut Report) {
    let rows = reproduce::example3_rows(&ReproduceOptions::default()).expect("example 3");
    let table = reproduce::table4(&rows);
    let got: Vec<f64> = rows.iter().map(|r| r.c_rel_real).collect();
    let within = rows.iter().all(|r| r.within_tolerance() == Some(true));
    let flagged = table
        .notes
        .iter()
        .any(|n| n.contains("Q-interpretation discrepancy"));
    // outside tolerance is acceptable only when the discrepancy is flagged
    rep.line(
        "4a table4 c_rel (symmetrized Q)",
        within || flagged,
        format!(
            "got [{}] ({}); tol {}%",
            got.iter()
                .map(|x| format!("{x:.4}"))
                .collect::<Vec<_>>()
                .join(", "),
            if within {
                "within tolerance"
            } else {
                "outside tolerance, discrepancy flagged"
            },
            TABLE4_TOLERANCE * 100.0
        ),
    );
    let dominated = rows.iter().all(|r| r.oracle_dominated());
    let gap = rows
        .iter()
        .map(|r| r.oracle - r.c_rel_complex)
        .fold(f64::NEG_INFINITY, f64::max);
    rep.line(
        "4b table4 sup oracle <= formula + 1e-9",
        dominated,
        format!("max(oracle - formula) = {gap:.3e}"),
    );
}

fn properties(rep: &mut Report) {
    let suites = selftest::run_all(20240).expect("property suites");
    for s in suites {
        rep.line(
            &format!("5 property {}", s.name),
            s.passed,
            format!("{} cases, worst {:.3e} ({})", s.cases, s.worst, s.threshold),
        );
    }
}

/// Samples the power-difference inequality with its coefficient as stated, `1 - q`.
fn power_difference(rep: &mut Report) {
    use fracmateq::linalg::{self, lambda_max, lambda_min, Hermitian};
    use fracmateq::rng::{randn_complex, random_hermitian, random_pd, stream};
    use rand::Rng;

    let (cases, mut violations, mut worst) = (200, 0, 0.0_f64);
    for i in 0..cases {
        let mut rng = stream(31, i);
        let n = rng.random_range(1..5);
        let q = rng.random_range(0.05..0.95);
        let x = random_pd(&mut rng, n, 0.1, true);
        let h = random_hermitian(&mut rng, n, true);
        let step: f64 = rng.random_range(-0.9..0.9);
        let dx = h.scale(step * lambda_min(&x).unwrap() / h.spectral_norm().unwrap());
        let a = randn_complex(&mut rng, n, n);
        let xt = x.add(&dx);
        let (half, mhalf) = (x.power(0.5).unwrap(), x.power(-0.5).unwrap());
        let nu = lambda_max(&xt.power(-1.0).unwrap().congruence(half.as_matrix())).unwrap();
        let d = dx.congruence(mhalf.as_matrix()).spectral_norm().unwrap();
        let diff: Hermitian = xt.power(q).unwrap().sub(&x.power(q).unwrap());
        let lhs = linalg::spectral_norm(
            &(mhalf.as_matrix() * (a.adjoint() * diff.as_matrix() * &a) * mhalf.as_matrix()),
        );
        let s = linalg::spectral_norm(
            &(x.power(q / 2.0).unwrap().as_matrix() * &a * mhalf.as_matrix()),
        );
        let rhs = (1.0 - q) * (d + nu * d * d) * s * s;
        if lhs > rhs + 1e-10 {
            violations += 1;
            worst = worst.max(lhs / rhs);
        }
    }
    rep.line(
        "5 invariant power-difference inequality, coefficient 1-q",
        violations == 0,
        format!("{violations} of {cases} samples violate; worst lhs/rhs {worst:.3}"),
    );
}

fn certification(rep: &mut Report) {
    let c = selftest::rigorous_certification(100, 6).expect("certification");
    rep.line(
        "6 rigorous nu and xi1 bound re-solved error",
        c.passed(100),
        format!(
            "{} applicable of {} drawn; violations nu {} xi1 {}; max error/bound {:.3}",
            c.applicable, c.attempts, c.nu_violations, c.xi1_violations, c.worst_ratio
        ),
    );
}

fn main() {
    let mut rep = Report { failures: 0 };
    table1(&mut rep);
    table2(&mut rep);
    table3(&mut rep);
    table4(&mut rep);
    properties(&mut rep);
    power_difference(&mut rep);
    certification(&mut rep);
    println!("acceptance: {} failing line(s)", rep.failures);
    if rep.failures > 0 {
        std::process::exit(1);
    }
}
