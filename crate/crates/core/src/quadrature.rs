//! Quadrature for integrals of the form `∫₀^∞ λ^{q-1} g(λ) dλ`, `0 < q < 1`.
//!
//! The half line is mapped to `(0, 1)` by `λ = t/(1-t)`. The integrand then
//! behaves like `t^{q-1}` at `t = 0` and like `(1-t)^{-q}` (or better) at
//! `t = 1` for the matrix functions used here. Both endpoint singularities are
//! handled with a composite Gauss-Legendre rule on a mesh that is graded
//! geometrically towards each endpoint (ratio [`GRADING`]). The right half is
//! parameterised by `u = 1 - t` so that `1 - t` is never formed by
//! cancellation. Panels are added until the skipped end pieces are below
//! `1e-18` in the model singularity. The error estimate is the difference
//! between the rule with `nodes` and `2·nodes` points per panel.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{solve, CMat, Hermitian};

/// Geometric ratio between consecutive panels near an endpoint.
pub const GRADING: f64 = 0.15;
const END_TOLERANCE: f64 = 1e-18;
const MAX_LEVELS: usize = 600;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A quadrature point in λ with its full weight (including `λ^{q-1} dλ/dt`).
#[derive(Clone, Copy, Debug)]
pub struct WeightedPoint {
    pub lambda: f64,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct HalfLineRule {
    q: f64,
    nodes: usize,
}

#[derive(Clone, Debug)]
pub struct QuadratureValue<T> {
    pub value: T,
    pub error_estimate: f64,
}

impl HalfLineRule {
    pub const MIN_NODES: usize = 16;

    pub fn new(q: f64, nodes: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidExponent {
                value: q,
                reason: "quadrature exponent must lie in (0, 1)",
            });
        }
        if nodes < Self::MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least {} nodes per panel, got {nodes}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { q, nodes })
    }

    pub fn exponent(&self) -> f64 {
        self.q
    }

    fn levels(&self) -> usize {
        let worst = self.q.min(1.0 - self.q);
        let lv = ((END_TOLERANCE * worst).ln() / (worst * GRADING.ln())).ceil();
        (lv.max(4.0) as usize).min(MAX_LEVELS)
    }

    /// All weighted points of the composite rule with `nodes` points per panel.
    pub fn points(&self, nodes: usize) -> Vec<WeightedPoint> {
        let (x, w) = gauss_legendre(nodes);
        let q = self.q;
        let levels = self.levels();
        let mut out = Vec::with_capacity(2 * levels * nodes);
        let mut hi = 0.5;
        for _ in 0..levels {
            let lo = hi * GRADING;
            let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
            for (xi, wi) in x.iter().zip(&w) {
                let s = mid + half * xi;
                let ws = half * wi;
                // left half: t = s, right half: u = 1 - t = s
                let lam_left = s / (1.0 - s);
                out.push(WeightedPoint {
                    lambda: lam_left,
                    weight: ws * lam_left.powf(q - 1.0) / ((1.0 - s) * (1.0 - s)),
                });
                let lam_right = (1.0 - s) / s;
                out.push(WeightedPoint {
                    lambda: lam_right,
                    weight: ws * lam_right.powf(q - 1.0) / (s * s),
                });
            }
            hi = lo;
        }
        out
    }

    pub fn integrate_scalar(&self, f: impl Fn(f64) -> f64) -> QuadratureValue<f64> {
        let eval = |nodes| {
            self.points(nodes)
                .iter()
                .map(|p| p.weight * f(p.lambda))
                .sum::<f64>()
        };
        let coarse = eval(self.nodes);
        let fine = eval(2 * self.nodes);
        QuadratureValue {
            value: fine,
            error_estimate: (fine - coarse).abs(),
        }
    }

    /// Integrates a matrix-valued function; the error estimate is in Frobenius norm.
    pub fn integrate_matrix<T>(
        &self,
        f: impl Fn(f64) -> Result<DMatrix<T>>,
    ) -> Result<QuadratureValue<DMatrix<T>>>
    where
        T: nalgebra::ComplexField<RealField = f64> + Copy,
    {
        let eval = |nodes| -> Result<DMatrix<T>> {
            let mut acc: Option<DMatrix<T>> = None;
            for p in self.points(nodes) {
                let term = f(p.lambda)? * T::from_real(p.weight);
                acc = Some(match acc {
                    Some(a) => a + term,
                    None => term,
                });
            }
            Ok(acc.expect("rule has points"))
        };
        let coarse = eval(self.nodes)?;
        let fine = eval(2 * self.nodes)?;
        let err = (&fine - &coarse).norm();
        Ok(QuadratureValue {
            value: fine,
            error_estimate: err,
        })
    }
}

/// Which integral representation of `X^q` to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerForm {
    /// `(sin qπ/π) ∫ X^{1/2}(λI+X)^{-1}X^{1/2} λ^{q-1} dλ`
    Resolvent,
    /// `(sin qπ/((1-q)π)) ∫ X^{1/2}(λI+X)^{-1}X(λI+X)^{-1}X^{1/2} λ^{q-1} dλ`
    SquaredResolvent,
}

/// `X^q` evaluated from its integral representation without an eigensolver.
///
/// `X^{1/2}` commutes with `(λI+X)^{-1}`, so the integrands are evaluated as
/// `(λI+X)^{-1}X` and its square, one LU solve per node.
pub fn frac_power_quadrature(
    x: &Hermitian,
    q: f64,
    form: PowerForm,
    nodes: usize,
    tolerance: f64,
) -> Result<QuadratureValue<Hermitian>> {
    let rule = HalfLineRule::new(q, nodes)?;
    let n = x.dim();
    let xm = x.as_matrix();
    let resolvent_times_x = |lam: f64| -> Result<CMat> {
        let shifted = xm + CMat::identity(n, n) * Complex64::new(lam, 0.0);
        solve(&shifted, xm)
    };
    let (scale, raw) = match form {
        PowerForm::Resolvent => (
            (q * PI).sin() / PI,
            rule.integrate_matrix(resolvent_times_x)?,
        ),
        PowerForm::SquaredResolvent => (
            (q * PI).sin() / ((1.0 - q) * PI),
            rule.integrate_matrix(|lam| {
                let r = resolvent_times_x(lam)?;
                Ok(&r * &r)
            })?,
        ),
    };
    let error_estimate = scale * raw.error_estimate;
    if error_estimate > tolerance {
        return Err(Error::QuadratureAccuracy {
            estimate: error_estimate,
            tolerance,
        });
    }
    Ok(QuadratureValue {
        value: Hermitian::from_computed(raw.value * Complex64::new(scale, 0.0)),
        error_estimate,
    })
}
