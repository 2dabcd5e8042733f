//! Perturbation bounds for the solution and the backward error of an
//! approximate solution.
//!
//! Condition failures never raise errors: the report carries every margin
//! and `applicable = false`, so sweeps can tabulate them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, CMat, Hermitian};
use crate::operator::{self, MultistartOptions, NormEstimate, NormMode, OperatorRep};
use crate::problem::{Perturbation, PerturbationNorms, ProblemInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// Solution-free bound, relative to `||X||`.
    Thm41,
    /// Solution-based bound `ν` on `||X̃ - X||`.
    Thm42,
    /// `||ΔQ||/l + Σ n_i ||ΔA_i||`.
    FirstOrder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub margin: f64,
    /// `margin > 0` required when strict, `margin >= 0` otherwise.
    pub strict: bool,
}

impl Condition {
    fn new(name: &str, margin: f64, strict: bool) -> Self {
        Self {
            name: name.to_string(),
            margin,
            strict,
        }
    }

    pub fn holds(&self) -> bool {
        if self.strict {
            self.margin > 0.0
        } else {
            self.margin >= 0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    /// Absolute bound on `||X̃ - X||`; `None` when inapplicable or when only a
    /// relative bound is available.
    pub absolute: Option<f64>,
    /// Bound on `||X̃ - X|| / ||X||`.
    pub relative: Option<f64>,
    pub intermediates: BTreeMap<String, f64>,
    pub conditions: Vec<Condition>,
    pub applicable: bool,
}

impl BoundReport {
    pub fn condition(&self, name: &str) -> Option<f64> {
        self.conditions
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.margin)
    }

    pub fn intermediate(&self, name: &str) -> Option<f64> {
        self.intermediates.get(name).copied()
    }
}

fn spectral_norms(inst: &ProblemInstance) -> Vec<f64> {
    inst.terms()
        .iter()
        .map(|t| linalg::spectral_norm(t.a()))
        .collect()
}

/// The solution-free bound `ξ₁`, computed as `2(s + ||ΔQ||)/(b + √con3)`.
pub fn bound_thm41(inst: &ProblemInstance, norms: &PerturbationNorms) -> Result<BoundReport> {
    let beta = inst.beta()?;
    let a = spectral_norms(inst);
    let ps: Vec<f64> = inst.exponents().collect();
    let dq = norms.dq;
    let s: f64 = ps
        .iter()
        .zip(&a)
        .zip(&norms.da)
        .map(|((p, a), d)| beta.powf(*p) * d * (2.0 * a + d))
        .sum();
    let b = beta + dq
        - ps.iter()
            .zip(&a)
            .map(|(p, a)| (1.0 - p) * beta.powf(*p) * a * a)
            .sum::<f64>();
    let disc = b * b - 4.0 * (beta - s) * (s + dq);
    let conditions = vec![
        Condition::new("con1", 2.0 * (beta - s) - b, true),
        Condition::new("con2", b, true),
        Condition::new("con3", disc, false),
    ];
    let applicable = conditions.iter().all(Condition::holds);
    let mut intermediates =
        BTreeMap::from([("beta".into(), beta), ("s".into(), s), ("b".into(), b)]);
    let mut relative = None;
    if applicable {
        let denom = b + disc.sqrt();
        let xi1 = 2.0 * (s + dq) / denom;
        let sum_da: f64 = norms.da.iter().sum();
        if sum_da > 0.0 {
            intermediates.insert("rho".into(), 2.0 * s / (sum_da * denom));
        }
        intermediates.insert("omega".into(), 2.0 / denom);
        intermediates.insert("xi1".into(), xi1);
        relative = Some(xi1);
    }
    Ok(BoundReport {
        method: BoundMethod::Thm41,
        absolute: None,
        relative,
        intermediates,
        conditions,
        applicable,
    })
}

/// Operator norms `||L⁻¹||` and `||P_i||` at a solution; independent of the
/// perturbation, so computed once per solution.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorNorms {
    pub linv: NormEstimate,
    pub p: Vec<NormEstimate>,
}

impl OperatorNorms {
    pub fn compute(rep: &OperatorRep, mode: NormMode, opts: &MultistartOptions) -> Result<Self> {
        let linv = operator::op_norm(&operator::linv_map(rep), mode, opts);
        let p = (0..rep.m())
            .map(|i| Ok(operator::op_norm(&operator::build_p(rep, i)?, mode, opts)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { linv, p })
    }

    /// `l = 1/||L⁻¹||` for the configured mode.
    pub fn l(&self) -> f64 {
        1.0 / self.linv.value()
    }
}

/// The solution-based bound `ν` and `ξ₂ = ν/||X||`.
pub fn bound_thm42(
    inst: &ProblemInstance,
    rep: &OperatorRep,
    op_norms: &OperatorNorms,
    norms: &PerturbationNorms,
) -> Result<BoundReport> {
    inst.require_analysis_ready()?;
    let a = spectral_norms(inst);
    let ps: Vec<f64> = inst.exponents().collect();
    let (mu_min, mu_max) = (rep.eig.min(), rep.eig.max());
    let l = op_norms.l();
    let zeta = 1.0 / mu_min;
    let xis: Vec<f64> = ps.iter().map(|p| mu_max.powf(*p)).collect();
    let ns: Vec<f64> = op_norms.p.iter().map(NormEstimate::value).collect();
    let theta = zeta * zeta / l * xis.iter().zip(&a).map(|(x, a)| x * a * a).sum::<f64>();
    let eps = norms.dq / l
        + ns.iter()
            .zip(&xis)
            .zip(&norms.da)
            .map(|((n, x), d)| n * d + x / l * d * d)
            .sum::<f64>();
    let sigma = zeta / l
        * xis
            .iter()
            .zip(&a)
            .zip(&norms.da)
            .map(|((x, a), d)| x * (2.0 * a + d) * d)
            .sum::<f64>();
    let con5 = (1.0 - sigma).powi(2)
        / (zeta
            + sigma * zeta
            + 2.0 * theta
            + 2.0 * ((zeta + theta) * (sigma * zeta + theta)).sqrt())
        - eps;
    let conditions = vec![
        Condition::new("con4", 1.0 - sigma, true),
        Condition::new("con5", con5, true),
    ];
    let applicable = conditions.iter().all(Condition::holds);
    let mut intermediates = BTreeMap::from([
        ("l".into(), l),
        ("zeta".into(), zeta),
        ("theta".into(), theta),
        ("epsilon".into(), eps),
        ("sigma".into(), sigma),
        ("norm_x".into(), mu_max),
    ]);
    for (i, (x, n)) in xis.iter().zip(&ns).enumerate() {
        intermediates.insert(format!("xi_{}", i + 1), *x);
        intermediates.insert(format!("n_{}", i + 1), *n);
    }
    let (mut absolute, mut relative) = (None, None);
    if applicable {
        let c = 1.0 + zeta * eps - sigma;
        let nu = 2.0 * eps / (c + (c * c - 4.0 * eps * (zeta + theta)).sqrt());
        intermediates.insert("nu".into(), nu);
        intermediates.insert("xi2".into(), nu / mu_max);
        absolute = Some(nu);
        relative = Some(nu / mu_max);
    }
    Ok(BoundReport {
        method: BoundMethod::Thm42,
        absolute,
        relative,
        intermediates,
        conditions,
        applicable,
    })
}

#[derive(Clone, Debug)]
pub struct FirstOrder {
    /// `L⁻¹(ΔQ + Σ (B_i* ΔA_i + ΔA_i* B_i))`.
    pub delta_x: Hermitian,
    pub report: BoundReport,
}

/// First-order change of the solution and its norm bound.
pub fn first_order_bound(
    inst: &ProblemInstance,
    rep: &OperatorRep,
    op_norms: &OperatorNorms,
    pert: &Perturbation,
) -> Result<FirstOrder> {
    pert.check(inst)?;
    let mut rhs: CMat = pert.dq.as_matrix().clone();
    for (b, da) in rep.b.iter().zip(&pert.da) {
        rhs += b.adjoint() * da + da.adjoint() * b;
    }
    let delta_x = Hermitian::from_computed(rep.apply_inverse(&rhs)?);
    let norms = pert.norms(crate::problem::NormKind::Spectral);
    let l = op_norms.l();
    let bound = norms.dq / l
        + op_norms
            .p
            .iter()
            .zip(&norms.da)
            .map(|(n, d)| n.value() * d)
            .sum::<f64>();
    let norm_x = rep.eig.max();
    let intermediates = BTreeMap::from([
        ("l".into(), l),
        ("norm_delta_x_lin".into(), delta_x.spectral_norm()?),
        ("norm_x".into(), norm_x),
    ]);
    Ok(FirstOrder {
        delta_x,
        report: BoundReport {
            method: BoundMethod::FirstOrder,
            absolute: Some(bound),
            relative: Some(bound / norm_x),
            intermediates,
            conditions: Vec::new(),
            applicable: true,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackwardErrorReport {
    pub residual_norm: f64,
    pub sigma: f64,
    pub theta1: f64,
    /// Right-hand side of the residual condition, `θ₁/(2||X̃⁻¹||)·min(1, θ₁/2)`.
    pub residual_threshold: f64,
    pub mu: Option<f64>,
    /// `μ ||R(X̃)||`.
    pub bound: Option<f64>,
    pub applicable: bool,
}

/// Computable bound on `||X̃ - X||` from the residual of `X̃`.
pub fn backward_error_bound(inst: &ProblemInstance, xt: &Hermitian) -> Result<BackwardErrorReport> {
    inst.check_dim(xt)?;
    let e = xt.eig()?;
    let r = inst.residual_from(xt, &e)?;
    let rn = r.spectral_norm()?;
    let inv_half = linalg::power_of(&e, -0.5)?;
    let mut sigma = 0.0;
    for t in inst.terms() {
        let half = linalg::power_of(&e, t.p() / 2.0)?;
        let m = half.as_matrix() * t.a() * inv_half.as_matrix();
        sigma += (1.0 - t.p()) * linalg::spectral_norm(&m).powi(2);
    }
    let (norm_x, norm_xinv) = (e.max(), 1.0 / e.min());
    let theta1 = 1.0 + norm_xinv * rn - sigma;
    let residual_threshold = theta1 / (2.0 * norm_xinv) * (theta1 / 2.0).min(1.0);
    let applicable = sigma < 1.0 && theta1 > 0.0 && rn < residual_threshold;
    let (mut mu, mut bound) = (None, None);
    if applicable {
        let m =
            2.0 * norm_x * norm_xinv / (theta1 + (theta1 * theta1 - 4.0 * norm_xinv * rn).sqrt());
        mu = Some(m);
        bound = Some(m * rn);
    }
    Ok(BackwardErrorReport {
        residual_norm: rn,
        sigma,
        theta1,
        residual_threshold,
        mu,
        bound,
        applicable,
    })
}
