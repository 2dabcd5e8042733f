//! The equation `X - Σ A_i* X^{p_i} A_i = Q` and its data perturbations.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, EigenDecomposition, Hermitian};

/// Which matrix norm a scalar summary uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormKind {
    #[default]
    Spectral,
    Frobenius,
}

impl NormKind {
    pub fn of(self, a: &CMat) -> f64 {
        match self {
            NormKind::Spectral => linalg::spectral_norm(a),
            NormKind::Frobenius => linalg::fro_norm(a),
        }
    }
}

/// One summand `A* X^p A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    a: CMat,
    p: f64,
}

impl Term {
    pub fn new(a: CMat, p: f64) -> Self {
        Self { a, p }
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Outcome of [`validate`]: every problem found, not just the first.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<String>,
    pub q_lambda_min: Option<f64>,
    /// All exponents lie in `(0, 1)`, so the perturbation suite applies.
    pub analysis_ready: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks shapes, finiteness, exponent ranges and definiteness of `Q`.
pub fn validate(q: &Hermitian, terms: &[Term]) -> ValidationReport {
    let n = q.dim();
    let mut issues = Vec::new();
    if n == 0 {
        issues.push("Q is empty".to_string());
    }
    if terms.is_empty() {
        issues.push("at least one term is required (m >= 1)".to_string());
    }
    for (i, t) in terms.iter().enumerate() {
        let label = i + 1;
        if t.a.nrows() != n || t.a.ncols() != n {
            issues.push(format!(
                "A_{label} is {}x{}, expected {n}x{n}",
                t.a.nrows(),
                t.a.ncols()
            ));
        }
        if t.a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            issues.push(format!("A_{label} has non-finite entries"));
        }
        if !t.p.is_finite() || t.p <= 0.0 {
            issues.push(format!(
                "p_{label} = {} must be a positive finite number",
                t.p
            ));
        }
    }
    let q_lambda_min = if n > 0 {
        match q.eig() {
            Ok(e) => {
                if !linalg::decomposition_is_pd(&e) {
                    issues.push(format!(
                        "Q is not positive definite (lambda_min = {:.6e})",
                        e.min()
                    ));
                }
                Some(e.min())
            }
            Err(err) => {
                issues.push(format!("eigendecomposition of Q failed: {err}"));
                None
            }
        }
    } else {
        None
    };
    let analysis_ready = !terms.is_empty() && terms.iter().all(|t| t.p > 0.0 && t.p < 1.0);
    ValidationReport {
        issues,
        q_lambda_min,
        analysis_ready,
    }
}

/// A validated instance. `Q` is positive definite, every `A_i` is `n x n`,
/// every `p_i > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    q: Hermitian,
    terms: Vec<Term>,
    analysis_ready: bool,
}

impl ProblemInstance {
    pub fn new(q: Hermitian, terms: Vec<Term>) -> Result<Self> {
        let report = validate(&q, &terms);
        if !report.is_valid() {
            return Err(Error::Validation(report.issues));
        }
        Ok(Self {
            q,
            terms,
            analysis_ready: report.analysis_ready,
        })
    }

    pub fn n(&self) -> usize {
        self.q.dim()
    }

    pub fn m(&self) -> usize {
        self.terms.len()
    }

    pub fn q(&self) -> &Hermitian {
        &self.q
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, index: usize) -> Result<&Term> {
        self.terms
            .get(index)
            .ok_or(Error::TermIndex { index, m: self.m() })
    }

    pub fn exponents(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(Term::p)
    }

    pub fn analysis_ready(&self) -> bool {
        self.analysis_ready
    }

    pub fn require_analysis_ready(&self) -> Result<()> {
        if self.analysis_ready {
            Ok(())
        } else {
            Err(Error::NotAnalysisReady)
        }
    }

    pub fn is_real(&self) -> bool {
        self.q.is_real() && self.terms.iter().all(|t| linalg::is_real(&t.a))
    }

    /// `Σ A_i* X^{p_i} A_i` from a precomputed decomposition of `X`.
    pub(crate) fn nonlinear_part(&self, x: &EigenDecomposition) -> Result<Hermitian> {
        let n = self.n();
        let mut acc = CMat::zeros(n, n);
        for t in &self.terms {
            let xp = linalg::power_of(x, t.p)?;
            acc += t.a.adjoint() * xp.as_matrix() * &t.a;
        }
        Ok(Hermitian::from_computed(acc))
    }

    /// `R(X) = Q + Σ A_i* X^{p_i} A_i - X`.
    pub fn residual(&self, x: &Hermitian) -> Result<Hermitian> {
        self.check_dim(x)?;
        let e = x.eig()?;
        self.residual_from(x, &e)
    }

    pub(crate) fn residual_from(&self, x: &Hermitian, e: &EigenDecomposition) -> Result<Hermitian> {
        let g = self.nonlinear_part(e)?;
        Ok(Hermitian::from_computed(
            self.q.as_matrix() + g.as_matrix() - x.as_matrix(),
        ))
    }

    /// Certified lower bound on the solution spectrum:
    /// `λ_min(Q) + Σ λ_min(A_i* A_i) λ_min(Q)^{p_i}`.
    pub fn beta(&self) -> Result<f64> {
        self.require_analysis_ready()?;
        let lq = self.q.eig()?.min();
        let mut beta = lq;
        for t in &self.terms {
            let gram = Hermitian::from_computed(t.a.adjoint() * &t.a);
            // A_i*A_i is PSD; clamp rounding noise so a singular A_i contributes 0
            let lg = gram.eig()?.min().max(0.0);
            beta += lg * lq.powf(t.p);
        }
        Ok(beta)
    }

    /// The instance with data `A_i + ΔA_i`, `Q + ΔQ`.
    pub fn perturbed(&self, pert: &Perturbation) -> Result<ProblemInstance> {
        pert.check(self)?;
        let terms = self
            .terms
            .iter()
            .zip(&pert.da)
            .map(|(t, d)| Term::new(&t.a + d, t.p))
            .collect();
        ProblemInstance::new(self.q.add(&pert.dq), terms)
    }

    pub(crate) fn check_dim(&self, x: &Hermitian) -> Result<()> {
        if x.dim() != self.n() {
            return Err(Error::shape(
                "solution candidate",
                format!("{0}x{0}", self.n()),
                format!("{0}x{0}", x.dim()),
            ));
        }
        Ok(())
    }
}

/// Data perturbation `(ΔA_1, …, ΔA_m, ΔQ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub da: Vec<CMat>,
    pub dq: Hermitian,
}

/// Norms of a perturbation, the only input the solution-free bound needs.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationNorms {
    pub da: Vec<f64>,
    pub dq: f64,
}

impl PerturbationNorms {
    pub fn zero(m: usize) -> Self {
        Self {
            da: vec![0.0; m],
            dq: 0.0,
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            da: self.da.iter().map(|d| d * t).collect(),
            dq: self.dq * t,
        }
    }
}

impl Perturbation {
    pub fn zero(inst: &ProblemInstance) -> Self {
        let n = inst.n();
        Self {
            da: vec![CMat::zeros(n, n); inst.m()],
            dq: Hermitian::zeros(n),
        }
    }

    pub fn norms(&self, kind: NormKind) -> PerturbationNorms {
        PerturbationNorms {
            da: self.da.iter().map(|d| kind.of(d)).collect(),
            dq: kind.of(self.dq.as_matrix()),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            da: self.da.iter().map(|d| d.scale(t)).collect(),
            dq: self.dq.scale(t),
        }
    }

    pub fn check(&self, inst: &ProblemInstance) -> Result<()> {
        if self.da.len() != inst.m() {
            return Err(Error::shape(
                "perturbation term count",
                inst.m(),
                self.da.len(),
            ));
        }
        let n = inst.n();
        for d in &self.da {
            linalg::check_square("perturbation of A_i", d, n)?;
        }
        linalg::check_square("perturbation of Q", self.dq.as_matrix(), n)
    }
}
