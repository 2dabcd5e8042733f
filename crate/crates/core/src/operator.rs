//! The linear operator `L` on `n x n` matrices and its matrix representation.
//!
//! With `X = U Λ U*` and `C_i = U* A_i`, every form of `L` acting on `vec W` is
//!
//! ```text
//! L = I + s · Σ_i (C_iᵀ ⊗ C_i*) · diag(vec K_i) · (Uᵀ ⊗ U*)
//! ```
//!
//! where `K_i[j, k] = k_{p_i}(μ_j, μ_k)` is a kernel table on the spectrum.
//! Two forms are provided:
//!
//! * [`OperatorForm::Exact`]: `s = -1`, kernel `(a^p - b^p)/(a - b)`. This is the
//!   derivative of `X ↦ X - Σ A_i* X^{p_i} A_i`.
//! * [`OperatorForm::Printed`]: `s = +1`, kernel `√(ab)(a^{p-1} - b^{p-1})/(b - a)`,
//!   the closed form of the resolvent-sandwich integral
//!   `(sin pπ/π) ∫ λ^{p-1} A*X^{1/2}(λ+X)^{-1} W (λ+X)^{-1}X^{1/2}A dλ`.
//!
//! Both coincide with `I` when every `A_i = 0`. Quadrature of the integral
//! forms ([`l_quadrature`]) is an eigensolver-free oracle for either.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMat, EigenDecomposition, Hermitian, RMat};
use crate::problem::ProblemInstance;
use crate::quadrature::HalfLineRule;
use crate::rng;

/// Relative gap below which a kernel switches to its diagonal limit.
pub const KERNEL_MERGE: f64 = 1e-8;
/// `σ_max(L)/σ_min(L)` above which `L` is flagged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OperatorForm {
    #[default]
    Exact,
    Printed,
}

impl OperatorForm {
    pub fn kernel(self, a: f64, b: f64, p: f64) -> Result<f64> {
        match self {
            OperatorForm::Exact => power_divided_difference(a, b, p),
            OperatorForm::Printed => loewner_kernel(a, b, p),
        }
    }

    fn sign(self) -> f64 {
        match self {
            OperatorForm::Exact => -1.0,
            OperatorForm::Printed => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorForm::Exact => "exact",
            OperatorForm::Printed => "printed",
        }
    }
}

fn check_kernel_args(a: f64, b: f64, p: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "kernel arguments must be positive, got ({a}, {b})"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidExponent {
            value: p,
            reason: "kernel exponent must lie in (0, 1)",
        });
    }
    Ok(())
}

/// Argument order fixed so both kernels are exactly symmetric.
fn ordered(a: f64, b: f64) -> (f64, f64) {
    (a.min(b), a.max(b))
}

fn merged(a: f64, b: f64) -> bool {
    (a - b).abs() <= KERNEL_MERGE * a.max(b)
}

/// `√(ab)(a^{p-1} - b^{p-1})/(b - a)`, limit `(1-p)a^{p-1}` on the diagonal.
pub fn loewner_kernel(a: f64, b: f64, p: f64) -> Result<f64> {
    check_kernel_args(a, b, p)?;
    let (a, b) = ordered(a, b);
    if merged(a, b) {
        return Ok((1.0 - p) * a.powf(p - 1.0));
    }
    // expm1 form keeps full relative accuracy for nearby arguments
    let r = (a / b).ln();
    Ok(-(a * b).sqrt() * b.powf(p - 2.0) * ((p - 1.0) * r).exp_m1() / r.exp_m1())
}

/// `(a^p - b^p)/(a - b)`, limit `p a^{p-1}` on the diagonal.
pub fn power_divided_difference(a: f64, b: f64, p: f64) -> Result<f64> {
    check_kernel_args(a, b, p)?;
    let (a, b) = ordered(a, b);
    if merged(a, b) {
        return Ok(p * a.powf(p - 1.0));
    }
    let r = (a / b).ln();
    Ok(b.powf(p - 1.0) * (p * r).exp_m1() / r.exp_m1())
}

/// `K[j, k] = kernel(μ_j, μ_k)`.
pub fn kernel_table(form: OperatorForm, mu: &[f64], p: f64) -> Result<RMat> {
    let n = mu.len();
    let mut k = RMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            k[(j, i)] = form.kernel(mu[j], mu[i], p)?;
        }
    }
    Ok(k)
}

/// Fréchet derivative of `X ↦ X^p` at `X` applied to `W`: `U (K ∘ U*WU) U*`.
pub fn power_derivative(eig: &EigenDecomposition, p: f64, w: &CMat) -> Result<CMat> {
    let k = kernel_table(OperatorForm::Exact, eig.values(), p)?;
    let mut inner = eig.to_eigenbasis(w);
    inner.zip_apply(&k, |z, s| *z *= s);
    Ok(eig.from_eigenbasis(&inner))
}

/// Matrix representation of `L` at a solution, with its inverse.
#[derive(Clone, Debug)]
pub struct OperatorRep {
    pub form: OperatorForm,
    pub l: CMat,
    pub linv: CMat,
    pub eig: EigenDecomposition,
    pub kernel_tables: Vec<RMat>,
    /// `B_i = X^{p_i} A_i`.
    pub b: Vec<CMat>,
    pub x: Hermitian,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `||L·Linv - I||_F / ||L||_F`.
    pub inverse_defect: f64,
    pub ill_conditioned: bool,
}

pub fn build_l(inst: &ProblemInstance, x: &Hermitian, form: OperatorForm) -> Result<OperatorRep> {
    inst.require_analysis_ready()?;
    inst.check_dim(x)?;
    let n = inst.n();
    let eig = x.eig()?;
    if !linalg::decomposition_is_pd(&eig) {
        return Err(Error::NotPositiveDefinite {
            lambda_min: eig.min(),
        });
    }
    let u = eig.vectors();
    let right = linalg::kron(&u.transpose(), &u.adjoint());
    let mut l = CMat::identity(n * n, n * n);
    let mut kernel_tables = Vec::with_capacity(inst.m());
    let mut b = Vec::with_capacity(inst.m());
    for t in inst.terms() {
        let k = kernel_table(form, eig.values(), t.p())?;
        let c = u.adjoint() * t.a();
        let mut scaled = right.clone();
        // diag(vec K) · right scales row (j + k n) by K[j, k]
        for (row, kv) in k.as_slice().iter().enumerate() {
            scaled.row_mut(row).scale_mut(*kv);
        }
        l += linalg::kron(&c.transpose(), &c.adjoint()) * scaled * c64(form.sign(), 0.0);
        kernel_tables.push(k);
        b.push(linalg::power_of(&eig, t.p())?.as_matrix() * t.a());
    }
    let sv = l.clone().singular_values();
    let (sigma_min, sigma_max) = (sv.min(), sv.max());
    let linv = linalg::inverse(&l)?;
    let inverse_defect = (&l * &linv - CMat::identity(n * n, n * n)).norm() / l.norm();
    Ok(OperatorRep {
        form,
        ill_conditioned: sigma_max > ILL_CONDITIONED * sigma_min,
        l,
        linv,
        eig,
        kernel_tables,
        b,
        x: x.clone(),
        sigma_min,
        sigma_max,
        inverse_defect,
    })
}

impl OperatorRep {
    pub fn n(&self) -> usize {
        self.x.dim()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn apply(&self, w: &CMat) -> Result<CMat> {
        linalg::unvec(&(&self.l * linalg::vec(w)), self.n())
    }

    pub fn apply_inverse(&self, w: &CMat) -> Result<CMat> {
        linalg::unvec(&(&self.linv * linalg::vec(w)), self.n())
    }

    pub fn term_b(&self, index: usize) -> Result<&CMat> {
        self.b
            .get(index)
            .ok_or(Error::TermIndex { index, m: self.m() })
    }
}

/// `L` assembled by quadrature of its integral form, one LU solve per node.
///
/// Returns the matrix and the node-doubling error estimate (Frobenius).
pub fn l_quadrature(
    inst: &ProblemInstance,
    x: &Hermitian,
    form: OperatorForm,
    nodes: usize,
) -> Result<(CMat, f64)> {
    inst.require_analysis_ready()?;
    inst.check_dim(x)?;
    let n = inst.n();
    let xm = x.as_matrix();
    let x_half = x.power(0.5)?;
    let mut l = CMat::identity(n * n, n * n);
    let mut error = 0.0;
    for t in inst.terms() {
        let p = t.p();
        let rule = HalfLineRule::new(p, nodes)?;
        let lhs = match form {
            OperatorForm::Printed => x_half.as_matrix() * t.a(),
            OperatorForm::Exact => t.a().clone(),
        };
        let integral = rule.integrate_matrix(|lam| {
            let shifted = xm + CMat::identity(n, n) * c64(lam, 0.0);
            let g = linalg::solve(&shifted, &lhs)?;
            let weight = match form {
                OperatorForm::Printed => 1.0,
                OperatorForm::Exact => lam,
            };
            Ok(linalg::kron(&g.transpose(), &g.adjoint()) * c64(weight, 0.0))
        })?;
        let scale = (p * std::f64::consts::PI).sin() / std::f64::consts::PI;
        l += integral.value * c64(form.sign() * scale, 0.0);
        error += scale * integral.error_estimate;
    }
    Ok((l, error))
}

/// `1 - Σ ||A_i||² / β^{1-p_i}`; positive certifies that `L` is invertible.
pub fn invertibility_margin(inst: &ProblemInstance) -> Result<f64> {
    let beta = inst.beta()?;
    Ok(1.0
        - inst
            .terms()
            .iter()
            .map(|t| linalg::spectral_norm(t.a()).powi(2) / beta.powf(1.0 - t.p()))
            .sum::<f64>())
}

/// Domain of a real-linear map on `n x n` matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixSpace {
    /// Coordinates in the Frobenius-orthonormal basis `E_jj`,
    /// `(E_jk + E_kj)/√2`, `i(E_jk - E_kj)/√2` for `j < k`; `n²` real coordinates.
    Hermitian,
    /// Coordinates `(Re vec Z, Im vec Z)`; `2n²` real coordinates.
    Complex,
}

impl MatrixSpace {
    pub fn dim(self, n: usize) -> usize {
        match self {
            MatrixSpace::Hermitian => n * n,
            MatrixSpace::Complex => 2 * n * n,
        }
    }

    /// The matrix with coordinates `v`.
    pub fn matrix(self, n: usize, v: &[f64]) -> CMat {
        match self {
            MatrixSpace::Complex => {
                CMat::from_fn(n, n, |r, c| c64(v[c * n + r], v[n * n + c * n + r]))
            }
            MatrixSpace::Hermitian => {
                let mut m = CMat::zeros(n, n);
                for j in 0..n {
                    m[(j, j)] = c64(v[j], 0.0);
                }
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut idx = n;
                for j in 0..n {
                    for k in j + 1..n {
                        let (re, im) = (v[idx] * s, v[idx + 1] * s);
                        m[(j, k)] = c64(re, im);
                        m[(k, j)] = c64(re, -im);
                        idx += 2;
                    }
                }
                m
            }
        }
    }
}

/// Real-linear map `T` from a [`MatrixSpace`] to `n x n` complex matrices,
/// stored as the real matrix taking domain coordinates to `(Re vec T, Im vec T)`.
///
/// Both coordinate systems are Frobenius isometries, so `σ_max` of the stored
/// matrix is the Frobenius-to-Frobenius norm of `T`.
#[derive(Clone, Debug)]
pub struct RealLinearMap {
    pub n: usize,
    pub domain: MatrixSpace,
    pub matrix: RMat,
}

impl RealLinearMap {
    /// Tabulates `f` on the domain basis.
    pub fn from_fn(n: usize, domain: MatrixSpace, f: impl Fn(&CMat) -> CMat) -> Self {
        let d = domain.dim(n);
        let mut matrix = RMat::zeros(2 * n * n, d);
        let mut e = vec![0.0; d];
        for col in 0..d {
            e[col] = 1.0;
            let out = f(&domain.matrix(n, &e));
            e[col] = 0.0;
            for (row, z) in out.as_slice().iter().enumerate() {
                matrix[(row, col)] = z.re;
                matrix[(row + n * n, col)] = z.im;
            }
        }
        Self { n, domain, matrix }
    }

    pub fn apply_coords(&self, v: &[f64]) -> CMat {
        let n2 = self.n * self.n;
        let out = &self.matrix * DVector::from_column_slice(v);
        CMat::from_fn(self.n, self.n, |r, c| {
            c64(out[c * self.n + r], out[n2 + c * self.n + r])
        })
    }

    /// Spectral-to-spectral ratio `||T(W)|| / ||W||` at coordinates `v`.
    pub fn ratio(&self, v: &[f64]) -> f64 {
        let w = self.domain.matrix(self.n, v);
        let den = linalg::spectral_norm(&w);
        if den == 0.0 {
            return 0.0;
        }
        linalg::spectral_norm(&self.apply_coords(v)) / den
    }

    pub fn sigma_max(&self) -> f64 {
        linalg::spectral_norm_real(&self.matrix)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormMode {
    /// Downstream formulas consume the certified upper bracket.
    #[default]
    Rigorous,
    /// Downstream formulas consume the best value found by search.
    Estimate,
}

impl NormMode {
    pub fn name(self) -> &'static str {
        match self {
            NormMode::Rigorous => "rigorous",
            NormMode::Estimate => "estimate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub mode: NormMode,
    pub samples: usize,
}

impl NormEstimate {
    /// The value a bound should use: `upper` in rigorous mode, else `estimate`.
    pub fn value(&self) -> f64 {
        match self.mode {
            NormMode::Rigorous => self.upper,
            NormMode::Estimate => self.estimate,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MultistartOptions {
    pub starts: usize,
    pub seed: u64,
    pub rel_gain: f64,
    pub max_sweeps: usize,
}

impl Default for MultistartOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0x5eed,
            rel_gain: 1e-6,
            max_sweeps: 400,
        }
    }
}

/// Compass search on the coordinates, one coordinate at a time.
fn ascend(map: &RealLinearMap, mut v: Vec<f64>, opts: &MultistartOptions) -> (f64, usize) {
    let mut best = map.ratio(&v);
    let mut evals = 1;
    let scale = v
        .iter()
        .fold(0.0_f64, |a, x| a.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let mut step = 0.5 * scale;
    for _ in 0..opts.max_sweeps {
        let before = best;
        for k in 0..v.len() {
            for dir in [1.0, -1.0] {
                let old = v[k];
                v[k] = old + dir * step;
                let f = map.ratio(&v);
                evals += 1;
                if f > best {
                    best = f;
                    break;
                }
                v[k] = old;
            }
        }
        if best - before <= opts.rel_gain * best {
            step *= 0.5;
            if step < 1e-7 * scale {
                break;
            }
        }
    }
    (best, evals)
}

/// Brackets and estimates `sup ||T(W)|| / ||W||` in the spectral norm.
///
/// `[σ/√n, √n σ]` with `σ` the Frobenius-to-Frobenius norm; the estimate is the
/// best of a multistart compass search seeded with the top right singular
/// vector plus `opts.starts` random starts on per-start streams.
pub fn op_norm(map: &RealLinearMap, mode: NormMode, opts: &MultistartOptions) -> NormEstimate {
    let sqrt_n = (map.n as f64).sqrt();
    let svd = map.matrix.clone().svd(false, true);
    let (imax, sigma) =
        svd.singular_values.iter().enumerate().fold(
            (0, 0.0),
            |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc },
        );
    let lower = sigma / sqrt_n;
    let upper = sigma * sqrt_n;
    if sigma == 0.0 {
        return NormEstimate {
            lower: 0.0,
            upper: 0.0,
            estimate: 0.0,
            mode,
            samples: 0,
        };
    }
    let top: Vec<f64> = svd
        .v_t
        .expect("requested")
        .row(imax)
        .iter()
        .copied()
        .collect();
    let d = map.domain.dim(map.n);
    let results: Vec<(f64, usize)> = (0..=opts.starts)
        .into_par_iter()
        .map(|s| {
            let start = if s == 0 {
                top.clone()
            } else {
                let mut r = rng::stream(opts.seed, s as u64);
                (0..d)
                    .map(|_| r.sample(rand_distr::StandardNormal))
                    .collect()
            };
            ascend(map, start, opts)
        })
        .collect();
    let best = results.iter().map(|r| r.0).fold(lower, f64::max);
    let samples = results.iter().map(|r| r.1).sum();
    NormEstimate {
        lower,
        upper,
        estimate: best.min(upper),
        mode,
        samples,
    }
}

/// `L⁻¹` as a map on Hermitian matrices.
pub fn linv_map(rep: &OperatorRep) -> RealLinearMap {
    RealLinearMap::from_fn(rep.n(), MatrixSpace::Hermitian, |w| {
        rep.apply_inverse(w).expect("square input")
    })
}

/// `P_i Z = L⁻¹(B_i* Z + Z* B_i)` as a real-linear map on complex `Z`.
///
/// Assembled from `M1 = L⁻¹(I ⊗ B_i*)` and `M2 = L⁻¹(B_iᵀ ⊗ I)Π` so that
/// `vec P_i Z = M1 vec Z + M2 conj(vec Z)`.
pub fn build_p(rep: &OperatorRep, index: usize) -> Result<RealLinearMap> {
    let (m1, m2) = p_blocks(rep, index)?;
    let n2 = rep.n() * rep.n();
    let (u1, o1, u2, o2) = (
        linalg::real_part(&m1),
        linalg::imag_part(&m1),
        linalg::real_part(&m2),
        linalg::imag_part(&m2),
    );
    let mut matrix = RMat::zeros(2 * n2, 2 * n2);
    matrix.view_mut((0, 0), (n2, n2)).copy_from(&(&u1 + &u2));
    matrix.view_mut((0, n2), (n2, n2)).copy_from(&(&o2 - &o1));
    matrix.view_mut((n2, 0), (n2, n2)).copy_from(&(&o1 + &o2));
    matrix.view_mut((n2, n2), (n2, n2)).copy_from(&(&u1 - &u2));
    Ok(RealLinearMap {
        n: rep.n(),
        domain: MatrixSpace::Complex,
        matrix,
    })
}

pub(crate) fn p_blocks(rep: &OperatorRep, index: usize) -> Result<(CMat, CMat)> {
    let n = rep.n();
    let b = rep.term_b(index)?;
    let id = CMat::identity(n, n);
    let pi = linalg::complexify(&linalg::vec_perm(n));
    let m1 = &rep.linv * linalg::kron(&id, &b.adjoint());
    let m2 = &rep.linv * linalg::kron(&b.transpose(), &id) * pi;
    Ok((m1, m2))
}

/// `L⁻¹(B_i* Z + Z* B_i)` evaluated directly.
pub fn apply_p_direct(rep: &OperatorRep, index: usize, z: &CMat) -> Result<CMat> {
    let b = rep.term_b(index)?;
    rep.apply_inverse(&(b.adjoint() * z + z.adjoint() * b))
}
