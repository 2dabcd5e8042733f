//! JSON problem, solution and perturbation files.
//!
//! Matrices are `{"re": [[...]], "im": [[...]]}` with row-major nested lists;
//! a missing `"im"` means a real matrix.

use fracmateq::linalg::c64;
use fracmateq::{CMat, Hermitian, Perturbation, ProblemInstance, SolveReport, Term};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        let im = m.iter().any(|z| z.im != 0.0).then(|| rows(|z| z.im));
        Self {
            re: rows(|z| z.re),
            im,
        }
    }

    /// Square `n x n` matrix, with every shape problem listed under `what`.
    pub fn to_matrix(&self, n: usize, what: &str, issues: &mut Vec<String>) -> Option<CMat> {
        let check = |part: &str, rows: &[Vec<f64>], issues: &mut Vec<String>| {
            let before = issues.len();
            if rows.len() != n {
                issues.push(format!(
                    "{what}.{part}: expected {n} rows, found {}",
                    rows.len()
                ));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != n {
                    issues.push(format!(
                        "{what}.{part}: row {i} has {} entries, expected {n}",
                        row.len()
                    ));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    issues.push(format!("{what}.{part}: row {i} has a non-finite entry"));
                }
            }
            issues.len() == before
        };
        let mut ok = check("re", &self.re, issues);
        if let Some(im) = &self.im {
            ok &= check("im", im, issues);
        }
        ok.then(|| {
            CMat::from_fn(n, n, |i, j| {
                c64(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub p: f64,
    #[serde(rename = "A")]
    pub a: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "Q")]
    pub q: MatrixJson,
    pub terms: Vec<TermJson>,
}

/// How a non-Hermitian `Q` is treated on load.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QInterpretation {
    /// Reject `Q` unless Hermitian to rounding.
    #[default]
    Strict,
    /// Replace `Q` by `(Q + Q*)/2`.
    Symmetrized,
}

#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub instance: ProblemInstance,
    /// `||Q - Q*||_F / 2` of the matrix as written in the file.
    pub q_asymmetry: f64,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, Vec<String>> {
        serde_json::from_str(text).map_err(|e| vec![format!("malformed problem file: {e}")])
    }

    pub fn from_instance(inst: &ProblemInstance) -> Self {
        Self {
            n: inst.n(),
            m: inst.m(),
            q: MatrixJson::from_matrix(inst.q().as_matrix()),
            terms: inst
                .terms()
                .iter()
                .map(|t| TermJson {
                    p: t.p(),
                    a: MatrixJson::from_matrix(t.a()),
                })
                .collect(),
        }
    }

    /// Validates shapes and builds the instance; every problem is reported.
    pub fn to_instance(&self, q_mode: QInterpretation) -> Result<LoadedProblem, Vec<String>> {
        let mut issues = Vec::new();
        if self.n == 0 {
            issues.push("n must be positive".into());
        }
        if self.m != self.terms.len() {
            issues.push(format!(
                "m = {} but {} terms given",
                self.m,
                self.terms.len()
            ));
        }
        let q = self.q.to_matrix(self.n, "Q", &mut issues);
        let terms: Vec<Option<Term>> = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                if !t.p.is_finite() {
                    issues.push(format!("terms[{i}].p is not finite"));
                }
                t.a.to_matrix(self.n, &format!("terms[{i}].A"), &mut issues)
                    .map(|a| Term::new(a, t.p))
            })
            .collect();
        if !issues.is_empty() {
            return Err(issues);
        }
        let q = q.expect("shape checked");
        let herm = match q_mode {
            QInterpretation::Strict => Hermitian::new(q.clone()),
            QInterpretation::Symmetrized => Hermitian::symmetrize(q.clone()),
        };
        let herm = herm.map_err(|e| {
            let hint = match q_mode {
                QInterpretation::Strict => " (use --symmetrize-q to replace Q by (Q + Q*)/2)",
                QInterpretation::Symmetrized => "",
            };
            vec![format!("Q: {e}{hint}")]
        })?;
        let q_asymmetry = (&q - q.adjoint()).norm() / 2.0;
        let instance = ProblemInstance::new(
            herm,
            terms
                .into_iter()
                .map(|t| t.expect("shape checked"))
                .collect(),
        )
        .map_err(|e| match e {
            fracmateq::Error::Validation(list) => list,
            other => vec![other.to_string()],
        })?;
        Ok(LoadedProblem {
            instance,
            q_asymmetry,
        })
    }
}

/// Output of `solve`; also accepted as `--solution` input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(rename = "X")]
    pub x: MatrixJson,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub beta: f64,
}

impl SolutionFile {
    pub fn from_report(r: &SolveReport) -> Self {
        Self {
            x: MatrixJson::from_matrix(r.x.as_matrix()),
            converged: r.converged,
            iterations: r.iterations,
            residual_history: r.residual_history.clone(),
            final_residual: r.final_residual(),
            beta: r.beta,
        }
    }
}

/// Reads `X` from a solve report or from a bare matrix object.
pub fn parse_solution(text: &str, n: usize) -> Result<Hermitian, Vec<String>> {
    let m = match serde_json::from_str::<SolutionFile>(text) {
        Ok(s) => s.x,
        Err(_) => serde_json::from_str::<MatrixJson>(text)
            .map_err(|e| vec![format!("malformed solution file: {e}")])?,
    };
    let mut issues = Vec::new();
    let x = m.to_matrix(n, "X", &mut issues).ok_or(issues)?;
    Hermitian::new(x).map_err(|e| vec![format!("X: {e}")])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationFile {
    #[serde(rename = "dA")]
    pub da: Vec<MatrixJson>,
    #[serde(rename = "dQ", default)]
    pub dq: Option<MatrixJson>,
}

pub fn parse_perturbation(text: &str, inst: &ProblemInstance) -> Result<Perturbation, Vec<String>> {
    let f: PerturbationFile = serde_json::from_str(text)
        .map_err(|e| vec![format!("malformed perturbation file: {e}")])?;
    let n = inst.n();
    let mut issues = Vec::new();
    if f.da.len() != inst.m() {
        issues.push(format!(
            "dA has {} matrices, expected {}",
            f.da.len(),
            inst.m()
        ));
    }
    let da: Vec<Option<CMat>> =
        f.da.iter()
            .enumerate()
            .map(|(i, d)| d.to_matrix(n, &format!("dA[{i}]"), &mut issues))
            .collect();
    let dq = f.dq.as_ref().map(|d| d.to_matrix(n, "dQ", &mut issues));
    if !issues.is_empty() {
        return Err(issues);
    }
    let dq = match dq.flatten() {
        Some(m) => Hermitian::new(m).map_err(|e| vec![format!("dQ: {e}")])?,
        None => Hermitian::zeros(n),
    };
    Ok(Perturbation {
        da: da.into_iter().map(|d| d.expect("shape checked")).collect(),
        dq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIVIAL: &str = r#"{"n": 2, "m": 1, "Q": {"re": [[1, 0], [0, 1]]},
        "terms": [{"p": 0.5, "A": {"re": [[0, 0], [0, 0]]}}]}"#;

    #[test]
    fn parses_real_file_without_imaginary_parts() {
        let loaded = ProblemFile::parse(TRIVIAL)
            .unwrap()
            .to_instance(QInterpretation::Strict)
            .unwrap();
        assert_eq!(loaded.instance.n(), 2);
        assert_eq!(loaded.q_asymmetry, 0.0);
        assert!(loaded.instance.is_real());
    }

    #[test]
    fn round_trips_through_json() {
        let inst = fracmateq::instances::example1();
        let text = serde_json::to_string(&ProblemFile::from_instance(&inst)).unwrap();
        let back = ProblemFile::parse(&text)
            .unwrap()
            .to_instance(QInterpretation::Strict)
            .unwrap();
        assert_eq!(back.instance.q(), inst.q());
        for (a, b) in back.instance.terms().iter().zip(inst.terms()) {
            assert_eq!(a.a(), b.a());
            assert_eq!(a.p(), b.p());
        }
    }

    #[test]
    fn lists_every_shape_issue() {
        let text = r#"{"n": 2, "m": 2, "Q": {"re": [[1, 0]]},
            "terms": [{"p": 0.5, "A": {"re": [[0, 0], [0]]}}]}"#;
        let issues = ProblemFile::parse(text)
            .unwrap()
            .to_instance(QInterpretation::Strict)
            .unwrap_err();
        assert_eq!(issues.len(), 3, "{issues:?}");
    }

    #[test]
    fn non_hermitian_q_needs_symmetrization() {
        let text = r#"{"n": 2, "m": 1, "Q": {"re": [[1, 1], [0, 1]]},
            "terms": [{"p": 0.5, "A": {"re": [[0, 0.6], [0, 0]]}}]}"#;
        let f = ProblemFile::parse(text).unwrap();
        assert!(f.to_instance(QInterpretation::Strict).is_err());
        let loaded = f.to_instance(QInterpretation::Symmetrized).unwrap();
        assert_eq!(loaded.instance.q().entry(0, 1), c64(0.5, 0.0));
        assert!((loaded.q_asymmetry - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn malformed_json_is_reported() {
        assert!(ProblemFile::parse("{\"n\": 2,").is_err());
        assert!(
            ProblemFile::parse(r#"{"n": 2, "m": 0, "Q": {"re": []}, "terms": [], "x": 1}"#)
                .is_err()
        );
    }
}
