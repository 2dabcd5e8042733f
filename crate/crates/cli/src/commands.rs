//! Command implementations. Each returns the text to print and the exit
//! status; `main` only parses arguments and writes output.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use fracmateq::condnum::{self, CondScalars, Field};
use fracmateq::operator::{build_l, MultistartOptions, NormMode, OperatorForm};
use fracmateq::perturb::{self, OperatorNorms};
use fracmateq::reproduce::{self, Example, ReproduceOptions};
use fracmateq::table::{Cell, Table};
use fracmateq::{
    selftest, solve_fixed_point, Error, Hermitian, NormKind, PerturbationNorms, ProblemInstance,
    SolveOptions,
};
use serde_json::json;

use crate::io::{self, ProblemFile, QInterpretation, SolutionFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_CHECKS_FAILED: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    Input(Vec<String>),
    NoConvergence(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::NoConvergence(_) => EXIT_NO_CONVERGENCE,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Input(issues) => issues.iter().map(|i| format!("error: {i}\n")).collect(),
            Failure::NoConvergence(msg) => format!("error: {msg}\n"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IterateNotPositive { .. } | Error::EigenNoConvergence { .. } => {
                Failure::NoConvergence(e.to_string())
            }
            Error::Validation(list) => Failure::Input(list),
            other => Failure::Input(vec![other.to_string()]),
        }
    }
}

pub struct Output {
    pub stdout: String,
    pub code: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(vec![format!("cannot read {}: {e}", path.display())]))
}

pub fn load_problem(path: &Path, q_mode: QInterpretation) -> Result<io::LoadedProblem, Failure> {
    let text = read(path)?;
    ProblemFile::parse(&text)
        .and_then(|f| f.to_instance(q_mode))
        .map_err(Failure::Input)
}

fn solve_options(tol: f64, max_iter: usize) -> Result<SolveOptions, Failure> {
    if tol.is_nan() || tol <= 0.0 || max_iter == 0 {
        return Err(Failure::Input(vec![
            "--tol must be positive and --max-iter at least 1".into(),
        ]));
    }
    Ok(SolveOptions {
        tol,
        max_iter,
        ..SolveOptions::default()
    })
}

pub struct SolveArgs {
    pub file: PathBuf,
    pub tol: f64,
    pub max_iter: usize,
    pub out: Option<PathBuf>,
    pub q_mode: QInterpretation,
}

pub fn solve(args: &SolveArgs) -> Result<Output, Failure> {
    let loaded = load_problem(&args.file, args.q_mode)?;
    let report = solve_fixed_point(
        &loaded.instance,
        None,
        &solve_options(args.tol, args.max_iter)?,
    )?;
    let text = serde_json::to_string_pretty(&SolutionFile::from_report(&report))
        .expect("serializable")
        + "\n";
    let code = if report.converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    };
    match &args.out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| {
                Failure::Input(vec![format!("cannot write {}: {e}", path.display())])
            })?;
            Ok(Output {
                stdout: format!(
                    "{} after {} iterations, residual {:e}; wrote {}\n",
                    if report.converged {
                        "converged"
                    } else {
                        "not converged"
                    },
                    report.iterations,
                    report.final_residual(),
                    path.display()
                ),
                code,
            })
        }
        None => Ok(Output { stdout: text, code }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum What {
    Bound41,
    Bound42,
    FirstOrder,
    BackwardError,
    Cond,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondMode {
    Absolute,
    Relative,
}

pub struct AnalyzeArgs {
    pub file: PathBuf,
    pub what: What,
    pub mode: CondMode,
    pub field: Field,
    pub norm_mode: NormMode,
    pub form: OperatorForm,
    pub format: Format,
    pub solution: Option<PathBuf>,
    pub perturbation: Option<PathBuf>,
    pub da: Option<Vec<f64>>,
    pub dq: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub q_mode: QInterpretation,
    pub seed: u64,
}

/// `X` from `--solution`, or by solving; non-convergence is fatal.
fn solution(args: &AnalyzeArgs, inst: &ProblemInstance) -> Result<Hermitian, Failure> {
    if let Some(path) = &args.solution {
        return io::parse_solution(&read(path)?, inst.n()).map_err(Failure::Input);
    }
    let report = solve_fixed_point(inst, None, &solve_options(args.tol, args.max_iter)?)?;
    if !report.converged {
        return Err(Failure::NoConvergence(format!(
            "solver did not converge in {} iterations (residual {:e})",
            report.iterations,
            report.final_residual()
        )));
    }
    Ok(report.x)
}

fn perturbation_norms(
    args: &AnalyzeArgs,
    inst: &ProblemInstance,
) -> Result<PerturbationNorms, Failure> {
    if let Some(path) = &args.perturbation {
        let p = io::parse_perturbation(&read(path)?, inst).map_err(Failure::Input)?;
        return Ok(p.norms(NormKind::Spectral));
    }
    let da = args
        .da
        .clone()
        .ok_or_else(|| Failure::Input(vec!["give --perturbation FILE or --da NORMS".into()]))?;
    if da.len() != inst.m() {
        return Err(Failure::Input(vec![format!(
            "--da has {} values, expected {}",
            da.len(),
            inst.m()
        )]));
    }
    if da
        .iter()
        .chain([&args.dq])
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(Failure::Input(vec![
            "perturbation norms must be finite and non-negative".into(),
        ]));
    }
    Ok(PerturbationNorms { da, dq: args.dq })
}

fn multistart(seed: u64) -> MultistartOptions {
    MultistartOptions {
        seed,
        ..MultistartOptions::default()
    }
}

/// A JSON report together with its `quantity,value` rendering.
struct Report {
    json: serde_json::Value,
    rows: Vec<(String, Cell)>,
}

impl Report {
    fn render(self, title: &str, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("serializable") + "\n",
            Format::Csv | Format::Markdown => {
                let mut t = Table::new(title, &["quantity", "value"]);
                for (k, v) in self.rows {
                    t.push(vec![Cell::Text(k), v]);
                }
                if format == Format::Csv {
                    t.to_csv().expect("in-memory csv")
                } else {
                    t.to_markdown()
                }
            }
        }
    }
}

fn bound_rows(r: &perturb::BoundReport) -> Vec<(String, Cell)> {
    let mut rows = vec![
        ("applicable".to_string(), Cell::Bool(r.applicable)),
        ("absolute".to_string(), r.absolute.into()),
        ("relative".to_string(), r.relative.into()),
    ];
    rows.extend(
        r.conditions
            .iter()
            .map(|c| (c.name.clone(), Cell::Num(c.margin))),
    );
    rows.extend(
        r.intermediates
            .iter()
            .map(|(k, v)| (k.clone(), Cell::Num(*v))),
    );
    rows
}

fn norm_json(n: &fracmateq::operator::NormEstimate) -> serde_json::Value {
    json!({"lower": n.lower, "upper": n.upper, "estimate": n.estimate, "used": n.value()})
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Output, Failure> {
    let loaded = load_problem(&args.file, args.q_mode)?;
    let inst = &loaded.instance;
    let report = match args.what {
        What::Bound41 => {
            let r = perturb::bound_thm41(inst, &perturbation_norms(args, inst)?)?;
            Report {
                json: serde_json::to_value(&r).expect("serializable"),
                rows: bound_rows(&r),
            }
        }
        What::Bound42 => {
            let norms = perturbation_norms(args, inst)?;
            let x = solution(args, inst)?;
            let rep = build_l(inst, &x, args.form)?;
            let op = OperatorNorms::compute(&rep, args.norm_mode, &multistart(args.seed))?;
            let r = perturb::bound_thm42(inst, &rep, &op, &norms)?;
            let mut json = serde_json::to_value(&r).expect("serializable");
            json["operator_form"] = json!(args.form.name());
            json["norm_mode"] = json!(args.norm_mode.name());
            json["linv_norm"] = norm_json(&op.linv);
            json["p_norms"] = op.p.iter().map(norm_json).collect();
            Report {
                json,
                rows: bound_rows(&r),
            }
        }
        What::FirstOrder => {
            let path = args.perturbation.as_ref().ok_or_else(|| {
                Failure::Input(vec!["first-order needs --perturbation FILE".into()])
            })?;
            let pert = io::parse_perturbation(&read(path)?, inst).map_err(Failure::Input)?;
            let x = solution(args, inst)?;
            let rep = build_l(inst, &x, args.form)?;
            let op = OperatorNorms::compute(&rep, args.norm_mode, &multistart(args.seed))?;
            let fo = perturb::first_order_bound(inst, &rep, &op, &pert)?;
            let mut json = serde_json::to_value(&fo.report).expect("serializable");
            json["delta_x"] =
                serde_json::to_value(io::MatrixJson::from_matrix(fo.delta_x.as_matrix()))
                    .expect("serializable");
            json["operator_form"] = json!(args.form.name());
            Report {
                json,
                rows: bound_rows(&fo.report),
            }
        }
        What::BackwardError => {
            let x = solution(args, inst)?;
            let r = perturb::backward_error_bound(inst, &x)?;
            let rows = vec![
                ("applicable".to_string(), Cell::Bool(r.applicable)),
                ("bound".to_string(), r.bound.into()),
                ("mu".to_string(), r.mu.into()),
                ("residual_norm".to_string(), r.residual_norm.into()),
                ("sigma".to_string(), r.sigma.into()),
                ("theta1".to_string(), r.theta1.into()),
                (
                    "residual_threshold".to_string(),
                    r.residual_threshold.into(),
                ),
            ];
            Report {
                json: serde_json::to_value(&r).expect("serializable"),
                rows,
            }
        }
        What::Cond => {
            let x = solution(args, inst)?;
            let rep = build_l(inst, &x, args.form)?;
            let scalars = match args.mode {
                CondMode::Absolute => CondScalars::absolute(inst.m()),
                CondMode::Relative => CondScalars::relative(inst, &rep),
            };
            let r = match args.field {
                Field::Complex => condnum::cond_complex(inst, &rep, &scalars)?,
                Field::Real => condnum::cond_real(inst, &rep, &scalars)?,
            };
            let mode = match args.mode {
                CondMode::Absolute => "abs",
                CondMode::Relative => "rel",
            };
            let json = json!({
                "value": r.value,
                "field": r.field,
                "mode": mode,
                "operator_form": args.form.name(),
                "scalars": r.scalars,
            });
            let mut rows = vec![
                ("value".to_string(), Cell::Num(r.value)),
                ("xi".to_string(), Cell::Num(r.scalars.xi)),
                ("rho".to_string(), Cell::Num(r.scalars.rho)),
            ];
            rows.extend(
                r.scalars
                    .eta
                    .iter()
                    .enumerate()
                    .map(|(i, e)| (format!("eta_{}", i + 1), Cell::Num(*e))),
            );
            Report { json, rows }
        }
    };
    let mut report = report;
    if loaded.q_asymmetry > 0.0 {
        report.json["q_asymmetry_discarded"] = json!(loaded.q_asymmetry);
        report.rows.push((
            "q_asymmetry_discarded".into(),
            Cell::Num(loaded.q_asymmetry),
        ));
    }
    let title = match args.what {
        What::Bound41 => "solution-free perturbation bound",
        What::Bound42 => "solution-based perturbation bound",
        What::FirstOrder => "first-order perturbation bound",
        What::BackwardError => "backward error bound",
        What::Cond => "condition number",
    };
    Ok(Output {
        stdout: report.render(title, args.format),
        code: EXIT_OK,
    })
}

pub struct ReproduceArgs {
    pub example: Example,
    pub options: ReproduceOptions,
    pub format: Format,
    pub out_dir: Option<PathBuf>,
}

fn render_tables(tables: &[Table], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(tables).expect("serializable") + "\n",
        Format::Csv => tables
            .iter()
            .map(|t| t.to_csv().expect("in-memory csv"))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Markdown => tables
            .iter()
            .map(Table::to_markdown)
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

pub fn reproduce(args: &ReproduceArgs) -> Result<Output, Failure> {
    let tables = reproduce::reproduce(args.example, &args.options)?;
    let names: &[&str] = match args.example {
        Example::Example1 => &["table1", "table2"],
        Example::Example2 => &["table3"],
        Example::Example3 => &["table4"],
    };
    if let Some(dir) = &args.out_dir {
        let write = |name: String, body: String| {
            fs::write(dir.join(&name), body).map_err(|e| {
                Failure::Input(vec![format!(
                    "cannot write {}: {e}",
                    dir.join(&name).display()
                )])
            })
        };
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Input(vec![format!("cannot create {}: {e}", dir.display())]))?;
        for (t, name) in tables.iter().zip(names) {
            write(format!("{name}.csv"), t.to_csv()?)?;
            write(format!("{name}.md"), t.to_markdown())?;
            write(
                format!("{name}.json"),
                serde_json::to_string_pretty(t).expect("serializable") + "\n",
            )?;
        }
    }
    Ok(Output {
        stdout: render_tables(&tables, args.format),
        code: EXIT_OK,
    })
}

pub fn export(example: Example, k: i32) -> Result<Output, Failure> {
    let mut file = match example {
        Example::Example1 => ProblemFile::from_instance(&fracmateq::instances::example1()),
        Example::Example2 => ProblemFile::from_instance(&fracmateq::instances::example2()),
        Example::Example3 => ProblemFile::from_instance(&fracmateq::instances::example3(k)?.0),
    };
    if example == Example::Example3 {
        file.q = io::MatrixJson::from_matrix(&fracmateq::linalg::complexify(
            &fracmateq::instances::example3_q_printed(),
        ));
    }
    Ok(Output {
        stdout: serde_json::to_string_pretty(&file).expect("serializable") + "\n",
        code: EXIT_OK,
    })
}

pub fn selftest(seed: u64, certify: usize) -> Result<Output, Failure> {
    let mut out = String::new();
    let mut failed = 0;
    let mut summary = BTreeMap::new();
    for s in selftest::run_all(seed)? {
        out.push_str(&format!(
            "{} {}: {} cases, worst {:.3e} ({})\n",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.cases,
            s.worst,
            s.threshold
        ));
        failed += usize::from(!s.passed);
        summary.insert(s.name, s.passed);
    }
    if certify > 0 {
        let c = selftest::rigorous_certification(certify, seed)?;
        let pass = c.passed(certify);
        out.push_str(&format!(
            "{} rigorous_certification: {} applicable of {} drawn, violations nu {} xi1 {}, max error/bound {:.3}\n",
            if pass { "PASS" } else { "FAIL" },
            c.applicable,
            c.attempts,
            c.nu_violations,
            c.xi1_violations,
            c.worst_ratio
        ));
        failed += usize::from(!pass);
    }
    out.push_str(&format!("{} suite(s) failed\n", failed));
    Ok(Output {
        stdout: out,
        code: if failed == 0 {
            EXIT_OK
        } else {
            EXIT_CHECKS_FAILED
        },
    })
}
