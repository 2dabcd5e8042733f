mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fracmateq::condnum::Field;
use fracmateq::operator::{MultistartOptions, NormMode, OperatorForm};
use fracmateq::reproduce::{Example, ReproduceOptions};

use commands::{AnalyzeArgs, CondMode, Failure, Format, ReproduceArgs, SolveArgs, What};
use io::QInterpretation;

#[derive(Parser)]
#[command(
    name = "fracmateq",
    version,
    about = "Solve and analyze X - sum A_i^* X^p_i A_i = Q"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve by fixed-point iteration; writes X, iterations and residual history as JSON.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace a non-Hermitian Q by (Q + Q*)/2 instead of rejecting it.
        #[arg(long)]
        symmetrize_q: bool,
    },
    /// Perturbation bounds, backward error or condition number.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum)]
        what: WhatArg,
        #[arg(long, value_enum, default_value = "rel")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "complex")]
        field: FieldArg,
        #[arg(long, value_enum, default_value = "rigorous")]
        norm_mode: NormModeArg,
        /// Linearization: the exact derivative or the integral form as printed.
        #[arg(long, value_enum, default_value = "exact")]
        form: FormArg,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Solution (a `solve` report or a bare matrix) used instead of solving.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Perturbation matrices `{"dA": [...], "dQ": ...}`.
        #[arg(long)]
        perturbation: Option<PathBuf>,
        /// Perturbation norms ||dA_i||, comma separated.
        #[arg(long, value_delimiter = ',')]
        da: Option<Vec<f64>>,
        /// Perturbation norm ||dQ||.
        #[arg(long, default_value_t = 0.0)]
        dq: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[arg(long)]
        symmetrize_q: bool,
        /// Seed of the norm estimator's random starts.
        #[arg(long, default_value_t = MultistartOptions::default().seed)]
        seed: u64,
    },
    /// Reproduce the example tables.
    Reproduce {
        #[arg(value_enum)]
        example: ExampleArg,
        #[arg(long, default_value_t = ReproduceOptions::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Parameter values (j or k), comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        range: Option<Vec<i32>>,
        #[arg(long, value_enum, default_value = "estimate")]
        norm_mode: NormModeArg,
        #[arg(long, value_enum, default_value = "printed")]
        form: FormArg,
        #[arg(long, value_enum, default_value = "md")]
        format: FormatArg,
        /// Also write `<table>.csv`, `.md` and `.json` into this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print an example problem as a problem file (Example 3 keeps its printed, non-symmetric Q).
    Export {
        #[arg(value_enum)]
        example: ExampleArg,
        /// Parameter k of Example 3.
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        k: i32,
    },
    /// Run the randomized property suites.
    Selftest {
        #[arg(long, default_value_t = 20240)]
        seed: u64,
        /// Number of applicable instances for the rigorous-bound check (0 skips it).
        #[arg(long, default_value_t = 100)]
        certify: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    Bound41,
    Bound42,
    FirstOrder,
    BackwardError,
    Cond,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Abs,
    Rel,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormModeArg {
    Rigorous,
    Estimate,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Exact,
    Printed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleArg {
    Example1,
    Example2,
    Example3,
}

fn q_mode(symmetrize: bool) -> QInterpretation {
    if symmetrize {
        QInterpretation::Symmetrized
    } else {
        QInterpretation::Strict
    }
}

fn norm_mode(m: NormModeArg) -> NormMode {
    match m {
        NormModeArg::Rigorous => NormMode::Rigorous,
        NormModeArg::Estimate => NormMode::Estimate,
    }
}

fn form(f: FormArg) -> OperatorForm {
    match f {
        FormArg::Exact => OperatorForm::Exact,
        FormArg::Printed => OperatorForm::Printed,
    }
}

fn format(f: FormatArg) -> Format {
    match f {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Md => Format::Markdown,
    }
}

fn example_id(e: ExampleArg) -> Example {
    match e {
        ExampleArg::Example1 => Example::Example1,
        ExampleArg::Example2 => Example::Example2,
        ExampleArg::Example3 => Example::Example3,
    }
}

fn run(cli: Cli) -> Result<commands::Output, Failure> {
    match cli.command {
        Command::Solve {
            file,
            tol,
            max_iter,
            out,
            symmetrize_q,
        } => commands::solve(&SolveArgs {
            file,
            tol,
            max_iter,
            out,
            q_mode: q_mode(symmetrize_q),
        }),
        Command::Analyze {
            file,
            what,
            mode,
            field,
            norm_mode: nm,
            form: f,
            format: fmt,
            solution,
            perturbation,
            da,
            dq,
            tol,
            max_iter,
            symmetrize_q,
            seed,
        } => commands::analyze(&AnalyzeArgs {
            file,
            what: match what {
                WhatArg::Bound41 => What::Bound41,
                WhatArg::Bound42 => What::Bound42,
                WhatArg::FirstOrder => What::FirstOrder,
                WhatArg::BackwardError => What::BackwardError,
                WhatArg::Cond => What::Cond,
            },
            mode: match mode {
                ModeArg::Abs => CondMode::Absolute,
                ModeArg::Rel => CondMode::Relative,
            },
            field: match field {
                FieldArg::Real => Field::Real,
                FieldArg::Complex => Field::Complex,
            },
            norm_mode: norm_mode(nm),
            form: form(f),
            format: format(fmt),
            solution,
            perturbation,
            da,
            dq,
            tol,
            max_iter,
            q_mode: q_mode(symmetrize_q),
            seed,
        }),
        Command::Reproduce {
            example,
            seed,
            runs,
            range,
            norm_mode: nm,
            form: f,
            format: fmt,
            out_dir,
        } => commands::reproduce(&ReproduceArgs {
            example: example_id(example),
            options: ReproduceOptions {
                seed,
                runs,
                range,
                norm_mode: norm_mode(nm),
                form: form(f),
                ..ReproduceOptions::default()
            },
            format: format(fmt),
            out_dir,
        }),
        Command::Export { example, k } => commands::export(example_id(example), k),
        Command::Selftest { seed, certify } => commands::selftest(seed, certify),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                commands::EXIT_INPUT
            } else {
                commands::EXIT_OK
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(f) => {
            eprint!("{}", f.message());
            ExitCode::from(f.code() as u8)
        }
    }
}
