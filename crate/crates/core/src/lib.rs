pub mod condnum;
pub mod error;
pub mod factor;
pub mod instances;
pub mod linalg;
pub mod operator;
pub mod perturb;
pub mod problem;
pub mod quadrature;
pub mod reproduce;
pub mod rng;
pub mod selftest;
pub mod solver;
pub mod table;

pub use error::{Error, Result};
pub use linalg::{CMat, Hermitian, RMat};
pub use operator::{NormMode, OperatorForm};
pub use problem::{NormKind, Perturbation, PerturbationNorms, ProblemInstance, Term};
pub use solver::{solve_fixed_point, SolveOptions, SolveReport};
