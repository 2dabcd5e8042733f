use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not Hermitian: ||M - M*||_F / 2 = {defect:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not positive definite (lambda_min = {lambda_min:.6e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("Hermitian eigensolver did not converge within {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error(
        "quadrature error estimate {estimate:.3e} exceeds requested tolerance {tolerance:.3e}"
    )]
    QuadratureAccuracy { estimate: f64, tolerance: f64 },

    #[error("exponent {value} out of range: {reason}")]
    InvalidExponent { value: f64, reason: &'static str },

    #[error("instance is not analysis ready: every exponent p_i must lie in (0, 1)")]
    NotAnalysisReady,

    #[error("invalid problem instance: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(
        "matrix is not a solution of the equation: residual {residual:.3e} exceeds {gate:.3e}"
    )]
    NotASolution { residual: f64, gate: f64 },

    #[error("coefficient A_{index} is singular (sigma_min = {sigma_min:.3e}, sigma_max = {sigma_max:.3e})")]
    SingularCoefficient {
        index: usize,
        sigma_min: f64,
        sigma_max: f64,
    },

    #[error("M - U Q U* is not positive definite (lambda_min = {lambda_min:.6e})")]
    FactorizationNotPositive { lambda_min: f64 },

    #[error("intermediate iterate {iteration} lost positive definiteness (lambda_min = {lambda_min:.6e})")]
    IterateNotPositive { iteration: usize, lambda_min: f64 },

    #[error("real-field analysis requested for an instance with complex data")]
    ComplexInput,

    #[error("term index {index} out of range for m = {m}")]
    TermIndex { index: usize, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: impl ToString,
        found: impl ToString,
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
