use thiserror::Error;

/// Every fallible operation in the crate returns this.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: argument outside domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("invalid {field}: {detail}")]
    Invalid { field: String, detail: String },

    #[error("{what} did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    NonConvergence { what: &'static str, estimate: f64, error: f64, evaluations: usize },

    #[error("Gil-Pelaez integral not truncated at x = {x:e}: |phi| = {modulus:e} at omega = {omega:e}")]
    Truncation { x: f64, omega: f64, modulus: f64 },

    #[error("Laplace inversion failed at x = {x:e}, node {node}: {detail}")]
    Contour { x: f64, node: usize, detail: String },

    #[error("lattice product needs more than {limit} explicit factors at s = {s}")]
    ProductTruncation { limit: usize, s: String },

    #[error("CDF decreases by {drop:e} at x = {x:e}, above tolerance {tol:e}")]
    NonMonotone { x: f64, drop: f64, tol: f64 },

    #[error("intervals ({a_lo}, {a_hi}] and ({b_lo}, {b_hi}] overlap")]
    Overlap { a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64 },

    #[error("{op} requires the worst-case regime: {detail}")]
    Regime { op: &'static str, detail: String },

    #[error("SINR undefined: interference plus noise is zero")]
    DivisionByZero,

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("scenario schema: {0}")]
    Schema(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn invalid(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), detail: detail.into() }
    }

    /// Short stable identifier, used for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Invalid { .. } => "invalid",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Truncation { .. } => "truncation",
            Error::Contour { .. } => "contour",
            Error::ProductTruncation { .. } => "product_truncation",
            Error::NonMonotone { .. } => "non_monotone",
            Error::Overlap { .. } => "overlap",
            Error::Regime { .. } => "regime",
            Error::DivisionByZero => "division_by_zero",
            Error::Divergence(_) => "divergence",
            Error::Schema(_) => "schema",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
