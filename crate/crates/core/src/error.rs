use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {actual})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("phase coefficients: {0}")]
    PhaseFormat(String),

    #[error("eigensolver failed to converge")]
    EigenFailure,

    #[error("eigenvalue {re} + {im}i is not real within tolerance")]
    ComplexEigenvalue { re: f64, im: f64 },

    #[error("expected {expected} negative eigenvalues, found {found} (degenerate or defective system)")]
    SpectrumSplit { expected: usize, found: usize },

    #[error("negative optical distance {0} passed to a decaying exponential")]
    NegativeDistance(f64),

    #[error("non-positive decay rate {0}")]
    NonPositiveRate(f64),

    #[error("{what} is singular or ill-conditioned (reciprocal condition estimate {rcond:.3e})")]
    IllConditioned { what: &'static str, rcond: f64 },

    #[error("depth {tau} lies outside the slab [{tau0}, {tau1}]")]
    DepthOutOfSlab { tau: f64, tau0: f64, tau1: f64 },

    #[error("direction {0} is not a weighted quadrature node")]
    NotAQuadratureNode(f64),

    #[error("matrix exponential regime violated: mode bound {bound:.3} exceeds {limit}")]
    RegimeViolation { bound: f64, limit: f64 },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("reference table: {0}")]
    Table(String),

    #[error("grid misalignment: {0}")]
    GridMismatch(String),

    #[error("solve at quadrature order N = {n} failed: {source}")]
    AtOrder {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical pipeline, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::EigenFailure
            | Error::ComplexEigenvalue { .. }
            | Error::SpectrumSplit { .. }
            | Error::NegativeDistance(_)
            | Error::NonPositiveRate(_)
            | Error::IllConditioned { .. }
            | Error::RegimeViolation { .. }
            | Error::NonFinite(_) => true,
            Error::AtOrder { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
