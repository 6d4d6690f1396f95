use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick exit codes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Category {
    /// Bad inputs: parameters out of range, inconsistent specifications.
    Input,
    /// The physical model rejects the request (unstable trap, non-Hermitian
    /// Hamiltonian, degenerate steady state).
    Model,
    /// Numerical breakdown in an otherwise valid request.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid truncation: n_max = {0}, expected at least 1")]
    InvalidTruncation(usize),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("density matrix is not normalized: trace = {0}")]
    Normalization(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("steady state is not unique (condition estimate {condition:.3e})")]
    NonUniqueSteadyState { condition: f64 },

    #[error("trap is unstable on this axis: secular radicand {radicand:.6e} s^-2")]
    Unstable { radicand: f64 },

    #[error("underdetermined fit: {0}")]
    Underdetermined(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("steady-state solve failed at delta_c = {delta_c:.6e} rad/s: {source}")]
    ScanPoint {
        delta_c: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::InvalidTruncation(_)
            | Error::Layout(_)
            | Error::Domain(_)
            | Error::Consistency(_)
            | Error::Underdetermined(_) => Category::Input,
            Error::Model(_) | Error::NonUniqueSteadyState { .. } | Error::Unstable { .. } => {
                Category::Model
            }
            Error::Normalization(_) | Error::Numerical(_) => Category::Numerical,
            Error::ScanPoint { source, .. } => source.category(),
        }
    }
}
