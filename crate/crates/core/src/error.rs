use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("need at least two base stations, found {0}")]
    TooFewBaseStations(usize),

    #[error("interferer list is empty")]
    NoInterferers,

    #[error("user index {index} out of range for {users} users")]
    UserIndex { index: usize, users: usize },

    #[error(
        "root search did not converge after {iterations} iterations \
         (bracket [{lo:e}, {hi:e}], residual {residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    #[error("series for {what} did not converge within {terms} terms")]
    SeriesDivergence { what: &'static str, terms: usize },

    #[error("Laplace inversion failed at x = {x}: {reason}")]
    Inversion { x: f64, reason: String },

    #[error("equal-rate split infeasible: beta = {beta} < 1/2 (decoding order violated)")]
    Infeasible { beta: f64 },

    #[error(
        "NOMA fairness is defined at the half-power split, but the sum-rate optimum is beta = 1"
    )]
    FairnessUndefined,

    #[error("co-cell user placement failed after {0} attempts")]
    PairPlacement(usize),

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical kernel, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::SeriesDivergence { .. }
                | Error::Inversion { .. }
                | Error::Infeasible { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
