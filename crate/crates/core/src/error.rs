use thiserror::Error;

/// Errors raised by the dimension and pressure computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("transition matrix is not primitive")]
    NotPrimitive,

    #[error("matrix is rank-deficient")]
    RankDeficient,

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    RootNotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("budget exceeded: {requested} words requested, budget is {budget}; try n = {suggested_n}")]
    BudgetExceeded {
        requested: u128,
        budget: u128,
        suggested_n: usize,
    },

    #[error("branch {branch}: not expanding (|gamma| = {gamma}, |lambda| = {lambda})")]
    NotExpanding { branch: usize, gamma: f64, lambda: f64 },

    #[error("branch {branch}: image [{lo}, {hi}] leaves [0, 1]")]
    ImageOutsideUnitInterval { branch: usize, lo: f64, hi: f64 },

    #[error("partition intervals overlap or leave gaps near {at}")]
    OverlappingPartition { at: f64 },

    #[error("subsystem is not Markov of type 1: {0}")]
    NotTypeOne(String),

    #[error("hypotheses of the skew-product dimension theorems not met: {0}")]
    HypothesesNotMet(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("need >= 2 scales to fit a slope")]
    TooFewScales,

    #[error("measure has {measure} symbols but the system has {system} maps")]
    AlphabetMismatch { measure: usize, system: usize },
}

impl Error {
    /// Numeric failures (as opposed to malformed input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::RootNotBracketed { .. }
                | Error::BudgetExceeded { .. }
                | Error::InsufficientSamples(_)
                | Error::TooFewScales
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
