use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector must contain at least one entry")]
    EmptyVector,

    #[error("entry {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("operation requires integer entries; entry {index} is {value}")]
    NonIntegral { index: usize, value: f64 },

    #[error("entry {index} is negative ({value}); p-norms need nonnegative input")]
    NegativeEntry { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("derivative order {k} exceeds the supported limit {limit}")]
    OrderLimit { k: usize, limit: usize },

    #[error("degenerate denominator: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("value out of representable range: {0}")]
    RangeLimit(String),

    #[error("estimate did not stabilise within the search budget (last t = {last_t})")]
    NoStabilization { last_t: f64 },

    #[error("search budget exhausted before reaching the tolerance (t > {limit})")]
    BudgetExhausted { limit: f64 },

    #[error("convolution length {0} overflows the transform size")]
    LengthOverflow(usize),

    #[error("curve grids do not match: {0}")]
    GridMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::Numerical(_)
                | Error::RangeLimit(_)
                | Error::NoStabilization { .. }
                | Error::BudgetExhausted { .. }
        )
    }
}
