use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Inputs that do not fit together: wrong vector lengths, unknown vertices, bad shapes.
    #[error("structural error: {0}")]
    Structural(String),

    /// Inputs that are well formed but outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An enumeration would exceed its configured budget.
    #[error("budget exceeded: {what} requires {required} items, budget is {budget}")]
    Budget {
        what: String,
        required: u128,
        budget: u128,
    },

    /// A mathematical invariant failed at runtime (e.g. a non-unique HN maximizer).
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("unresolved base case: n1 = {n1}, group = {group}")]
    UnresolvedBase { n1: u32, group: String },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
