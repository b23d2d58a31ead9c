use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or parameter lies outside the domain where the object is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-side precondition does not hold (wrong algebra, open loop, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// An evaluation produced a non-finite or degenerate value.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// Holonomy classification landed on an impossible rank.
    #[error("holonomy classification failed: {0}")]
    Classification(String),
}


pub type Result<T> = std::result::Result<T, Error>;
