use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function (negative time, zero containers, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A value violates a type invariant at construction time.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// The operator tree cannot be mapped onto the available containers.
    #[error("scheduling error: {0}")]
    Scheduling(String),

    /// Simulator or forecaster settings that are inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Layout bounds that no layout can satisfy.
    #[error("unsatisfiable layout bounds: {0}")]
    Bounds(String),

    /// Exhaustive search was asked to visit more layouts than the configured cap.
    #[error("enumeration of {size} layouts exceeds the cap of {cap}")]
    EnumerationCap { size: u128, cap: u64 },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}
