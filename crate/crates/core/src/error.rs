use thiserror::Error;

/// Errors raised by the game engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid model dimensions: {0}")]
    InvalidDimensions(String),
    #[error("prior is not a probability vector: {0}")]
    InvalidPrior(String),
    #[error("likelihoods for state {state} sum to {sum}, expected 1")]
    InvalidLikelihood { state: usize, sum: f64 },
    #[error("utility for state {state}, resource {resource} increases at occupancy {occupancy}")]
    IncreasingUtility {
        state: usize,
        resource: usize,
        occupancy: usize,
    },
    #[error("utility is not linear in occupancy at state {state}, resource {resource}, occupancy {occupancy}")]
    LinearityViolated {
        state: usize,
        resource: usize,
        occupancy: usize,
    },
    #[error("signal {signal} has zero probability under the current belief")]
    ZeroMassSignal { signal: usize },
    #[error("state {state} has zero posterior mass in this context")]
    ZeroMassState { state: usize },
    #[error("model utility is not declared linear in occupancy")]
    ModelNotLinear,
    #[error("recursion went past the last agent")]
    RecursionDepthExceeded,
    #[error("invalid context: {0}")]
    InvalidContext(String),
}

/// Configuration and parse failures. Every variant names the offending key.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// The key named by an `Invalid` error.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Parse(_) => None,
        }
    }
}
