use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    /// The input is not a valid game of the expected kind.
    #[error("invalid input: {0}")]
    Input(String),
    /// A runtime invariant failed. Always a solver bug; `trace` holds
    /// whatever is needed to reproduce it.
    #[error("internal assertion failed: {message}")]
    Internal { message: String, trace: Value },
}

impl SolveError {
    pub fn is_internal(&self) -> bool {
        matches!(self, SolveError::Internal { .. })
    }

    pub fn trace(&self) -> Option<&Value> {
        match self {
            SolveError::Internal { trace, .. } => Some(trace),
            SolveError::Input(_) => None,
        }
    }
}

pub(crate) fn input_error(spec: &crate::game::GameSpec) -> Option<SolveError> {
    spec.validate().err().map(|violations| {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        SolveError::Input(list.join("; "))
    })
}
