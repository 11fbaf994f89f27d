use crate::exact::Interval;
use crate::expr::{EvalError, SpecError};
use crate::range::RangeError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    /// The function may vanish on the domain, so no relative bound exists.
    #[error("range {range} of the function may contain zero")]
    ZeroRangeFailure { range: Box<Interval> },
    #[error("{op} at node {node}: {source}")]
    Node {
        node: usize,
        op: &'static str,
        source: EvalError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

impl AnalysisError {
    pub fn is_zero_range(&self) -> bool {
        matches!(self, AnalysisError::ZeroRangeFailure { .. })
    }
}
