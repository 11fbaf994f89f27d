//! Result records shared by the analyses.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::exact::{Interval, Rational};
use crate::range::RangeMethod;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbsMethod {
    Forward(RangeMethod),
    SymbolicTaylor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelKind {
    /// Symbolic Taylor absolute bound divided by the smallest `|f|`.
    ViaAbsolute,
    /// Symbolic Taylor expansion of the relative error itself.
    Direct,
    /// The unexpanded relative error maximized directly.
    Naive,
    /// Forward dataflow absolute bound divided by the smallest `|f|`.
    ForwardViaAbs,
}

/// One rounding step of the forward analysis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub node: usize,
    pub op: String,
    /// Range of the floating-point value that was rounded.
    pub range: Interval,
    pub new_roundoff: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub query_count: usize,
    /// First-order part of a Taylor bound.
    pub first_order: Option<Rational>,
    /// Second-order remainder `M_R` of a Taylor bound.
    pub remainder: Option<Rational>,
    pub achieved_gap: Option<Rational>,
    /// A fallback replaced the requested backend somewhere.
    pub degraded: bool,
    pub wall_time: Duration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsErrorResult {
    pub bound: Rational,
    pub result_range: Interval,
    pub method: AbsMethod,
    pub per_node_trace: Option<Vec<TraceEntry>>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelErrorResult {
    pub bound: Rational,
    pub kind: RelKind,
    pub result_range: Interval,
    pub diagnostics: Diagnostics,
}
