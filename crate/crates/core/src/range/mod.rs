//! Sound ranges of expression trees over boxes: plain interval arithmetic,
//! affine arithmetic, solver-refined ranges, and a rigorous maximizer.

mod aa;
mod bnb;
mod ia;
mod objective;
mod refine;
pub mod smt;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::exact::Rational;
use crate::expr::EvalError;

pub use aa::range_aa;
pub use bnb::{maximize_abs, maximize_objective};
pub(crate) use ia::SearchEnv;
pub use ia::{eval_hinted, range_ia, Hint, NoiseMode};
pub use objective::Objective;
pub use refine::{
    range_refined, range_refined_report, Decider, InternalDecider, RefinedRange, Verdict,
};

/// How node ranges are computed by the forward analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RangeMethod {
    IntervalOnly,
    AffineOnly,
    IntervalWithRefinement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    /// Deterministic in-process interval branch and bound.
    InternalBranchAndBound,
    /// An SMT-LIB 2 solver run as a subprocess.
    ExternalSmtProcess,
}

/// Budgets and backend choice for range refinement and maximization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementConfig {
    pub backend: Backend,
    pub per_query_timeout: Duration,
    /// Search stops once `(upper - lower) <= gap * upper`.
    pub relative_gap_target: Rational,
    pub max_bisections: usize,
    /// Optional wall-clock cap on a whole maximization. Off by default so
    /// results depend only on the budget.
    pub search_timeout: Option<Duration>,
    /// Solver command line for the external backend; falls back to the
    /// `FPBOUND_SMT_SOLVER` environment variable.
    pub solver_command: Option<Vec<String>>,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        RefinementConfig {
            backend: Backend::InternalBranchAndBound,
            per_query_timeout: Duration::from_secs(1),
            relative_gap_target: Rational::ratio(1, 100).expect("nonzero"),
            max_bisections: 2000,
            search_timeout: None,
            solver_command: None,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.per_query_timeout.is_zero() {
            return Err("per-query timeout must be positive".into());
        }
        let g = &self.relative_gap_target;
        if !g.is_positive() || *g >= Rational::one() {
            return Err(format!(
                "relative gap target {g} must lie strictly between 0 and 1"
            ));
        }
        Ok(())
    }

    pub fn with_budget(&self, max_bisections: usize) -> Self {
        RefinementConfig {
            max_bisections,
            ..self.clone()
        }
    }
}

/// A sound upper bound together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: Rational,
    /// `(upper - lower) / upper` at termination, when a positive lower bound is known.
    pub achieved_gap: Option<Rational>,
    pub backend_used: Backend,
    pub query_count: usize,
    pub wall_time: Duration,
    /// The requested backend failed and a fallback produced the bound.
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RangeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no finite bound found within the bisection budget")]
    Unbounded,
}
