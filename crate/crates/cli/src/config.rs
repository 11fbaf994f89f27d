use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpbound_core::exact::Rational;
use fpbound_core::expr::PrecisionSpec;
use fpbound_core::range::{Backend, RangeMethod, RefinementConfig};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "fpbound",
    version,
    about = "Sound bounds on floating-point roundoff errors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze the functions in the given files.
    Run(RunConfig),
    /// Compare all approaches on the bundled benchmarks.
    Bench(BenchConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    /// Forward dataflow absolute error.
    Forward,
    /// Symbolic Taylor absolute error.
    TaylorAbs,
    /// Symbolic Taylor relative error, expanded directly.
    TaylorRel,
    /// Forward absolute error divided by the smallest result magnitude.
    RelViaAbs,
    /// Unexpanded relative error maximized over the noise box.
    Naive,
}

impl Approach {
    pub fn label(self) -> &'static str {
        match self {
            Approach::Forward => "forward",
            Approach::TaylorAbs => "taylor-abs",
            Approach::TaylorRel => "taylor-rel",
            Approach::RelViaAbs => "rel-via-abs",
            Approach::Naive => "naive",
        }
    }

    pub fn is_relative(self) -> bool {
        matches!(
            self,
            Approach::TaylorRel | Approach::RelViaAbs | Approach::Naive
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RangeArg {
    Interval,
    Affine,
    /// Interval ranges tightened by the range decider.
    Refined,
}

impl From<RangeArg> for RangeMethod {
    fn from(r: RangeArg) -> Self {
        match r {
            RangeArg::Interval => RangeMethod::IntervalOnly,
            RangeArg::Affine => RangeMethod::AffineOnly,
            RangeArg::Refined => RangeMethod::IntervalWithRefinement,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    /// In-process interval branch and bound.
    Internal,
    /// External SMT-LIB 2 solver (see --solver).
    Smt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

/// Optimizer and precision settings shared by `run` and `bench`.
#[derive(Args, Clone, Debug)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = RangeArg::Interval)]
    pub range_method: RangeArg,
    #[arg(long, value_enum, default_value_t = BackendArg::Internal)]
    pub backend: BackendArg,
    /// Solver command line for the SMT backend, e.g. "z3 -in".
    #[arg(long)]
    pub solver: Option<String>,
    /// Per-query solver timeout in milliseconds.
    #[arg(long, default_value_t = 1000)]
    pub query_timeout_ms: u64,
    /// Box bisections allowed per maximization.
    #[arg(long, default_value_t = 2000)]
    pub max_bisections: usize,
    /// Relative gap at which a maximization stops, e.g. 1/100 or 0.01.
    #[arg(long, default_value = "1/100")]
    pub gap: String,
    #[arg(long, default_value = "float64")]
    pub precision: String,
}

impl EngineArgs {
    pub fn precision_spec(&self) -> Result<PrecisionSpec, String> {
        PrecisionSpec::by_name(&self.precision)
            .ok_or_else(|| format!("unknown precision `{}`", self.precision))
    }

    pub fn refinement(&self) -> Result<RefinementConfig, String> {
        let gap: Rational = self
            .gap
            .parse()
            .map_err(|e| format!("bad --gap `{}`: {e}", self.gap))?;
        let cfg = RefinementConfig {
            backend: match self.backend {
                BackendArg::Internal => Backend::InternalBranchAndBound,
                BackendArg::Smt => Backend::ExternalSmtProcess,
            },
            per_query_timeout: Duration::from_millis(self.query_timeout_ms),
            relative_gap_target: gap,
            max_bisections: self.max_bisections,
            search_timeout: None,
            solver_command: self
                .solver
                .as_ref()
                .map(|s| s.split_whitespace().map(str::to_string).collect()),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Clone, Debug)]
pub struct RunConfig {
    /// Input files; each may hold several functions.
    #[arg(required_unless_present = "corpus")]
    pub inputs: Vec<PathBuf>,
    /// Analyze the bundled benchmarks as well.
    #[arg(long)]
    pub corpus: bool,
    #[arg(long, value_enum, default_value_t = Approach::TaylorRel)]
    pub approach: Approach,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Split the input domain and analyze each piece.
    #[arg(long)]
    pub subdivide: bool,
    /// Pieces per subdivided variable.
    #[arg(long)]
    pub m: Option<usize>,
    /// Subdivision budget; together with --m it fixes how many variables are split.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Random points for an observed-error comparison; 0 disables sampling.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    /// Include wall-clock times (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    /// Show every sub-domain and optimizer diagnostics.
    #[arg(long)]
    pub details: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.subdivide && !matches!(self.approach, Approach::TaylorRel | Approach::RelViaAbs) {
            return Err(format!(
                "--subdivide needs a relative approach with an absolute fallback (taylor-rel or rel-via-abs), not {}",
                self.approach.label()
            ));
        }
        if !self.subdivide && (self.m.is_some() || self.budget.is_some()) {
            return Err("--m and --budget only apply with --subdivide".into());
        }
        if self.m == Some(0) || self.budget == Some(0) {
            return Err("--m and --budget must be positive".into());
        }
        self.engine.precision_spec()?;
        self.engine.refinement()?;
        Ok(())
    }
}

/// Subdivision defaults when the function may vanish: 8 pieces and budget
/// 50 for one variable, 4 pieces and budget 100 otherwise.
pub fn default_subdivision(n: usize) -> (usize, usize) {
    if n <= 1 {
        (8, 50)
    } else {
        (4, 100)
    }
}

#[derive(Args, Clone, Debug)]
pub struct BenchConfig {
    /// Restrict to these benchmark names.
    #[arg(long = "only")]
    pub only: Vec<String>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = fpbound_core::sampler::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.m == Some(0) || self.budget == Some(0) || self.samples == 0 {
            return Err("--m, --budget and --samples must be positive".into());
        }
        self.engine.precision_spec()?;
        self.engine.refinement()?;
        Ok(())
    }
}
