//! Command-line driver: configuration, bundled benchmarks, report rendering
//! and the comparison harness.

pub mod bench;
pub mod config;
pub mod corpus;
pub mod report;
pub mod run;

pub use bench::{bench, render_bench, BenchReport};
pub use config::{Approach, BenchConfig, Cli, Command, OutputFormat, RunConfig};
pub use report::{render_csv, render_json, render_text, RunReport};
pub use run::run;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const ANALYSIS_FAILED: i32 = 2;
    pub const UNSOUND: i32 = 3;
}
