//! Experiment harness for [`ipgq`]: declarative experiment configs, seeded
//! multi-run aggregation, and JSON/CSV/SVG/OpenQASM output.
//!
//! ```no_run
//! use ipgq_bench::{export_all, run_experiment, ExperimentConfig, ExperimentKind};
//!
//! let config = ExperimentConfig::defaults(ExperimentKind::GhzPrep);
//! let record = run_experiment(&config)?;
//! println!("ipg: {:e}", record.result("ipg").unwrap().best.final_cost());
//! export_all(&record, std::path::Path::new("out"))?;
//! # Ok::<(), ipgq_bench::BenchError>(())
//! ```

pub mod config;
mod error;
pub mod experiment;
pub mod export;
pub mod plot;
pub mod qasm;

pub use config::{ConfigOverrides, ExperimentConfig, ExperimentKind, GrowLayers};
pub use error::{BenchError, Result};
pub use experiment::{run_experiment, AggregateRecord, OptimizerResult};
pub use export::{export_all, export_csv, export_json, read_record};
pub use plot::emit_plot;
pub use qasm::{export_qasm, parse_qasm, to_qasm};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "IPGQ_OUT_DIR";
/// Output directory when neither `--out` nor [`OUT_DIR_ENV`] is set.
pub const DEFAULT_OUT_DIR: &str = "ipgq-out";

/// `explicit`, else the environment variable, else [`DEFAULT_OUT_DIR`].
pub fn output_dir(explicit: Option<&std::path::Path>) -> std::path::PathBuf {
    explicit
        .map(Into::into)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(Into::into))
        .unwrap_or_else(|| DEFAULT_OUT_DIR.into())
}
