//! Experiment harness for the robust PCA library: dataset generation, single
//! runs, parameter sweeps and bound tables, all emitting CSV.

pub mod bound;
pub mod experiment;
pub mod record;
pub mod spec;

pub use experiment::{run_method, sweep, Outcome};
pub use record::{BoundRow, Metric, ResultRow, SummaryRow, RESULT_HEADER};
pub use spec::{BoundSpec, Cell, ExperimentSpec, MethodSpec};

use std::path::{Path, PathBuf};

/// `results.csv` becomes `results.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.summary.csv"))
}
