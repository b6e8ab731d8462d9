//! Result tables, learning-curve plots and the on-disk run store.

mod plot;
mod store;
mod table;

use std::path::PathBuf;

pub use plot::{render_curve_plot, render_curve_svg};
pub use store::{
    list_runs, load_run, new_run_id, persist_run, read_record, run_path, table_rows, RunRecord, RunResult,
    TOOLKIT_VERSION,
};
pub use table::{format_cell, render_table, TableFormat, TableOptions};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no rows to render")]
    EmptyRows,
    #[error("learning curve has no points")]
    EmptyCurve,
    #[error("no metrics selected")]
    EmptyMetrics,
    #[error("cannot write {path}: {reason}")]
    UnwritablePath { path: PathBuf, reason: String },
    #[error("run {0} already exists")]
    DuplicateRunId(String),
    #[error("invalid run id {0:?}")]
    InvalidRunId(String),
    #[error("cannot read run record {path}: {reason}")]
    CorruptRecord { path: PathBuf, reason: String },
}
