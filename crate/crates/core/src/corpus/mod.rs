//! Labeled text corpora: loading, cleaning, relabeling, vote aggregation,
//! and train/test splitting.
//!
//! Every operation here is a pure function of its inputs.

mod aggregate;
mod clean;
mod dataset;
mod io;
mod relabel;
mod split;

use std::path::Path;

pub use aggregate::{aggregate_majority, AggregateKey};
pub use clean::{clean_dataset, clean_social_text};
pub use dataset::{Dataset, DatasetFingerprint, LabelId, LabelSchema, Split, TextRecord};
pub use io::{
    load_table, open_dataset, read_dataset_jsonl, read_table, save_dataset, write_dataset_jsonl, LoadOptions,
    MissingTextPolicy, RowFilter, TableFormat,
};
pub use relabel::map_labels;
pub use split::{proportional_allocation, split, subsample, DEFAULT_SPLIT_SEED};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid label schema: {0}")]
    InvalidSchema(String),
    #[error("column {0:?} not found")]
    MissingColumn(String),
    #[error("row {row}: unparsable label {value:?}")]
    UnparsableLabel { row: usize, value: Option<String> },
    #[error("row {row}: missing text")]
    MissingText { row: usize },
    #[error("input contains no rows")]
    EmptyFile,
    #[error("input is not valid UTF-8 (row {row:?})")]
    Encoding { row: Option<usize> },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: label id {label} outside schema")]
    InvalidLabel { row: usize, label: usize },
    #[error("duplicate record id {0:?}")]
    DuplicateRecordId(String),
    #[error("record {0:?} is unlabeled")]
    Unlabeled(String),
    #[error("invalid label mapping: {0}")]
    InvalidMapping(String),
    #[error("record {record_id:?}: label {label:?} has no mapping")]
    UnmappedLabel { record_id: String, label: String },
    #[error("record {0:?} has no group key")]
    MissingGroupKey(String),
    #[error("test size {requested} must be smaller than dataset size {available}")]
    TestSizeTooLarge { requested: usize, available: usize },
    #[error("sample size {requested} exceeds dataset size {available}")]
    SampleTooLarge { requested: usize, available: usize },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
