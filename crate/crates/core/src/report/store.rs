use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::ablation::LearningCurve;
use crate::corpus::DatasetFingerprint;
use crate::finetune::SeedRun;
use crate::metrics::{self, AggregateReport, MetricReport};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunResult {
    /// One evaluation: a baseline, a zero-shot run, or a single seed.
    Single {
        report: MetricReport,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exclusion_rate: Option<f64>,
    },
    Aggregate {
        aggregate: AggregateReport,
        runs: Vec<SeedRun>,
    },
    Curve {
        curve: LearningCurve,
    },
}

impl RunResult {
    /// Table row form; `None` for curves.
    pub fn as_aggregate(&self) -> Option<AggregateReport> {
        match self {
            RunResult::Single { report, .. } => metrics::aggregate(std::slice::from_ref(report)).ok(),
            RunResult::Aggregate { aggregate, .. } => Some(aggregate.clone()),
            RunResult::Curve { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub timestamp: DateTime<Utc>,
    pub task: String,
    pub system_name: String,
    /// Full training or provider configuration as submitted.
    pub config: serde_json::Value,
    pub dataset: DatasetFingerprint,
    pub seeds: Vec<u64>,
    pub result: RunResult,
    pub toolkit_version: String,
}

/// Fresh random run id.
pub fn new_run_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

impl RunRecord {
    pub fn new(
        task: impl Into<String>,
        system_name: impl Into<String>,
        config: serde_json::Value,
        dataset: DatasetFingerprint,
        seeds: Vec<u64>,
        result: RunResult,
    ) -> Self {
        Self {
            run_id: new_run_id(),
            timestamp: Utc::now(),
            task: task.into(),
            system_name: system_name.into(),
            config,
            dataset,
            seeds,
            result,
            toolkit_version: TOOLKIT_VERSION.to_owned(),
        }
    }
}

fn valid_run_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn unwritable(path: &Path, e: impl ToString) -> ReportError {
    ReportError::UnwritablePath {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

pub fn run_path(store_dir: &Path, run_id: &str) -> PathBuf {
    store_dir.join(format!("{run_id}.json"))
}

/// Write `record` as `<run_id>.json`; never overwrites an existing run.
pub fn persist_run(record: &RunRecord, store_dir: &Path) -> Result<String, ReportError> {
    if !valid_run_id(&record.run_id) {
        return Err(ReportError::InvalidRunId(record.run_id.clone()));
    }
    fs::create_dir_all(store_dir).map_err(|e| unwritable(store_dir, e))?;
    let path = run_path(store_dir, &record.run_id);
    let mut file = match OpenOptions::new().write(true).create_new(true).open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == ErrorKind::AlreadyExists => {
            return Err(ReportError::DuplicateRunId(record.run_id.clone()))
        }
        Err(e) => return Err(unwritable(&path, e)),
    };
    let mut body = serde_json::to_vec_pretty(record).expect("serializable");
    body.push(b'\n');
    file.write_all(&body).map_err(|e| unwritable(&path, e))?;
    Ok(record.run_id.clone())
}

pub fn load_run(store_dir: &Path, run_id: &str) -> Result<RunRecord, ReportError> {
    if !valid_run_id(run_id) {
        return Err(ReportError::InvalidRunId(run_id.to_owned()));
    }
    read_record(&run_path(store_dir, run_id))
}

pub fn read_record(path: &Path) -> Result<RunRecord, ReportError> {
    let corrupt = |reason: String| ReportError::CorruptRecord {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path).map_err(|e| corrupt(e.to_string()))?;
    serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))
}

/// Every record in `store_dir`, oldest first.
pub fn list_runs(store_dir: &Path) -> Result<Vec<RunRecord>, ReportError> {
    let entries = match fs::read_dir(store_dir) {
        Ok(e) => e,
        Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(unwritable(store_dir, e)),
    };
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| unwritable(store_dir, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            out.push(read_record(&path)?);
        }
    }
    out.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.run_id.cmp(&b.run_id)));
    Ok(out)
}

/// Table rows reconstructed from persisted runs; curve runs are skipped.
pub fn table_rows(records: &[RunRecord]) -> Vec<(String, AggregateReport)> {
    records
        .iter()
        .filter_map(|r| r.result.as_aggregate().map(|a| (r.system_name.clone(), a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dataset, LabelSchema, TextRecord};

    fn record() -> RunRecord {
        let ds = Dataset::new(
            LabelSchema::new(["neg", "pos"]).unwrap(),
            vec![TextRecord::new("1", "a", Some(0)), TextRecord::new("2", "b", Some(1))],
            "",
        )
        .unwrap();
        let report = metrics::evaluate(&[0, 1], &[0, 0], &ds.schema).unwrap();
        RunRecord::new(
            "baseline",
            "MAJ-VOT",
            serde_json::json!({"task": "baseline"}),
            ds.fingerprint(),
            vec![],
            RunResult::Single {
                report,
                exclusion_rate: None,
            },
        )
    }

    #[test]
    fn round_trip_and_duplicate() {
        let dir = tempfile::tempdir().unwrap();
        let rec = record();
        let id = persist_run(&rec, dir.path()).unwrap();
        assert_eq!(load_run(dir.path(), &id).unwrap(), rec);
        assert!(matches!(
            persist_run(&rec, dir.path()),
            Err(ReportError::DuplicateRunId(_))
        ));
        let second = record();
        persist_run(&second, dir.path()).unwrap();
        let all = list_runs(dir.path()).unwrap();
        assert_eq!(all.len(), 2);
        let rows = table_rows(&all);
        assert_eq!(rows[0].0, "MAJ-VOT");
        assert_eq!(rows[0].1.accuracy.mean, 0.5);
    }

    #[test]
    fn rejects_path_like_ids() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = record();
        rec.run_id = "../escape".into();
        assert!(matches!(
            persist_run(&rec, dir.path()),
            Err(ReportError::InvalidRunId(_))
        ));
    }

    #[test]
    fn missing_store_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(list_runs(&dir.path().join("nope")).unwrap().is_empty());
    }

    #[test]
    fn unwritable_store() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        std::fs::write(&file, "x").unwrap();
        assert!(matches!(
            persist_run(&record(), &file),
            Err(ReportError::UnwritablePath { .. })
        ));
    }
}
