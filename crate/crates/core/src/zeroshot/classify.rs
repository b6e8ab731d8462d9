use std::io::Write;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{match_label, ChatTransport, PromptTemplate, ProviderConfig, ZeroShotError};
use crate::corpus::{Dataset, LabelId};
use crate::metrics::{self, MetricReport};
use crate::pool::bounded_map;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroShotResult {
    pub record_id: String,
    pub label_id: LabelId,
    pub attempts_used: u32,
    pub raw_final_output: String,
}

/// A record that ended without a valid label. Never imputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedRecord {
    pub record_id: String,
    pub attempts_used: u32,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RecordOutcome {
    Labeled(ZeroShotResult),
    Failed(FailedRecord),
}

impl RecordOutcome {
    pub fn record_id(&self) -> &str {
        match self {
            RecordOutcome::Labeled(r) => &r.record_id,
            RecordOutcome::Failed(f) => &f.record_id,
        }
    }

    pub fn label(&self) -> Option<LabelId> {
        match self {
            RecordOutcome::Labeled(r) => Some(r.label_id),
            RecordOutcome::Failed(_) => None,
        }
    }
}

/// Per-record outcomes in dataset order plus metrics over labeled records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetOutcome {
    pub outcomes: Vec<RecordOutcome>,
    /// `None` when every record failed.
    pub report: Option<MetricReport>,
    pub n_failed: usize,
    pub exclusion_rate: f64,
}

impl DatasetOutcome {
    /// Score `predictions` (aligned with `ds.records`) against the dataset
    /// labels, excluding records with no prediction.
    pub fn score(ds: &Dataset, outcomes: Vec<RecordOutcome>) -> Result<Self, ZeroShotError> {
        let truth = ds.labels()?;
        let (mut y_true, mut y_pred) = (Vec::new(), Vec::new());
        for (t, o) in truth.iter().zip(&outcomes) {
            if let Some(p) = o.label() {
                y_true.push(*t);
                y_pred.push(p);
            }
        }
        let n_failed = outcomes.len() - y_pred.len();
        let report = if y_pred.is_empty() {
            None
        } else {
            let mut r = metrics::evaluate(&y_true, &y_pred, &ds.schema)?;
            r.n_excluded = n_failed;
            Some(r)
        };
        let exclusion_rate = if outcomes.is_empty() {
            0.0
        } else {
            n_failed as f64 / outcomes.len() as f64
        };
        Ok(Self {
            outcomes,
            report,
            n_failed,
            exclusion_rate,
        })
    }
}

#[derive(Serialize)]
struct TranscriptLine<'a> {
    record_id: &'a str,
    attempt: u32,
    prompt: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    response: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    matched_label: Option<LabelId>,
}

/// Prompted zero-shot classifier over one template and one provider.
pub struct ZeroShotClassifier<'a> {
    template: &'a PromptTemplate,
    provider: &'a ProviderConfig,
    transport: &'a dyn ChatTransport,
    transcript: Option<Mutex<Box<dyn Write + Send + 'a>>>,
}

impl<'a> ZeroShotClassifier<'a> {
    pub fn new(
        template: &'a PromptTemplate,
        provider: &'a ProviderConfig,
        transport: &'a dyn ChatTransport,
    ) -> Result<Self, ZeroShotError> {
        provider.validate()?;
        Ok(Self {
            template,
            provider,
            transport,
            transcript: None,
        })
    }

    /// Log every request/response pair as JSONL.
    pub fn with_transcript(mut self, sink: Box<dyn Write + Send + 'a>) -> Self {
        self.transcript = Some(Mutex::new(sink));
        self
    }

    fn log(&self, line: TranscriptLine<'_>) {
        if let Some(sink) = &self.transcript {
            let mut w = sink.lock().expect("transcript sink poisoned");
            let written = serde_json::to_writer(&mut *w, &line)
                .map_err(std::io::Error::from)
                .and_then(|_| w.write_all(b"\n"));
            if let Err(e) = written {
                log::warn!("transcript write failed: {e}");
            }
        }
    }

    /// Prompt until the output matches a surface form or `max_attempts`
    /// prompts have been issued. Each retry re-sends the identical prompt.
    pub fn classify_record(&self, record_id: &str, text: &str) -> Result<ZeroShotResult, ZeroShotError> {
        let prompt = self.template.render(text);
        let mut last = String::new();
        for attempt in 1..=self.provider.max_attempts {
            let response = self
                .transport
                .complete(&prompt, self.provider.temperature, &self.provider.model_id);
            let output = match response {
                Ok(o) => o,
                Err(e) => {
                    self.log(TranscriptLine {
                        record_id,
                        attempt,
                        prompt: &prompt,
                        response: None,
                        error: Some(e.to_string()),
                        matched_label: None,
                    });
                    return Err(ZeroShotError::Transport {
                        attempts_used: attempt,
                        source: e,
                    });
                }
            };
            let matched = match_label(&output, self.template.label_surface_forms());
            self.log(TranscriptLine {
                record_id,
                attempt,
                prompt: &prompt,
                response: Some(&output),
                error: None,
                matched_label: matched,
            });
            if let Some(label_id) = matched {
                return Ok(ZeroShotResult {
                    record_id: record_id.to_owned(),
                    label_id,
                    attempts_used: attempt,
                    raw_final_output: output,
                });
            }
            last = output;
        }
        Err(ZeroShotError::NoValidLabel {
            attempts_used: self.provider.max_attempts,
            last_output: last,
        })
    }

    /// Label every record (labels stay hidden from prompts) and score the
    /// labeled ones against ground truth.
    pub fn classify_dataset(&self, ds: &Dataset) -> Result<DatasetOutcome, ZeroShotError> {
        if ds.schema.len() != self.template.k() {
            return Err(ZeroShotError::Config(format!(
                "template {:?} has {} surface forms but the dataset schema has {} labels",
                self.template.task_id(),
                self.template.k(),
                ds.schema.len()
            )));
        }
        ds.labels()?;
        let outcomes = bounded_map(&ds.records, self.provider.max_in_flight, |_, rec| {
            match self.classify_record(&rec.record_id, &rec.text) {
                Ok(r) => RecordOutcome::Labeled(r),
                Err(e) => RecordOutcome::Failed(FailedRecord {
                    record_id: rec.record_id.clone(),
                    attempts_used: e.attempts_used().unwrap_or(0),
                    error: e.to_string(),
                }),
            }
        });
        let out = DatasetOutcome::score(ds, outcomes)?;
        if out.n_failed > 0 {
            log::warn!(
                "{} of {} record(s) produced no valid label and were excluded",
                out.n_failed,
                ds.len()
            );
        }
        Ok(out)
    }
}
