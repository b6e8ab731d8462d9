use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{DatasetOutcome, FailedRecord, RecordOutcome, ZeroShotError, ZeroShotResult};
use crate::corpus::{Dataset, LabelId};
use crate::http::{self, RetryPolicy, TransportError};
use crate::pool::bounded_map;

/// Scores each (premise, hypothesis) pair; higher means more entailed.
pub trait EntailmentScorer: Send + Sync {
    fn score(&self, premise: &str, hypotheses: &[String]) -> Result<Vec<f64>, ZeroShotError>;
}

/// Index of the largest score; ties go to the lowest index.
/// `None` for an empty vector or any NaN.
pub fn argmax_lowest(scores: &[f64]) -> Option<usize> {
    if scores.iter().any(|s| s.is_nan()) {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

/// Label of the most entailed hypothesis. `hypotheses` are in schema order.
pub fn nli_classify(
    text: &str,
    hypotheses: &[String],
    scorer: &dyn EntailmentScorer,
) -> Result<LabelId, ZeroShotError> {
    let scores = scorer.score(text, hypotheses)?;
    if scores.len() != hypotheses.len() {
        return Err(ZeroShotError::ScorerFailure(format!(
            "expected {} scores, got {}",
            hypotheses.len(),
            scores.len()
        )));
    }
    argmax_lowest(&scores).ok_or_else(|| ZeroShotError::ScorerFailure("scores contain NaN or are empty".into()))
}

/// NLI-classify every record of `ds` and score against its labels.
pub fn nli_classify_dataset(
    ds: &Dataset,
    hypotheses: &[String],
    scorer: &dyn EntailmentScorer,
    max_in_flight: usize,
) -> Result<DatasetOutcome, ZeroShotError> {
    if hypotheses.len() != ds.schema.len() {
        return Err(ZeroShotError::Config(format!(
            "{} hypotheses for {} labels",
            hypotheses.len(),
            ds.schema.len()
        )));
    }
    ds.labels()?;
    let outcomes = bounded_map(&ds.records, max_in_flight, |_, rec| {
        match nli_classify(&rec.text, hypotheses, scorer) {
            Ok(label_id) => RecordOutcome::Labeled(ZeroShotResult {
                record_id: rec.record_id.clone(),
                label_id,
                attempts_used: 1,
                raw_final_output: hypotheses[label_id].clone(),
            }),
            Err(e) => RecordOutcome::Failed(FailedRecord {
                record_id: rec.record_id.clone(),
                attempts_used: 1,
                error: e.to_string(),
            }),
        }
    });
    DatasetOutcome::score(ds, outcomes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliEndpointConfig {
    /// Full URL of a zero-shot-classification inference endpoint.
    pub url: String,
    pub auth_env_var: String,
    #[serde(default = "default_nli_model")]
    pub model_id: String,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_nli_model() -> String {
    "facebook/bart-large-mnli".to_owned()
}

fn default_in_flight() -> usize {
    4
}

pub fn nli_request(premise: &str, hypotheses: &[String]) -> Value {
    json!({
        "inputs": premise,
        "parameters": {
            "candidate_labels": hypotheses,
            "hypothesis_template": "{}",
            "multi_label": false,
        }
    })
}

/// Accepts `{"labels": [...], "scores": [...]}` or `[{"label":..,"score":..}]`
/// and returns scores reordered to match `hypotheses`.
pub fn parse_nli_response(body: &str, hypotheses: &[String]) -> Result<Vec<f64>, TransportError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TransportError::Malformed(e.to_string()))?;
    let pairs: Vec<(String, f64)> = if let Some(arr) = v.as_array() {
        let arr = match arr.first() {
            Some(Value::Array(inner)) => inner,
            _ => arr,
        };
        arr.iter()
            .map(|o| Some((o.get("label")?.as_str()?.to_owned(), o.get("score")?.as_f64()?)))
            .collect::<Option<_>>()
            .ok_or_else(|| TransportError::Malformed("expected label/score objects".into()))?
    } else {
        let labels = v.get("labels").and_then(Value::as_array);
        let scores = v.get("scores").and_then(Value::as_array);
        match (labels, scores) {
            (Some(l), Some(s)) if l.len() == s.len() => l
                .iter()
                .zip(s)
                .map(|(l, s)| Some((l.as_str()?.to_owned(), s.as_f64()?)))
                .collect::<Option<_>>()
                .ok_or_else(|| TransportError::Malformed("non-string label or non-numeric score".into()))?,
            _ => return Err(TransportError::Malformed("missing labels/scores".into())),
        }
    };
    hypotheses
        .iter()
        .map(|h| {
            pairs
                .iter()
                .find(|(l, _)| l == h)
                .map(|(_, s)| *s)
                .ok_or_else(|| TransportError::Malformed(format!("no score for hypothesis {h:?}")))
        })
        .collect()
}

/// Remote NLI scorer behind a zero-shot-classification HTTP endpoint.
pub struct HttpNliScorer {
    url: String,
    api_key: String,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl HttpNliScorer {
    pub fn from_config(cfg: &NliEndpointConfig) -> Result<Self, ZeroShotError> {
        let api_key = http::api_key_from_env(&cfg.auth_env_var).map_err(ZeroShotError::Config)?;
        Ok(Self {
            url: cfg.url.clone(),
            api_key,
            retry: cfg.retry,
            client: http::build_client(Duration::from_secs(120)).map_err(ZeroShotError::Config)?,
        })
    }
}

impl EntailmentScorer for HttpNliScorer {
    fn score(&self, premise: &str, hypotheses: &[String]) -> Result<Vec<f64>, ZeroShotError> {
        let body = nli_request(premise, hypotheses);
        let headers = [("authorization", format!("Bearer {}", self.api_key))];
        http::with_retry(&self.retry, || {
            let text = http::post_json(&self.client, &self.url, &headers, &body)?;
            parse_nli_response(&text, hypotheses)
        })
        .map_err(|e| ZeroShotError::ScorerFailure(e.to_string()))
    }
}
