//! Zero-shot classification: prompted chat-completion models with a
//! validate-and-retry loop, and NLI entailment scoring with argmax selection.

mod classify;
mod nli;
mod normalize;
mod provider;
mod template;

pub use classify::{DatasetOutcome, FailedRecord, RecordOutcome, ZeroShotClassifier, ZeroShotResult};
pub use nli::{
    argmax_lowest, nli_classify, nli_classify_dataset, nli_request, parse_nli_response, EntailmentScorer,
    HttpNliScorer, NliEndpointConfig,
};
pub use normalize::{match_label, normalize_output};
pub use provider::{
    anthropic_request, openai_request, parse_anthropic_response, parse_openai_response, ChatApi, ChatTransport,
    HttpChatTransport, ProviderConfig,
};
pub use template::{parse_label_line, PromptTemplate, TemplateRegistry, PLACEHOLDER};

use crate::corpus::CorpusError;
use crate::http::TransportError;
use crate::metrics::MetricsError;

#[derive(Debug, thiserror::Error)]
pub enum ZeroShotError {
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("invalid template {task_id:?}: {reason}")]
    InvalidTemplate { task_id: String, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no valid label after {attempts_used} attempt(s); last output {last_output:?}")]
    NoValidLabel { attempts_used: u32, last_output: String },
    #[error("transport error on attempt {attempts_used}: {source}")]
    Transport {
        attempts_used: u32,
        #[source]
        source: TransportError,
    },
    #[error("entailment scorer failed: {0}")]
    ScorerFailure(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl ZeroShotError {
    /// Prompts issued before a per-record failure, if applicable.
    pub fn attempts_used(&self) -> Option<u32> {
        match self {
            Self::NoValidLabel { attempts_used, .. } | Self::Transport { attempts_used, .. } => Some(*attempts_used),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dataset, LabelSchema, TextRecord};
    use std::collections::HashMap;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::{Arc, Mutex};

    /// Replies from a script keyed by the text inlined in the prompt.
    struct Scripted {
        replies: HashMap<String, Vec<String>>,
        calls: AtomicUsize,
        prompts: Mutex<Vec<String>>,
    }

    impl Scripted {
        fn new(replies: &[(&str, &[&str])]) -> Self {
            Self {
                replies: replies
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
                    .collect(),
                calls: AtomicUsize::new(0),
                prompts: Mutex::new(Vec::new()),
            }
        }
    }

    impl ChatTransport for Scripted {
        fn complete(&self, prompt: &str, temperature: f64, _model: &str) -> Result<String, TransportError> {
            assert_eq!(temperature, 0.1);
            self.calls.fetch_add(1, Ordering::SeqCst);
            let mut prompts = self.prompts.lock().unwrap();
            prompts.push(prompt.to_owned());
            let (key, script) = self
                .replies
                .iter()
                .find(|(k, _)| prompt.contains(&format!("Text: {k}\n")))
                .expect("scripted text");
            let n = prompts.iter().filter(|p| p.contains(&format!("Text: {key}\n"))).count();
            Ok(script[(n - 1).min(script.len() - 1)].clone())
        }
    }

    struct Broken;

    impl ChatTransport for Broken {
        fn complete(&self, _: &str, _: f64, _: &str) -> Result<String, TransportError> {
            Err(TransportError::QuotaExceeded("Quota exceeded".into()))
        }
    }

    fn provider(max_attempts: u32) -> ProviderConfig {
        let mut p = ProviderConfig::new(ChatApi::OpenAi, "http://localhost", "mock", "UNUSED");
        p.max_attempts = max_attempts;
        p
    }

    fn sentiment() -> PromptTemplate {
        TemplateRegistry::builtin().get("sentiment").unwrap().clone()
    }

    #[test]
    fn exact_output_first_attempt() {
        let t = sentiment();
        let p = provider(5);
        let mock = Scripted::new(&[("up", &["Positive Sentiment"])]);
        let clf = ZeroShotClassifier::new(&t, &p, &mock).unwrap();
        let r = clf.classify_record("r1", "up").unwrap();
        assert_eq!((r.label_id, r.attempts_used), (1, 1));
        assert_eq!(r.raw_final_output, "Positive Sentiment");
    }

    #[test]
    fn normalized_output_first_attempt() {
        let t = sentiment();
        let p = provider(5);
        let mock = Scripted::new(&[("up", &["positive sentiment."])]);
        let clf = ZeroShotClassifier::new(&t, &p, &mock).unwrap();
        let r = clf.classify_record("r1", "up").unwrap();
        assert_eq!((r.label_id, r.attempts_used), (1, 1));
    }

    #[test]
    fn garbage_exhausts_attempts() {
        let t = sentiment();
        let p = provider(3);
        let mock = Scripted::new(&[("up", &["I think…"])]);
        let clf = ZeroShotClassifier::new(&t, &p, &mock).unwrap();
        let err = clf.classify_record("r1", "up").unwrap_err();
        assert!(matches!(err, ZeroShotError::NoValidLabel { attempts_used: 3, .. }));
        assert_eq!(mock.calls.load(Ordering::SeqCst), 3);
        let prompts = mock.prompts.lock().unwrap();
        assert!(prompts.iter().all(|p| p == &prompts[0]));
    }

    #[test]
    fn retry_then_success() {
        let t = sentiment();
        let p = provider(5);
        let mock = Scripted::new(&[("down", &["Hmm, hard to say", "The answer is", "'Negative Sentiment'"])]);
        let clf = ZeroShotClassifier::new(&t, &p, &mock).unwrap();
        let r = clf.classify_record("r", "down").unwrap();
        assert_eq!((r.label_id, r.attempts_used), (0, 3));
    }

    #[test]
    fn transport_failure_surfaces() {
        let t = sentiment();
        let p = provider(5);
        let clf = ZeroShotClassifier::new(&t, &p, &Broken).unwrap();
        let err = clf.classify_record("r", "x").unwrap_err();
        assert!(matches!(
            err,
            ZeroShotError::Transport { source: TransportError::QuotaExceeded(ref m), .. } if m == "Quota exceeded"
        ));
    }

    fn three_records() -> Dataset {
        Dataset::new(
            LabelSchema::new(["negative", "positive"]).unwrap(),
            vec![
                TextRecord::new("a", "up", Some(1)),
                TextRecord::new("b", "down", Some(0)),
                TextRecord::new("c", "flat", Some(0)),
            ],
            "",
        )
        .unwrap()
    }

    #[test]
    fn perfect_mock_dataset() {
        let t = sentiment();
        let p = provider(5);
        let mock = Scripted::new(&[
            ("up", &["Positive Sentiment"]),
            ("down", &["Negative Sentiment"]),
            ("flat", &["negative sentiment"]),
        ]);
        let clf = ZeroShotClassifier::new(&t, &p, &mock).unwrap();
        let out = clf.classify_dataset(&three_records()).unwrap();
        let report = out.report.unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(out.exclusion_rate, 0.0);
        let ids: Vec<&str> = out.outcomes.iter().map(RecordOutcome::record_id).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn failed_records_excluded_from_matrix() {
        let t = sentiment();
        let p = provider(2);
        let mock = Scripted::new(&[
            ("up", &["Positive Sentiment"]),
            ("down", &["cannot help with that"]),
            ("flat", &["Positive Sentiment"]),
        ]);
        let clf = ZeroShotClassifier::new(&t, &p, &mock).unwrap();
        let out = clf.classify_dataset(&three_records()).unwrap();
        assert_eq!(out.outcomes.len(), 3);
        assert_eq!(out.n_failed, 1);
        let report = out.report.unwrap();
        assert_eq!(report.support.iter().sum::<u64>(), 2);
        assert_eq!(report.n_excluded, 1);
        assert_eq!(report.accuracy, 0.5);
        assert!((out.exclusion_rate - 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(&out.outcomes[1], RecordOutcome::Failed(f) if f.attempts_used == 2));
    }

    #[test]
    fn schema_size_mismatch_is_config_error() {
        let t = TemplateRegistry::builtin().get("eu_positions").unwrap().clone();
        let p = provider(1);
        let mock = Scripted::new(&[]);
        let clf = ZeroShotClassifier::new(&t, &p, &mock).unwrap();
        assert!(matches!(
            clf.classify_dataset(&three_records()),
            Err(ZeroShotError::Config(_))
        ));
    }

    #[derive(Clone, Default)]
    struct SharedBuf(Arc<Mutex<Vec<u8>>>);

    impl std::io::Write for SharedBuf {
        fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
            self.0.lock().unwrap().extend_from_slice(buf);
            Ok(buf.len())
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn transcript_logs_every_attempt() {
        let t = sentiment();
        let p = provider(3);
        let mock = Scripted::new(&[("up", &["nope", "Positive Sentiment"])]);
        let buf = SharedBuf::default();
        let clf = ZeroShotClassifier::new(&t, &p, &mock)
            .unwrap()
            .with_transcript(Box::new(buf.clone()));
        clf.classify_record("r9", "up").unwrap();
        let text = String::from_utf8(buf.0.lock().unwrap().clone()).unwrap();
        let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0]["matched_label"], serde_json::Value::Null);
        assert_eq!(lines[1]["matched_label"], 1);
        assert_eq!(lines[1]["record_id"], "r9");
    }
}
