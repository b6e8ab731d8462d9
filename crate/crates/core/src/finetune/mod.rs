//! Encoder fine-tuning with a K-way classification head, prediction, and
//! multi-seed evaluation.
//!
//! Hub backbones are accepted in configs but need an external transformer
//! runtime; the in-process backbone is [`SMALL_BACKBONE`].

mod checkpoint;
mod config;
mod model;
mod optim;
mod vocab;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{Manifest, TensorEntry, MANIFEST};
pub use config::{preset, BackboneKind, BackbonePreset, TrainConfig, PRESETS, SMALL_BACKBONE};
pub use optim::{AdamW, LinearSchedule};
pub use vocab::{tokenize, Vocab, UNK};

use crate::corpus::{CorpusError, Dataset, LabelId, LabelSchema, Split};
use crate::metrics::{self, AggregateReport, MetricReport, MetricsError};
use model::{softmax, BowNet, Optimizer};

/// Vocabulary cap for the in-process backbone, including `[UNK]`.
pub const MAX_VOCAB: usize = 50_000;

#[derive(Debug, thiserror::Error)]
pub enum FineTuneError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrain,
    #[error("classes absent from the training set: {missing:?}")]
    MissingClassInTrain { missing: Vec<String> },
    #[error("backbone {backbone_id:?} is unavailable: {reason}")]
    BackboneUnavailable { backbone_id: String, reason: String },
    #[error(
        "out of memory allocating {bytes} bytes; effective batch is {effective_batch} \
         (batch_size {batch_size} x grad_accum_steps {grad_accum_steps}): lower batch_size and raise \
         grad_accum_steps to keep the same effective batch, or lower max_seq_len"
    )]
    OutOfMemory {
        bytes: usize,
        effective_batch: usize,
        batch_size: usize,
        grad_accum_steps: usize,
    },
    #[error("no input texts")]
    EmptyInput,
    #[error("at least one seed is required")]
    NoSeeds,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label_id: LabelId,
    pub probabilities: Vec<f64>,
}

/// A fitted backbone plus classification head.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub schema: LabelSchema,
    pub config: TrainConfig,
    /// Mean (class-weighted) training loss per epoch.
    pub training_log: Vec<f64>,
    vocab: Vocab,
    net: BowNet,
}

impl TrainedClassifier {
    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    fn predict_one(&self, text: &str) -> Prediction {
        let ids = self.vocab.encode(text, self.config.max_seq_len);
        let probabilities = softmax(&self.net.forward(&ids).logits);
        let label_id = argmax(&probabilities);
        Prediction {
            label_id,
            probabilities,
        }
    }

    pub fn predict<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<Prediction>, FineTuneError> {
        if texts.is_empty() {
            return Err(FineTuneError::EmptyInput);
        }
        Ok(texts.iter().map(|t| self.predict_one(t.as_ref())).collect())
    }

    pub fn predict_labels<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<LabelId>, FineTuneError> {
        Ok(self.predict(texts)?.into_iter().map(|p| p.label_id).collect())
    }

    /// Metrics on a labeled dataset with this classifier's schema.
    pub fn evaluate(&self, test: &Dataset) -> Result<MetricReport, FineTuneError> {
        let truth = test.labels()?;
        let pred = self.predict_labels(&test.texts())?;
        Ok(metrics::evaluate(&truth, &pred, &self.schema)?)
    }

    pub fn save(&self, dir: &Path) -> Result<(), FineTuneError> {
        checkpoint::save(self, dir)
    }

    pub fn load(dir: &Path) -> Result<Self, FineTuneError> {
        checkpoint::load(dir)
    }
}

/// First index of the maximum.
fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..p.len() {
        if p[i] > p[best] {
            best = i;
        }
    }
    best
}

/// `N / (K · n_c)` per class, or all ones when weighting is off.
pub fn class_weights(counts: &[usize], enabled: bool) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    let k = counts.len();
    counts
        .iter()
        .map(|&c| {
            if enabled && c > 0 {
                n as f64 / (k * c) as f64
            } else {
                1.0
            }
        })
        .collect()
}

fn resolve_backbone(config: &TrainConfig) -> Result<(usize, usize), FineTuneError> {
    let unavailable = |reason: String| FineTuneError::BackboneUnavailable {
        backbone_id: config.backbone_id.clone(),
        reason,
    };
    match preset(&config.backbone_id).map(|p| p.kind) {
        Some(BackboneKind::BuiltinBow { embed_dim, hidden_dim }) => Ok((embed_dim, hidden_dim)),
        Some(BackboneKind::Hub) => Err(unavailable(format!(
            "hub checkpoints need a transformer runtime, which this build does not include; \
             use {SMALL_BACKBONE} to train in-process"
        ))),
        None => Err(unavailable(format!(
            "not a known preset and no runtime is available to fetch it; use {SMALL_BACKBONE}"
        ))),
    }
}

fn oom(config: &TrainConfig, bytes: usize) -> FineTuneError {
    FineTuneError::OutOfMemory {
        bytes,
        effective_batch: config.effective_batch(),
        batch_size: config.batch_size,
        grad_accum_steps: config.grad_accum_steps,
    }
}

/// Fit a classifier on `split.train`. The test half is not touched.
pub fn fine_tune(split: &Split, config: &TrainConfig) -> Result<TrainedClassifier, FineTuneError> {
    train(&split.train, config)
}

/// Fit a classifier on a labeled dataset.
pub fn train(train: &Dataset, config: &TrainConfig) -> Result<TrainedClassifier, FineTuneError> {
    config.validate()?;
    let (embed_dim, hidden_dim) = resolve_backbone(config)?;
    if train.is_empty() {
        return Err(FineTuneError::EmptyTrain);
    }
    let labels = train.labels()?;
    let counts = train.class_counts();
    let missing: Vec<String> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| train.schema.name_of(i).unwrap_or_default().to_owned())
        .collect();
    if !missing.is_empty() {
        return Err(FineTuneError::MissingClassInTrain { missing });
    }

    let k = train.schema.len();
    let vocab = Vocab::build(train.records.iter().map(|r| r.text.as_str()), MAX_VOCAB);
    let docs: Vec<Vec<u32>> = train
        .records
        .iter()
        .map(|r| vocab.encode(&r.text, config.max_seq_len))
        .collect();
    let weights = class_weights(&counts, config.class_weighting);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = BowNet::zeros(vocab.len(), embed_dim, hidden_dim, k).map_err(|b| oom(config, b))?;
    net.init(&mut rng);
    let mut grad = BowNet::zeros(vocab.len(), embed_dim, hidden_dim, k).map_err(|b| oom(config, b))?;
    let mut opt = Optimizer::new(&net).map_err(|b| oom(config, b))?;

    let n = docs.len();
    let micro_per_epoch = n.div_ceil(config.batch_size);
    let steps_per_epoch = micro_per_epoch.div_ceil(config.grad_accum_steps);
    let schedule = LinearSchedule::new(
        config.learning_rate,
        config.warmup_fraction,
        steps_per_epoch * config.epochs,
    );
    log::info!(
        "training {} on {n} records, vocab {}, {} steps",
        config.backbone_id,
        vocab.len(),
        schedule.total_steps
    );

    let mut order: Vec<usize> = (0..n).collect();
    let mut training_log = Vec::with_capacity(config.epochs);
    let mut step = 0;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let micro: Vec<&[usize]> = order.chunks(config.batch_size).collect();
        let (mut loss_sum, mut weight_sum) = (0.0f64, 0.0f64);
        for group in micro.chunks(config.grad_accum_steps) {
            grad.zero();
            for batch in group {
                let batch_weight: f64 = batch.iter().map(|&i| weights[labels[i]]).sum();
                let scale = 1.0 / (batch_weight * group.len() as f64);
                for &i in batch.iter() {
                    let y = labels[i];
                    let trace = net.forward(&docs[i]);
                    let mut d = softmax(&trace.logits);
                    let w = weights[y];
                    loss_sum += w * -d[y].max(f64::MIN_POSITIVE).ln();
                    weight_sum += w;
                    d[y] -= 1.0;
                    d.iter_mut().for_each(|g| *g *= w * scale);
                    net.backward(&docs[i], &trace, &d, &mut grad);
                }
            }
            opt.step(&mut net, &grad, schedule.lr(step), config.weight_decay);
            step += 1;
        }
        let mean = loss_sum / weight_sum;
        log::debug!("epoch {}: loss {mean:.6}", epoch + 1);
        training_log.push(mean);
    }

    Ok(TrainedClassifier {
        schema: train.schema.clone(),
        config: config.clone(),
        training_log,
        vocab,
        net,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub report: MetricReport,
    pub training_log: Vec<f64>,
}

/// Fine-tune and evaluate once per seed, sequentially.
pub fn seed_runs(split: &Split, config: &TrainConfig, seeds: &[u64]) -> Result<Vec<SeedRun>, FineTuneError> {
    if seeds.is_empty() {
        return Err(FineTuneError::NoSeeds);
    }
    seeds
        .iter()
        .map(|&seed| {
            let cfg = TrainConfig { seed, ..config.clone() };
            let model = fine_tune(split, &cfg)?;
            Ok(SeedRun {
                seed,
                report: model.evaluate(&split.test)?,
                training_log: model.training_log,
            })
        })
        .collect()
}

/// Mean and population std of every metric across seeds.
pub fn multi_seed_run(split: &Split, config: &TrainConfig, seeds: &[u64]) -> Result<AggregateReport, FineTuneError> {
    let runs = seed_runs(split, config, seeds)?;
    let reports: Vec<MetricReport> = runs.into_iter().map(|r| r.report).collect();
    Ok(metrics::aggregate(&reports)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, TextRecord};
    use crate::synthetic::separable;

    fn small() -> TrainConfig {
        TrainConfig::small()
    }

    fn fixture() -> Split {
        let ds = separable(300, 7);
        corpus::split(&ds, 100, 1, true).unwrap()
    }

    #[test]
    fn weights_inverse_frequency() {
        assert_eq!(class_weights(&[100, 100], true), vec![1.0, 1.0]);
        assert_eq!(class_weights(&[300, 100], true), vec![400.0 / 600.0, 2.0]);
        assert_eq!(class_weights(&[300, 100], false), vec![1.0, 1.0]);
    }

    #[test]
    fn learns_separable_fixture() {
        let split = fixture();
        let model = fine_tune(&split, &small()).unwrap();
        let report = model.evaluate(&split.test).unwrap();
        assert!(report.accuracy >= 0.95, "{report:?}");
        assert_eq!(model.training_log.len(), small().epochs);
        assert!(model.training_log.last() < model.training_log.first());
    }

    #[test]
    fn deterministic_per_seed() {
        let split = fixture();
        let a = fine_tune(&split, &small()).unwrap();
        let b = fine_tune(&split, &small()).unwrap();
        assert_eq!(a, b);
        let c = fine_tune(&split, &TrainConfig { seed: 9, ..small() }).unwrap();
        assert_ne!(a.training_log, c.training_log);
        assert_eq!(a.vocab(), c.vocab());
    }

    #[test]
    fn balanced_weighting_is_noop() {
        let split = fixture();
        assert_eq!(split.train.class_counts()[0], split.train.class_counts()[1]);
        let a = fine_tune(&split, &small()).unwrap();
        let b = fine_tune(
            &split,
            &TrainConfig {
                class_weighting: false,
                ..small()
            },
        )
        .unwrap();
        assert_eq!(a.training_log, b.training_log);
        assert_eq!(
            a.predict(&split.test.texts()).unwrap(),
            b.predict(&split.test.texts()).unwrap()
        );
    }

    #[test]
    fn predictions_are_distributions() {
        let split = fixture();
        let model = fine_tune(&split, &TrainConfig { epochs: 1, ..small() }).unwrap();
        let long = "word ".repeat(10_000);
        let texts = ["", "unseen tokens only", long.as_str(), "unseen tokens only"];
        let preds = model.predict(&texts).unwrap();
        assert_eq!(preds.len(), 4);
        for p in &preds {
            assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert!(p.probabilities.iter().all(|&x| x >= 0.0));
            assert_eq!(p.label_id, argmax(&p.probabilities));
            assert!(p.label_id < 2);
        }
        assert_eq!(preds[1], preds[3]);
        assert!(matches!(model.predict::<&str>(&[]), Err(FineTuneError::EmptyInput)));
    }

    #[test]
    fn truncation_keeps_head() {
        let split = fixture();
        let cfg = TrainConfig {
            max_seq_len: 3,
            epochs: 1,
            ..small()
        };
        let model = fine_tune(&split, &cfg).unwrap();
        let a = model.predict(&["alpha beta gamma"]).unwrap();
        let b = model.predict(&["alpha beta gamma delta epsilon"]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn save_load_round_trip() {
        let split = fixture();
        let model = fine_tune(&split, &TrainConfig { epochs: 2, ..small() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        model.save(dir.path()).unwrap();
        let back = TrainedClassifier::load(dir.path()).unwrap();
        assert_eq!(back, model);
        let probe = split.test.texts();
        assert_eq!(model.predict(&probe).unwrap(), back.predict(&probe).unwrap());

        let weights = dir.path().join("weights.bin");
        let mut bytes = std::fs::read(&weights).unwrap();
        bytes[0] ^= 1;
        std::fs::write(&weights, bytes).unwrap();
        assert!(matches!(
            TrainedClassifier::load(dir.path()),
            Err(FineTuneError::Checkpoint(_))
        ));
    }

    #[test]
    fn errors() {
        let split = fixture();
        let err = fine_tune(&split, &TrainConfig::default()).unwrap_err();
        assert!(
            matches!(err, FineTuneError::BackboneUnavailable { ref backbone_id, .. } if backbone_id == "roberta-large")
        );

        let schema = LabelSchema::new(["a", "b", "c"]).unwrap();
        let ds = Dataset::new(
            schema.clone(),
            vec![TextRecord::new("1", "x", Some(0)), TextRecord::new("2", "y", Some(2))],
            "",
        )
        .unwrap();
        let err = train(&ds, &small()).unwrap_err();
        assert!(matches!(err, FineTuneError::MissingClassInTrain { ref missing } if missing == &["b"]));

        let empty = Dataset::new(schema, vec![], "").unwrap();
        assert!(matches!(train(&empty, &small()), Err(FineTuneError::EmptyTrain)));
        assert!(matches!(seed_runs(&split, &small(), &[]), Err(FineTuneError::NoSeeds)));
    }

    #[test]
    fn identical_seeds_have_zero_std() {
        let split = fixture();
        let agg = multi_seed_run(&split, &TrainConfig { epochs: 2, ..small() }, &[7, 7, 7]).unwrap();
        assert_eq!(agg.n_runs, 3);
        for m in metrics::Metric::ALL {
            assert_eq!(agg.get(m).std, 0.0);
        }
    }
}
