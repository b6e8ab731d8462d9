//! Learning curves: repeated fine-tuning at fixed training-set sizes against
//! one held-out test set.

use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusError, Dataset, Split, DEFAULT_SPLIT_SEED};
use crate::finetune::{self, FineTuneError, SeedRun, TrainConfig};
use crate::metrics::{self, AggregateReport, MetricReport, MetricsError};

pub const DEFAULT_SIZES: [usize; 5] = [50, 100, 200, 500, 1000];
pub const DEFAULT_TEST_SIZE: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum AblationError {
    #[error("largest size {max_size} plus test size {test_size} exceeds the {available} available records")]
    SizesExceedData {
        max_size: usize,
        test_size: usize,
        available: usize,
    },
    #[error("sizes must be non-empty, positive and strictly increasing: {0:?}")]
    InvalidSizes(Vec<usize>),
    #[error("zero-shot anchor failed: {0}")]
    Anchor(String),
    #[error(transparent)]
    FineTune(#[from] FineTuneError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_train: usize,
    pub aggregate: AggregateReport,
    pub runs: Vec<SeedRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub system_name: String,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
    /// Zero-shot result plotted at `n_train = 0`.
    pub zero_shot_anchor: Option<Anchor>,
    /// Trained on the whole train pool; plotted at the right edge.
    pub full_data_point: Option<CurvePoint>,
    pub test_record_ids: Vec<String>,
    pub seeds: Vec<u64>,
}

impl LearningCurve {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub test_size: usize,
    pub split_seed: u64,
    pub include_full_data: bool,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            test_size: DEFAULT_TEST_SIZE,
            split_seed: DEFAULT_SPLIT_SEED,
            include_full_data: false,
        }
    }
}

/// Callback that scores a zero-shot system on the curve's test set.
pub type AnchorFn<'a> = dyn Fn(&Dataset) -> Result<Anchor, String> + 'a;

/// Seed of the subsample drawn for `(size, seed)`; distinct per pair.
pub fn subsample_seed(size: usize, seed: u64) -> u64 {
    seed ^ (size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Fixed stratified test split shared by every point of a curve.
pub fn curve_split(ds: &Dataset, opts: &CurveOptions) -> Result<Split, CorpusError> {
    corpus::split(ds, opts.test_size, opts.split_seed, true)
}

pub fn run_learning_curve(
    ds: &Dataset,
    config: &TrainConfig,
    sizes: &[usize],
    seeds: &[u64],
    test_size: usize,
) -> Result<LearningCurve, AblationError> {
    let opts = CurveOptions {
        test_size,
        ..CurveOptions::default()
    };
    run_learning_curve_with(ds, config, sizes, seeds, &opts, None)
}

pub fn run_learning_curve_with(
    ds: &Dataset,
    config: &TrainConfig,
    sizes: &[usize],
    seeds: &[u64],
    opts: &CurveOptions,
    anchor: Option<&AnchorFn>,
) -> Result<LearningCurve, AblationError> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AblationError::InvalidSizes(sizes.to_vec()));
    }
    if seeds.is_empty() {
        return Err(FineTuneError::NoSeeds.into());
    }
    let max_size = *sizes.last().expect("non-empty");
    if max_size + opts.test_size > ds.len() {
        return Err(AblationError::SizesExceedData {
            max_size,
            test_size: opts.test_size,
            available: ds.len(),
        });
    }

    let base = curve_split(ds, opts)?;
    let point = |n_train: usize, pool: &Dataset| -> Result<CurvePoint, AblationError> {
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let train = if n_train == pool.len() {
                pool.clone()
            } else {
                corpus::subsample(pool, n_train, subsample_seed(n_train, seed), true)?
            };
            let split = Split {
                train,
                test: base.test.clone(),
                seed: base.seed,
                stratified: true,
            };
            runs.extend(finetune::seed_runs(&split, config, &[seed])?);
        }
        let reports: Vec<MetricReport> = runs.iter().map(|r| r.report.clone()).collect();
        log::info!("n_train {n_train}: {} runs", runs.len());
        Ok(CurvePoint {
            n_train,
            aggregate: metrics::aggregate(&reports)?,
            runs,
        })
    };

    let points = sizes
        .iter()
        .map(|&n| point(n, &base.train))
        .collect::<Result<Vec<_>, _>>()?;
    let full_data_point = if opts.include_full_data {
        Some(point(base.train.len(), &base.train)?)
    } else {
        None
    };
    let zero_shot_anchor = anchor
        .map(|f| f(&base.test).map_err(AblationError::Anchor))
        .transpose()?;

    Ok(LearningCurve {
        points,
        zero_shot_anchor,
        full_data_point,
        test_record_ids: base.test.record_ids().into_iter().map(str::to_owned).collect(),
        seeds: seeds.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Metric;
    use crate::synthetic;

    fn quick() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            ..TrainConfig::small()
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let ds = synthetic::separable(300, 1);
        for sizes in [vec![], vec![0, 10], vec![20, 10], vec![10, 10]] {
            assert!(matches!(
                run_learning_curve(&ds, &quick(), &sizes, &[1], 100),
                Err(AblationError::InvalidSizes(_))
            ));
        }
        assert!(matches!(
            run_learning_curve(&ds, &quick(), &[50, 201], &[1], 100),
            Err(AblationError::SizesExceedData { available: 300, .. })
        ));
    }

    #[test]
    fn shared_test_set_and_anchor() {
        let ds = synthetic::separable(300, 2);
        let opts = CurveOptions {
            test_size: 100,
            include_full_data: true,
            ..CurveOptions::default()
        };
        let anchor = |test: &Dataset| {
            let truth = test.labels().map_err(|e| e.to_string())?;
            let report = metrics::evaluate(&truth, &vec![0; truth.len()], &test.schema).map_err(|e| e.to_string())?;
            Ok(Anchor {
                system_name: "constant".into(),
                report,
            })
        };
        let curve = run_learning_curve_with(&ds, &quick(), &[20, 60], &[1, 2], &opts, Some(&anchor)).unwrap();
        assert_eq!(curve.points.iter().map(|p| p.n_train).collect::<Vec<_>>(), [20, 60]);
        assert_eq!(curve.points[0].runs.len(), 2);
        assert_eq!(curve.points[0].aggregate.n_runs, 2);
        assert_eq!(curve.full_data_point.as_ref().unwrap().n_train, 200);
        assert_eq!(curve.zero_shot_anchor.as_ref().unwrap().report.accuracy, 0.5);
        assert_eq!(curve.test_record_ids.len(), 100);
        let split = curve_split(&ds, &opts).unwrap();
        assert_eq!(curve.test_record_ids, split.test.record_ids());

        let back = LearningCurve::from_json(&curve.to_json()).unwrap();
        assert_eq!(back, curve);
        assert!(curve.points[1].aggregate.get(Metric::F1Macro).mean >= 0.9);
    }

    #[test]
    fn subsample_seeds_differ() {
        assert_ne!(subsample_seed(50, 1), subsample_seed(100, 1));
        assert_ne!(subsample_seed(50, 1), subsample_seed(50, 2));
    }
}
