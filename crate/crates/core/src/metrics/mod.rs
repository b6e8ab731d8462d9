//! Confusion matrices, the five reported metrics, seed aggregation, and the
//! majority-class baseline.
//!
//! Conventions:
//! - precision, recall and F1 of a class are 0 when their denominator is 0;
//! - weighted averages scale each class by its support (true count);
//! - macro F1 is the unweighted mean over all classes in the schema;
//! - standard deviations across runs are population standard deviations.

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelId, LabelSchema};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("y_true has {truth} labels but y_pred has {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("label {label} at position {index} is outside the schema")]
    InvalidLabel { index: usize, label: LabelId },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no reports to aggregate")]
    EmptyList,
    #[error("no training labels")]
    EmptyTrainingLabels,
}

/// Rows are true labels, columns are predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub schema: LabelSchema,
}

impl ConfusionMatrix {
    pub fn zeros(schema: &LabelSchema) -> Self {
        let k = schema.len();
        Self {
            counts: vec![vec![0; k]; k],
            schema: schema.clone(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }
}

pub fn confusion(
    y_true: &[LabelId],
    y_pred: &[LabelId],
    schema: &LabelSchema,
) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::zeros(schema);
    for (index, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        for label in [t, p] {
            if !schema.contains_id(label) {
                return Err(MetricsError::InvalidLabel { index, label });
            }
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub precision_weighted: f64,
    pub recall_weighted: f64,
    pub f1_macro: f64,
    pub f1_weighted: f64,
    /// True count per class, indexed by label id.
    pub support: Vec<u64>,
    /// Records left out of the matrix (e.g. failed zero-shot outputs).
    pub n_excluded: usize,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricReport, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let k = cm.k();
    let support: Vec<u64> = cm.counts.iter().map(|row| row.iter().sum()).collect();
    let predicted: Vec<u64> = (0..k).map(|j| cm.counts.iter().map(|row| row[j]).sum()).collect();

    let (mut correct, mut p_w, mut r_w, mut f1_w, mut f1_sum) = (0u64, 0.0, 0.0, 0.0, 0.0);
    for c in 0..k {
        let tp = cm.counts[c][c];
        correct += tp;
        let precision = ratio(tp, predicted[c]);
        let recall = ratio(tp, support[c]);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let w = support[c] as f64;
        p_w += w * precision;
        r_w += w * recall;
        f1_w += w * f1;
        f1_sum += f1;
    }
    let n = total as f64;
    Ok(MetricReport {
        accuracy: correct as f64 / n,
        precision_weighted: p_w / n,
        recall_weighted: r_w / n,
        f1_macro: f1_sum / k as f64,
        f1_weighted: f1_w / n,
        support,
        n_excluded: 0,
    })
}

/// Convenience: confusion matrix then metrics.
pub fn evaluate(y_true: &[LabelId], y_pred: &[LabelId], schema: &LabelSchema) -> Result<MetricReport, MetricsError> {
    compute_metrics(&confusion(y_true, y_pred, schema)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    PrecisionWeighted,
    RecallWeighted,
    F1Macro,
    F1Weighted,
}

impl Metric {
    /// Column order used by result tables.
    pub const ALL: [Metric; 5] = [
        Metric::Accuracy,
        Metric::PrecisionWeighted,
        Metric::RecallWeighted,
        Metric::F1Macro,
        Metric::F1Weighted,
    ];

    pub fn header(self) -> &'static str {
        match self {
            Metric::Accuracy => "Accuracy",
            Metric::PrecisionWeighted => "Prec. (wgt.)",
            Metric::RecallWeighted => "Recall (wgt.)",
            Metric::F1Macro => "F1 (macro)",
            Metric::F1Weighted => "F1 (wgt.)",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::PrecisionWeighted => "precision_weighted",
            Metric::RecallWeighted => "recall_weighted",
            Metric::F1Macro => "f1_macro",
            Metric::F1Weighted => "f1_weighted",
        }
    }

    pub fn of(self, r: &MetricReport) -> f64 {
        match self {
            Metric::Accuracy => r.accuracy,
            Metric::PrecisionWeighted => r.precision_weighted,
            Metric::RecallWeighted => r.recall_weighted,
            Metric::F1Macro => r.f1_macro,
            Metric::F1Weighted => r.f1_weighted,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    /// Mean and population standard deviation. Constant input gives exactly
    /// that constant and zero.
    pub fn of(values: &[f64]) -> Option<Self> {
        let first = *values.first()?;
        if values.iter().all(|&v| v == first) {
            return Some(Self { mean: first, std: 0.0 });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self { mean, std: var.sqrt() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub accuracy: Summary,
    pub precision_weighted: Summary,
    pub recall_weighted: Summary,
    pub f1_macro: Summary,
    pub f1_weighted: Summary,
    pub n_runs: usize,
}

impl AggregateReport {
    pub fn get(&self, metric: Metric) -> Summary {
        match metric {
            Metric::Accuracy => self.accuracy,
            Metric::PrecisionWeighted => self.precision_weighted,
            Metric::RecallWeighted => self.recall_weighted,
            Metric::F1Macro => self.f1_macro,
            Metric::F1Weighted => self.f1_weighted,
        }
    }
}

pub fn aggregate(reports: &[MetricReport]) -> Result<AggregateReport, MetricsError> {
    if reports.is_empty() {
        return Err(MetricsError::EmptyList);
    }
    let summary = |m: Metric| {
        let values: Vec<f64> = reports.iter().map(|r| m.of(r)).collect();
        Summary::of(&values).expect("non-empty")
    };
    Ok(AggregateReport {
        accuracy: summary(Metric::Accuracy),
        precision_weighted: summary(Metric::PrecisionWeighted),
        recall_weighted: summary(Metric::RecallWeighted),
        f1_macro: summary(Metric::F1Macro),
        f1_weighted: summary(Metric::F1Weighted),
        n_runs: reports.len(),
    })
}

/// Predicts the most frequent training label for every input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityClassifier {
    pub label: LabelId,
}

impl MajorityClassifier {
    pub fn predict(&self, n: usize) -> Vec<LabelId> {
        vec![self.label; n]
    }
}

/// Frequency ties go to the lowest label id.
pub fn majority_classifier(train_labels: &[LabelId]) -> Result<MajorityClassifier, MetricsError> {
    let max = *train_labels.iter().max().ok_or(MetricsError::EmptyTrainingLabels)?;
    let mut counts = vec![0usize; max + 1];
    for &l in train_labels {
        counts[l] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    let label = counts.iter().position(|&c| c == best).unwrap_or(0);
    Ok(MajorityClassifier { label })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(k: usize) -> LabelSchema {
        LabelSchema::new((0..k).map(|i| i.to_string())).unwrap()
    }

    #[test]
    fn confusion_examples() {
        let cm = confusion(&[0, 1], &[0, 1], &schema(2)).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0], vec![0, 1]]);
        let cm = confusion(&[0, 0, 1], &[1, 1, 1], &schema(2)).unwrap();
        assert_eq!(cm.counts[0][1], 2);
        assert_eq!(cm.counts[1][1], 1);
        let permuted = confusion(&[1, 0, 0], &[1, 1, 1], &schema(2)).unwrap();
        assert_eq!(cm, permuted);
    }

    #[test]
    fn confusion_errors() {
        assert_eq!(
            confusion(&[0], &[0, 1], &schema(2)),
            Err(MetricsError::LengthMismatch { truth: 1, pred: 2 })
        );
        assert_eq!(
            confusion(&[0, 2], &[0, 1], &schema(2)),
            Err(MetricsError::InvalidLabel { index: 1, label: 2 })
        );
        assert_eq!(
            compute_metrics(&ConfusionMatrix::zeros(&schema(2))),
            Err(MetricsError::EmptyMatrix)
        );
    }

    #[test]
    fn perfect_is_one() {
        let r = evaluate(&[0, 1, 2, 2], &[0, 1, 2, 2], &schema(3)).unwrap();
        for m in Metric::ALL {
            assert_eq!(m.of(&r), 1.0, "{m:?}");
        }
        assert_eq!(r.support, vec![1, 1, 2]);
    }

    #[test]
    fn majority_only_nyt_distribution() {
        let mut y_true = vec![0; 1000];
        y_true.extend(vec![1; 374]);
        let y_pred = vec![0; 1374];
        let r = evaluate(&y_true, &y_pred, &schema(2)).unwrap();
        assert!((r.accuracy - 0.7278).abs() < 1e-4);
        assert!((r.f1_macro - 0.4213).abs() < 1e-4);
        assert!((r.precision_weighted - 0.5297).abs() < 1e-4);
        assert!((r.f1_weighted - 0.6132).abs() < 1e-4);
    }

    #[test]
    fn aggregate_examples() {
        let base = evaluate(&[0, 1], &[0, 1], &schema(2)).unwrap();
        let one = aggregate(std::slice::from_ref(&base)).unwrap();
        assert_eq!(one.accuracy, Summary { mean: 1.0, std: 0.0 });
        assert_eq!(one.n_runs, 1);

        let with_acc = |a: f64| MetricReport {
            accuracy: a,
            ..base.clone()
        };
        let agg = aggregate(&[with_acc(0.91), with_acc(0.92), with_acc(0.93)]).unwrap();
        assert!((agg.accuracy.mean - 0.92).abs() < 1e-12);
        assert!((agg.accuracy.std - 0.008164965809277268).abs() < 1e-12);

        let tenth = with_acc(0.1);
        let same = aggregate(&[tenth.clone(), tenth.clone(), tenth]).unwrap();
        for m in Metric::ALL {
            assert_eq!(same.get(m).std, 0.0);
        }
        assert_eq!(same.accuracy.mean, 0.1);
        assert_eq!(aggregate(&[]), Err(MetricsError::EmptyList));
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority_classifier(&[0, 0, 1]).unwrap().label, 0);
        assert_eq!(majority_classifier(&[0, 1]).unwrap().label, 0);
        assert_eq!(majority_classifier(&[2, 1, 2]).unwrap().label, 2);
        assert_eq!(majority_classifier(&[]), Err(MetricsError::EmptyTrainingLabels));
        assert_eq!(MajorityClassifier { label: 1 }.predict(3), vec![1, 1, 1]);
    }

    #[test]
    fn balanced_binary_majority() {
        // 100/100 evaluation split
        let mut y_true = vec![0; 100];
        y_true.extend(vec![1; 100]);
        let clf = majority_classifier(&y_true).unwrap();
        let r = evaluate(&y_true, &clf.predict(200), &schema(2)).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.precision_weighted, 0.25);
        assert!((r.f1_macro - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.f1_weighted - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn metric_names_roundtrip() {
        for m in Metric::ALL {
            assert_eq!(m.key().parse::<Metric>().unwrap(), m);
        }
        assert!("auc".parse::<Metric>().is_err());
    }
}
