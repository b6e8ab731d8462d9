//! Generated keyword corpora for tests and desk-scale benchmarks.
//!
//! Each class owns a disjoint pool of keywords; documents mix a few class
//! keywords with words drawn from a shared noise pool.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, LabelSchema, TextRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub keywords_per_class: usize,
    pub keywords_per_doc: usize,
    pub noise_vocab: usize,
    pub noise_per_doc: usize,
    /// Probability that a record's label is replaced by a uniformly drawn one.
    pub label_noise: f64,
}

/// Two classes, 20 keywords each, 3 keywords per document: any learner that
/// picks up a single keyword separates the classes.
pub const SEPARABLE: SyntheticSpec = SyntheticSpec {
    n_classes: 2,
    keywords_per_class: 20,
    keywords_per_doc: 3,
    noise_vocab: 200,
    noise_per_doc: 8,
    label_noise: 0.0,
};

/// Large keyword pools with few keywords per document, so accuracy keeps
/// improving as more of the pool is seen in training.
pub const CURVE: SyntheticSpec = SyntheticSpec {
    n_classes: 2,
    keywords_per_class: 400,
    keywords_per_doc: 2,
    noise_vocab: 500,
    noise_per_doc: 10,
    label_noise: 0.0,
};

fn keyword(class: usize, i: usize) -> String {
    format!("k{class}x{i}")
}

/// `n` records with labels cycling through the classes, so class counts differ
/// by at most one.
pub fn generate(spec: &SyntheticSpec, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = LabelSchema::new((0..spec.n_classes).map(|c| format!("class_{c}"))).expect("at least two classes");
    let noise: Vec<String> = (0..spec.noise_vocab).map(|i| format!("n{i}")).collect();
    let records = (0..n)
        .map(|i| {
            let class = i % spec.n_classes;
            let mut words: Vec<String> = (0..spec.keywords_per_doc)
                .map(|_| keyword(class, rng.random_range(0..spec.keywords_per_class)))
                .collect();
            words.extend((0..spec.noise_per_doc).filter_map(|_| noise.choose(&mut rng).cloned()));
            // Fisher-Yates so keyword position carries no signal
            for j in (1..words.len()).rev() {
                words.swap(j, rng.random_range(0..=j));
            }
            let label = if rng.random_bool(spec.label_noise) {
                rng.random_range(0..spec.n_classes)
            } else {
                class
            };
            TextRecord::new(format!("syn-{i}"), words.join(" "), Some(label))
        })
        .collect();
    Dataset::new(schema, records, format!("synthetic:{seed}")).expect("valid by construction")
}

pub fn separable(n: usize, seed: u64) -> Dataset {
    generate(&SEPARABLE, n, seed)
}

pub fn curve(n: usize, seed: u64) -> Dataset {
    generate(&CURVE, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let a = separable(301, 5);
        assert_eq!(a.class_counts(), vec![151, 150]);
        assert_eq!(a, separable(301, 5));
        assert_ne!(a.records[0].text, separable(301, 6).records[0].text);
    }

    #[test]
    fn keywords_match_labels() {
        let ds = separable(50, 1);
        for r in &ds.records {
            let prefix = format!("k{}x", r.label.unwrap());
            let kws: Vec<&str> = r.text.split(' ').filter(|w| w.starts_with('k')).collect();
            assert_eq!(kws.len(), SEPARABLE.keywords_per_doc);
            assert!(kws.iter().all(|w| w.starts_with(&prefix)));
        }
    }
}
