use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, Dataset, Split};

/// Seed used when callers do not pick one.
pub const DEFAULT_SPLIT_SEED: u64 = 42;

/// Distribute `n` slots over classes proportionally to `counts` using the
/// largest-remainder method. Remainder ties go to the lower class id, so each
/// share is within one of its exact proportional target.
pub fn proportional_allocation(counts: &[usize], n: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let n = n.min(total);
    let mut alloc: Vec<usize> = counts.iter().map(|&c| c * n / total).collect();
    let mut leftover = n - alloc.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..counts.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = counts[a] * n % total;
        let rb = counts[b] * n % total;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for c in by_remainder {
        if leftover == 0 {
            break;
        }
        if alloc[c] < counts[c] {
            alloc[c] += 1;
            leftover -= 1;
        }
    }
    alloc
}

/// Choose `n` record indices, either uniformly or per class.
fn choose(ds: &Dataset, n: usize, seed: u64, stratified: bool) -> Result<Vec<bool>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = vec![false; ds.len()];
    if stratified {
        let labels = ds.labels()?;
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.schema.len()];
        for (i, &l) in labels.iter().enumerate() {
            by_class[l].push(i);
        }
        let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
        let alloc = proportional_allocation(&counts, n);
        for (members, take) in by_class.iter_mut().zip(alloc) {
            members.shuffle(&mut rng);
            for &i in &members[..take] {
                picked[i] = true;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..ds.len()).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..n] {
            picked[i] = true;
        }
    }
    Ok(picked)
}

/// Partition into train and test with exactly `test_size` test records.
/// Both parts keep the input's record order.
pub fn split(ds: &Dataset, test_size: usize, seed: u64, stratified: bool) -> Result<Split, CorpusError> {
    if test_size >= ds.len() {
        return Err(CorpusError::TestSizeTooLarge {
            requested: test_size,
            available: ds.len(),
        });
    }
    let in_test = choose(ds, test_size, seed, stratified)?;
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (rec, is_test) in ds.records.iter().zip(in_test) {
        if is_test {
            test.push(rec.clone());
        } else {
            train.push(rec.clone());
        }
    }
    Ok(Split {
        train: ds.with_records(train),
        test: ds.with_records(test),
        seed,
        stratified,
    })
}

/// Draw exactly `n` records. Output keeps the input's record order.
pub fn subsample(ds: &Dataset, n: usize, seed: u64, stratified: bool) -> Result<Dataset, CorpusError> {
    if n > ds.len() {
        return Err(CorpusError::SampleTooLarge {
            requested: n,
            available: ds.len(),
        });
    }
    let picked = choose(ds, n, seed, stratified)?;
    let records = ds
        .records
        .iter()
        .zip(picked)
        .filter(|(_, p)| *p)
        .map(|(r, _)| r.clone())
        .collect();
    Ok(ds.with_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelSchema, TextRecord};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn counts_ds(counts: &[usize]) -> Dataset {
        let names: Vec<String> = (0..counts.len().max(2)).map(|i| i.to_string()).collect();
        let schema = LabelSchema::new(names).unwrap();
        let mut records = Vec::new();
        for (label, &c) in counts.iter().enumerate() {
            for j in 0..c {
                records.push(TextRecord::new(
                    format!("c{label}-{j}"),
                    format!("t{label} {j}"),
                    Some(label),
                ));
            }
        }
        Dataset::new(schema, records, "").unwrap()
    }

    #[test]
    fn nyt_sizes() {
        let ds = counts_ds(&[1000, 374]);
        let s = split(&ds, 200, DEFAULT_SPLIT_SEED, true).unwrap();
        assert_eq!(s.train.len(), 1174);
        assert_eq!(s.test.len(), 200);
        // 200 * 1000/1374 = 145.56
        let neg = s.test.class_counts()[0];
        assert!(neg == 145 || neg == 146, "{neg}");
        assert_eq!(neg, 146);
        assert_eq!(s.train.schema, s.test.schema);
    }

    #[test]
    fn deterministic() {
        let ds = counts_ds(&[30, 20, 7]);
        let a = split(&ds, 10, 9, true).unwrap();
        let b = split(&ds, 10, 9, true).unwrap();
        assert_eq!(a.test.record_ids(), b.test.record_ids());
        let c = split(&ds, 10, 9, false).unwrap();
        let d = split(&ds, 10, 9, false).unwrap();
        assert_eq!(c.test.record_ids(), d.test.record_ids());
        let e = split(&ds, 10, 10, true).unwrap();
        assert_ne!(a.test.record_ids(), e.test.record_ids());
    }

    #[test]
    fn too_large() {
        let ds = counts_ds(&[3, 2]);
        assert!(matches!(
            split(&ds, 5, 0, true),
            Err(CorpusError::TestSizeTooLarge { .. })
        ));
        assert!(matches!(
            subsample(&ds, 6, 0, true),
            Err(CorpusError::SampleTooLarge { .. })
        ));
    }

    #[test]
    fn subsample_examples() {
        let ds = counts_ds(&[800, 374]);
        let s = subsample(&ds, 50, 1, true).unwrap();
        assert_eq!(s.len(), 50);
        assert_eq!(s, subsample(&ds, 50, 1, true).unwrap());
        let full = subsample(&ds, ds.len(), 3, true).unwrap();
        assert_eq!(full, ds);
    }

    #[test]
    fn allocation_handles_tiny_classes() {
        assert_eq!(proportional_allocation(&[292, 2764, 293], 200), vec![17, 165, 18]);
        assert_eq!(proportional_allocation(&[1, 1], 1), vec![1, 0]);
        assert_eq!(proportional_allocation(&[5, 0, 5], 10), vec![5, 0, 5]);
        assert_eq!(proportional_allocation(&[], 3), Vec::<usize>::new());
    }

    proptest! {
        #[test]
        fn split_partitions(counts in proptest::collection::vec(0usize..40, 2..5), frac in 0.0f64..1.0, seed in any::<u64>(), strat in any::<bool>()) {
            let ds = counts_ds(&counts);
            prop_assume!(ds.len() > 1);
            let test_size = ((ds.len() - 1) as f64 * frac) as usize;
            let s = split(&ds, test_size, seed, strat).unwrap();
            prop_assert_eq!(s.test.len(), test_size);
            let train: HashSet<_> = s.train.record_ids().into_iter().collect();
            let test: HashSet<_> = s.test.record_ids().into_iter().collect();
            prop_assert!(train.is_disjoint(&test));
            prop_assert_eq!(train.len() + test.len(), ds.len());
            if strat {
                let total = ds.len() as f64;
                for (c, &got) in s.test.class_counts().iter().enumerate() {
                    let target = test_size as f64 * counts[c] as f64 / total;
                    prop_assert!((got as f64 - target).abs() <= 1.0);
                }
            }
        }

        #[test]
        fn subsample_stratified_histogram(counts in proptest::collection::vec(1usize..60, 2..5), frac in 0.0f64..=1.0, seed in any::<u64>()) {
            let ds = counts_ds(&counts);
            let n = (ds.len() as f64 * frac) as usize;
            let s = subsample(&ds, n, seed, true).unwrap();
            prop_assert_eq!(s.len(), n);
            let total = ds.len() as f64;
            for (c, &got) in s.class_counts().iter().enumerate() {
                let target = n as f64 * counts[c] as f64 / total;
                prop_assert!((got as f64 - target).abs() <= 1.0);
            }
        }
    }
}
