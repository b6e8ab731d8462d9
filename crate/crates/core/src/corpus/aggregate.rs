use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, TextRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateKey {
    GroupKey,
    ExactText,
}

/// Collapse records sharing a key into one record by strict-majority vote.
///
/// Each record contributes [`TextRecord::votes`] votes. The surviving record
/// keeps the id and text of the first record seen for its key, and its weight
/// becomes the total vote count. Keys without a strict majority are dropped.
pub fn aggregate_majority(ds: &Dataset, key: AggregateKey) -> Result<Dataset, CorpusError> {
    let k = ds.schema.len();
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, (usize, Vec<u64>)> = HashMap::new();

    for (idx, rec) in ds.records.iter().enumerate() {
        let key_value = match key {
            AggregateKey::GroupKey => rec
                .group_key
                .as_deref()
                .ok_or_else(|| CorpusError::MissingGroupKey(rec.record_id.clone()))?,
            AggregateKey::ExactText => rec.text.as_str(),
        };
        let label = rec.label.ok_or_else(|| CorpusError::Unlabeled(rec.record_id.clone()))?;
        let entry = groups.entry(key_value).or_insert_with(|| {
            order.push(key_value);
            (idx, vec![0; k])
        });
        entry.1[label] += u64::from(rec.votes());
    }

    let mut ties = 0usize;
    let mut records = Vec::with_capacity(order.len());
    for key_value in order {
        let (first, votes) = &groups[key_value];
        let total: u64 = votes.iter().sum();
        match votes.iter().position(|&v| 2 * v > total) {
            Some(label) => {
                let src = &ds.records[*first];
                records.push(TextRecord {
                    record_id: src.record_id.clone(),
                    text: src.text.clone(),
                    label: Some(label),
                    group_key: src.group_key.clone(),
                    weight: Some(u32::try_from(total).unwrap_or(u32::MAX)),
                });
            }
            None => ties += 1,
        }
    }
    if ties > 0 {
        log::info!("dropped {ties} group(s) without a strict majority");
    }
    Ok(ds.with_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabelSchema;
    use proptest::prelude::*;

    fn ds(votes: &[(&str, usize)]) -> Dataset {
        let schema = LabelSchema::new(["0", "1", "2"]).unwrap();
        let records = votes
            .iter()
            .enumerate()
            .map(|(i, (g, l))| TextRecord::new(format!("r{i}"), format!("text {g}"), Some(*l)).with_group_key(*g))
            .collect();
        Dataset::new(schema, records, "").unwrap()
    }

    #[test]
    fn strict_majority() {
        let out = aggregate_majority(&ds(&[("d", 1), ("d", 1), ("d", 0)]), AggregateKey::GroupKey).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.records[0].label, Some(1));
        assert_eq!(out.records[0].weight, Some(3));
        assert_eq!(out.records[0].record_id, "r0");
    }

    #[test]
    fn tie_dropped() {
        let out = aggregate_majority(&ds(&[("d", 1), ("d", 0)]), AggregateKey::GroupKey).unwrap();
        assert!(out.is_empty());
        // plurality without majority is also dropped
        let out = aggregate_majority(&ds(&[("d", 0), ("d", 0), ("d", 1), ("d", 2)]), AggregateKey::GroupKey).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn exact_text_key() {
        let schema = LabelSchema::new(["0", "1"]).unwrap();
        let records = vec![
            TextRecord::new("a", "same tweet", Some(1)),
            TextRecord::new("b", "other", Some(0)),
            TextRecord::new("c", "same tweet", Some(1)),
        ];
        let ds = Dataset::new(schema, records, "").unwrap();
        let out = aggregate_majority(&ds, AggregateKey::ExactText).unwrap();
        assert_eq!(out.record_ids(), vec!["a", "b"]);
        assert_eq!(out.records[0].weight, Some(2));
    }

    #[test]
    fn missing_group_key() {
        let schema = LabelSchema::new(["0", "1"]).unwrap();
        let ds = Dataset::new(schema, vec![TextRecord::new("a", "t", Some(0))], "").unwrap();
        assert!(matches!(
            aggregate_majority(&ds, AggregateKey::GroupKey),
            Err(CorpusError::MissingGroupKey(id)) if id == "a"
        ));
    }

    proptest! {
        #[test]
        fn idempotent_and_shrinking(votes in proptest::collection::vec((0u8..6, 0usize..3), 1..60)) {
            let names: Vec<(String, usize)> = votes.iter().map(|(g, l)| (format!("g{g}"), *l)).collect();
            let pairs: Vec<(&str, usize)> = names.iter().map(|(g, l)| (g.as_str(), *l)).collect();
            let input = ds(&pairs);
            let once = aggregate_majority(&input, AggregateKey::GroupKey).unwrap();
            let twice = aggregate_majority(&once, AggregateKey::GroupKey).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!(once.len() <= input.len());
            for rec in &once.records {
                let key = rec.group_key.as_deref().unwrap();
                prop_assert!(input.records.iter().any(|r| r.group_key.as_deref() == Some(key) && r.label == rec.label));
            }
        }
    }
}
