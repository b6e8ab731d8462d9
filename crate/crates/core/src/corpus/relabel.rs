use std::collections::BTreeMap;

use super::{CorpusError, Dataset, LabelSchema};

/// Remap record labels from `ds.schema` names to names in `target`.
///
/// `mapping` keys are source label names; values must be names in `target`.
/// Records whose source label is not a key are dropped when `drop_unmapped`,
/// otherwise they raise [`CorpusError::UnmappedLabel`]. Unlabeled records pass
/// through unchanged.
pub fn map_labels(
    ds: &Dataset,
    mapping: &BTreeMap<String, String>,
    target: &LabelSchema,
    drop_unmapped: bool,
) -> Result<Dataset, CorpusError> {
    let mut resolved = BTreeMap::new();
    for (from, to) in mapping {
        let to_id = target
            .id_of(to)
            .ok_or_else(|| CorpusError::InvalidMapping(format!("target label {to:?} is not in the schema")))?;
        resolved.insert(from.as_str(), to_id);
    }

    let mut records = Vec::with_capacity(ds.len());
    let mut dropped = 0usize;
    for rec in &ds.records {
        let Some(label) = rec.label else {
            records.push(rec.clone());
            continue;
        };
        let name = ds.schema.name_of(label).unwrap_or_default();
        match resolved.get(name) {
            Some(&new_id) => {
                let mut r = rec.clone();
                r.label = Some(new_id);
                records.push(r);
            }
            None if drop_unmapped => dropped += 1,
            None => {
                return Err(CorpusError::UnmappedLabel {
                    record_id: rec.record_id.clone(),
                    label: name.to_owned(),
                })
            }
        }
    }
    if dropped > 0 {
        log::info!("dropped {dropped} record(s) with unmapped labels");
    }
    Dataset::new(target.clone(), records, ds.provenance.clone())
}
