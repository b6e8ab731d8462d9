use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CorpusError;

/// Index of a label within a [`LabelSchema`].
pub type LabelId = usize;

/// Ordered set of class names. Ids are the positions `0..K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSchema {
    labels: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, LabelId>,
}

impl LabelSchema {
    pub fn new<I, S>(labels: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(CorpusError::InvalidSchema(format!(
                "at least two labels are required, got {}",
                labels.len()
            )));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (id, name) in labels.iter().enumerate() {
            if name.is_empty() {
                return Err(CorpusError::InvalidSchema(format!("label {id} is empty")));
            }
            if index.insert(name.clone(), id).is_some() {
                return Err(CorpusError::InvalidSchema(format!("duplicate label {name:?}")));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, name: &str) -> Option<LabelId> {
        self.index.get(name).copied()
    }

    pub fn name_of(&self, id: LabelId) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    pub fn contains_id(&self, id: LabelId) -> bool {
        id < self.labels.len()
    }
}

impl TryFrom<Vec<String>> for LabelSchema {
    type Error = CorpusError;

    fn try_from(labels: Vec<String>) -> Result<Self, Self::Error> {
        Self::new(labels)
    }
}

impl From<LabelSchema> for Vec<String> {
    fn from(schema: LabelSchema) -> Self {
        schema.labels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub record_id: String,
    pub text: String,
    pub label: Option<LabelId>,
    /// Document id or other key used when collapsing coder votes.
    pub group_key: Option<String>,
    /// Number of coder votes represented by this record.
    pub weight: Option<u32>,
}

impl TextRecord {
    pub fn new(record_id: impl Into<String>, text: impl Into<String>, label: Option<LabelId>) -> Self {
        Self {
            record_id: record_id.into(),
            text: text.into(),
            label,
            group_key: None,
            weight: None,
        }
    }

    pub fn with_group_key(mut self, key: impl Into<String>) -> Self {
        self.group_key = Some(key.into());
        self
    }

    /// Vote weight, defaulting to a single vote.
    pub fn votes(&self) -> u32 {
        self.weight.unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: LabelSchema,
    pub records: Vec<TextRecord>,
    pub provenance: String,
}

impl Dataset {
    /// Builds a dataset, checking label validity and record id uniqueness.
    pub fn new(
        schema: LabelSchema,
        records: Vec<TextRecord>,
        provenance: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let ds = Self {
            schema,
            records,
            provenance: provenance.into(),
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut seen = HashSet::with_capacity(self.records.len());
        for (row, rec) in self.records.iter().enumerate() {
            if let Some(label) = rec.label {
                if !self.schema.contains_id(label) {
                    return Err(CorpusError::InvalidLabel { row, label });
                }
            }
            if !seen.insert(rec.record_id.as_str()) {
                return Err(CorpusError::DuplicateRecordId(rec.record_id.clone()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Dataset sharing this schema and provenance with different records.
    pub(crate) fn with_records(&self, records: Vec<TextRecord>) -> Self {
        Self {
            schema: self.schema.clone(),
            records,
            provenance: self.provenance.clone(),
        }
    }

    pub fn texts(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.text.as_str()).collect()
    }

    /// Labels of every record; fails if any record is unlabeled.
    pub fn labels(&self) -> Result<Vec<LabelId>, CorpusError> {
        self.records
            .iter()
            .map(|r| r.label.ok_or_else(|| CorpusError::Unlabeled(r.record_id.clone())))
            .collect()
    }

    /// Per-class counts of labeled records, indexed by label id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.schema.len()];
        for label in self.records.iter().filter_map(|r| r.label) {
            counts[label] += 1;
        }
        counts
    }

    pub fn record_ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.record_id.as_str()).collect()
    }

    /// Content hash over schema and canonical record serialization.
    pub fn fingerprint(&self) -> DatasetFingerprint {
        let mut hasher = Sha256::new();
        for label in self.schema.labels() {
            hasher.update(label.as_bytes());
            hasher.update([0x1f]);
        }
        hasher.update([0x1e]);
        for rec in &self.records {
            let line = serde_json::to_vec(&super::io::CanonicalRecord::from_record(rec, &self.schema))
                .expect("canonical record serializes");
            hasher.update(&line);
            hasher.update(b"\n");
        }
        let class_counts = self.schema.labels().iter().cloned().zip(self.class_counts()).collect();
        DatasetFingerprint {
            sha256: hex::encode(hasher.finalize()),
            n: self.len(),
            class_counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub sha256: String,
    pub n: usize,
    pub class_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    pub stratified: bool,
}
