use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::model::{BowNet, TENSORS};
use super::vocab::Vocab;
use super::{FineTuneError, TrainConfig, TrainedClassifier};
use crate::corpus::LabelSchema;

pub const MANIFEST: &str = "manifest.json";
const WEIGHTS: &str = "weights.bin";
const FORMAT: &str = "tcbench-bow/f32-le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset into the weights file, in bytes.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub backbone_id: String,
    pub weights: String,
    pub sha256: String,
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub n_classes: usize,
    pub tensors: Vec<TensorEntry>,
}

fn bad(msg: impl Into<String>) -> FineTuneError {
    FineTuneError::Checkpoint(msg.into())
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), FineTuneError> {
    fs::write(path, bytes).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<Vec<u8>, FineTuneError> {
    fs::read(path).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FineTuneError> {
    serde_json::from_slice(&read(path)?).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec_pretty(v).expect("serializable")
}

pub fn save(model: &TrainedClassifier, dir: &Path) -> Result<(), FineTuneError> {
    fs::create_dir_all(dir).map_err(|e| bad(format!("{}: {e}", dir.display())))?;
    let net = &model.net;
    let mut bytes = Vec::new();
    let mut tensors = Vec::new();
    for (name, data) in TENSORS.iter().zip(net.tensors()) {
        tensors.push(TensorEntry {
            name: (*name).to_owned(),
            shape: net.shape(name),
            offset: bytes.len(),
        });
        for x in data {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    let manifest = Manifest {
        format: FORMAT.to_owned(),
        backbone_id: model.config.backbone_id.clone(),
        weights: WEIGHTS.to_owned(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        vocab_size: net.vocab_size,
        embed_dim: net.embed_dim,
        hidden_dim: net.hidden_dim,
        n_classes: net.n_classes,
        tensors,
    };
    write(&dir.join(WEIGHTS), &bytes)?;
    write(&dir.join("config.json"), &to_json(&model.config))?;
    write(&dir.join("schema.json"), &to_json(&model.schema))?;
    write(&dir.join("training_log.json"), &to_json(&model.training_log))?;
    write(&dir.join("vocab.json"), &to_json(&model.vocab.tokens()))?;
    write(&dir.join(MANIFEST), &to_json(&manifest))
}

pub fn load(dir: &Path) -> Result<TrainedClassifier, FineTuneError> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
    if manifest.format != FORMAT {
        return Err(bad(format!("unsupported weight format {:?}", manifest.format)));
    }
    let config: TrainConfig = read_json(&dir.join("config.json"))?;
    let schema: LabelSchema = read_json(&dir.join("schema.json"))?;
    let training_log: Vec<f64> = read_json(&dir.join("training_log.json"))?;
    let tokens: Vec<String> = read_json(&dir.join("vocab.json"))?;
    if tokens.len() != manifest.vocab_size || schema.len() != manifest.n_classes {
        return Err(bad("vocabulary or schema size disagrees with manifest"));
    }

    let bytes = read(&dir.join(&manifest.weights))?;
    if hex::encode(Sha256::digest(&bytes)) != manifest.sha256 {
        return Err(bad("weights checksum mismatch"));
    }
    let mut net = BowNet::zeros(
        manifest.vocab_size,
        manifest.embed_dim,
        manifest.hidden_dim,
        manifest.n_classes,
    )
    .map_err(|_| bad("weights too large"))?;
    if manifest.tensors.len() != TENSORS.len() {
        return Err(bad("unexpected tensor list"));
    }
    for (i, entry) in manifest.tensors.iter().enumerate() {
        if entry.name != TENSORS[i] || entry.shape != net.shape(TENSORS[i]) {
            return Err(bad(format!("tensor {} has unexpected name or shape", entry.name)));
        }
        let dst = &mut net.tensors_mut()[i];
        let end = entry.offset + dst.len() * 4;
        let src = bytes
            .get(entry.offset..end)
            .ok_or_else(|| bad("weights file truncated"))?;
        for (x, chunk) in dst.iter_mut().zip(src.chunks_exact(4)) {
            *x = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        }
    }

    Ok(TrainedClassifier {
        schema,
        config,
        training_log,
        vocab: Vocab::from_tokens(tokens),
        net,
    })
}
