use serde::{Deserialize, Serialize};

use super::FineTuneError;

/// Identifier of the built-in encoder that runs in-process.
pub const SMALL_BACKBONE: &str = "tcbench/bow-small";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackboneKind {
    /// Runs in-process: mean-pooled token embeddings, a tanh layer, a linear head.
    BuiltinBow { embed_dim: usize, hidden_dim: usize },
    /// A hub checkpoint that needs an external transformer runtime.
    Hub,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackbonePreset {
    pub id: &'static str,
    pub short_name: &'static str,
    pub kind: BackboneKind,
    pub batch_size: usize,
    pub grad_accum_steps: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

const fn hub(id: &'static str, short_name: &'static str, batch_size: usize) -> BackbonePreset {
    BackbonePreset {
        id,
        short_name,
        kind: BackboneKind::Hub,
        batch_size,
        grad_accum_steps: 8,
        learning_rate: 2e-5,
        epochs: 5,
    }
}

pub const PRESETS: &[BackbonePreset] = &[
    hub("roberta-base", "ROB-BASE", 4),
    hub("roberta-large", "ROB-LRG", 4),
    hub("microsoft/deberta-v3-large", "DEB-V3", 2),
    hub("google/electra-large-discriminator", "ELECTRA", 4),
    hub("xlnet-large-cased", "XLNET", 4),
    hub("german-nlp-group/electra-base-german-uncased", "ELECTRA-DE", 4),
    BackbonePreset {
        id: SMALL_BACKBONE,
        short_name: "BOW-SMALL",
        kind: BackboneKind::BuiltinBow {
            embed_dim: 64,
            hidden_dim: 64,
        },
        batch_size: 4,
        grad_accum_steps: 8,
        learning_rate: 1e-2,
        epochs: 10,
    },
];

/// Look up a preset by hub id or short name (case-insensitive).
pub fn preset(name: &str) -> Option<&'static BackbonePreset> {
    PRESETS
        .iter()
        .find(|p| p.id.eq_ignore_ascii_case(name) || p.short_name.eq_ignore_ascii_case(name))
}

fn default_backbone() -> String {
    "roberta-large".to_owned()
}
fn default_epochs() -> usize {
    5
}
fn default_lr() -> f64 {
    2e-5
}
fn default_batch() -> usize {
    4
}
fn default_accum() -> usize {
    8
}
fn default_max_seq_len() -> usize {
    256
}
fn default_true() -> bool {
    true
}
fn default_warmup() -> f64 {
    0.1
}
fn default_wd() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_backbone")]
    pub backbone_id: String,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_accum")]
    pub grad_accum_steps: usize,
    #[serde(default = "default_max_seq_len")]
    pub max_seq_len: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub class_weighting: bool,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    #[serde(default = "default_wd")]
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            backbone_id: default_backbone(),
            epochs: default_epochs(),
            learning_rate: default_lr(),
            batch_size: default_batch(),
            grad_accum_steps: default_accum(),
            max_seq_len: default_max_seq_len(),
            seed: 0,
            class_weighting: true,
            warmup_fraction: default_warmup(),
            weight_decay: default_wd(),
        }
    }
}

impl TrainConfig {
    /// Defaults with the batch size, learning rate and epochs recommended for a
    /// preset. Unknown ids get the plain defaults.
    pub fn for_backbone(backbone_id: &str) -> Self {
        let mut cfg = Self {
            backbone_id: backbone_id.to_owned(),
            ..Self::default()
        };
        if let Some(p) = preset(backbone_id) {
            cfg.backbone_id = p.id.to_owned();
            cfg.batch_size = p.batch_size;
            cfg.grad_accum_steps = p.grad_accum_steps;
            cfg.learning_rate = p.learning_rate;
            cfg.epochs = p.epochs;
        }
        cfg
    }

    /// The in-process small encoder with its recommended settings.
    pub fn small() -> Self {
        Self::for_backbone(SMALL_BACKBONE)
    }

    pub fn effective_batch(&self) -> usize {
        self.batch_size.saturating_mul(self.grad_accum_steps)
    }

    pub fn validate(&self) -> Result<(), FineTuneError> {
        let bad = |m: &str| Err(FineTuneError::InvalidConfig(m.to_owned()));
        if self.backbone_id.trim().is_empty() {
            return bad("backbone_id is empty");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.grad_accum_steps == 0 {
            return bad("batch_size and grad_accum_steps must be positive");
        }
        if self.max_seq_len == 0 {
            return bad("max_seq_len must be positive");
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return bad("warmup_fraction must be in [0, 1)");
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad("weight_decay must be non-negative");
        }
        Ok(())
    }
}
