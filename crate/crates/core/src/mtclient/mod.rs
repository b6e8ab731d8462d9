//! Machine translation of corpora through an external HTTP service, with a
//! content-addressed cache so reruns are network-free and deterministic.

mod cache;
mod deepl;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use cache::{CacheKey, TranslationCache, TranslationCacheEntry};
pub use deepl::{deepl_request, parse_deepl_response, DeeplConfig, DeeplTransport};

use crate::corpus::Dataset;
use crate::http::{self, RetryPolicy, TransportError};
use crate::pool::bounded_map;

#[derive(Debug, thiserror::Error)]
pub enum MtError {
    #[error("translation provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("translation quota exceeded: {0}")]
    QuotaExceeded(String),
    #[error("translation request failed: {0}")]
    Request(String),
    #[error("provider returned {got} translations for {expected} texts")]
    Misaligned { expected: usize, got: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("translation cache: {0}")]
    Cache(String),
}

impl From<TransportError> for MtError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::QuotaExceeded(m) => MtError::QuotaExceeded(m),
            TransportError::RateLimited { .. } | TransportError::Transient(_) => {
                MtError::ProviderUnavailable(e.to_string())
            }
            other => MtError::Request(other.to_string()),
        }
    }
}

/// The single port every translation backend implements.
pub trait TranslateTransport: Send + Sync {
    /// Stable identifier used in cache keys.
    fn provider_id(&self) -> &str;

    /// Translate a batch; output must align index-for-index with `texts`.
    fn translate(&self, texts: &[String], source_lang: &str, target_lang: &str) -> Result<Vec<String>, TransportError>;
}

fn default_batch_size() -> usize {
    50
}
fn default_in_flight() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateOptions {
    /// Texts per request.
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        Self {
            batch_size: default_batch_size(),
            max_in_flight: default_in_flight(),
            retry: RetryPolicy::default(),
        }
    }
}

pub struct Translator<'a> {
    transport: &'a dyn TranslateTransport,
    cache: &'a TranslationCache,
    options: TranslateOptions,
}

impl<'a> Translator<'a> {
    pub fn new(transport: &'a dyn TranslateTransport, cache: &'a TranslationCache, options: TranslateOptions) -> Self {
        Self {
            transport,
            cache,
            options,
        }
    }

    /// Translate `texts`, hitting the provider only for uncached strings.
    pub fn translate_batch(
        &self,
        texts: &[String],
        source_lang: &str,
        target_lang: &str,
    ) -> Result<Vec<String>, MtError> {
        let provider = self.transport.provider_id();
        let mut seen = HashSet::new();
        let missing: Vec<String> = texts
            .iter()
            .filter(|t| self.cache.get(provider, source_lang, target_lang, t).is_none())
            .filter(|t| seen.insert(t.as_str()))
            .cloned()
            .collect();

        if !missing.is_empty() {
            let chunks: Vec<&[String]> = missing.chunks(self.options.batch_size.max(1)).collect();
            let results = bounded_map(&chunks, self.options.max_in_flight, |_, chunk| {
                let out = http::with_retry(&self.options.retry, || {
                    self.transport.translate(chunk, source_lang, target_lang)
                })?;
                if out.len() != chunk.len() {
                    return Err(MtError::Misaligned {
                        expected: chunk.len(),
                        got: out.len(),
                    });
                }
                for (src, dst) in chunk.iter().zip(out) {
                    self.cache.insert(TranslationCacheEntry {
                        source_text: src.clone(),
                        source_lang: source_lang.to_owned(),
                        target_lang: target_lang.to_owned(),
                        translated_text: dst,
                        provider_id: provider.to_owned(),
                    });
                }
                Ok(())
            });
            results.into_iter().collect::<Result<(), MtError>>()?;
        }

        texts
            .iter()
            .map(|t| {
                self.cache
                    .get(provider, source_lang, target_lang, t)
                    .ok_or_else(|| MtError::Cache(format!("no cached translation for {t:?}")))
            })
            .collect()
    }

    /// Replace every record text with its translation; ids, labels, group
    /// keys and weights are untouched.
    pub fn translate_dataset(&self, ds: &Dataset, source_lang: &str, target_lang: &str) -> Result<Dataset, MtError> {
        let texts: Vec<String> = ds.records.iter().map(|r| r.text.clone()).collect();
        let translated = self.translate_batch(&texts, source_lang, target_lang)?;
        let mut out = ds.clone();
        for (rec, text) in out.records.iter_mut().zip(translated) {
            rec.text = text;
        }
        Ok(out)
    }
}
