use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::MtError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationCacheEntry {
    pub source_text: String,
    pub source_lang: String,
    pub target_lang: String,
    pub translated_text: String,
    pub provider_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    pub provider_id: String,
    pub source_lang: String,
    pub target_lang: String,
    pub text_sha256: String,
}

impl CacheKey {
    pub fn new(provider_id: &str, source_lang: &str, target_lang: &str, text: &str) -> Self {
        Self {
            provider_id: provider_id.to_owned(),
            source_lang: source_lang.to_owned(),
            target_lang: target_lang.to_owned(),
            text_sha256: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }
}

impl TranslationCacheEntry {
    pub fn key(&self) -> CacheKey {
        CacheKey::new(
            &self.provider_id,
            &self.source_lang,
            &self.target_lang,
            &self.source_text,
        )
    }
}

/// Thread-safe translation cache persisted as JSONL (one entry per line).
#[derive(Debug, Default)]
pub struct TranslationCache {
    entries: RwLock<HashMap<CacheKey, TranslationCacheEntry>>,
}

impl TranslationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact lookup: the stored source text must equal `text`.
    pub fn get(&self, provider_id: &str, source_lang: &str, target_lang: &str, text: &str) -> Option<String> {
        let key = CacheKey::new(provider_id, source_lang, target_lang, text);
        let map = self.entries.read().expect("cache lock poisoned");
        map.get(&key)
            .filter(|e| e.source_text == text)
            .map(|e| e.translated_text.clone())
    }

    pub fn insert(&self, entry: TranslationCacheEntry) {
        let mut map = self.entries.write().expect("cache lock poisoned");
        map.insert(entry.key(), entry);
    }

    pub fn read_jsonl<R: Read>(reader: R) -> Result<Self, MtError> {
        let cache = Self::new();
        for (row, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| MtError::Cache(format!("line {row}: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranslationCacheEntry =
                serde_json::from_str(&line).map_err(|e| MtError::Cache(format!("line {row}: {e}")))?;
            cache.insert(entry);
        }
        Ok(cache)
    }

    /// Entries sorted by key so the file is stable across runs.
    pub fn write_jsonl<W: Write>(&self, writer: W) -> Result<(), MtError> {
        let map = self.entries.read().expect("cache lock poisoned");
        let mut entries: Vec<(&CacheKey, &TranslationCacheEntry)> = map.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut w = BufWriter::new(writer);
        for (_, e) in entries {
            serde_json::to_writer(&mut w, e).map_err(|e| MtError::Cache(e.to_string()))?;
            w.write_all(b"\n").map_err(|e| MtError::Cache(e.to_string()))?;
        }
        w.flush().map_err(|e| MtError::Cache(e.to_string()))
    }

    /// Load from `path`, or start empty when the file does not exist.
    pub fn load(path: &Path) -> Result<Self, MtError> {
        match File::open(path) {
            Ok(f) => Self::read_jsonl(f),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(MtError::Cache(format!("{}: {e}", path.display()))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), MtError> {
        let tmp = path.with_extension("jsonl.tmp");
        let f = OpenOptions::new()
            .write(true)
            .create(true)
            .truncate(true)
            .open(&tmp)
            .map_err(|e| MtError::Cache(format!("{}: {e}", tmp.display())))?;
        self.write_jsonl(f)?;
        std::fs::rename(&tmp, path).map_err(|e| MtError::Cache(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(text: &str, out: &str) -> TranslationCacheEntry {
        TranslationCacheEntry {
            source_text: text.into(),
            source_lang: "DE".into(),
            target_lang: "EN".into(),
            translated_text: out.into(),
            provider_id: "deepl".into(),
        }
    }

    #[test]
    fn keyed_by_provider_and_langs() {
        let c = TranslationCache::new();
        c.insert(entry("Hallo", "Hello"));
        assert_eq!(c.get("deepl", "DE", "EN", "Hallo").as_deref(), Some("Hello"));
        assert_eq!(c.get("other", "DE", "EN", "Hallo"), None);
        assert_eq!(c.get("deepl", "DE", "FR", "Hallo"), None);
        assert_eq!(c.get("deepl", "DE", "EN", "hallo"), None);
    }

    #[test]
    fn persist_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        assert!(TranslationCache::load(&path).unwrap().is_empty());
        let c = TranslationCache::new();
        c.insert(entry("Wut", "Anger"));
        c.insert(entry("Zeile\nzwei", "line\ntwo"));
        c.save(&path).unwrap();
        let back = TranslationCache::load(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(
            back.get("deepl", "DE", "EN", "Zeile\nzwei").as_deref(),
            Some("line\ntwo")
        );
        let mut a = Vec::new();
        let mut b = Vec::new();
        c.write_jsonl(&mut a).unwrap();
        back.write_jsonl(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_line_is_error() {
        assert!(TranslationCache::read_jsonl("{not json}\n".as_bytes()).is_err());
    }
}
