use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{MtError, TranslateTransport};
use crate::http::{self, TransportError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeeplConfig {
    #[serde(default = "default_base_url")]
    pub base_url: String,
    pub auth_env_var: String,
}

fn default_base_url() -> String {
    "https://api-free.deepl.com".to_owned()
}

/// DeepL `/v2/translate` adapter.
pub struct DeeplTransport {
    url: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl DeeplTransport {
    pub fn from_config(cfg: &DeeplConfig) -> Result<Self, MtError> {
        let api_key = http::api_key_from_env(&cfg.auth_env_var).map_err(MtError::Config)?;
        Ok(Self {
            url: format!("{}/v2/translate", cfg.base_url.trim_end_matches('/')),
            api_key,
            client: http::build_client(Duration::from_secs(120)).map_err(MtError::Config)?,
        })
    }
}

pub fn deepl_request(texts: &[String], source_lang: &str, target_lang: &str) -> Value {
    json!({
        "text": texts,
        "source_lang": source_lang,
        "target_lang": target_lang,
    })
}

/// Extract `translations[*].text` in order.
pub fn parse_deepl_response(body: &str) -> Result<Vec<String>, TransportError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TransportError::Malformed(e.to_string()))?;
    v.get("translations")
        .and_then(Value::as_array)
        .ok_or_else(|| TransportError::Malformed("missing translations array".into()))?
        .iter()
        .map(|t| {
            t.get("text")
                .and_then(Value::as_str)
                .map(str::to_owned)
                .ok_or_else(|| TransportError::Malformed("translation without text".into()))
        })
        .collect()
}

impl TranslateTransport for DeeplTransport {
    fn provider_id(&self) -> &str {
        "deepl"
    }

    fn translate(&self, texts: &[String], source_lang: &str, target_lang: &str) -> Result<Vec<String>, TransportError> {
        let body = deepl_request(texts, source_lang, target_lang);
        let headers = [("authorization", format!("DeepL-Auth-Key {}", self.api_key))];
        parse_deepl_response(&http::post_json(&self.client, &self.url, &headers, &body)?)
    }
}
