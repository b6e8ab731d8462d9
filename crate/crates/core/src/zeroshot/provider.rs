use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::ZeroShotError;
use crate::http::{self, RetryPolicy, TransportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatApi {
    /// `POST {base_url}/chat/completions`, bearer auth.
    #[serde(rename = "openai")]
    OpenAi,
    /// `POST {base_url}/v1/messages`, `x-api-key` auth.
    Anthropic,
}

fn default_temperature() -> f64 {
    0.1
}
fn default_max_attempts() -> u32 {
    5
}
fn default_max_in_flight() -> usize {
    4
}
fn default_max_tokens() -> u32 {
    32
}
fn default_timeout_secs() -> u64 {
    60
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub api: ChatApi,
    pub base_url: String,
    pub model_id: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Prompts issued per record before giving up on a valid label.
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    pub auth_env_var: String,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Backoff for transport failures; separate from `max_attempts`.
    #[serde(default)]
    pub retry: RetryPolicy,
}

impl ProviderConfig {
    pub fn new(api: ChatApi, base_url: &str, model_id: &str, auth_env_var: &str) -> Self {
        Self {
            api,
            base_url: base_url.to_owned(),
            model_id: model_id.to_owned(),
            temperature: default_temperature(),
            max_attempts: default_max_attempts(),
            auth_env_var: auth_env_var.to_owned(),
            max_in_flight: default_max_in_flight(),
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout_secs(),
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ZeroShotError> {
        let bad = |m: &str| Err(ZeroShotError::Config(m.to_owned()));
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be a finite value >= 0");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be at least 1");
        }
        if self.model_id.is_empty() {
            return bad("model_id is empty");
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return bad("base_url must be an http(s) URL");
        }
        Ok(())
    }
}

/// One completion call. Implementations must be safe to share across threads.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, prompt: &str, temperature: f64, model_id: &str) -> Result<String, TransportError>;
}

pub fn openai_request(prompt: &str, temperature: f64, model_id: &str, max_tokens: u32) -> Value {
    json!({
        "model": model_id,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
        "max_tokens": max_tokens,
    })
}

/// Extract `choices[0].message.content`.
pub fn parse_openai_response(body: &str) -> Result<String, TransportError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TransportError::Malformed(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| TransportError::Malformed("missing choices[0].message.content".into()))
}

pub fn anthropic_request(prompt: &str, temperature: f64, model_id: &str, max_tokens: u32) -> Value {
    json!({
        "model": model_id,
        "max_tokens": max_tokens,
        "temperature": temperature,
        "messages": [{"role": "user", "content": prompt}],
    })
}

/// Concatenate the `text` blocks of a messages response.
pub fn parse_anthropic_response(body: &str) -> Result<String, TransportError> {
    let v: Value = serde_json::from_str(body).map_err(|e| TransportError::Malformed(e.to_string()))?;
    let blocks = v
        .get("content")
        .and_then(Value::as_array)
        .ok_or_else(|| TransportError::Malformed("missing content array".into()))?;
    let text: String = blocks
        .iter()
        .filter(|b| b.get("type").and_then(Value::as_str) == Some("text"))
        .filter_map(|b| b.get("text").and_then(Value::as_str))
        .collect();
    Ok(text)
}

/// Blocking HTTP adapter for chat-completion endpoints.
pub struct HttpChatTransport {
    api: ChatApi,
    url: String,
    api_key: String,
    max_tokens: u32,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl HttpChatTransport {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self, ZeroShotError> {
        cfg.validate()?;
        let api_key = http::api_key_from_env(&cfg.auth_env_var).map_err(ZeroShotError::Config)?;
        Self::with_key(cfg, api_key)
    }

    pub fn with_key(cfg: &ProviderConfig, api_key: String) -> Result<Self, ZeroShotError> {
        let base = cfg.base_url.trim_end_matches('/');
        let url = match cfg.api {
            ChatApi::OpenAi => format!("{base}/chat/completions"),
            ChatApi::Anthropic => format!("{base}/v1/messages"),
        };
        let client = http::build_client(Duration::from_secs(cfg.timeout_secs)).map_err(ZeroShotError::Config)?;
        Ok(Self {
            api: cfg.api,
            url,
            api_key,
            max_tokens: cfg.max_tokens,
            retry: cfg.retry,
            client,
        })
    }
}

impl ChatTransport for HttpChatTransport {
    fn complete(&self, prompt: &str, temperature: f64, model_id: &str) -> Result<String, TransportError> {
        http::with_retry(&self.retry, || match self.api {
            ChatApi::OpenAi => {
                let body = openai_request(prompt, temperature, model_id, self.max_tokens);
                let headers = [("authorization", format!("Bearer {}", self.api_key))];
                parse_openai_response(&http::post_json(&self.client, &self.url, &headers, &body)?)
            }
            ChatApi::Anthropic => {
                let body = anthropic_request(prompt, temperature, model_id, self.max_tokens);
                let headers = [
                    ("x-api-key", self.api_key.clone()),
                    ("anthropic-version", "2023-06-01".to_owned()),
                ];
                parse_anthropic_response(&http::post_json(&self.client, &self.url, &headers, &body)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_shapes() {
        let v = openai_request("p", 0.1, "gpt-4-1106-preview", 32);
        assert_eq!(v["messages"][0]["content"], "p");
        assert_eq!(v["temperature"], 0.1);
        let v = anthropic_request("p", 0.1, "claude-3-opus-20240229", 32);
        assert_eq!(v["model"], "claude-3-opus-20240229");
        assert_eq!(v["max_tokens"], 32);
    }

    #[test]
    fn response_parsing() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"Positive Sentiment"}}]}"#;
        assert_eq!(parse_openai_response(body).unwrap(), "Positive Sentiment");
        assert!(matches!(
            parse_openai_response(r#"{"choices":[]}"#),
            Err(TransportError::Malformed(_))
        ));
        assert!(matches!(
            parse_openai_response("not json"),
            Err(TransportError::Malformed(_))
        ));

        let body = r#"{"content":[{"type":"text","text":"Angry"},{"type":"tool_use"}]}"#;
        assert_eq!(parse_anthropic_response(body).unwrap(), "Angry");
        assert!(parse_anthropic_response(r#"{"type":"error"}"#).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ProviderConfig::new(
            ChatApi::OpenAi,
            "https://api.openai.com/v1",
            "gpt-3.5-turbo",
            "OPENAI_API_KEY",
        );
        assert_eq!(cfg.temperature, 0.1);
        assert_eq!(cfg.max_attempts, 5);
        cfg.validate().unwrap();
        cfg.max_attempts = 0;
        assert!(cfg.validate().is_err());
        cfg.max_attempts = 1;
        cfg.temperature = -0.5;
        assert!(cfg.validate().is_err());
        cfg.temperature = 0.0;
        cfg.base_url = "ftp://x".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_api_key_is_config_error() {
        let cfg = ProviderConfig::new(
            ChatApi::Anthropic,
            "https://api.anthropic.com",
            "m",
            "TCBENCH_TEST_UNSET_KEY_VAR",
        );
        assert!(matches!(
            HttpChatTransport::from_config(&cfg),
            Err(ZeroShotError::Config(_))
        ));
    }
}
