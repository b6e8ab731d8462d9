//! Transport errors, bounded exponential backoff, and the blocking HTTP
//! helpers shared by the chat, NLI and translation adapters.

use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("rate limited: {message}")]
    RateLimited {
        retry_after: Option<Duration>,
        message: String,
    },
    #[error("transient failure: {0}")]
    Transient(String),
    /// Account quota exhausted. The provider's message is kept verbatim.
    #[error("quota exceeded: {0}")]
    QuotaExceeded(String),
    #[error("request failed (status {status:?}): {message}")]
    Fatal { status: Option<u16>, message: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::RateLimited { .. } | Self::Transient(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Total attempts including the first one.
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay_ms: 500,
            max_delay_ms: 30_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based), honoring a server hint.
    pub fn delay(&self, retry: u32, hint: Option<Duration>) -> Duration {
        let cap = Duration::from_millis(self.max_delay_ms);
        let backoff = Duration::from_millis(
            self.base_delay_ms
                .saturating_mul(1u64.checked_shl(retry).unwrap_or(u64::MAX)),
        );
        hint.unwrap_or(backoff).min(cap)
    }
}

/// Run `op` until it succeeds, fails permanently, or attempts run out.
pub fn with_retry<T>(
    policy: &RetryPolicy,
    mut op: impl FnMut() -> Result<T, TransportError>,
) -> Result<T, TransportError> {
    let attempts = policy.max_attempts.max(1);
    let mut retry = 0;
    loop {
        match op() {
            Ok(v) => return Ok(v),
            Err(e) if e.is_retryable() && retry + 1 < attempts => {
                let hint = match &e {
                    TransportError::RateLimited { retry_after, .. } => *retry_after,
                    _ => None,
                };
                let wait = policy.delay(retry, hint);
                log::warn!("{e}; retrying in {wait:?}");
                std::thread::sleep(wait);
                retry += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Map a non-success HTTP status and body to a [`TransportError`].
pub fn classify_status(status: u16, retry_after: Option<&str>, body: &str) -> TransportError {
    let message = body.chars().take(2000).collect::<String>();
    let lower = message.to_ascii_lowercase();
    match status {
        // 456 is DeepL's quota status; 402 is used by several chat APIs.
        402 | 456 => TransportError::QuotaExceeded(message),
        429 if lower.contains("insufficient_quota") || lower.contains("quota exceeded") => {
            TransportError::QuotaExceeded(message)
        }
        429 => TransportError::RateLimited {
            retry_after: retry_after
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|s| s.is_finite() && *s >= 0.0)
                .map(Duration::from_secs_f64),
            message,
        },
        408 | 500..=599 => TransportError::Transient(format!("status {status}: {message}")),
        _ => TransportError::Fatal {
            status: Some(status),
            message,
        },
    }
}

/// Blocking JSON POST. Non-2xx statuses are classified by [`classify_status`].
pub(crate) fn post_json(
    client: &reqwest::blocking::Client,
    url: &str,
    headers: &[(&str, String)],
    body: &serde_json::Value,
) -> Result<String, TransportError> {
    let mut req = client.post(url).json(body);
    for (name, value) in headers {
        req = req.header(*name, value);
    }
    let resp = req.send().map_err(|e| {
        if e.is_timeout() || e.is_connect() || e.is_request() {
            TransportError::Transient(e.to_string())
        } else {
            TransportError::Fatal {
                status: None,
                message: e.to_string(),
            }
        }
    })?;
    let status = resp.status().as_u16();
    let retry_after = resp
        .headers()
        .get("retry-after")
        .and_then(|v| v.to_str().ok())
        .map(str::to_owned);
    let text = resp.text().map_err(|e| TransportError::Transient(e.to_string()))?;
    if (200..300).contains(&status) {
        Ok(text)
    } else {
        Err(classify_status(status, retry_after.as_deref(), &text))
    }
}

pub(crate) fn build_client(timeout: Duration) -> Result<reqwest::blocking::Client, String> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| e.to_string())
}

/// Read an API key from the named environment variable.
pub fn api_key_from_env(var: &str) -> Result<String, String> {
    match std::env::var(var) {
        Ok(v) if !v.trim().is_empty() => Ok(v),
        _ => Err(format!("environment variable {var} is not set")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn fast(n: u32) -> RetryPolicy {
        RetryPolicy {
            max_attempts: n,
            base_delay_ms: 0,
            max_delay_ms: 0,
        }
    }

    #[test]
    fn retries_transient_until_success() {
        let calls = Cell::new(0);
        let out = with_retry(&fast(3), || {
            calls.set(calls.get() + 1);
            if calls.get() < 3 {
                Err(TransportError::Transient("boom".into()))
            } else {
                Ok(7)
            }
        });
        assert_eq!(out, Ok(7));
        assert_eq!(calls.get(), 3);
    }

    #[test]
    fn bounded_attempts() {
        let calls = Cell::new(0);
        let out: Result<(), _> = with_retry(&fast(3), || {
            calls.set(calls.get() + 1);
            Err(TransportError::RateLimited {
                retry_after: None,
                message: "slow down".into(),
            })
        });
        assert!(matches!(out, Err(TransportError::RateLimited { .. })));
        assert_eq!(calls.get(), 3);
    }

    #[test]
    fn fatal_not_retried() {
        let calls = Cell::new(0);
        let out: Result<(), _> = with_retry(&fast(5), || {
            calls.set(calls.get() + 1);
            Err(TransportError::QuotaExceeded("Quota exceeded".into()))
        });
        assert_eq!(out, Err(TransportError::QuotaExceeded("Quota exceeded".into())));
        assert_eq!(calls.get(), 1);
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy {
            max_attempts: 5,
            base_delay_ms: 100,
            max_delay_ms: 350,
        };
        assert_eq!(p.delay(0, None), Duration::from_millis(100));
        assert_eq!(p.delay(1, None), Duration::from_millis(200));
        assert_eq!(p.delay(2, None), Duration::from_millis(350));
        assert_eq!(p.delay(70, None), Duration::from_millis(350));
        assert_eq!(p.delay(0, Some(Duration::from_millis(20))), Duration::from_millis(20));
    }

    #[test]
    fn status_classification() {
        assert!(matches!(
            classify_status(429, Some("2"), "slow"),
            TransportError::RateLimited { retry_after: Some(d), .. } if d == Duration::from_secs(2)
        ));
        assert_eq!(
            classify_status(456, None, "Quota exceeded. The character limit has been reached."),
            TransportError::QuotaExceeded("Quota exceeded. The character limit has been reached.".into())
        );
        assert!(matches!(
            classify_status(429, None, r#"{"error":{"code":"insufficient_quota"}}"#),
            TransportError::QuotaExceeded(_)
        ));
        assert!(matches!(classify_status(503, None, ""), TransportError::Transient(_)));
        assert!(matches!(
            classify_status(401, None, "bad key"),
            TransportError::Fatal { status: Some(401), .. }
        ));
    }
}
