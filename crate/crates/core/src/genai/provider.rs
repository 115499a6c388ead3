use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::generate::{parse_slot_requests, GENERATION_MARKER};
use crate::tags::CATEGORIES;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagePayload {
    pub media_type: String,
    pub data_base64: String,
}

/// Wire request: one prompt plus images, answered with one text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderRequest {
    pub model: String,
    pub prompt: String,
    pub images: Vec<ImagePayload>,
    pub max_tokens: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderResponse {
    pub text: String,
}

pub trait ModelProvider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse>;
}

fn digest_hex(request: &ProviderRequest, salt: &str) -> String {
    let mut h = Sha256::new();
    h.update(request.model.as_bytes());
    h.update([0]);
    h.update(Sha256::digest(request.prompt.as_bytes()));
    for image in &request.images {
        h.update(image.media_type.as_bytes());
        h.update([0]);
        h.update(image.data_base64.as_bytes());
        h.update([0]);
    }
    h.update(salt.as_bytes());
    let bytes = h.finalize();
    bytes[..6].iter().map(|b| format!("{b:02x}")).collect()
}

/// Offline provider whose answers are a pure function of the request.
///
/// * generation prompts get one `[n] DESC[<slot start>]:<digest>` line per
///   requested slot;
/// * tagging prompts get a valid keyword list and one custom keyword;
/// * anything else is treated as a revision and answered with
///   `REVISED:<digest>`.
#[derive(Debug, Default)]
pub struct MockProvider {
    calls: AtomicUsize,
    fail_on_call: Option<usize>,
}

impl MockProvider {
    pub fn new() -> Self {
        Self::default()
    }

    /// A mock whose `n`-th call (1-based) fails with `ProviderFailure`.
    pub fn failing_on_call(n: usize) -> Self {
        MockProvider {
            calls: AtomicUsize::new(0),
            fail_on_call: Some(n),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn answer(request: &ProviderRequest) -> String {
        if request.prompt.contains(GENERATION_MARKER) {
            return parse_slot_requests(&request.prompt)
                .into_iter()
                .map(|(n, start_ms)| {
                    let d = digest_hex(request, &n.to_string());
                    format!("[{n}] DESC[{start_ms}]:{d}")
                })
                .collect::<Vec<_>>()
                .join("\n");
        }
        if request.prompt.contains("additional_keywords") {
            let d = Sha256::digest(request.prompt.as_bytes());
            let picks: Vec<String> = (0..4)
                .map(|i| {
                    let c = CATEGORIES[(d[0] as usize + i * 3) % CATEGORIES.len()];
                    let ks = c.keywords();
                    format!("\"{}\"", ks[d[i + 1] as usize % ks.len()])
                })
                .collect();
            return format!(
                "[{}]\n[\"mock-{:02x}{:02x}\"]",
                picks.join(", "),
                d[5],
                d[6]
            );
        }
        format!("REVISED:{}", digest_hex(request, "revise"))
    }
}

impl ModelProvider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
        if self.fail_on_call == Some(n) {
            return Err(Error::ProviderFailure(format!("mock failure on call {n}")));
        }
        Ok(ProviderResponse {
            text: Self::answer(request),
        })
    }
}

/// One entry of the providers config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub name: String,
    pub endpoint: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
}

fn default_timeout_secs() -> u64 {
    120
}

fn default_max_tokens() -> u32 {
    1024
}

/// JSON-over-HTTP provider: POSTs the [`ProviderRequest`] and expects a
/// [`ProviderResponse`] body. Transport errors and 5xx replies are retried
/// once.
pub struct HttpProvider {
    config: ProviderConfig,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            Error::InvalidInput(format!(
                "environment variable `{}` is not set",
                config.api_key_env
            ))
        })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::ProviderFailure(e.to_string()))?;
        Ok(HttpProvider {
            config,
            api_key,
            client,
        })
    }

    pub fn model(&self) -> &str {
        &self.config.model
    }

    pub fn max_tokens(&self) -> u32 {
        self.config.max_tokens
    }

    fn attempt(
        &self,
        request: &ProviderRequest,
    ) -> std::result::Result<ProviderResponse, (bool, String)> {
        let reply = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.api_key)
            .json(request)
            .send()
            .map_err(|e| (true, e.to_string()))?;
        let status = reply.status();
        if !status.is_success() {
            let body = reply.text().unwrap_or_default();
            return Err((status.is_server_error(), format!("HTTP {status}: {body}")));
        }
        reply
            .json::<ProviderResponse>()
            .map_err(|e| (false, format!("bad response body: {e}")))
    }
}

impl ModelProvider for HttpProvider {
    fn name(&self) -> &str {
        &self.config.name
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse> {
        let mut request = request.clone();
        request.model.clone_from(&self.config.model);
        match self.attempt(&request) {
            Ok(r) => Ok(r),
            Err((true, first)) => {
                log::warn!(
                    "provider `{}` failed ({first}); retrying once",
                    self.config.name
                );
                self.attempt(&request)
                    .map_err(|(_, e)| Error::ProviderFailure(e))
            }
            Err((false, e)) => Err(Error::ProviderFailure(e)),
        }
    }
}
