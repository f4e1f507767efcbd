use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{JourneyError, Result};

/// Token cap for generated names.
pub const NAME_TOKEN_LIMIT: usize = 64;
/// Number of salient terms the offline namer joins.
pub const OFFLINE_NAME_TERMS: usize = 3;

/// Body of a completion call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: usize,
    pub temperature: f64,
}

impl CompletionRequest {
    /// Greedy decoding with the name token cap.
    pub fn greedy(prompt: impl Into<String>) -> Self {
        Self {
            prompt: prompt.into(),
            max_tokens: NAME_TOKEN_LIMIT,
            temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResponse {
    pub text: String,
}

/// Anything that turns a prompt into completion text.
pub trait CompletionClient: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String>;
}

/// Minimal JSON completion endpoint client.
#[derive(Debug, Clone)]
pub struct HttpCompletionClient {
    endpoint: String,
    auth_token: Option<String>,
    timeout: Duration,
}

impl HttpCompletionClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            auth_token: None,
            timeout: Duration::from_secs(60),
        }
    }

    pub fn with_auth_token(mut self, token: Option<String>) -> Self {
        self.auth_token = token;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl CompletionClient for HttpCompletionClient {
    fn complete(&self, request: &CompletionRequest) -> Result<String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut call = agent.post(&self.endpoint);
        if let Some(token) = &self.auth_token {
            call = call.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = call.send_json(request).map_err(|e| JourneyError::Backend {
            status: None,
            message: e.to_string(),
        })?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            return Err(JourneyError::Backend {
                status: Some(status),
                message: body.chars().take(200).collect(),
            });
        }
        let parsed: CompletionResponse = response.body_mut().read_json().map_err(|e| JourneyError::Backend {
            status: Some(status),
            message: format!("malformed completion body: {e}"),
        })?;
        Ok(parsed.text)
    }
}

/// First non-empty line of a completion, trimmed and capped at
/// [`NAME_TOKEN_LIMIT`] whitespace tokens.
pub fn clean_completion(text: &str) -> String {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    line.split_whitespace().take(NAME_TOKEN_LIMIT).collect::<Vec<_>>().join(" ")
}
