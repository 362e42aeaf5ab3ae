use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{EmbedItem, EmbeddingProvider};

pub const DEFAULT_BATCH_SIZE: usize = 32;

#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    pub base_url: String,
    pub model_name: String,
    pub timeout: Duration,
    pub batch_size: usize,
}

/// Client for an embedding service speaking `POST /embed` and `GET /health`.
///
/// Texts are sent in batches of `batch_size`; a failed batch is retried once.
pub struct HttpProvider {
    agent: ureq::Agent,
    config: HttpProviderConfig,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: Vec<&'a str>,
    model_name: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
    dim: usize,
    #[allow(dead_code)]
    model_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    pub model_name: String,
    pub dim: usize,
}

const BODY_EXCERPT: usize = 200;

impl HttpProvider {
    pub fn new(config: HttpProviderConfig) -> Result<Self> {
        let url = config.base_url.trim_end_matches('/');
        let well_formed = url
            .strip_prefix("http://")
            .or_else(|| url.strip_prefix("https://"))
            .is_some_and(|rest| !rest.is_empty() && !rest.contains(char::is_whitespace));
        if !well_formed {
            return Err(Error::Argument(format!(
                "malformed base URL {:?}",
                config.base_url
            )));
        }
        if config.batch_size == 0 {
            return Err(Error::Argument("batch_size must be positive".into()));
        }
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build();
        Ok(HttpProvider {
            agent: ureq::Agent::new_with_config(agent_config),
            config: HttpProviderConfig {
                base_url: url.to_string(),
                ..config
            },
        })
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}{}", self.config.base_url, path)
    }

    pub fn health(&self) -> Result<HealthStatus> {
        let ctx = || format!("GET {}", self.endpoint("/health"));
        let mut resp = self
            .agent
            .get(&self.endpoint("/health"))
            .call()
            .map_err(|e| provider_error(ctx(), e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| provider_error(ctx(), e.to_string()))?;
        if status != 200 {
            return Err(provider_error(
                ctx(),
                format!("HTTP {status}: {}", excerpt(&body)),
            ));
        }
        serde_json::from_str(&body)
            .map_err(|e| provider_error(ctx(), format!("malformed JSON ({e}): {}", excerpt(&body))))
    }

    fn post_batch(&self, texts: Vec<&str>) -> std::result::Result<EmbedResponse, String> {
        let n = texts.len();
        let request = EmbedRequest {
            texts,
            model_name: &self.config.model_name,
        };
        let mut resp = self
            .agent
            .post(&self.endpoint("/embed"))
            .send_json(&request)
            .map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        if status != 200 {
            return Err(format!("HTTP {status}: {}", excerpt(&body)));
        }
        let parsed: EmbedResponse = serde_json::from_str(&body)
            .map_err(|e| format!("malformed JSON ({e}): {}", excerpt(&body)))?;
        if parsed.embeddings.len() != n {
            return Err(format!(
                "expected {n} embeddings, got {}",
                parsed.embeddings.len()
            ));
        }
        if let Some(bad) = parsed.embeddings.iter().find(|v| v.len() != parsed.dim) {
            return Err(format!(
                "response declares dim {} but contains a vector of length {}",
                parsed.dim,
                bad.len()
            ));
        }
        Ok(parsed)
    }
}

impl EmbeddingProvider for HttpProvider {
    fn model_name(&self) -> &str {
        &self.config.model_name
    }

    fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(items.len());
        let mut dim: Option<usize> = None;
        for batch in items.chunks(self.config.batch_size) {
            let context = format!(
                "POST {} for ids {}..{}",
                self.endpoint("/embed"),
                batch[0].id,
                batch[batch.len() - 1].id
            );
            let texts = || batch.iter().map(|i| i.text).collect::<Vec<_>>();
            let resp = match self.post_batch(texts()) {
                Ok(r) => r,
                Err(first) => {
                    log::warn!("{context} failed ({first}), retrying once");
                    self.post_batch(texts())
                        .map_err(|e| provider_error(context.clone(), e))?
                }
            };
            match dim {
                Some(d) if d != resp.dim => {
                    return Err(provider_error(
                        context,
                        format!("dim drifted between batches: {d} then {}", resp.dim),
                    ))
                }
                _ => dim = Some(resp.dim),
            }
            out.extend(resp.embeddings);
        }
        Ok(out)
    }
}

fn provider_error(context: String, message: String) -> Error {
    Error::Provider { context, message }
}

fn excerpt(body: &str) -> String {
    if body.chars().count() <= BODY_EXCERPT {
        body.to_string()
    } else {
        body.chars().take(BODY_EXCERPT).collect::<String>() + "..."
    }
}
