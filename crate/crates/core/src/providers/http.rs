//! JSON-over-HTTP client for model servers.
//!
//! `POST {base}/translate` with `{"src", "tgt", "texts"}` answers
//! `{"translations": [...]}`; `POST {base}/fill-mask` with
//! `{"words", "mask_index", "top_k"}` answers `{"candidates": [...]}`.

use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{
    check_batch_len, FillMask, FillMaskRequest, FillMaskResponse, ProviderError,
    TranslationRequest, TranslationResponse, Translator,
};

/// Transport errors are retried with exponential backoff; protocol errors
/// are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            initial_backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpProvider {
    base_url: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl HttpProvider {
    pub fn new(base_url: &str, retry: RetryPolicy) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(retry.timeout).build();
        HttpProvider {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
            retry,
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        endpoint: &str,
        body: &Req,
    ) -> Result<Resp, ProviderError> {
        let url = format!("{}/{endpoint}", self.base_url);
        let mut backoff = self.retry.initial_backoff;
        let attempts = self.retry.attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.agent.post(&url).send_json(body) {
                Ok(resp) => {
                    return resp.into_json::<Resp>().map_err(|e| {
                        ProviderError::Protocol(format!("{url}: malformed response: {e}"))
                    });
                }
                Err(ureq::Error::Status(code, resp)) if code < 500 => {
                    let body = resp.into_string().unwrap_or_default();
                    return Err(ProviderError::Protocol(format!(
                        "{url}: HTTP {code}: {body}"
                    )));
                }
                Err(ureq::Error::Status(code, _)) => last = format!("{url}: HTTP {code}"),
                Err(e @ ureq::Error::Transport(_)) => last = e.to_string(),
            }
            if attempt < attempts {
                log::warn!("attempt {attempt}/{attempts} failed: {last}");
                thread::sleep(backoff);
                backoff *= 2;
            }
        }
        Err(ProviderError::Transport {
            attempts,
            message: last,
        })
    }
}

impl Translator for HttpProvider {
    fn name(&self) -> String {
        format!("http:{}", self.base_url)
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, ProviderError> {
        req.validate()?;
        let resp: TranslationResponse = self.post("translate", req)?;
        check_batch_len(req, resp.translations.len())?;
        Ok(resp.translations)
    }
}

impl FillMask for HttpProvider {
    fn name(&self) -> String {
        format!("http:{}", self.base_url)
    }

    fn fill_mask(&self, req: &FillMaskRequest) -> Result<Vec<String>, ProviderError> {
        req.validate()?;
        let resp: FillMaskResponse = self.post("fill-mask", req)?;
        Ok(resp.candidates)
    }
}
