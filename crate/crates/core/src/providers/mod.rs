//! Translation and fill-mask capabilities.
//!
//! Both capabilities sit behind small traits so the pipeline is agnostic to
//! whether it talks to a model server over HTTP ([`http::HttpProvider`]) or
//! to the deterministic synthetic language ([`synthetic::SyntheticProvider`]).

pub mod cache;
pub mod http;
pub mod synthetic;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::CachedTranslator;
pub use http::{HttpProvider, RetryPolicy};
pub use synthetic::{
    synth_fill_mask, synth_truth_alignments, Reorder, SyntheticLanguageSpec, SyntheticProvider,
};

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    Request(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("cache error: {0}")]
    Cache(String),
}

/// Wire format of the translate endpoint request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRequest {
    #[serde(rename = "src")]
    pub source_language: String,
    #[serde(rename = "tgt")]
    pub target_language: String,
    pub texts: Vec<String>,
}

impl TranslationRequest {
    pub fn new(source_language: &str, target_language: &str, texts: Vec<String>) -> Self {
        TranslationRequest {
            source_language: source_language.to_string(),
            target_language: target_language.to_string(),
            texts,
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.texts.is_empty() {
            return Err(ProviderError::Request("no texts to translate".into()));
        }
        if let Some(i) = self.texts.iter().position(|t| t.trim().is_empty()) {
            return Err(ProviderError::Request(format!("text {i} is empty")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationResponse {
    pub translations: Vec<String>,
}

/// Wire format of the fill-mask endpoint request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillMaskRequest {
    pub words: Vec<String>,
    pub mask_index: usize,
    pub top_k: usize,
}

impl FillMaskRequest {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.mask_index >= self.words.len() {
            return Err(ProviderError::Request(format!(
                "mask_index {} out of range for {} words",
                self.mask_index,
                self.words.len()
            )));
        }
        if self.top_k == 0 {
            return Err(ProviderError::Request("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillMaskResponse {
    pub candidates: Vec<String>,
}

pub trait Translator: Send + Sync {
    /// Stable identity used in cache keys.
    fn name(&self) -> String;

    /// Returns exactly one translation per input text, in order.
    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, ProviderError>;
}

pub trait FillMask: Send + Sync {
    fn name(&self) -> String;

    fn fill_mask(&self, req: &FillMaskRequest) -> Result<Vec<String>, ProviderError>;
}

/// Checks a batch response against its request.
pub(crate) fn check_batch_len(req: &TranslationRequest, got: usize) -> Result<(), ProviderError> {
    if got != req.texts.len() {
        return Err(ProviderError::Protocol(format!(
            "requested {} translations, received {got}",
            req.texts.len()
        )));
    }
    Ok(())
}

/// Provider selection as given on the command line: `synthetic:<specfile>`
/// or `http:<base-url>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProviderSelection {
    Synthetic(PathBuf),
    Http(String),
}

impl std::str::FromStr for ProviderSelection {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(path) = s.strip_prefix("synthetic:") {
            if path.is_empty() {
                return Err(ProviderError::Config(
                    "synthetic provider needs a spec file".into(),
                ));
            }
            Ok(ProviderSelection::Synthetic(PathBuf::from(path)))
        } else if let Some(url) = s.strip_prefix("http:") {
            // Accept both `http:host:port` and `http:http://host:port`.
            let url = if url.starts_with("http://") || url.starts_with("https://") {
                url.to_string()
            } else {
                format!("http:{url}")
            };
            Ok(ProviderSelection::Http(url))
        } else {
            Err(ProviderError::Config(format!(
                "unknown provider {s:?}; expected synthetic:<specfile> or http:<base-url>"
            )))
        }
    }
}

impl std::fmt::Display for ProviderSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProviderSelection::Synthetic(p) => write!(f, "synthetic:{}", p.display()),
            ProviderSelection::Http(u) => write!(f, "http:{u}"),
        }
    }
}

/// Options shared by provider construction.
#[derive(Debug, Clone, Default)]
pub struct ProviderOptions {
    /// On-disk translation cache; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    pub retry: RetryPolicy,
}

fn load_synthetic(path: &Path) -> Result<Arc<SyntheticProvider>, ProviderError> {
    let spec = SyntheticLanguageSpec::read(path)?;
    Ok(Arc::new(SyntheticProvider::new(spec)?))
}

/// Builds a translator. Only HTTP translators are cached; the synthetic
/// language is computed locally.
pub fn build_translator(
    sel: &ProviderSelection,
    opts: &ProviderOptions,
) -> Result<Arc<dyn Translator>, ProviderError> {
    match sel {
        ProviderSelection::Synthetic(path) => Ok(load_synthetic(path)?),
        ProviderSelection::Http(url) => {
            let http = HttpProvider::new(url, opts.retry.clone());
            match &opts.cache_dir {
                Some(dir) => Ok(Arc::new(CachedTranslator::open(http, dir)?)),
                None => Ok(Arc::new(http)),
            }
        }
    }
}

pub fn build_fill_mask(
    sel: &ProviderSelection,
    opts: &ProviderOptions,
) -> Result<Arc<dyn FillMask>, ProviderError> {
    match sel {
        ProviderSelection::Synthetic(path) => Ok(load_synthetic(path)?),
        ProviderSelection::Http(url) => Ok(Arc::new(HttpProvider::new(url, opts.retry.clone()))),
    }
}
