//! Minimal-pair alternatives: one masked position at a time.

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::providers::{FillMask, FillMaskRequest, ProviderError};

/// Candidates requested from the provider per wanted alternative; filtering
/// discards some of them.
pub const OVERSAMPLE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternativeSet {
    pub position: usize,
    pub original: String,
    pub candidates: Vec<String>,
}

/// Drops the original word (ignoring case), continuation pieces (`##`),
/// pure punctuation, empty or multi-word strings and duplicates, then keeps
/// at most `k`.
pub fn filter_candidates(original: &str, raw: Vec<String>, k: usize) -> Vec<String> {
    let original = original.to_lowercase();
    let mut out: Vec<String> = Vec::with_capacity(k);
    for c in raw {
        let c = c.trim().to_string();
        if c.is_empty()
            || c.contains(char::is_whitespace)
            || c.starts_with("##")
            || !c.chars().any(char::is_alphanumeric)
            || c.to_lowercase() == original
            || out.contains(&c)
        {
            continue;
        }
        out.push(c);
        if out.len() == k {
            break;
        }
    }
    out
}

pub fn generate_alternatives(
    sentence: &Sentence,
    position: usize,
    k: usize,
    provider: &dyn FillMask,
) -> Result<AlternativeSet, ProviderError> {
    if position >= sentence.len() {
        return Err(ProviderError::Request(format!(
            "position {position} out of range for {} words",
            sentence.len()
        )));
    }
    if k == 0 {
        return Err(ProviderError::Request("k must be at least 1".into()));
    }
    let req = FillMaskRequest {
        words: sentence.words.clone(),
        mask_index: position,
        top_k: k * OVERSAMPLE,
    };
    let original = sentence.words[position].clone();
    let candidates = filter_candidates(&original, provider.fill_mask(&req)?, k);
    Ok(AlternativeSet {
        position,
        original,
        candidates,
    })
}

/// The sentence with `words[position]` replaced by `candidate`.
pub fn realize(sentence: &Sentence, position: usize, candidate: &str) -> Sentence {
    let mut out = sentence.clone();
    out.words[position] = candidate.to_string();
    out
}
