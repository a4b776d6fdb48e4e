//! A deterministic synthetic language used as both translation and
//! fill-mask oracle.
//!
//! Translation is word-by-word through a lexicon, except for source bigrams
//! covered by a fusion rule, which become one target word. Fusion is applied
//! left to right, bigram before single word. The resulting target units are
//! then optionally reversed. Fill-mask proposes the other members of the
//! masked word's substitution class.
//!
//! Because each unit's image depends only on its own source words, swapping a
//! word for a member of its class changes exactly one target word, which gives
//! ground-truth alignments by construction. Lookup is case-insensitive.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{FillMask, FillMaskRequest, ProviderError, TranslationRequest, Translator};
use crate::corpus::{AlignmentSet, Sentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reorder {
    #[default]
    Identity,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionRule {
    pub source: [String; 2],
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SyntheticLanguageSpec {
    pub lexicon: BTreeMap<String, String>,
    #[serde(default)]
    pub fusion_rules: Vec<FusionRule>,
    #[serde(default)]
    pub reorder: Reorder,
    pub classes: BTreeMap<String, Vec<String>>,
}

impl SyntheticLanguageSpec {
    pub fn read(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ProviderError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Checks the class partition and lexicon coverage.
    pub fn validate(&self) -> Result<(), ProviderError> {
        let mut seen: HashMap<&str, &str> = HashMap::new();
        for (class, members) in &self.classes {
            for w in members {
                if let Some(prev) = seen.insert(w.as_str(), class.as_str()) {
                    return Err(ProviderError::Config(format!(
                        "word {w:?} belongs to classes {prev:?} and {class:?}"
                    )));
                }
                if !self.lexicon.contains_key(w) {
                    return Err(ProviderError::Config(format!(
                        "class {class:?} member {w:?} has no lexicon entry"
                    )));
                }
            }
        }
        let single =
            |w: &str| w.split_whitespace().count() == 1 && !w.contains(char::is_whitespace);
        for (word, target) in &self.lexicon {
            if !single(word) || !single(target) {
                return Err(ProviderError::Config(format!(
                    "lexicon entry {word:?} -> {target:?} must map one word to one word"
                )));
            }
        }
        for rule in &self.fusion_rules {
            if !rule.source.iter().all(|w| single(w)) || !single(&rule.target) {
                return Err(ProviderError::Config(format!(
                    "fusion rule {:?} -> {:?} must map two words to one word",
                    rule.source, rule.target
                )));
            }
        }
        Ok(())
    }

    /// Content hash, used as the provider's identity.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

/// One target word and the source positions it translates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub target: String,
    pub sources: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SyntheticProvider {
    spec: SyntheticLanguageSpec,
    lexicon: HashMap<String, String>,
    fusion: HashMap<(String, String), String>,
    class_of: HashMap<String, String>,
    classes: HashMap<String, Vec<String>>,
    digest: String,
}

impl SyntheticProvider {
    pub fn new(spec: SyntheticLanguageSpec) -> Result<Self, ProviderError> {
        spec.validate()?;
        let lexicon = spec
            .lexicon
            .iter()
            .map(|(k, v)| (k.to_lowercase(), v.clone()))
            .collect();
        let fusion = spec
            .fusion_rules
            .iter()
            .map(|r| {
                (
                    (r.source[0].to_lowercase(), r.source[1].to_lowercase()),
                    r.target.clone(),
                )
            })
            .collect();
        let mut class_of = HashMap::new();
        let mut classes = HashMap::new();
        for (name, members) in &spec.classes {
            let mut members: Vec<String> = members.iter().map(|m| m.to_lowercase()).collect();
            members.sort();
            members.dedup();
            for m in &members {
                class_of.insert(m.clone(), name.clone());
            }
            classes.insert(name.clone(), members);
        }
        let digest = spec.digest();
        Ok(SyntheticProvider {
            spec,
            lexicon,
            fusion,
            class_of,
            classes,
            digest,
        })
    }

    pub fn spec(&self) -> &SyntheticLanguageSpec {
        &self.spec
    }

    /// Segments `words` into target units in target order. Unknown words are
    /// copied through unless `strict`, in which case the first one is
    /// returned as the error.
    pub fn units(&self, words: &[String], strict: bool) -> Result<Vec<Unit>, String> {
        let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
        let mut units = Vec::with_capacity(words.len());
        let mut i = 0;
        while i < lower.len() {
            if i + 1 < lower.len() {
                if let Some(t) = self.fusion.get(&(lower[i].clone(), lower[i + 1].clone())) {
                    units.push(Unit {
                        target: t.clone(),
                        sources: vec![i, i + 1],
                    });
                    i += 2;
                    continue;
                }
            }
            let target = match self.lexicon.get(&lower[i]) {
                Some(t) => t.clone(),
                None if strict => return Err(words[i].clone()),
                None => words[i].clone(),
            };
            units.push(Unit {
                target,
                sources: vec![i],
            });
            i += 1;
        }
        if self.spec.reorder == Reorder::Reverse {
            units.reverse();
        }
        Ok(units)
    }

    pub fn translate_words(&self, words: &[String]) -> Vec<String> {
        self.units(words, false)
            .expect("non-strict translation is total")
            .into_iter()
            .map(|u| u.target)
            .collect()
    }

    pub fn translate_text(&self, text: &str) -> String {
        let words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        self.translate_words(&words).join(" ")
    }

    /// Class-mates of `word` other than itself, sorted.
    pub fn alternatives(&self, word: &str) -> Vec<String> {
        let lower = word.to_lowercase();
        match self.class_of.get(&lower) {
            Some(class) => self.classes[class]
                .iter()
                .filter(|m| **m != lower)
                .cloned()
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn class_size(&self, word: &str) -> usize {
        self.class_of
            .get(&word.to_lowercase())
            .map_or(1, |c| self.classes[c].len())
    }
}

impl Translator for SyntheticProvider {
    fn name(&self) -> String {
        format!("synthetic:{}", self.digest)
    }

    fn translate_batch(&self, req: &TranslationRequest) -> Result<Vec<String>, ProviderError> {
        req.validate()?;
        Ok(req.texts.iter().map(|t| self.translate_text(t)).collect())
    }
}

impl FillMask for SyntheticProvider {
    fn name(&self) -> String {
        format!("synthetic:{}", self.digest)
    }

    fn fill_mask(&self, req: &FillMaskRequest) -> Result<Vec<String>, ProviderError> {
        req.validate()?;
        let mut alts = self.alternatives(&req.words[req.mask_index]);
        alts.truncate(req.top_k);
        Ok(alts)
    }
}

/// Fill-mask against a spec: up to `top_k` class-mates of the masked word in
/// lexicographic order. Unknown words have no candidates.
pub fn synth_fill_mask(
    req: &FillMaskRequest,
    spec: &SyntheticLanguageSpec,
) -> Result<Vec<String>, ProviderError> {
    SyntheticProvider::new(spec.clone())?.fill_mask(req)
}

/// Ground-truth alignment of `source` to its synthetic translation. Both
/// words of a fused bigram link to the fused target word.
pub fn synth_truth_alignments(
    source: &Sentence,
    spec: &SyntheticLanguageSpec,
) -> Result<AlignmentSet, ProviderError> {
    SyntheticProvider::new(spec.clone())?.truth(source)
}

impl SyntheticProvider {
    pub fn truth(&self, source: &Sentence) -> Result<AlignmentSet, ProviderError> {
        let units = self.units(&source.words, true).map_err(|w| {
            ProviderError::Request(format!("word {w:?} is not covered by the synthetic spec"))
        })?;
        let mut set = AlignmentSet::new();
        for (tgt, unit) in units.iter().enumerate() {
            for &src in &unit.sources {
                set.insert_sure(src, tgt);
            }
        }
        Ok(set)
    }
}
