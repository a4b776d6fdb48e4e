//! Random synthetic languages with matching parallel corpora and
//! ground-truth alignments.
//!
//! Regular words are partitioned into substitution classes. When fusion is
//! enabled, one modifier class and one head class are added, and every
//! modifier+head bigram translates to a single fused target word. Modifiers
//! only occur directly before a head, so substituting within a class never
//! creates or breaks a fusion.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AlignmentSet, Sentence};
use crate::providers::synthetic::FusionRule;
use crate::providers::{ProviderError, Reorder, SyntheticLanguageSpec, SyntheticProvider};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// Regular (non-fusing) source words.
    pub words: usize,
    pub sentences: usize,
    /// Probability that a sentence slot holds a fused bigram.
    pub fusion: f64,
    pub reverse: bool,
    pub seed: u64,
    pub class_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub source_language: String,
    pub target_language: String,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            words: 50,
            sentences: 200,
            fusion: 0.1,
            reverse: false,
            seed: 0,
            class_size: 5,
            min_len: 4,
            max_len: 10,
            source_language: "src".into(),
            target_language: "tgt".into(),
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.words < self.class_size.max(1) {
            return Err(format!("need at least {} words", self.class_size.max(1)));
        }
        if self.class_size == 0 {
            return Err("class size must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.fusion) {
            return Err(format!("fusion probability {} not in [0, 1)", self.fusion));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(format!(
                "bad sentence length range {}..={}",
                self.min_len, self.max_len
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub spec: SyntheticLanguageSpec,
    pub sources: Vec<Sentence>,
    pub targets: Vec<Sentence>,
    pub truth: Vec<AlignmentSet>,
}

const SRC_ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "st", "tr",
];
const SRC_NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai"];
const TGT_ONSETS: &[&str] = &[
    "c", "h", "j", "k", "l", "m", "n", "q", "r", "sh", "w", "x", "y", "ch", "th", "kv",
];
const TGT_NUCLEI: &[&str] = &["a", "o", "u", "ä", "ö", "ü", "ei"];

struct WordMaker {
    onsets: &'static [&'static str],
    nuclei: &'static [&'static str],
    used: BTreeSet<String>,
}

impl WordMaker {
    fn new(onsets: &'static [&'static str], nuclei: &'static [&'static str]) -> Self {
        WordMaker {
            onsets,
            nuclei,
            used: BTreeSet::new(),
        }
    }

    fn make(&mut self, rng: &mut ChaCha8Rng) -> String {
        let mut syllables = 2;
        loop {
            for _ in 0..20 {
                let w: String = (0..syllables)
                    .map(|_| {
                        format!(
                            "{}{}",
                            self.onsets.choose(rng).expect("non-empty"),
                            self.nuclei.choose(rng).expect("non-empty")
                        )
                    })
                    .collect();
                if self.used.insert(w.clone()) {
                    return w;
                }
            }
            syllables += 1;
        }
    }
}

/// Builds a language and corpus from `params`. Identical parameters give
/// identical output.
pub fn generate(params: &SynthParams) -> Result<SynthCorpus, String> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut src_words = WordMaker::new(SRC_ONSETS, SRC_NUCLEI);
    let mut tgt_words = WordMaker::new(TGT_ONSETS, TGT_NUCLEI);

    let mut lexicon = BTreeMap::new();
    let mut regular = Vec::with_capacity(params.words);
    for _ in 0..params.words {
        let s = src_words.make(&mut rng);
        lexicon.insert(s.clone(), tgt_words.make(&mut rng));
        regular.push(s);
    }

    let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut shuffled = regular.clone();
    shuffled.shuffle(&mut rng);
    let mut chunks: Vec<Vec<String>> = shuffled
        .chunks(params.class_size)
        .map(<[String]>::to_vec)
        .collect();
    if chunks.len() > 1 && chunks.last().is_some_and(|c| c.len() < params.class_size) {
        let tail = chunks.pop().expect("checked");
        chunks.last_mut().expect("checked").extend(tail);
    }
    for (i, c) in chunks.into_iter().enumerate() {
        classes.insert(format!("c{i:03}"), c);
    }

    let mut fusion_rules = Vec::new();
    let mut modifiers = Vec::new();
    let mut heads = Vec::new();
    if params.fusion > 0.0 {
        for _ in 0..params.class_size {
            let m = src_words.make(&mut rng);
            lexicon.insert(m.clone(), tgt_words.make(&mut rng));
            modifiers.push(m);
            let h = src_words.make(&mut rng);
            lexicon.insert(h.clone(), tgt_words.make(&mut rng));
            heads.push(h);
        }
        for m in &modifiers {
            for h in &heads {
                fusion_rules.push(FusionRule {
                    source: [m.clone(), h.clone()],
                    target: tgt_words.make(&mut rng),
                });
            }
        }
        classes.insert("fusion_head".into(), heads.clone());
        classes.insert("fusion_modifier".into(), modifiers.clone());
    }

    let spec = SyntheticLanguageSpec {
        lexicon,
        fusion_rules,
        reorder: if params.reverse {
            Reorder::Reverse
        } else {
            Reorder::Identity
        },
        classes,
    };
    let provider =
        SyntheticProvider::new(spec.clone()).map_err(|e: ProviderError| e.to_string())?;

    // Zipf-like word frequencies.
    let weights: Vec<f64> = (1..=regular.len()).map(|r| 1.0 / r as f64).collect();
    let zipf = WeightedIndex::new(&weights).map_err(|e| e.to_string())?;

    let mut sources = Vec::with_capacity(params.sentences);
    let mut targets = Vec::with_capacity(params.sentences);
    let mut truth = Vec::with_capacity(params.sentences);
    for _ in 0..params.sentences {
        let len = rng.gen_range(params.min_len..=params.max_len);
        let mut words: Vec<String> = Vec::with_capacity(len);
        while words.len() < len {
            if params.fusion > 0.0 && words.len() + 2 <= len && rng.gen_bool(params.fusion) {
                words.push(modifiers.choose(&mut rng).expect("non-empty").clone());
                words.push(heads.choose(&mut rng).expect("non-empty").clone());
            } else {
                words.push(regular[zipf.sample(&mut rng)].clone());
            }
        }
        let source = Sentence::new(words, &params.source_language);
        let target = Sentence::new(
            provider.translate_words(&source.words),
            &params.target_language,
        );
        truth.push(provider.truth(&source).map_err(|e| e.to_string())?);
        sources.push(source);
        targets.push(target);
    }
    Ok(SynthCorpus {
        spec,
        sources,
        targets,
        truth,
    })
}
