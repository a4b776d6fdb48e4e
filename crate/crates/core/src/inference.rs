//! Silver link inference from minimal pairs.
//!
//! For every source position, each alternative sentence is translated and
//! compared position by position with the base translation. An alternative
//! is valid when the translation keeps its length and exactly one target
//! word changes. A position is aligned to target word `j` when at least
//! `min_valid` alternatives are valid and all of them changed `j`.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AlignmentSet, Sentence, SentencePair, SilverRecord};
use crate::minpair::{generate_alternatives, realize, AlternativeSet};
use crate::providers::{FillMask, ProviderError, TranslationRequest, Translator};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Alternatives requested per source word.
    pub k: usize,
    /// Valid alternatives required before a link is emitted.
    pub min_valid: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig { k: 5, min_valid: 4 }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.min_valid == 0 || self.min_valid > self.k {
            return Err(InferenceError::Usage(format!(
                "need 1 <= min_valid <= k, got min_valid={} k={}",
                self.min_valid, self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionStatus {
    Aligned,
    NoCandidates,
    TooFewValid,
    InconsistentChange,
    MultiWordChange,
}

impl PositionStatus {
    pub const ALL: [PositionStatus; 5] = [
        PositionStatus::Aligned,
        PositionStatus::NoCandidates,
        PositionStatus::TooFewValid,
        PositionStatus::InconsistentChange,
        PositionStatus::MultiWordChange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PositionStatus::Aligned => "aligned",
            PositionStatus::NoCandidates => "no_candidates",
            PositionStatus::TooFewValid => "too_few_valid",
            PositionStatus::InconsistentChange => "inconsistent_change",
            PositionStatus::MultiWordChange => "multi_word_change",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionOutcome {
    pub position: usize,
    pub proposed: usize,
    pub valid: usize,
    pub changed_target: Option<usize>,
    pub status: PositionStatus,
}

impl PositionOutcome {
    pub fn no_candidates(position: usize) -> Self {
        PositionOutcome {
            position,
            proposed: 0,
            valid: 0,
            changed_target: None,
            status: PositionStatus::NoCandidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslationDiff {
    LengthMismatch,
    Changed(BTreeSet<usize>),
}

impl TranslationDiff {
    /// The changed index when exactly one word changed.
    pub fn single(&self) -> Option<usize> {
        match self {
            TranslationDiff::Changed(set) if set.len() == 1 => set.iter().next().copied(),
            _ => None,
        }
    }
}

/// Positions whose words differ, by exact string comparison.
pub fn diff_translation(base: &Sentence, alt: &Sentence) -> TranslationDiff {
    if base.len() != alt.len() {
        return TranslationDiff::LengthMismatch;
    }
    TranslationDiff::Changed(
        base.words
            .iter()
            .zip(&alt.words)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// Decides the link for one source position. `translations[i]` must be the
/// translation of the source with `candidates[i]` substituted.
///
/// With fewer than `min_valid` valid alternatives the status is
/// `MultiWordChange` if some alternative kept the length but changed several
/// words, else `TooFewValid`.
pub fn infer_link_for_position(
    pair: &SentencePair,
    alts: &AlternativeSet,
    translations: &[Sentence],
    cfg: &InferenceConfig,
) -> Result<PositionOutcome, InferenceError> {
    if translations.len() != alts.candidates.len() {
        return Err(InferenceError::Usage(format!(
            "{} candidates but {} translations",
            alts.candidates.len(),
            translations.len()
        )));
    }
    if alts.candidates.is_empty() {
        return Ok(PositionOutcome::no_candidates(alts.position));
    }
    let diffs: Vec<TranslationDiff> = translations
        .iter()
        .map(|t| diff_translation(&pair.target, t))
        .collect();
    let singles: Vec<usize> = diffs.iter().filter_map(TranslationDiff::single).collect();
    let multi = diffs
        .iter()
        .any(|d| matches!(d, TranslationDiff::Changed(s) if s.len() > 1));
    let mut outcome = PositionOutcome {
        position: alts.position,
        proposed: alts.candidates.len(),
        valid: singles.len(),
        changed_target: None,
        status: PositionStatus::TooFewValid,
    };
    if singles.len() < cfg.min_valid {
        if multi {
            outcome.status = PositionStatus::MultiWordChange;
        }
    } else if singles.iter().any(|&j| j != singles[0]) {
        outcome.status = PositionStatus::InconsistentChange;
    } else {
        outcome.status = PositionStatus::Aligned;
        outcome.changed_target = Some(singles[0]);
    }
    Ok(outcome)
}

/// Merges per-position outcomes into the sentence's silver links.
pub fn build_silver_sentence(pair: &SentencePair, outcomes: Vec<PositionOutcome>) -> SilverRecord {
    let links = outcomes
        .iter()
        .filter(|o| o.status == PositionStatus::Aligned)
        .filter_map(|o| o.changed_target.map(|t| (o.position, t)))
        .collect::<Vec<_>>();
    SilverRecord {
        pair: pair.clone(),
        links: AlignmentSet::from_pairs(links),
        provenance: outcomes,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedSentence {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YieldStats {
    pub sentences: usize,
    pub aligned_sentences: usize,
    pub links: usize,
    pub positions: usize,
    pub status_histogram: BTreeMap<String, usize>,
    pub skipped: Vec<SkippedSentence>,
}

impl Default for YieldStats {
    fn default() -> Self {
        YieldStats {
            sentences: 0,
            aligned_sentences: 0,
            links: 0,
            positions: 0,
            status_histogram: PositionStatus::ALL
                .iter()
                .map(|s| (s.as_str().to_string(), 0))
                .collect(),
            skipped: Vec::new(),
        }
    }
}

impl YieldStats {
    /// Fraction of processed source positions that received a link.
    pub fn position_yield(&self) -> f64 {
        if self.positions == 0 {
            return 0.0;
        }
        self.status_histogram[PositionStatus::Aligned.as_str()] as f64 / self.positions as f64
    }

    fn record(&mut self, rec: &SilverRecord) {
        self.positions += rec.provenance.len();
        self.links += rec.links.len();
        if !rec.links.is_empty() {
            self.aligned_sentences += 1;
        }
        for o in &rec.provenance {
            *self
                .status_histogram
                .entry(o.status.as_str().to_string())
                .or_default() += 1;
        }
    }
}

/// The providers and settings for one silver run.
pub struct SilverPipeline<'a> {
    pub mt: &'a dyn Translator,
    pub mlm: &'a dyn FillMask,
    pub cfg: InferenceConfig,
    pub target_language: String,
}

impl SilverPipeline<'_> {
    fn translate(
        &self,
        source_language: &str,
        texts: Vec<String>,
    ) -> Result<Vec<Sentence>, ProviderError> {
        let req = TranslationRequest::new(source_language, &self.target_language, texts);
        Ok(self
            .mt
            .translate_batch(&req)?
            .iter()
            .map(|t| Sentence::from_text(t, &self.target_language))
            .collect())
    }

    fn position(
        &self,
        pair: &SentencePair,
        position: usize,
    ) -> Result<PositionOutcome, InferenceError> {
        let alts = generate_alternatives(&pair.source, position, self.cfg.k, self.mlm)?;
        if alts.candidates.is_empty() {
            return Ok(PositionOutcome::no_candidates(position));
        }
        let texts = alts
            .candidates
            .iter()
            .map(|c| realize(&pair.source, position, c).text())
            .collect();
        let translations = self.translate(&pair.source.language, texts)?;
        infer_link_for_position(pair, &alts, &translations, &self.cfg)
    }

    /// Runs all steps for one sentence.
    pub fn sentence(&self, id: &str, source: &Sentence) -> Result<SilverRecord, InferenceError> {
        let target = self
            .translate(&source.language, vec![source.text()])?
            .pop()
            .expect("one translation per text");
        if target.is_empty() {
            return Err(
                ProviderError::Protocol(format!("empty translation for sentence {id}")).into(),
            );
        }
        let pair = SentencePair {
            id: id.to_string(),
            source: source.clone(),
            target,
        };
        let outcomes = (0..pair.source.len())
            .into_par_iter()
            .map(|p| self.position(&pair, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(build_silver_sentence(&pair, outcomes))
    }

    /// Processes a monolingual corpus. Sentences whose provider calls fail
    /// are listed in the stats and left out of the records. Output order
    /// follows input order regardless of the thread pool.
    pub fn run(
        &self,
        mono: &[(String, Sentence)],
    ) -> Result<(Vec<SilverRecord>, YieldStats), InferenceError> {
        self.cfg.validate()?;
        let results: Vec<Result<SilverRecord, InferenceError>> = mono
            .par_iter()
            .map(|(id, s)| self.sentence(id, s))
            .collect();
        let mut stats = YieldStats {
            sentences: mono.len(),
            ..YieldStats::default()
        };
        let mut records = Vec::with_capacity(results.len());
        for ((id, _), r) in mono.iter().zip(results) {
            match r {
                Ok(rec) => {
                    stats.record(&rec);
                    records.push(rec);
                }
                Err(InferenceError::Usage(msg)) => return Err(InferenceError::Usage(msg)),
                Err(e) => stats.skipped.push(SkippedSentence {
                    id: id.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        Ok((records, stats))
    }
}

/// Translate, generate alternatives, translate them, infer and merge for
/// every sentence of `mono`.
pub fn create_silver_dataset(
    mono: &[(String, Sentence)],
    mt: &dyn Translator,
    mlm: &dyn FillMask,
    cfg: &InferenceConfig,
    target_language: &str,
) -> Result<(Vec<SilverRecord>, YieldStats), InferenceError> {
    SilverPipeline {
        mt,
        mlm,
        cfg: *cfg,
        target_language: target_language.to_string(),
    }
    .run(mono)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Sentence {
        Sentence::from_text(text, "x")
    }

    fn changed(ix: &[usize]) -> TranslationDiff {
        TranslationDiff::Changed(ix.iter().copied().collect())
    }

    #[test]
    fn diff_examples() {
        assert_eq!(
            diff_translation(&s("er kauft fußballschuhe"), &s("mike kauft fußballschuhe")),
            changed(&[0])
        );
        assert_eq!(diff_translation(&s("a b"), &s("a b")), changed(&[]));
        assert_eq!(
            diff_translation(&s("a b c"), &s("a b c d")),
            TranslationDiff::LengthMismatch
        );
    }

    fn pair() -> SentencePair {
        SentencePair {
            id: "1".into(),
            source: s("he buys football shoes"),
            target: s("er kauft fußballschuhe"),
        }
    }

    fn alts(n: usize) -> AlternativeSet {
        AlternativeSet {
            position: 0,
            original: "he".into(),
            candidates: (0..n).map(|i| format!("c{i}")).collect(),
        }
    }

    #[test]
    fn all_valid_aligns() {
        let tr: Vec<Sentence> = ["a", "b", "c", "d", "e"]
            .iter()
            .map(|w| s(&format!("{w} kauft fußballschuhe")))
            .collect();
        let o =
            infer_link_for_position(&pair(), &alts(5), &tr, &InferenceConfig::default()).unwrap();
        assert_eq!(o.status, PositionStatus::Aligned);
        assert_eq!(o.changed_target, Some(0));
        assert_eq!((o.proposed, o.valid), (5, 5));
    }

    #[test]
    fn too_few_valid() {
        let tr = vec![
            s("a kauft fußballschuhe"),
            s("b kauft fußballschuhe"),
            s("c kauft fußballschuhe"),
            s("d kauft fußball schuhe"),
            s("e kauft fußball schuhe"),
        ];
        let o =
            infer_link_for_position(&pair(), &alts(5), &tr, &InferenceConfig::default()).unwrap();
        assert_eq!(o.status, PositionStatus::TooFewValid);
        assert_eq!(o.valid, 3);
        assert_eq!(o.changed_target, None);
    }

    #[test]
    fn disagreeing_singletons_are_inconsistent() {
        let tr = vec![
            s("er x fußballschuhe"),
            s("er y fußballschuhe"),
            s("er z fußballschuhe"),
            s("er kauft q"),
            s("er w fußballschuhe"),
        ];
        let o =
            infer_link_for_position(&pair(), &alts(5), &tr, &InferenceConfig::default()).unwrap();
        assert_eq!(o.status, PositionStatus::InconsistentChange);
        assert_eq!(o.valid, 5);
        assert_eq!(o.changed_target, None);
    }

    #[test]
    fn unchanged_and_multiword_diffs_are_invalid() {
        let tr = vec![
            s("er kauft fußballschuhe"),
            s("a b fußballschuhe"),
            s("c kauft fußballschuhe"),
            s("d kauft fußballschuhe"),
            s("e kauft fußballschuhe"),
        ];
        let o =
            infer_link_for_position(&pair(), &alts(5), &tr, &InferenceConfig::default()).unwrap();
        assert_eq!(o.valid, 3);
        assert_eq!(o.status, PositionStatus::MultiWordChange);
        let lenient = InferenceConfig { k: 5, min_valid: 3 };
        let o = infer_link_for_position(&pair(), &alts(5), &tr, &lenient).unwrap();
        assert_eq!(o.status, PositionStatus::Aligned);
    }

    #[test]
    fn parallel_lists_must_match() {
        let r = infer_link_for_position(
            &pair(),
            &alts(2),
            &[s("a b c")],
            &InferenceConfig::default(),
        );
        assert!(matches!(r, Err(InferenceError::Usage(_))));
    }

    fn aligned(position: usize, t: usize) -> PositionOutcome {
        PositionOutcome {
            position,
            proposed: 5,
            valid: 5,
            changed_target: Some(t),
            status: PositionStatus::Aligned,
        }
    }

    #[test]
    fn merge_keeps_many_to_one() {
        let rec = build_silver_sentence(
            &pair(),
            vec![aligned(0, 0), aligned(1, 1), aligned(2, 2), aligned(3, 2)],
        );
        assert_eq!(
            rec.links,
            AlignmentSet::from_pairs([(0, 0), (1, 1), (2, 2), (3, 2)])
        );
        assert_eq!(rec.provenance.len(), 4);

        let none = build_silver_sentence(
            &pair(),
            (0..4).map(PositionOutcome::no_candidates).collect(),
        );
        assert!(none.links.is_empty());

        let single = SentencePair {
            id: "2".into(),
            source: s("he"),
            target: s("er"),
        };
        assert_eq!(
            build_silver_sentence(&single, vec![aligned(0, 0)]).links,
            AlignmentSet::from_pairs([(0, 0)])
        );
    }

    #[test]
    fn config_validation() {
        assert!(InferenceConfig { k: 5, min_valid: 6 }.validate().is_err());
        assert!(InferenceConfig { k: 5, min_valid: 0 }.validate().is_err());
        assert!(InferenceConfig { k: 1, min_valid: 1 }.validate().is_ok());
    }
}
