//! Alignment metrics and breakdowns.
//!
//! Scores are micro-averaged: link counts are summed over the corpus before
//! dividing. With sure links `S`, possible links `P ⊇ S` and predictions `A`:
//!
//! ```text
//! precision = |A ∩ P| / |A|
//! recall    = |A ∩ S| / |S|
//! F1        = 2 · precision · recall / (precision + recall)
//! AER       = 1 − (|A ∩ S| + |A ∩ P|) / (|A| + |S|)
//! ```
//!
//! Empty denominators give 0 and set the `degenerate` flag.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AlignmentSet, AnnotationSidecar, SentencePair};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{predicted} predicted sentences but {gold} gold sentences")]
    LengthMismatch { predicted: usize, gold: usize },
    #[error("correlation undefined: {0}")]
    Undefined(String),
}

/// Raw link counts, summable across sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCounts {
    pub predicted: usize,
    pub sure: usize,
    pub possible: usize,
    pub predicted_and_sure: usize,
    pub predicted_and_possible: usize,
    pub sentences: usize,
}

impl LinkCounts {
    pub fn of(pred: &AlignmentSet, gold: &AlignmentSet) -> Self {
        LinkCounts {
            predicted: pred.len(),
            sure: gold.sure_len(),
            possible: gold.len(),
            predicted_and_sure: pred.pairs().filter(|&(s, t)| gold.is_sure(s, t)).count(),
            predicted_and_possible: pred.pairs().filter(|&(s, t)| gold.contains(s, t)).count(),
            sentences: 1,
        }
    }

    pub fn add(&mut self, other: &LinkCounts) {
        self.predicted += other.predicted;
        self.sure += other.sure;
        self.possible += other.possible;
        self.predicted_and_sure += other.predicted_and_sure;
        self.predicted_and_possible += other.predicted_and_possible;
        self.sentences += other.sentences;
    }

    pub fn report(&self) -> EvalReport {
        let precision = ratio(self.predicted_and_possible, self.predicted);
        let recall = ratio(self.predicted_and_sure, self.sure);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let aer_denominator = self.predicted + self.sure;
        let aer = if aer_denominator == 0 {
            0.0
        } else {
            1.0 - (self.predicted_and_sure + self.predicted_and_possible) as f64
                / aer_denominator as f64
        };
        EvalReport {
            precision,
            recall,
            f1,
            aer,
            counts: *self,
            degenerate: self.predicted == 0 || self.sure == 0,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub aer: f64,
    pub counts: LinkCounts,
    /// Set when `|A| = 0` or `|S| = 0`.
    pub degenerate: bool,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.counts;
        writeln!(f, "{:<12}{:>10}", "metric", "value")?;
        for (name, v) in [
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("aer", self.aer),
        ] {
            writeln!(f, "{name:<12}{v:>10.4}")?;
        }
        for (name, v) in [
            ("|A|", c.predicted),
            ("|S|", c.sure),
            ("|P|", c.possible),
            ("|A∩S|", c.predicted_and_sure),
            ("|A∩P|", c.predicted_and_possible),
            ("sentences", c.sentences),
        ] {
            writeln!(f, "{name:<12}{v:>10}")?;
        }
        if self.degenerate {
            writeln!(f, "(degenerate: empty prediction or empty sure set)")?;
        }
        Ok(())
    }
}

/// Precision, recall, F1 and AER of one sentence.
pub fn prf1(pred: &AlignmentSet, gold: &AlignmentSet) -> EvalReport {
    LinkCounts::of(pred, gold).report()
}

pub fn aer(pred: &AlignmentSet, gold: &AlignmentSet) -> f64 {
    prf1(pred, gold).aer
}

fn check_lengths(pred: usize, gold: usize) -> Result<(), EvalError> {
    if pred != gold {
        return Err(EvalError::LengthMismatch {
            predicted: pred,
            gold,
        });
    }
    Ok(())
}

/// Micro-averaged scores over parallel lists of sentences.
pub fn evaluate(preds: &[AlignmentSet], golds: &[AlignmentSet]) -> Result<EvalReport, EvalError> {
    check_lengths(preds.len(), golds.len())?;
    let mut total = LinkCounts::default();
    for (p, g) in preds.iter().zip(golds) {
        total.add(&LinkCounts::of(p, g));
    }
    Ok(total.report())
}

/// Keeps predicted links whose source word has a link in `silver`.
pub fn partial_filter(pred: &AlignmentSet, silver: &AlignmentSet) -> AlignmentSet {
    let covered: std::collections::BTreeSet<usize> = silver.pairs().map(|(s, _)| s).collect();
    pred.filtered(|s, _| covered.contains(&s))
}

/// Pearson product-moment correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::Undefined(format!(
            "lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(EvalError::Undefined("need at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::Undefined("constant input vector".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    /// Predicted links falling in this bin.
    pub links: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub bins: BTreeMap<String, BinReport>,
    /// Sentences left out because they lacked annotations.
    pub excluded_sentences: usize,
}

impl BreakdownReport {
    pub fn total_links(&self) -> usize {
        self.bins.values().map(|b| b.links).sum()
    }

    fn from_counts(counts: BTreeMap<String, LinkCounts>, excluded_sentences: usize) -> Self {
        BreakdownReport {
            bins: counts
                .into_iter()
                .map(|(k, c)| {
                    (
                        k,
                        BinReport {
                            links: c.predicted,
                            report: c.report(),
                        },
                    )
                })
                .collect(),
            excluded_sentences,
        }
    }
}

impl fmt::Display for BreakdownReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14}{:>8}{:>10}{:>10}{:>10}{:>10}",
            "bin", "links", "prec", "rec", "f1", "aer"
        )?;
        for (k, b) in &self.bins {
            let r = &b.report;
            writeln!(
                f,
                "{k:<14}{:>8}{:>10.4}{:>10.4}{:>10.4}{:>10.4}",
                b.links, r.precision, r.recall, r.f1, r.aer
            )?;
        }
        if self.excluded_sentences > 0 {
            writeln!(f, "excluded sentences: {}", self.excluded_sentences)?;
        }
        Ok(())
    }
}

/// Scores links grouped by a label of their source and target words. Gold
/// links are grouped the same way, so each bin's recall counts only the
/// gold links of that bin.
fn breakdown_by<F>(
    preds: &[AlignmentSet],
    golds: &[AlignmentSet],
    mut bin_of: F,
) -> BTreeMap<String, LinkCounts>
where
    F: FnMut(usize, usize, usize) -> Option<String>,
{
    let mut bins: BTreeMap<String, LinkCounts> = BTreeMap::new();
    for (k, (pred, gold)) in preds.iter().zip(golds).enumerate() {
        let mut per_sentence: BTreeMap<String, (AlignmentSet, AlignmentSet)> = BTreeMap::new();
        for link in pred.iter() {
            if let Some(b) = bin_of(k, link.src, link.tgt) {
                per_sentence.entry(b).or_default().0.insert(link);
            }
        }
        for link in gold.iter() {
            if let Some(b) = bin_of(k, link.src, link.tgt) {
                per_sentence.entry(b).or_default().1.insert(link);
            }
        }
        for (b, (p, g)) in per_sentence {
            bins.entry(b).or_default().add(&LinkCounts::of(&p, &g));
        }
    }
    bins
}

/// Bins every link by the tag of its source word.
pub fn breakdown_by_pos(
    pairs: &[SentencePair],
    preds: &[AlignmentSet],
    golds: &[AlignmentSet],
    tags: &AnnotationSidecar,
) -> Result<BreakdownReport, EvalError> {
    check_lengths(preds.len(), golds.len())?;
    check_lengths(pairs.len(), golds.len())?;
    let mut excluded = 0;
    let mut keep = Vec::new();
    for (k, pair) in pairs.iter().enumerate() {
        match tags.get(&pair.id) {
            Some(labels) => keep.push((k, labels)),
            None => excluded += 1,
        }
    }
    let p: Vec<AlignmentSet> = keep.iter().map(|&(k, _)| preds[k].clone()).collect();
    let g: Vec<AlignmentSet> = keep.iter().map(|&(k, _)| golds[k].clone()).collect();
    let counts = breakdown_by(&p, &g, |k, src, _| keep[k].1.get(src).cloned());
    Ok(BreakdownReport::from_counts(counts, excluded))
}

/// Word counts on both sides of the alignment training corpus.
#[derive(Debug, Clone, Default)]
pub struct FrequencyCounts {
    pub source: HashMap<String, u64>,
    pub target: HashMap<String, u64>,
}

impl FrequencyCounts {
    pub fn from_pairs(pairs: &[SentencePair]) -> Self {
        let mut counts = FrequencyCounts::default();
        for p in pairs {
            for w in &p.source.words {
                *counts.source.entry(w.clone()).or_default() += 1;
            }
            for w in &p.target.words {
                *counts.target.entry(w.clone()).or_default() += 1;
            }
        }
        counts
    }

    /// The smaller of the two word counts.
    pub fn link_frequency(&self, src_word: &str, tgt_word: &str) -> u64 {
        let s = self.source.get(src_word).copied().unwrap_or(0);
        let t = self.target.get(tgt_word).copied().unwrap_or(0);
        s.min(t)
    }
}

pub const FREQUENCY_BINS: [&str; 5] = ["[0,1)", "[1,10)", "[10,100)", "[100,1000)", "[1000,inf)"];

pub fn frequency_bin(freq: u64) -> &'static str {
    match freq {
        0 => FREQUENCY_BINS[0],
        1..=9 => FREQUENCY_BINS[1],
        10..=99 => FREQUENCY_BINS[2],
        100..=999 => FREQUENCY_BINS[3],
        _ => FREQUENCY_BINS[4],
    }
}

/// Bins every link by the minimum corpus frequency of its two words.
pub fn breakdown_by_frequency(
    pairs: &[SentencePair],
    preds: &[AlignmentSet],
    golds: &[AlignmentSet],
    counts: &FrequencyCounts,
) -> Result<BreakdownReport, EvalError> {
    check_lengths(preds.len(), golds.len())?;
    check_lengths(pairs.len(), golds.len())?;
    let bins = breakdown_by(preds, golds, |k, s, t| {
        let pair = &pairs[k];
        let sw = pair.source.words.get(s)?;
        let tw = pair.target.words.get(t)?;
        Some(frequency_bin(counts.link_frequency(sw, tw)).to_string())
    });
    Ok(BreakdownReport::from_counts(bins, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScores {
    pub config: String,
    pub x: EvalReport,
    pub y: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub rows: Vec<ConfigScores>,
    /// Pearson's r between the F1 vectors.
    pub r_f1: f64,
    /// Pearson's r between the AER vectors, when defined.
    pub r_aer: Option<f64>,
    /// Config names ordered by F1 on each benchmark, best first.
    pub rank_x: Vec<String>,
    pub rank_y: Vec<String>,
}

impl Ranking {
    /// 1-based rank of `config` on the x and y benchmarks.
    pub fn ranks_of(&self, config: &str) -> (usize, usize) {
        let pos = |v: &Vec<String>| v.iter().position(|c| c == config).map_or(0, |i| i + 1);
        (pos(&self.rank_x), pos(&self.rank_y))
    }
}

fn rank(rows: &[ConfigScores], f1: impl Fn(&ConfigScores) -> f64) -> Vec<String> {
    let mut v: Vec<&ConfigScores> = rows.iter().collect();
    v.sort_by(|a, b| {
        f1(b)
            .total_cmp(&f1(a))
            .then_with(|| a.config.cmp(&b.config))
    });
    v.into_iter().map(|r| r.config.clone()).collect()
}

/// Correlates configuration scores on two benchmarks.
pub fn rank_configs(
    results: &BTreeMap<String, (EvalReport, EvalReport)>,
) -> Result<Ranking, EvalError> {
    let rows: Vec<ConfigScores> = results
        .iter()
        .map(|(c, (x, y))| ConfigScores {
            config: c.clone(),
            x: *x,
            y: *y,
        })
        .collect();
    let fx: Vec<f64> = rows.iter().map(|r| r.x.f1).collect();
    let fy: Vec<f64> = rows.iter().map(|r| r.y.f1).collect();
    let r_f1 = pearson_r(&fx, &fy)?;
    let ax: Vec<f64> = rows.iter().map(|r| r.x.aer).collect();
    let ay: Vec<f64> = rows.iter().map(|r| r.y.aer).collect();
    let r_aer = pearson_r(&ax, &ay).ok();
    Ok(Ranking {
        rank_x: rank(&rows, |r| r.x.f1),
        rank_y: rank(&rows, |r| r.y.f1),
        rows,
        r_f1,
        r_aer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_pharaoh, Sentence};

    fn set(p: &[(usize, usize)]) -> AlignmentSet {
        AlignmentSet::from_pairs(p.iter().copied())
    }

    #[test]
    fn empty_prediction_is_degenerate_zero() {
        let r = prf1(&AlignmentSet::new(), &set(&[(0, 0)]));
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert!(r.degenerate);
        let r = prf1(&AlignmentSet::new(), &AlignmentSet::new());
        assert_eq!(r.aer, 0.0);
        assert!(r.degenerate);
    }

    #[test]
    fn possible_links_count_for_precision_only() {
        let gold = parse_pharaoh("0-0 1?1").unwrap();
        let r = prf1(&set(&[(0, 0), (1, 1)]), &gold);
        assert_eq!((r.precision, r.recall), (1.0, 1.0));
        let r = prf1(&set(&[(1, 1)]), &gold);
        assert_eq!((r.precision, r.recall), (1.0, 0.0));
    }

    #[test]
    fn micro_average_sums_counts() {
        let preds = vec![set(&[(0, 0)]), set(&[(0, 0), (1, 1), (2, 2)])];
        let golds = vec![set(&[(0, 0)]), set(&[(0, 0)])];
        let r = evaluate(&preds, &golds).unwrap();
        assert!((r.precision - 0.5).abs() < 1e-12);
        assert_eq!(r.recall, 1.0);
        assert!(evaluate(&preds, &golds[..1]).is_err());
    }

    #[test]
    fn pearson_rejects_constant_and_short_vectors() {
        assert!(matches!(
            pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(EvalError::Undefined(_))
        ));
        assert!(pearson_r(&[1.0], &[1.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn frequency_bins() {
        let mut c = FrequencyCounts::default();
        c.source.insert("he".into(), 5);
        c.target.insert("er".into(), 7);
        assert_eq!(c.link_frequency("he", "er"), 5);
        assert_eq!(frequency_bin(5), "[1,10)");
        assert_eq!(frequency_bin(1000), "[1000,inf)");
        assert_eq!(frequency_bin(999), "[100,1000)");
        assert_eq!(frequency_bin(c.link_frequency("he", "sie")), "[0,1)");
    }

    #[test]
    fn pos_bins_sum_to_total() {
        let pairs = vec![SentencePair {
            id: "1".into(),
            source: Sentence::from_text("a b c", "x"),
            target: Sentence::from_text("x y z", "y"),
        }];
        let mut tags = AnnotationSidecar::new();
        tags.insert("1", vec!["N".into(), "V".into(), "N".into()]);
        let preds = vec![set(&[(0, 0), (1, 1), (2, 1)])];
        let golds = vec![set(&[(0, 0), (1, 1), (2, 2)])];
        let b = breakdown_by_pos(&pairs, &preds, &golds, &tags).unwrap();
        assert_eq!(b.total_links(), 3);
        assert_eq!(b.bins["N"].links, 2);
        assert!((b.bins["N"].report.f1 - 0.5).abs() < 1e-12);
        assert_eq!(b.bins["V"].report.f1, 1.0);
    }

    #[test]
    fn ranking_orders_by_f1() {
        let rep = |f: f64| {
            let mut r = prf1(&set(&[(0, 0)]), &set(&[(0, 0)]));
            r.f1 = f;
            r
        };
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), (rep(0.5), rep(0.4)));
        m.insert("b".to_string(), (rep(0.9), rep(0.8)));
        m.insert("c".to_string(), (rep(0.7), rep(0.3)));
        let r = rank_configs(&m).unwrap();
        assert_eq!(r.rank_x, ["b", "c", "a"]);
        assert_eq!(r.rank_y, ["b", "a", "c"]);
        assert_eq!(r.ranks_of("c"), (2, 3));
    }
}
