//! IBM Model 1 word alignment with symmetrization.
//!
//! The translation table is trained by EM in both directions, decoded with
//! per-position argmax, and the two directional link sets are combined by one
//! of the standard heuristics (intersection, union, grow-diag, grow-diag-final,
//! grow-diag-final-and).

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AlignmentSet, SentencePair};
use crate::tokenize::{project_to_words, SubwordVocab, TokenizeError, TokenizedSentence};

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
}

/// Sentences per E-step work unit. Fixed so that floating-point reduction
/// order does not depend on the thread count.
const CHUNK: usize = 64;

/// Source id 0 is the empty (NULL) word.
const NULL: u32 = 0;

/// Lexical probabilities `t(f | e)` over co-occurring pairs, with rows
/// stored contiguously and sorted by target id.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    src_vocab: Vec<String>,
    src_ids: HashMap<String, u32>,
    tgt_vocab: Vec<String>,
    tgt_ids: HashMap<String, u32>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    probs: Vec<f64>,
}

impl TranslationTable {
    fn cell(&self, e: u32, f: u32) -> Option<usize> {
        let (lo, hi) = (self.row_start[e as usize], self.row_start[e as usize + 1]);
        self.cols[lo..hi].binary_search(&f).ok().map(|i| lo + i)
    }

    fn p(&self, e: u32, f: u32) -> f64 {
        self.cell(e, f).map_or(0.0, |i| self.probs[i])
    }

    /// `t(f | e)`; `e = None` is the empty word. Unknown pairs are 0.
    pub fn prob(&self, e: Option<&str>, f: &str) -> f64 {
        let e = match e {
            None => NULL,
            Some(w) => match self.src_ids.get(w) {
                Some(&id) => id,
                None => return 0.0,
            },
        };
        match self.tgt_ids.get(f) {
            Some(&fid) => self.p(e, fid),
            None => 0.0,
        }
    }

    /// Number of source rows, including the empty word.
    pub fn rows(&self) -> usize {
        self.src_vocab.len()
    }

    /// Sum of each row's probabilities.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows())
            .map(|e| {
                self.probs[self.row_start[e]..self.row_start[e + 1]]
                    .iter()
                    .sum()
            })
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Option<&str>, &str, f64)> + '_ {
        (0..self.rows()).flat_map(move |e| {
            let src = if e == 0 {
                None
            } else {
                Some(self.src_vocab[e].as_str())
            };
            (self.row_start[e]..self.row_start[e + 1]).map(move |i| {
                (
                    src,
                    self.tgt_vocab[self.cols[i] as usize].as_str(),
                    self.probs[i],
                )
            })
        })
    }

    fn encode(&self, src: &[String], tgt: &[String]) -> (Vec<Option<u32>>, Vec<Option<u32>>) {
        (
            src.iter().map(|w| self.src_ids.get(w).copied()).collect(),
            tgt.iter().map(|w| self.tgt_ids.get(w).copied()).collect(),
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Corpus log-likelihood under the parameters entering each iteration,
    /// followed by the value under the final parameters.
    pub log_likelihoods: Vec<f64>,
    /// Pairs skipped because one side was empty.
    pub skipped: usize,
}

struct Encoded {
    src: Vec<u32>,
    tgt: Vec<u32>,
}

/// Trains Model 1 with uniform initialization over co-occurring pairs.
pub fn ibm1_train(
    corpus: &[(Vec<String>, Vec<String>)],
    iterations: usize,
) -> Result<(TranslationTable, TrainStats), AlignError> {
    ibm1_train_observed(corpus, iterations, |_, _| {})
}

/// As [`ibm1_train`], calling `observe(iteration, table)` after every M-step.
pub fn ibm1_train_observed<F: FnMut(usize, &TranslationTable)>(
    corpus: &[(Vec<String>, Vec<String>)],
    iterations: usize,
    mut observe: F,
) -> Result<(TranslationTable, TrainStats), AlignError> {
    if iterations == 0 {
        return Err(AlignError::NoIterations);
    }
    if corpus.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    let mut stats = TrainStats::default();
    let mut src_vocab = vec![String::new()];
    let mut src_ids: HashMap<String, u32> = HashMap::new();
    let mut tgt_vocab = Vec::new();
    let mut tgt_ids: HashMap<String, u32> = HashMap::new();
    let mut data = Vec::with_capacity(corpus.len());
    for (src, tgt) in corpus {
        if src.is_empty() || tgt.is_empty() {
            stats.skipped += 1;
            continue;
        }
        let intern = |w: &String, vocab: &mut Vec<String>, ids: &mut HashMap<String, u32>| {
            *ids.entry(w.clone()).or_insert_with(|| {
                vocab.push(w.clone());
                (vocab.len() - 1) as u32
            })
        };
        let src = src
            .iter()
            .map(|w| intern(w, &mut src_vocab, &mut src_ids))
            .collect();
        let tgt = tgt
            .iter()
            .map(|w| intern(w, &mut tgt_vocab, &mut tgt_ids))
            .collect();
        data.push(Encoded { src, tgt });
    }
    if stats.skipped > 0 {
        log::warn!("skipped {} pairs with an empty side", stats.skipped);
    }
    if data.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }

    // Co-occurrence structure, including the empty word.
    let mut rows: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); src_vocab.len()];
    for pair in &data {
        for &f in &pair.tgt {
            rows[NULL as usize].insert(f);
            for &e in &pair.src {
                rows[e as usize].insert(f);
            }
        }
    }
    let mut row_start = Vec::with_capacity(rows.len() + 1);
    let mut cols = Vec::new();
    let mut probs = Vec::new();
    for row in &rows {
        row_start.push(cols.len());
        let uniform = 1.0 / row.len() as f64;
        for &f in row {
            cols.push(f);
            probs.push(uniform);
        }
    }
    row_start.push(cols.len());
    let mut table = TranslationTable {
        src_vocab,
        src_ids,
        tgt_vocab,
        tgt_ids,
        row_start,
        cols,
        probs,
    };

    for it in 0..iterations {
        let (ll, counts) = expectation(&table, &data);
        stats.log_likelihoods.push(ll);
        for e in 0..table.rows() {
            let (lo, hi) = (table.row_start[e], table.row_start[e + 1]);
            let total: f64 = counts[lo..hi].iter().sum();
            if total > 0.0 {
                for (p, c) in table.probs[lo..hi].iter_mut().zip(&counts[lo..hi]) {
                    *p = c / total;
                }
            }
        }
        observe(it + 1, &table);
    }
    stats.log_likelihoods.push(expectation(&table, &data).0);
    Ok((table, stats))
}

/// E-step: expected pair counts and the log-likelihood under `table`.
fn expectation(table: &TranslationTable, data: &[Encoded]) -> (f64, Vec<f64>) {
    let partials: Vec<(f64, Vec<(usize, f64)>)> = data
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut ll = 0.0;
            let mut acc: HashMap<usize, f64> = HashMap::new();
            let mut cells = Vec::new();
            for pair in chunk {
                let norm = (pair.src.len() + 1) as f64;
                for &f in &pair.tgt {
                    cells.clear();
                    let mut z = 0.0;
                    for &e in std::iter::once(&NULL).chain(&pair.src) {
                        let i = table.cell(e, f).expect("co-occurring pair has a cell");
                        z += table.probs[i];
                        cells.push(i);
                    }
                    ll += (z / norm).ln();
                    if z > 0.0 {
                        for &i in &cells {
                            *acc.entry(i).or_default() += table.probs[i] / z;
                        }
                    }
                }
            }
            let mut acc: Vec<(usize, f64)> = acc.into_iter().collect();
            acc.sort_unstable_by_key(|&(i, _)| i);
            (ll, acc)
        })
        .collect();
    let mut counts = vec![0.0; table.probs.len()];
    let mut ll = 0.0;
    for (chunk_ll, acc) in partials {
        ll += chunk_ll;
        for (i, c) in acc {
            counts[i] += c;
        }
    }
    (ll, counts)
}

/// For every target position, the aligned source position (`None` = empty
/// word).
pub type DirectionalAlignment = Vec<Option<usize>>;

/// Per target position, the source position maximizing `t(f | e)`. Ties go
/// to the smallest source index; the empty word wins only with a strictly
/// larger probability, or when every source word scores 0.
pub fn viterbi_align(
    table: &TranslationTable,
    src: &[String],
    tgt: &[String],
) -> DirectionalAlignment {
    let (src_ids, tgt_ids) = table.encode(src, tgt);
    tgt_ids
        .iter()
        .map(|f| {
            let f = (*f)?;
            let mut best = None;
            let mut best_p = 0.0;
            for (i, e) in src_ids.iter().enumerate() {
                let p = e.map_or(0.0, |e| table.p(e, f));
                if p > best_p {
                    best_p = p;
                    best = Some(i);
                }
            }
            if table.p(NULL, f) > best_p {
                None
            } else {
                best
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetrizationMethod {
    Intersection,
    Union,
    GrowDiag,
    GrowDiagFinal,
    GrowDiagFinalAnd,
}

impl std::str::FromStr for SymmetrizationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "int" | "intersection" => Ok(SymmetrizationMethod::Intersection),
            "union" => Ok(SymmetrizationMethod::Union),
            "gd" | "grow-diag" => Ok(SymmetrizationMethod::GrowDiag),
            "gdf" | "grow-diag-final" => Ok(SymmetrizationMethod::GrowDiagFinal),
            "gdfa" | "grow-diag-final-and" => Ok(SymmetrizationMethod::GrowDiagFinalAnd),
            other => Err(format!(
                "unknown symmetrization {other:?} (gdfa, gdf, gd, int, union)"
            )),
        }
    }
}

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, 0),
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

struct Grid {
    links: BTreeSet<(usize, usize)>,
    src_aligned: Vec<bool>,
    tgt_aligned: Vec<bool>,
}

impl Grid {
    fn add(&mut self, s: usize, t: usize) {
        self.links.insert((s, t));
        self.src_aligned[s] = true;
        self.tgt_aligned[t] = true;
    }
}

/// Combines source→target and target→source links. Links are `(src, tgt)`
/// pairs; grids are scanned row-major (source outer, target inner). The
/// final steps visit the forward links and then the backward links.
pub fn symmetrize(
    forward: &AlignmentSet,
    backward: &AlignmentSet,
    method: SymmetrizationMethod,
) -> AlignmentSet {
    let fwd: BTreeSet<(usize, usize)> = forward.pairs().collect();
    let bwd: BTreeSet<(usize, usize)> = backward.pairs().collect();
    let union: BTreeSet<(usize, usize)> = fwd.union(&bwd).copied().collect();
    let inter: BTreeSet<(usize, usize)> = fwd.intersection(&bwd).copied().collect();
    match method {
        SymmetrizationMethod::Intersection => return AlignmentSet::from_pairs(inter),
        SymmetrizationMethod::Union => return AlignmentSet::from_pairs(union),
        _ => {}
    }
    let n = union.iter().map(|p| p.0 + 1).max().unwrap_or(0);
    let m = union.iter().map(|p| p.1 + 1).max().unwrap_or(0);
    let mut grid = Grid {
        links: BTreeSet::new(),
        src_aligned: vec![false; n],
        tgt_aligned: vec![false; m],
    };
    for &(s, t) in &inter {
        grid.add(s, t);
    }

    // grow-diag
    let mut added = true;
    while added {
        added = false;
        for s in 0..n {
            for t in 0..m {
                if !grid.links.contains(&(s, t)) {
                    continue;
                }
                for (ds, dt) in NEIGHBORS {
                    let (Some(ns), Some(nt)) = (s.checked_add_signed(ds), t.checked_add_signed(dt))
                    else {
                        continue;
                    };
                    if ns >= n || nt >= m {
                        continue;
                    }
                    if (!grid.src_aligned[ns] || !grid.tgt_aligned[nt])
                        && union.contains(&(ns, nt))
                        && !grid.links.contains(&(ns, nt))
                    {
                        grid.add(ns, nt);
                        added = true;
                    }
                }
            }
        }
    }

    let both = match method {
        SymmetrizationMethod::GrowDiag => return AlignmentSet::from_pairs(grid.links),
        SymmetrizationMethod::GrowDiagFinal => false,
        _ => true,
    };
    for directional in [&fwd, &bwd] {
        for &(s, t) in directional {
            if grid.links.contains(&(s, t)) {
                continue;
            }
            let (su, tu) = (!grid.src_aligned[s], !grid.tgt_aligned[t]);
            if (both && su && tu) || (!both && (su || tu)) {
                grid.add(s, t);
            }
        }
    }
    AlignmentSet::from_pairs(grid.links)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignerConfig {
    pub iterations: usize,
    pub method: SymmetrizationMethod,
}

impl Default for AlignerConfig {
    fn default() -> Self {
        AlignerConfig {
            iterations: 5,
            method: SymmetrizationMethod::GrowDiagFinalAnd,
        }
    }
}

/// Source→target links from a table trained with source as the conditioning
/// side.
fn forward_links(table: &TranslationTable, src: &[String], tgt: &[String]) -> AlignmentSet {
    AlignmentSet::from_pairs(
        viterbi_align(table, src, tgt)
            .into_iter()
            .enumerate()
            .filter_map(|(t, s)| s.map(|s| (s, t))),
    )
}

/// Aligns tokenized pairs and returns word-level links per pair.
pub fn align_tokenized(
    pairs: &[(TokenizedSentence, TokenizedSentence)],
    cfg: &AlignerConfig,
) -> Result<Vec<AlignmentSet>, AlignError> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let fwd_corpus: Vec<(Vec<String>, Vec<String>)> = pairs
        .iter()
        .map(|(s, t)| (s.tokens.clone(), t.tokens.clone()))
        .collect();
    let bwd_corpus: Vec<(Vec<String>, Vec<String>)> = fwd_corpus
        .iter()
        .map(|(s, t)| (t.clone(), s.clone()))
        .collect();
    let (fwd_table, _) = ibm1_train(&fwd_corpus, cfg.iterations)?;
    let (bwd_table, _) = ibm1_train(&bwd_corpus, cfg.iterations)?;
    pairs
        .par_iter()
        .zip(&fwd_corpus)
        .map(|((st, tt), (s, t))| {
            let fwd = forward_links(&fwd_table, s, t);
            let bwd = AlignmentSet::from_pairs(
                forward_links(&bwd_table, t, s).pairs().map(|(a, b)| (b, a)),
            );
            let tokens = symmetrize(&fwd, &bwd, cfg.method);
            Ok(project_to_words(&tokens, st, tt)?)
        })
        .collect()
}

/// Tokenizes both sides with one shared vocabulary, aligns the pieces with
/// Model 1 in both directions, symmetrizes and projects back to words.
pub fn align_corpus(
    pairs: &[SentencePair],
    vocab: &SubwordVocab,
    cfg: &AlignerConfig,
) -> Result<Vec<AlignmentSet>, AlignError> {
    let tokenized: Vec<_> = pairs
        .iter()
        .map(|p| (vocab.tokenize(&p.source), vocab.tokenize(&p.target)))
        .collect();
    align_tokenized(&tokenized, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn corpus(pairs: &[(&str, &str)]) -> Vec<(Vec<String>, Vec<String>)> {
        pairs.iter().map(|(a, b)| (toks(a), toks(b))).collect()
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            ibm1_train(&corpus(&[("a", "x")]), 0),
            Err(AlignError::NoIterations)
        ));
        assert!(matches!(ibm1_train(&[], 1), Err(AlignError::EmptyCorpus)));
        let (_, stats) = ibm1_train(&corpus(&[("a", "x"), ("b", "")]), 1).unwrap();
        assert_eq!(stats.skipped, 1);
    }

    #[test]
    fn unseen_target_aligns_to_null() {
        let (table, _) = ibm1_train(&corpus(&[("a", "x")]), 3).unwrap();
        assert_eq!(viterbi_align(&table, &toks("a"), &toks("zzz")), vec![None]);
    }

    #[test]
    fn empty_corpus_aligns_to_nothing() {
        assert!(align_tokenized(&[], &AlignerConfig::default())
            .unwrap()
            .is_empty());
    }

    fn set(p: &[(usize, usize)]) -> AlignmentSet {
        AlignmentSet::from_pairs(p.iter().copied())
    }

    #[test]
    fn symmetric_input_is_a_fixpoint() {
        let a = set(&[(0, 0)]);
        assert_eq!(
            symmetrize(&a, &a, SymmetrizationMethod::GrowDiagFinalAnd),
            a
        );
    }

    #[test]
    fn grow_diag_picks_up_diagonal_neighbor() {
        let f = set(&[(0, 0), (1, 1)]);
        let b = set(&[(0, 0)]);
        assert_eq!(
            symmetrize(&f, &b, SymmetrizationMethod::Intersection),
            set(&[(0, 0)])
        );
        assert_eq!(
            symmetrize(&f, &b, SymmetrizationMethod::GrowDiagFinalAnd),
            set(&[(0, 0), (1, 1)])
        );
    }

    #[test]
    fn final_and_adds_disjoint_links() {
        let f = set(&[(0, 1)]);
        let b = set(&[(1, 0)]);
        assert!(symmetrize(&f, &b, SymmetrizationMethod::GrowDiag).is_empty());
        assert_eq!(
            symmetrize(&f, &b, SymmetrizationMethod::GrowDiagFinalAnd),
            set(&[(0, 1), (1, 0)])
        );
    }

    #[test]
    fn final_differs_from_final_and() {
        // (0,3) is not adjacent to the intersection; its target is unaligned.
        let f = set(&[(0, 0), (0, 3)]);
        let b = set(&[(0, 0)]);
        assert_eq!(
            symmetrize(&f, &b, SymmetrizationMethod::GrowDiagFinal),
            set(&[(0, 0), (0, 3)])
        );
        assert_eq!(
            symmetrize(&f, &b, SymmetrizationMethod::GrowDiagFinalAnd),
            set(&[(0, 0)])
        );
    }

    #[test]
    fn final_and_can_add_a_link_final_skips() {
        // Final takes (5,1) and (1,6) first, which blocks (5,6); final-and
        // rejects both and then takes (5,6).
        let f = set(&[(0, 0), (5, 1), (1, 6)]);
        let b = set(&[(0, 0), (1, 1), (5, 6)]);
        let gdf = symmetrize(&f, &b, SymmetrizationMethod::GrowDiagFinal);
        let gdfa = symmetrize(&f, &b, SymmetrizationMethod::GrowDiagFinalAnd);
        assert_eq!(gdf, set(&[(0, 0), (1, 1), (1, 6), (5, 1)]));
        assert_eq!(gdfa, set(&[(0, 0), (1, 1), (5, 6)]));
        assert!(!gdfa.pairs_subset_of(&gdf));
    }

    #[test]
    fn parses_method_names() {
        assert_eq!("gdfa".parse(), Ok(SymmetrizationMethod::GrowDiagFinalAnd));
        assert_eq!("int".parse(), Ok(SymmetrizationMethod::Intersection));
        assert!("diag".parse::<SymmetrizationMethod>().is_err());
    }
}
