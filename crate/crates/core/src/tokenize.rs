//! Trainable tokenizers and projection of token alignments back to words.
//!
//! Three vocabulary kinds are supported:
//!
//! * `Word`: every whitespace word is one token.
//! * `Bpe`: byte-pair-style merges over characters, applied by merge rank.
//! * `GreedyLongestMatch`: WordPiece-style segmentation, longest known piece
//!   first, with `##` marking non-initial pieces. Its pieces are learned with
//!   the same merge procedure as `Bpe`, over `##`-marked continuation symbols.
//!
//! Characters never seen in training become single-character pieces and are
//! recorded as overflow, so every word stays tokenizable and projection is
//! total.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AlignmentLink, AlignmentSet, Sentence, HEADER_PREFIX};

pub const CONTINUATION: &str = "##";

/// Vocabulary sizes swept when comparing tokenizers.
pub const VOCAB_SWEEP: [usize; 8] = [500, 1000, 2000, 4000, 8000, 16000, 32000, 50000];

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("vocabulary size {size} is below the {minimum} distinct characters of the corpus")]
    SizeTooSmall { size: usize, minimum: usize },
    #[error("token index {index} out of bounds for {len} tokens")]
    OutOfBounds { index: usize, len: usize },
    #[error("invalid tokenization: {0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabKind {
    Word,
    Bpe,
    GreedyLongestMatch,
}

impl std::str::FromStr for VocabKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "word" => Ok(VocabKind::Word),
            "bpe" => Ok(VocabKind::Bpe),
            "greedy" | "greedy_longest_match" | "wordpiece" => Ok(VocabKind::GreedyLongestMatch),
            other => Err(format!(
                "unknown tokenizer kind {other:?} (word, bpe, greedy)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordVocab {
    kind: VocabKind,
    pieces: Vec<String>,
    ids: HashMap<String, u32>,
    merges: Vec<(String, String)>,
    ranks: HashMap<(String, String), usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    kind: VocabKind,
    size: usize,
    pieces: BTreeMap<String, u32>,
    merges: Vec<[String; 2]>,
}

impl SubwordVocab {
    fn from_parts(kind: VocabKind, pieces: Vec<String>, merges: Vec<(String, String)>) -> Self {
        let ids = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let ranks = merges
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        SubwordVocab {
            kind,
            pieces,
            ids,
            merges,
            ranks,
        }
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn id(&self, piece: &str) -> Option<u32> {
        self.ids.get(piece).copied()
    }

    pub fn to_json(&self) -> String {
        let file = VocabFile {
            kind: self.kind,
            size: self.size(),
            pieces: self.ids.iter().map(|(p, i)| (p.clone(), *i)).collect(),
            merges: self
                .merges
                .iter()
                .map(|(a, b)| [a.clone(), b.clone()])
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("vocab serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TokenizeError> {
        let file: VocabFile =
            serde_json::from_str(text).map_err(|e| TokenizeError::Invalid(e.to_string()))?;
        let mut pieces = vec![String::new(); file.pieces.len()];
        for (piece, id) in file.pieces {
            let slot = pieces
                .get_mut(id as usize)
                .ok_or_else(|| TokenizeError::Invalid(format!("piece id {id} is not dense")))?;
            *slot = piece;
        }
        if pieces.len() != file.size {
            return Err(TokenizeError::Invalid(format!(
                "size {} disagrees with {} pieces",
                file.size,
                pieces.len()
            )));
        }
        let merges = file.merges.into_iter().map(|[a, b]| (a, b)).collect();
        Ok(SubwordVocab::from_parts(file.kind, pieces, merges))
    }

    /// Reads a vocabulary file; a leading header line is skipped.
    pub fn read(path: &Path) -> Result<Self, TokenizeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TokenizeError::Io(format!("{}: {e}", path.display())))?;
        let body: String = match text.strip_prefix(HEADER_PREFIX) {
            Some(rest) => rest.split_once('\n').map(|x| x.1).unwrap_or("").to_string(),
            None => text,
        };
        SubwordVocab::from_json(&body)
    }

    /// Tokenizes every word of `s` and records which tokens each word owns.
    pub fn tokenize(&self, s: &Sentence) -> TokenizedSentence {
        let mut out = TokenizedSentence::default();
        for word in &s.words {
            let start = out.tokens.len();
            let pieces = match self.kind {
                VocabKind::Word => vec![word.clone()],
                VocabKind::Bpe => self.bpe_word(word),
                VocabKind::GreedyLongestMatch => self.greedy_word(word),
            };
            for p in pieces {
                if !self.ids.contains_key(&p) {
                    out.overflow.push(out.tokens.len());
                }
                out.tokens.push(p);
            }
            out.word_spans.push((start, out.tokens.len()));
        }
        out
    }

    fn bpe_word(&self, word: &str) -> Vec<String> {
        let mut symbols: Vec<String> = word.chars().map(String::from).collect();
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0].clone(), w[1].clone())))
                .min()
                .copied();
            let Some(rank) = best else { break };
            let (left, right) = &self.merges[rank];
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && &symbols[i] == left && &symbols[i + 1] == right {
                    merged.push(format!("{left}{right}"));
                    i += 2;
                } else {
                    merged.push(std::mem::take(&mut symbols[i]));
                    i += 1;
                }
            }
            symbols = merged;
        }
        symbols
    }

    fn greedy_word(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = word.chars().collect();
        let mut out = Vec::new();
        let mut start = 0;
        while start < chars.len() {
            let prefix = if start == 0 { "" } else { CONTINUATION };
            let mut end = chars.len();
            let mut found = None;
            while end > start {
                let candidate: String = prefix
                    .chars()
                    .chain(chars[start..end].iter().copied())
                    .collect();
                if self.ids.contains_key(&candidate) {
                    found = Some(candidate);
                    break;
                }
                end -= 1;
            }
            match found {
                Some(piece) => {
                    out.push(piece);
                    start = end;
                }
                None => {
                    out.push(format!("{prefix}{}", chars[start]));
                    start += 1;
                }
            }
        }
        out
    }

    /// Reassembles a word from its pieces.
    pub fn detokenize_word(&self, pieces: &[String]) -> String {
        let mut word = String::new();
        for (i, p) in pieces.iter().enumerate() {
            match self.kind {
                VocabKind::GreedyLongestMatch if i > 0 => {
                    word.push_str(p.strip_prefix(CONTINUATION).unwrap_or(p));
                }
                _ => word.push_str(p),
            }
        }
        word
    }
}

/// A sentence's tokens plus, for each word, the half-open token range it
/// covers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedSentence {
    pub tokens: Vec<String>,
    pub word_spans: Vec<(usize, usize)>,
    /// Indices of tokens missing from the vocabulary.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overflow: Vec<usize>,
}

impl TokenizedSentence {
    /// Treats each word as a single token.
    pub fn identity(s: &Sentence) -> Self {
        TokenizedSentence {
            tokens: s.words.clone(),
            word_spans: (0..s.len()).map(|i| (i, i + 1)).collect(),
            overflow: Vec::new(),
        }
    }

    /// Checks that the spans partition the tokens in order.
    pub fn validate(&self) -> Result<(), TokenizeError> {
        let mut next = 0;
        for (w, &(start, end)) in self.word_spans.iter().enumerate() {
            if start != next || end <= start {
                return Err(TokenizeError::Invalid(format!(
                    "word {w} span {start}..{end} does not continue at token {next}"
                )));
            }
            next = end;
        }
        if next != self.tokens.len() {
            return Err(TokenizeError::Invalid(format!(
                "spans cover {next} of {} tokens",
                self.tokens.len()
            )));
        }
        Ok(())
    }

    /// Word index for every token.
    pub fn token_to_word(&self) -> Vec<usize> {
        let mut map = vec![0; self.tokens.len()];
        for (w, &(start, end)) in self.word_spans.iter().enumerate() {
            for slot in &mut map[start..end] {
                *slot = w;
            }
        }
        map
    }

    pub fn word_pieces(&self, word: usize) -> &[String] {
        let (start, end) = self.word_spans[word];
        &self.tokens[start..end]
    }
}

/// One line of an externally tokenized corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PretokenizedLine {
    pub id: String,
    pub tokens: Vec<String>,
    pub word_spans: Vec<(usize, usize)>,
}

pub fn read_pretokenized(path: &Path) -> Result<Vec<PretokenizedLine>, TokenizeError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TokenizeError::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with(HEADER_PREFIX))
        .enumerate()
        .map(|(i, l)| {
            let line: PretokenizedLine = serde_json::from_str(l).map_err(|e| {
                TokenizeError::Invalid(format!("{}:{}: {e}", path.display(), i + 1))
            })?;
            TokenizedSentence {
                tokens: line.tokens.clone(),
                word_spans: line.word_spans.clone(),
                overflow: Vec::new(),
            }
            .validate()?;
            Ok(line)
        })
        .collect()
}

impl From<PretokenizedLine> for TokenizedSentence {
    fn from(line: PretokenizedLine) -> Self {
        TokenizedSentence {
            tokens: line.tokens,
            word_spans: line.word_spans,
            overflow: Vec::new(),
        }
    }
}

/// Distinct characters over all words.
pub fn alphabet_size<'a, I: IntoIterator<Item = &'a str>>(words: I) -> usize {
    words
        .into_iter()
        .flat_map(str::chars)
        .collect::<BTreeSet<char>>()
        .len()
}

/// A word vocabulary holding every distinct word.
pub fn train_word<'a, I: IntoIterator<Item = &'a str>>(words: I) -> SubwordVocab {
    let set: BTreeSet<&str> = words.into_iter().collect();
    SubwordVocab::from_parts(
        VocabKind::Word,
        set.into_iter().map(str::to_string).collect(),
        Vec::new(),
    )
}

/// Standard BPE: start from characters, repeatedly merge the most frequent
/// adjacent pair (ties to the lexicographically smallest pair) until the
/// vocabulary reaches `size` or no pair occurs twice.
pub fn train_bpe<'a, I: IntoIterator<Item = &'a str>>(
    words: I,
    size: usize,
) -> Result<SubwordVocab, TokenizeError> {
    train_merges(words, size, VocabKind::Bpe)
}

/// Pieces for greedy longest-match segmentation, learned by merging with
/// `##`-marked continuation symbols.
pub fn train_greedy<'a, I: IntoIterator<Item = &'a str>>(
    words: I,
    size: usize,
) -> Result<SubwordVocab, TokenizeError> {
    train_merges(words, size, VocabKind::GreedyLongestMatch)
}

pub fn train<'a, I: IntoIterator<Item = &'a str>>(
    kind: VocabKind,
    words: I,
    size: usize,
) -> Result<SubwordVocab, TokenizeError> {
    match kind {
        VocabKind::Word => Ok(train_word(words)),
        VocabKind::Bpe | VocabKind::GreedyLongestMatch => train_merges(words, size, kind),
    }
}

struct MergeState {
    symbols: Vec<String>,
    symbol_ids: HashMap<String, u32>,
    words: Vec<(Vec<u32>, u64)>,
    pair_counts: HashMap<(u32, u32), u64>,
    pair_words: HashMap<(u32, u32), BTreeSet<usize>>,
}

impl MergeState {
    fn intern(&mut self, s: String) -> u32 {
        if let Some(&id) = self.symbol_ids.get(&s) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbol_ids.insert(s.clone(), id);
        self.symbols.push(s);
        id
    }

    fn count_word(&mut self, w: usize, add: bool) {
        let (syms, count) = &self.words[w];
        for win in syms.windows(2) {
            let pair = (win[0], win[1]);
            let c = self.pair_counts.entry(pair).or_default();
            if add {
                *c += count;
                self.pair_words.entry(pair).or_default().insert(w);
            } else {
                *c -= count;
            }
        }
    }

    fn best_pair(&self) -> Option<(u32, u32)> {
        let mut best: Option<((u32, u32), u64)> = None;
        for (&pair, &count) in &self.pair_counts {
            if count < 2 {
                continue;
            }
            best = match best {
                None => Some((pair, count)),
                Some((bp, bc)) => {
                    let better = count > bc
                        || (count == bc
                            && (
                                &self.symbols[pair.0 as usize],
                                &self.symbols[pair.1 as usize],
                            ) < (&self.symbols[bp.0 as usize], &self.symbols[bp.1 as usize]));
                    if better {
                        Some((pair, count))
                    } else {
                        Some((bp, bc))
                    }
                }
            };
        }
        best.map(|(p, _)| p)
    }
}

fn train_merges<'a, I: IntoIterator<Item = &'a str>>(
    words: I,
    size: usize,
    kind: VocabKind,
) -> Result<SubwordVocab, TokenizeError> {
    let greedy = kind == VocabKind::GreedyLongestMatch;
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for w in words {
        *counts.entry(w).or_default() += 1;
    }
    let minimum = alphabet_size(counts.keys().copied());
    if size < minimum {
        return Err(TokenizeError::SizeTooSmall { size, minimum });
    }

    let mut state = MergeState {
        symbols: Vec::new(),
        symbol_ids: HashMap::new(),
        words: Vec::new(),
        pair_counts: HashMap::new(),
        pair_words: HashMap::new(),
    };
    let mut pieces: BTreeSet<String> = BTreeSet::new();
    for (word, &count) in &counts {
        let syms: Vec<u32> = word
            .chars()
            .enumerate()
            .map(|(i, c)| {
                let s = if greedy && i > 0 {
                    format!("{CONTINUATION}{c}")
                } else {
                    c.to_string()
                };
                pieces.insert(s.clone());
                state.intern(s)
            })
            .collect();
        state.words.push((syms, count));
    }
    // Base pieces get the low ids, in sorted order.
    let mut ordered: Vec<String> = pieces.iter().cloned().collect();
    for w in 0..state.words.len() {
        state.count_word(w, true);
    }

    let mut merges = Vec::new();
    while ordered.len() < size {
        let Some((a, b)) = state.best_pair() else {
            break;
        };
        let left = state.symbols[a as usize].clone();
        let right = state.symbols[b as usize].clone();
        let joined = if greedy {
            format!(
                "{left}{}",
                right.strip_prefix(CONTINUATION).unwrap_or(&right)
            )
        } else {
            format!("{left}{right}")
        };
        let new_id = state.intern(joined.clone());
        if pieces.insert(joined.clone()) {
            ordered.push(joined);
        }
        merges.push((left, right));

        let affected: Vec<usize> = state
            .pair_words
            .remove(&(a, b))
            .map(|s| s.into_iter().collect())
            .unwrap_or_default();
        for w in affected {
            state.count_word(w, false);
            let syms = &state.words[w].0;
            let mut merged = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == a && syms[i + 1] == b {
                    merged.push(new_id);
                    i += 2;
                } else {
                    merged.push(syms[i]);
                    i += 1;
                }
            }
            state.words[w].0 = merged;
            state.count_word(w, true);
        }
        state.pair_counts.retain(|_, c| *c > 0);
    }
    Ok(SubwordVocab::from_parts(kind, ordered, merges))
}

/// Maps token-level links to word level: words `j` and `l` are linked when
/// any token of `j` links to any token of `l`. A sure token link makes the
/// word link sure.
pub fn project_to_words(
    sub: &AlignmentSet,
    src: &TokenizedSentence,
    tgt: &TokenizedSentence,
) -> Result<AlignmentSet, TokenizeError> {
    let src_map = src.token_to_word();
    let tgt_map = tgt.token_to_word();
    let mut out = AlignmentSet::new();
    for link in sub.iter() {
        let s = *src_map.get(link.src).ok_or(TokenizeError::OutOfBounds {
            index: link.src,
            len: src_map.len(),
        })?;
        let t = *tgt_map.get(link.tgt).ok_or(TokenizeError::OutOfBounds {
            index: link.tgt,
            len: tgt_map.len(),
        })?;
        out.insert(AlignmentLink {
            src: s,
            tgt: t,
            sureness: link.sureness,
        });
    }
    Ok(out)
}
