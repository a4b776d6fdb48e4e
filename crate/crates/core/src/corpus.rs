//! Sentences, parallel corpora, alignment sets and the file formats they travel in.
//!
//! Supported formats:
//!
//! * Pharaoh: one sentence per line, `i-j` for sure links and `i?j` for possible links.
//! * WPT shared-task: `sentence-id src-pos tgt-pos [S|P]`, 1-based positions.
//! * Plain parallel text: one whitespace-tokenized sentence per line.
//! * Silver JSON lines: one [`SilverRecord`] per line.
//! * Sidecar annotations: JSON lines of `{"id": ..., "labels": [...]}`.
//!
//! Files written by this crate start with a header line beginning with
//! [`HEADER_PREFIX`]; every reader here skips such lines.

use std::collections::btree_map;
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::PositionOutcome;

/// Marks the provenance header line of every file this crate writes.
pub const HEADER_PREFIX: &str = "#! silverbench";

pub fn header_line(config_hash: &str) -> String {
    format!(
        "{HEADER_PREFIX} {} config={config_hash}",
        env!("CARGO_PKG_VERSION")
    )
}

pub fn is_header(line: &str) -> bool {
    line.starts_with(HEADER_PREFIX)
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed alignment token {token:?} at column {column}")]
    Pharaoh { token: String, column: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line count mismatch: source has {source_lines} lines, target has {target_lines}")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },
    #[error("{path}: empty sentence on line {line}")]
    EmptyLine { path: PathBuf, line: usize },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(
        "sentence {id}: link ({src}, {tgt}) out of bounds for {n} source and {m} target words"
    )]
    OutOfBounds {
        id: String,
        src: usize,
        tgt: usize,
        n: usize,
        m: usize,
    },
    #[error("{0}")]
    Mismatch(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub words: Vec<String>,
    pub language: String,
}

impl Sentence {
    pub fn new<S: Into<String>>(words: Vec<S>, language: &str) -> Self {
        Sentence {
            words: words.into_iter().map(Into::into).collect(),
            language: language.to_string(),
        }
    }

    /// Splits `text` on whitespace.
    pub fn from_text(text: &str, language: &str) -> Self {
        Sentence::new(text.split_whitespace().collect(), language)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn text(&self) -> String {
        self.words.join(" ")
    }

    pub fn lowercased(&self) -> Sentence {
        Sentence {
            words: self.words.iter().map(|w| w.to_lowercase()).collect(),
            language: self.language.clone(),
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: String,
    pub source: Sentence,
    pub target: Sentence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sureness {
    Sure,
    Possible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlignmentLink {
    pub src: usize,
    pub tgt: usize,
    pub sureness: Sureness,
}

impl AlignmentLink {
    pub fn sure(src: usize, tgt: usize) -> Self {
        AlignmentLink {
            src,
            tgt,
            sureness: Sureness::Sure,
        }
    }

    pub fn possible(src: usize, tgt: usize) -> Self {
        AlignmentLink {
            src,
            tgt,
            sureness: Sureness::Possible,
        }
    }
}

/// A set of links between word positions.
///
/// Each `(src, tgt)` pair is stored once; a pair that is both sure and
/// possible is kept as sure. Sure links always count as possible links, so
/// `sure() ⊆ possible()`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AlignmentSet {
    links: BTreeMap<(usize, usize), Sureness>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set of sure links.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        pairs
            .into_iter()
            .map(|(s, t)| AlignmentLink::sure(s, t))
            .collect()
    }

    pub fn insert(&mut self, link: AlignmentLink) {
        match self.links.entry((link.src, link.tgt)) {
            btree_map::Entry::Vacant(v) => {
                v.insert(link.sureness);
            }
            btree_map::Entry::Occupied(mut o) => {
                if link.sureness == Sureness::Sure {
                    o.insert(Sureness::Sure);
                }
            }
        }
    }

    pub fn insert_sure(&mut self, src: usize, tgt: usize) {
        self.insert(AlignmentLink::sure(src, tgt));
    }

    pub fn insert_possible(&mut self, src: usize, tgt: usize) {
        self.insert(AlignmentLink::possible(src, tgt));
    }

    pub fn contains(&self, src: usize, tgt: usize) -> bool {
        self.links.contains_key(&(src, tgt))
    }

    pub fn is_sure(&self, src: usize, tgt: usize) -> bool {
        self.links.get(&(src, tgt)) == Some(&Sureness::Sure)
    }

    pub fn sureness(&self, src: usize, tgt: usize) -> Option<Sureness> {
        self.links.get(&(src, tgt)).copied()
    }

    /// Number of distinct `(src, tgt)` pairs, i.e. `|P|`.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Number of sure pairs, i.e. `|S|`.
    pub fn sure_len(&self) -> usize {
        self.links
            .values()
            .filter(|s| **s == Sureness::Sure)
            .count()
    }

    /// Links in `(src, tgt)` order.
    pub fn iter(&self) -> impl Iterator<Item = AlignmentLink> + '_ {
        self.links
            .iter()
            .map(|(&(src, tgt), &sureness)| AlignmentLink { src, tgt, sureness })
    }

    /// All pairs regardless of sureness (the possible set `P`).
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.keys().copied()
    }

    /// Sure pairs only (the sure set `S`).
    pub fn sure_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links
            .iter()
            .filter(|(_, s)| **s == Sureness::Sure)
            .map(|(k, _)| *k)
    }

    pub fn extend_from(&mut self, other: &AlignmentSet) {
        for link in other.iter() {
            self.insert(link);
        }
    }

    /// Keeps pairs for which `keep` returns true.
    pub fn filtered<F: FnMut(usize, usize) -> bool>(&self, mut keep: F) -> AlignmentSet {
        AlignmentSet {
            links: self
                .links
                .iter()
                .filter(|(&(s, t), _)| keep(s, t))
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }

    /// True when every pair of `self` is a pair of `other` (sureness ignored).
    pub fn pairs_subset_of(&self, other: &AlignmentSet) -> bool {
        self.pairs().all(|(s, t)| other.contains(s, t))
    }

    /// Rejects links outside an `n × m` sentence pair.
    pub fn check_bounds(&self, id: &str, n: usize, m: usize) -> Result<(), CorpusError> {
        match self.pairs().find(|&(s, t)| s >= n || t >= m) {
            Some((src, tgt)) => Err(CorpusError::OutOfBounds {
                id: id.to_string(),
                src,
                tgt,
                n,
                m,
            }),
            None => Ok(()),
        }
    }
}

impl FromIterator<AlignmentLink> for AlignmentSet {
    fn from_iter<I: IntoIterator<Item = AlignmentLink>>(iter: I) -> Self {
        let mut set = AlignmentSet::new();
        for link in iter {
            set.insert(link);
        }
        set
    }
}

/// Parses one line of Pharaoh alignments.
pub fn parse_pharaoh(line: &str) -> Result<AlignmentSet, CorpusError> {
    let mut set = AlignmentSet::new();
    let mut column = 0;
    for raw in line.split_inclusive(char::is_whitespace) {
        let token = raw.trim_end();
        let start = column;
        column += raw.chars().count();
        if token.is_empty() {
            continue;
        }
        let bad = || CorpusError::Pharaoh {
            token: token.to_string(),
            column: start + 1,
        };
        let (sep_at, sureness) = match (token.find('-'), token.find('?')) {
            (Some(i), None) => (i, Sureness::Sure),
            (None, Some(i)) => (i, Sureness::Possible),
            _ => return Err(bad()),
        };
        let src = parse_index(&token[..sep_at]).ok_or_else(bad)?;
        let tgt = parse_index(&token[sep_at + 1..]).ok_or_else(bad)?;
        set.insert(AlignmentLink { src, tgt, sureness });
    }
    Ok(set)
}

fn parse_index(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Formats links sorted by `(src, tgt)`.
pub fn format_pharaoh(set: &AlignmentSet) -> String {
    let mut out = String::new();
    for (i, link) in set.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let sep = match link.sureness {
            Sureness::Sure => '-',
            Sureness::Possible => '?',
        };
        out.push_str(&format!("{}{}{}", link.src, sep, link.tgt));
    }
    out
}

fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if lines.is_empty() && is_header(&line) {
            continue;
        }
        lines.push(line);
    }
    Ok(lines)
}

/// Reads one alignment set per line.
pub fn read_pharaoh_file(path: &Path) -> Result<Vec<AlignmentSet>, CorpusError> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, line)| {
            parse_pharaoh(line).map_err(|e| CorpusError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_pharaoh_file(
    path: &Path,
    header: Option<&str>,
    sets: &[AlignmentSet],
) -> Result<(), CorpusError> {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
        out.push('\n');
    }
    for set in sets {
        out.push_str(&format_pharaoh(set));
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Reads a WPT-style alignment file, grouped by sentence id in order of
/// first appearance. Positions are converted from 1-based to 0-based; a
/// missing flag means sure.
pub fn read_wpt_file(path: &Path) -> Result<Vec<(String, AlignmentSet)>, CorpusError> {
    let mut order: Vec<String> = Vec::new();
    let mut sets: BTreeMap<String, AlignmentSet> = BTreeMap::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let bad = |message: &str| CorpusError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message: message.to_string(),
        };
        if fields.len() < 3 || fields.len() > 4 {
            return Err(bad("expected 3 or 4 columns"));
        }
        let pos = |s: &str| -> Result<usize, CorpusError> {
            match parse_index(s) {
                Some(p) if p >= 1 => Ok(p - 1),
                _ => Err(bad(&format!("bad 1-based position {s:?}"))),
            }
        };
        let src = pos(fields[1])?;
        let tgt = pos(fields[2])?;
        let sureness = match fields.get(3).copied() {
            None | Some("S") | Some("s") => Sureness::Sure,
            Some("P") | Some("p") => Sureness::Possible,
            Some(other) => return Err(bad(&format!("bad flag {other:?}"))),
        };
        let id = fields[0].to_string();
        if !sets.contains_key(&id) {
            order.push(id.clone());
        }
        sets.entry(id)
            .or_default()
            .insert(AlignmentLink { src, tgt, sureness });
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let set = sets.remove(&id).unwrap_or_default();
            (id, set)
        })
        .collect())
}

/// Line ids are 1-based line numbers padded to at least six digits.
pub fn line_id(index: usize, total: usize) -> String {
    let width = total.to_string().len().max(6);
    format!("{:0width$}", index + 1)
}

/// Loads a monolingual corpus, one sentence per line. Empty lines are
/// rejected.
pub fn load_sentences(path: &Path, language: &str) -> Result<Vec<(String, Sentence)>, CorpusError> {
    let lines = read_lines(path)?;
    let total = lines.len();
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let s = Sentence::from_text(line, language);
            if s.is_empty() {
                return Err(CorpusError::EmptyLine {
                    path: path.to_path_buf(),
                    line: i + 1,
                });
            }
            Ok((line_id(i, total), s))
        })
        .collect()
}

/// Loads a sentence-aligned parallel corpus.
pub fn load_parallel(
    source_path: &Path,
    target_path: &Path,
) -> Result<Vec<SentencePair>, CorpusError> {
    load_parallel_with_languages(source_path, target_path, "src", "tgt")
}

pub fn load_parallel_with_languages(
    source_path: &Path,
    target_path: &Path,
    source_language: &str,
    target_language: &str,
) -> Result<Vec<SentencePair>, CorpusError> {
    let src = read_lines(source_path)?;
    let tgt = read_lines(target_path)?;
    if src.len() != tgt.len() {
        return Err(CorpusError::LineCountMismatch {
            source_lines: src.len(),
            target_lines: tgt.len(),
        });
    }
    let total = src.len();
    src.iter()
        .zip(&tgt)
        .enumerate()
        .map(|(i, (s, t))| {
            let source = Sentence::from_text(s, source_language);
            let target = Sentence::from_text(t, target_language);
            for (sent, path) in [(&source, source_path), (&target, target_path)] {
                if sent.is_empty() {
                    return Err(CorpusError::EmptyLine {
                        path: path.to_path_buf(),
                        line: i + 1,
                    });
                }
            }
            Ok(SentencePair {
                id: line_id(i, total),
                source,
                target,
            })
        })
        .collect()
}

pub fn write_sentences(
    path: &Path,
    header: Option<&str>,
    sentences: &[Sentence],
) -> Result<(), CorpusError> {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
        out.push('\n');
    }
    for s in sentences {
        out.push_str(&s.text());
        out.push('\n');
    }
    fs::write(path, out).map_err(io_err(path))
}

/// Checks that every set lies within its sentence pair. Sets and pairs are
/// matched by position.
pub fn attach(pairs: &[SentencePair], sets: &[AlignmentSet]) -> Result<(), CorpusError> {
    if pairs.len() != sets.len() {
        return Err(CorpusError::Mismatch(format!(
            "{} sentence pairs but {} alignment lines",
            pairs.len(),
            sets.len()
        )));
    }
    for (pair, set) in pairs.iter().zip(sets) {
        set.check_bounds(&pair.id, pair.source.len(), pair.target.len())?;
    }
    Ok(())
}

/// A sentence pair with silver links and the per-position record of how each
/// link was (or was not) inferred.
#[derive(Debug, Clone, PartialEq)]
pub struct SilverRecord {
    pub pair: SentencePair,
    pub links: AlignmentSet,
    pub provenance: Vec<PositionOutcome>,
}

#[derive(Serialize, Deserialize)]
struct SilverLine {
    id: String,
    source_language: String,
    target_language: String,
    source: Vec<String>,
    target: Vec<String>,
    links: Vec<[usize; 2]>,
    provenance: Vec<PositionOutcome>,
}

impl SilverRecord {
    pub fn to_json_line(&self) -> String {
        let line = SilverLine {
            id: self.pair.id.clone(),
            source_language: self.pair.source.language.clone(),
            target_language: self.pair.target.language.clone(),
            source: self.pair.source.words.clone(),
            target: self.pair.target.words.clone(),
            links: self.links.pairs().map(|(s, t)| [s, t]).collect(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string(&line).expect("silver record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<SilverRecord, serde_json::Error> {
        let l: SilverLine = serde_json::from_str(line)?;
        Ok(SilverRecord {
            pair: SentencePair {
                id: l.id,
                source: Sentence {
                    words: l.source,
                    language: l.source_language,
                },
                target: Sentence {
                    words: l.target,
                    language: l.target_language,
                },
            },
            links: AlignmentSet::from_pairs(l.links.into_iter().map(|[s, t]| (s, t))),
            provenance: l.provenance,
        })
    }
}

pub fn write_silver_file(
    path: &Path,
    header: Option<&str>,
    records: &[SilverRecord],
) -> Result<(), CorpusError> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
        out.push('\n');
    }
    for r in records {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    file.write_all(out.as_bytes()).map_err(io_err(path))
}

pub fn read_silver_file(path: &Path) -> Result<Vec<SilverRecord>, CorpusError> {
    read_lines(path)?
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let rec = SilverRecord::from_json_line(l).map_err(|e| CorpusError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            rec.links
                .check_bounds(&rec.pair.id, rec.pair.source.len(), rec.pair.target.len())?;
            Ok(rec)
        })
        .collect()
}

/// Per-word labels (e.g. part-of-speech tags) keyed by sentence id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSidecar {
    labels: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct SidecarLine {
    id: String,
    labels: Vec<String>,
}

impl AnnotationSidecar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: &str, labels: Vec<String>) {
        self.labels.insert(id.to_string(), labels);
    }

    pub fn get(&self, id: &str) -> Option<&[String]> {
        self.labels.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn read(path: &Path) -> Result<AnnotationSidecar, CorpusError> {
        let mut sidecar = AnnotationSidecar::new();
        for (i, line) in read_lines(path)?.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let l: SidecarLine = serde_json::from_str(line).map_err(|e| CorpusError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            sidecar.labels.insert(l.id, l.labels);
        }
        Ok(sidecar)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (id, labels) in &self.labels {
            let line = SidecarLine {
                id: id.clone(),
                labels: labels.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("sidecar serializes"));
            out.push('\n');
        }
        out
    }

    /// Label counts must equal the word counts of the covered sentences.
    pub fn check_against(&self, pairs: &[SentencePair]) -> Result<(), CorpusError> {
        for pair in pairs {
            if let Some(labels) = self.labels.get(&pair.id) {
                if labels.len() != pair.source.len() {
                    return Err(CorpusError::Mismatch(format!(
                        "sentence {}: {} labels for {} words",
                        pair.id,
                        labels.len(),
                        pair.source.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_line_is_empty_alignment() {
        assert!(parse_pharaoh("").unwrap().is_empty());
        assert!(parse_pharaoh("   ").unwrap().is_empty());
    }

    #[test]
    fn parses_sure_links() {
        let set = parse_pharaoh("0-0 1-2").unwrap();
        let links: Vec<_> = set.iter().collect();
        assert_eq!(
            links,
            vec![AlignmentLink::sure(0, 0), AlignmentLink::sure(1, 2)]
        );
    }

    #[test]
    fn parses_mixed_sureness() {
        let set = parse_pharaoh("0-0 1?2").unwrap();
        assert_eq!(set.pairs().collect::<Vec<_>>(), vec![(0, 0), (1, 2)]);
        assert_eq!(set.sure_pairs().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(set.sureness(1, 2), Some(Sureness::Possible));
    }

    #[test]
    fn sure_wins_over_possible() {
        let set = parse_pharaoh("0?0 0-0").unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.is_sure(0, 0));
    }

    #[test]
    fn malformed_tokens_report_column() {
        match parse_pharaoh("0-0 12 3-4") {
            Err(CorpusError::Pharaoh { token, column }) => {
                assert_eq!(token, "12");
                assert_eq!(column, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_pharaoh("a-1").is_err());
        assert!(parse_pharaoh("1-").is_err());
        assert!(parse_pharaoh("1-2-3").is_err());
        assert!(parse_pharaoh("-1-2").is_err());
        assert!(parse_pharaoh("1-?2").is_err());
    }

    #[test]
    fn formats_sorted() {
        assert_eq!(format_pharaoh(&AlignmentSet::new()), "");
        let set = AlignmentSet::from_pairs([(1, 2), (0, 0)]);
        assert_eq!(format_pharaoh(&set), "0-0 1-2");
        let mut p = AlignmentSet::new();
        p.insert_possible(0, 1);
        assert_eq!(format_pharaoh(&p), "0?1");
    }

    #[test]
    fn bounds_are_checked_not_clipped() {
        let set = AlignmentSet::from_pairs([(0, 0), (2, 1)]);
        assert!(set.check_bounds("x", 3, 2).is_ok());
        assert!(matches!(
            set.check_bounds("x", 2, 2),
            Err(CorpusError::OutOfBounds { src: 2, tgt: 1, .. })
        ));
    }

    #[test]
    fn line_ids_are_padded() {
        assert_eq!(line_id(0, 5), "000001");
        assert_eq!(line_id(41, 1_234_567), "0000042");
    }

    fn arb_set() -> impl Strategy<Value = AlignmentSet> {
        prop::collection::vec((0usize..30, 0usize..30, any::<bool>()), 0..40).prop_map(|v| {
            v.into_iter()
                .map(|(s, t, sure)| {
                    if sure {
                        AlignmentLink::sure(s, t)
                    } else {
                        AlignmentLink::possible(s, t)
                    }
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn pharaoh_round_trip(set in arb_set()) {
            let text = format_pharaoh(&set);
            prop_assert_eq!(parse_pharaoh(&text).unwrap(), set);
        }

        #[test]
        fn sure_subset_of_possible(set in arb_set()) {
            let p: Vec<_> = set.pairs().collect();
            for s in set.sure_pairs() {
                prop_assert!(p.contains(&s));
            }
        }
    }
}
