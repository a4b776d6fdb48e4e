//! Python bindings: alignment sets as lists of `(src, tgt)` or
//! `(src, tgt, sure)` tuples, sentences as whitespace-separated strings.

#![allow(clippy::useless_conversion)] // pyo3 0.22 macro expansion

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use silverbench::align::{align_corpus, AlignerConfig, SymmetrizationMethod};
use silverbench::corpus::{self, AlignmentLink, AlignmentSet, Sentence, SentencePair};
use silverbench::eval::{self, EvalReport};
use silverbench::inference::{create_silver_dataset, InferenceConfig};
use silverbench::providers::{SyntheticLanguageSpec, SyntheticProvider};
use silverbench::synth::{self, SynthParams};
use silverbench::tokenize::{self, SubwordVocab, VocabKind};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_set(links: &Bound<'_, PyAny>) -> PyResult<AlignmentSet> {
    let mut set = AlignmentSet::new();
    for item in links.iter()? {
        let item = item?;
        let link = if let Ok((s, t, sure)) = item.extract::<(usize, usize, bool)>() {
            if sure {
                AlignmentLink::sure(s, t)
            } else {
                AlignmentLink::possible(s, t)
            }
        } else {
            let (s, t) = item.extract::<(usize, usize)>()?;
            AlignmentLink::sure(s, t)
        };
        set.insert(link);
    }
    Ok(set)
}

fn to_sets(items: &Bound<'_, PyAny>) -> PyResult<Vec<AlignmentSet>> {
    items.iter()?.map(|i| to_set(&i?)).collect()
}

fn pairs(set: &AlignmentSet) -> Vec<(usize, usize)> {
    set.pairs().collect()
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<PyObject> {
    Ok(py
        .import_bound("json")?
        .call_method1("loads", (text,))?
        .unbind())
}

fn report(py: Python<'_>, r: &EvalReport) -> PyResult<PyObject> {
    json_to_py(py, &serde_json::to_string(r).map_err(value_error)?)
}

/// Parses one Pharaoh line into `(src, tgt, sure)` tuples.
#[pyfunction]
fn parse_pharaoh(line: &str) -> PyResult<Vec<(usize, usize, bool)>> {
    let set = corpus::parse_pharaoh(line).map_err(value_error)?;
    Ok(set
        .iter()
        .map(|l| (l.src, l.tgt, l.sureness == corpus::Sureness::Sure))
        .collect())
}

#[pyfunction]
fn format_pharaoh(links: &Bound<'_, PyAny>) -> PyResult<String> {
    Ok(corpus::format_pharaoh(&to_set(links)?))
}

/// Precision, recall, F1 and AER of one sentence.
#[pyfunction]
fn score(py: Python<'_>, pred: &Bound<'_, PyAny>, gold: &Bound<'_, PyAny>) -> PyResult<PyObject> {
    report(py, &eval::prf1(&to_set(pred)?, &to_set(gold)?))
}

/// Micro-averaged scores over parallel lists of sentences.
#[pyfunction]
fn score_corpus(
    py: Python<'_>,
    preds: &Bound<'_, PyAny>,
    golds: &Bound<'_, PyAny>,
) -> PyResult<PyObject> {
    let r = eval::evaluate(&to_sets(preds)?, &to_sets(golds)?).map_err(value_error)?;
    report(py, &r)
}

#[pyfunction]
fn partial_filter(
    pred: &Bound<'_, PyAny>,
    silver: &Bound<'_, PyAny>,
) -> PyResult<Vec<(usize, usize)>> {
    Ok(pairs(&eval::partial_filter(
        &to_set(pred)?,
        &to_set(silver)?,
    )))
}

#[pyfunction]
fn pearson_r(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    eval::pearson_r(&x, &y).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (forward, backward, method = "gdfa"))]
fn symmetrize(
    forward: &Bound<'_, PyAny>,
    backward: &Bound<'_, PyAny>,
    method: &str,
) -> PyResult<Vec<(usize, usize)>> {
    let method: SymmetrizationMethod = method.parse().map_err(value_error)?;
    Ok(pairs(&silverbench::align::symmetrize(
        &to_set(forward)?,
        &to_set(backward)?,
        method,
    )))
}

#[pyclass(name = "Vocab", module = "pysilverbench")]
struct PyVocab {
    inner: SubwordVocab,
}

#[pymethods]
impl PyVocab {
    /// Trains a vocabulary of kind `word`, `bpe` or `greedy` on `words`.
    #[staticmethod]
    #[pyo3(signature = (kind, words, size = 0))]
    fn train(kind: &str, words: Vec<String>, size: usize) -> PyResult<Self> {
        let kind: VocabKind = kind.parse().map_err(value_error)?;
        let inner =
            tokenize::train(kind, words.iter().map(String::as_str), size).map_err(value_error)?;
        Ok(PyVocab { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyVocab {
            inner: SubwordVocab::from_json(text).map_err(value_error)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn merges(&self) -> Vec<(String, String)> {
        self.inner.merges().to_vec()
    }

    /// Returns `(tokens, word_spans)` for a sentence.
    fn tokenize(&self, sentence: &str) -> (Vec<String>, Vec<(usize, usize)>) {
        let t = self.inner.tokenize(&Sentence::from_text(sentence, "x"));
        (t.tokens, t.word_spans)
    }

    fn detokenize_word(&self, pieces: Vec<String>) -> String {
        self.inner.detokenize_word(&pieces)
    }

    fn __repr__(&self) -> String {
        format!(
            "Vocab(kind={:?}, size={})",
            self.inner.kind(),
            self.inner.size()
        )
    }
}

/// Aligns `(source, target)` sentence pairs with Model 1 both ways and
/// symmetrization. Without a vocab, words are the tokens.
#[pyfunction]
#[pyo3(signature = (sentence_pairs, vocab = None, iterations = 5, method = "gdfa"))]
fn align(
    py: Python<'_>,
    sentence_pairs: Vec<(String, String)>,
    vocab: Option<&PyVocab>,
    iterations: usize,
    method: &str,
) -> PyResult<Vec<Vec<(usize, usize)>>> {
    let cfg = AlignerConfig {
        iterations,
        method: method.parse().map_err(value_error)?,
    };
    let pairs_: Vec<SentencePair> = sentence_pairs
        .iter()
        .enumerate()
        .map(|(i, (s, t))| SentencePair {
            id: corpus::line_id(i, sentence_pairs.len()),
            source: Sentence::from_text(s, "src"),
            target: Sentence::from_text(t, "tgt"),
        })
        .collect();
    let word_vocab;
    let vocab = match vocab {
        Some(v) => &v.inner,
        None => {
            word_vocab = tokenize::train_word(
                pairs_
                    .iter()
                    .flat_map(|p| p.source.words.iter().chain(&p.target.words))
                    .map(String::as_str),
            );
            &word_vocab
        }
    };
    let out = py
        .allow_threads(|| align_corpus(&pairs_, vocab, &cfg))
        .map_err(value_error)?;
    Ok(out.iter().map(pairs).collect())
}

#[pyclass(name = "SyntheticLanguage", module = "pysilverbench")]
struct PySyntheticLanguage {
    provider: SyntheticProvider,
}

#[pymethods]
impl PySyntheticLanguage {
    #[new]
    fn new(spec_json: &str) -> PyResult<Self> {
        let spec: SyntheticLanguageSpec = serde_json::from_str(spec_json).map_err(value_error)?;
        Ok(PySyntheticLanguage {
            provider: SyntheticProvider::new(spec).map_err(value_error)?,
        })
    }

    /// Generates a random language and corpus. Returns
    /// `(language, sources, targets, truth)`.
    #[staticmethod]
    #[pyo3(signature = (words = 50, sentences = 200, fusion = 0.1, reverse = false, seed = 0, class_size = 5))]
    #[allow(clippy::type_complexity)]
    fn generate(
        words: usize,
        sentences: usize,
        fusion: f64,
        reverse: bool,
        seed: u64,
        class_size: usize,
    ) -> PyResult<(Self, Vec<String>, Vec<String>, Vec<Vec<(usize, usize)>>)> {
        let params = SynthParams {
            words,
            sentences,
            fusion,
            reverse,
            seed,
            class_size,
            ..SynthParams::default()
        };
        let c = synth::generate(&params).map_err(value_error)?;
        let lang = PySyntheticLanguage {
            provider: SyntheticProvider::new(c.spec).map_err(value_error)?,
        };
        Ok((
            lang,
            c.sources.iter().map(Sentence::text).collect(),
            c.targets.iter().map(Sentence::text).collect(),
            c.truth.iter().map(pairs).collect(),
        ))
    }

    fn to_json(&self) -> String {
        self.provider.spec().to_json()
    }

    fn translate(&self, sentence: &str) -> String {
        self.provider.translate_text(sentence)
    }

    fn alternatives(&self, word: &str) -> Vec<String> {
        self.provider.alternatives(word)
    }

    fn truth(&self, sentence: &str) -> PyResult<Vec<(usize, usize)>> {
        let t = self
            .provider
            .truth(&Sentence::from_text(sentence, "src"))
            .map_err(value_error)?;
        Ok(pairs(&t))
    }

    /// Silver alignments for `sentences`, using this language as both the
    /// translator and the fill-mask model. Returns `(records, stats)`.
    #[pyo3(signature = (sentences, k = 5, min_valid = 4))]
    fn create_silver(
        &self,
        py: Python<'_>,
        sentences: Vec<String>,
        k: usize,
        min_valid: usize,
    ) -> PyResult<(PyObject, PyObject)> {
        let mono: Vec<(String, Sentence)> = sentences
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    corpus::line_id(i, sentences.len()),
                    Sentence::from_text(s, "src"),
                )
            })
            .collect();
        let cfg = InferenceConfig { k, min_valid };
        let (records, stats) = py
            .allow_threads(|| {
                create_silver_dataset(&mono, &self.provider, &self.provider, &cfg, "tgt")
            })
            .map_err(value_error)?;
        let lines: Vec<String> = records.iter().map(|r| r.to_json_line()).collect();
        let records = json_to_py(py, &format!("[{}]", lines.join(",")))?;
        let stats = json_to_py(py, &serde_json::to_string(&stats).map_err(value_error)?)?;
        Ok((records, stats))
    }
}

#[pymodule]
fn pysilverbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(parse_pharaoh, m)?)?;
    m.add_function(wrap_pyfunction!(format_pharaoh, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(score_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(partial_filter, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_r, m)?)?;
    m.add_function(wrap_pyfunction!(symmetrize, m)?)?;
    m.add_function(wrap_pyfunction!(align, m)?)?;
    m.add_class::<PyVocab>()?;
    m.add_class::<PySyntheticLanguage>()?;
    Ok(())
}
