//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
//! Settings resolve as flags, then the `--config` JSON file, then defaults.
//! Every output file carries a header with the tool version and a hash of
//! the resolved settings; output paths and `--jobs` are not part of that
//! hash, so runs differing only in those produce identical bytes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::align::{align_tokenized, AlignerConfig, SymmetrizationMethod};
use crate::corpus::{
    self, header_line, load_sentences, read_pharaoh_file, read_silver_file, read_wpt_file,
    write_pharaoh_file, write_sentences, write_silver_file, AlignmentSet, AnnotationSidecar,
    SentencePair,
};
use crate::eval::{
    breakdown_by_frequency, breakdown_by_pos, evaluate, partial_filter, rank_configs, EvalReport,
    FrequencyCounts,
};
use crate::inference::{InferenceConfig, InferenceError, SilverPipeline};
use crate::providers::{build_fill_mask, build_translator, ProviderOptions, ProviderSelection};
use crate::synth::{generate, SynthParams};
use crate::tokenize::{
    alphabet_size, read_pretokenized, train, SubwordVocab, TokenizedSentence, VocabKind,
};

const FORMATS: &str = "\
File formats:
  parallel/mono text   one whitespace-tokenized sentence per line (UTF-8, LF)
  Pharaoh              one sentence per line; `i-j` sure link, `i?j` possible link, 0-based
  WPT                  `sentence-id src-pos tgt-pos [S|P]` per line, 1-based positions
  silver JSONL         {id, source_language, target_language, source, target, links: [[s,t],...], provenance}
  sidecar JSONL        {id, labels: [...]} with one label per source word
  pretokenized JSONL   {id, tokens: [...], word_spans: [[start,end],...]}
  vocab JSON           {kind, size, pieces: {piece: id}, merges: [[left,right],...]}
  synthetic spec JSON  {lexicon: {src: tgt}, fusion_rules: [{source: [a,b], target}], reorder: identity|reverse, classes: {name: [words]}}
Providers: --mt/--mlm synthetic:<specfile> | http:<base-url>
  POST <base>/translate {src, tgt, texts} -> {translations}
  POST <base>/fill-mask {words, mask_index, top_k} -> {candidates}
Text outputs start with a `#! silverbench <version> config=<hash>` line; JSON outputs carry it under \"header\".";

#[derive(Debug, Parser)]
#[command(name = "silverbench", version, about = "Silver word-alignment data and alignment evaluation", after_help = FORMATS)]
pub struct Cli {
    /// JSON file with default values for any long flag (keys use underscores).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads and in-flight provider requests (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create silver alignments from monolingual text.
    Create(CreateArgs),
    /// Train a shared source+target tokenizer.
    TrainTokenizer(TrainArgs),
    /// Align a parallel corpus with IBM Model 1 and symmetrization.
    Align(AlignArgs),
    /// Score predicted alignments against gold or silver alignments.
    Eval(EvalArgs),
    /// Correlate configuration rankings on silver and gold data.
    Correlate(CorrelateArgs),
    /// Synthetic-language utilities.
    Synth {
        #[command(subcommand)]
        command: SynthCommand,
    },
}

#[derive(Debug, Subcommand)]
enum SynthCommand {
    /// Generate a synthetic language spec, parallel corpus and truth alignments.
    Gen(SynthGenArgs),
}

#[derive(Debug, Args)]
struct CreateArgs {
    /// Monolingual source sentences, one per line.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    mt: Option<String>,
    #[arg(long)]
    mlm: Option<String>,
    /// Silver JSONL output.
    #[arg(long)]
    out: PathBuf,
    /// Yield statistics JSON (default: <out>.stats.json).
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    min_valid: Option<usize>,
    #[arg(long)]
    src_lang: Option<String>,
    #[arg(long)]
    tgt_lang: Option<String>,
    /// Randomly sample this many input sentences.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lowercase: bool,
    /// Translation cache directory for HTTP providers.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    /// Attempts per provider request.
    #[arg(long)]
    retries: Option<u32>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    source: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    /// word, bpe, greedy or char.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AlignArgs {
    #[arg(long)]
    source: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    /// Pretokenized source JSONL, used instead of --tokenizer.
    #[arg(long)]
    src_tokens: Option<PathBuf>,
    #[arg(long)]
    tgt_tokens: Option<PathBuf>,
    /// A vocab file, `word` or `char`.
    #[arg(long)]
    tokenizer: Option<String>,
    /// gdfa, gdf, gd, int or union.
    #[arg(long)]
    sym: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// pharaoh, wpt or silver (default: from the file extension).
    #[arg(long)]
    gold_format: Option<String>,
    /// Silver JSONL restricting predictions to covered source words.
    #[arg(long)]
    partial: Option<PathBuf>,
    /// Parallel corpus the alignments refer to.
    #[arg(long)]
    source: Option<PathBuf>,
    #[arg(long)]
    target: Option<PathBuf>,
    /// Part-of-speech sidecar JSONL for a per-tag breakdown.
    #[arg(long)]
    pos: Option<PathBuf>,
    /// Add a per-frequency breakdown.
    #[arg(long)]
    freq: bool,
    /// Corpus for frequency counts (default: the evaluated corpus).
    #[arg(long)]
    freq_source: Option<PathBuf>,
    #[arg(long)]
    freq_target: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    /// NAME=PREDICTIONS.pharaoh, repeated per configuration.
    #[arg(long = "run", value_name = "NAME=FILE")]
    runs: Vec<String>,
    #[arg(long)]
    silver: Option<PathBuf>,
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    gold_format: Option<String>,
    /// CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthGenArgs {
    #[arg(long)]
    words: Option<usize>,
    #[arg(long)]
    sentences: Option<usize>,
    #[arg(long)]
    fusion: Option<f64>,
    #[arg(long)]
    reverse: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    class_size: Option<usize>,
    #[arg(long)]
    min_len: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Provider(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Provider(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

/// Flag values layered over a JSON config file.
struct Settings {
    file: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Settings> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("{}: {e}", p.display())))?;
                match serde_json::from_str(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(usage("config file must hold a JSON object")),
                    Err(e) => return Err(usage(format!("{}: {e}", p.display()))),
                }
            }
        };
        Ok(Settings {
            file,
            resolved: BTreeMap::new(),
        })
    }

    fn opt<T: DeserializeOwned + Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(v) => Some(
                    serde_json::from_value(v.clone())
                        .map_err(|e| usage(format!("config key {key}: {e}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.resolved.insert(
                key.to_string(),
                serde_json::to_value(v).expect("serializable"),
            );
        }
        Ok(value)
    }

    fn get<T: DeserializeOwned + Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T> {
        let v = self.opt(key, flag)?.unwrap_or(default);
        self.resolved.insert(
            key.to_string(),
            serde_json::to_value(&v).expect("serializable"),
        );
        Ok(v)
    }

    fn required<T: DeserializeOwned + Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<T> {
        self.opt(key, flag)?
            .ok_or_else(|| usage(format!("--{} is required", key.replace('_', "-"))))
    }

    fn flag(&mut self, key: &str, flag: bool) -> Result<bool> {
        let v = flag || self.opt::<bool>(key, None)?.unwrap_or(false);
        self.resolved.insert(key.to_string(), Value::Bool(v));
        Ok(v)
    }

    /// Records a setting that affects output without being a flag.
    fn note(&mut self, key: &str, value: Value) {
        self.resolved.insert(key.to_string(), value);
    }

    /// The resolved settings and their header line.
    fn header(&self, command: &str) -> (Value, String) {
        let mut cfg = Map::new();
        cfg.insert("command".into(), Value::String(command.into()));
        for (k, v) in &self.resolved {
            cfg.insert(k.clone(), v.clone());
        }
        let cfg = Value::Object(cfg);
        let digest = Sha256::digest(serde_json::to_string(&cfg).expect("json").as_bytes());
        (cfg, header_line(&hex::encode(&digest[..8])))
    }
}

fn path_value(p: &Path) -> Value {
    Value::String(p.display().to_string())
}

fn write_json(path: &Path, header: &str, config: &Value, body: Value) -> Result<()> {
    let mut obj = Map::new();
    obj.insert("header".into(), Value::String(header.to_string()));
    obj.insert("config".into(), config.clone());
    match body {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("data".into(), other);
        }
    }
    let text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json") + "\n";
    std::fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Parses `argv` (program name first) and runs the subcommand. Returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    let jobs = settings.opt::<usize>("jobs", cli.jobs)?;
    // --jobs never reaches the output header.
    settings.resolved.remove("jobs");
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(usage)?;
    pool.install(|| match cli.command {
        Command::Create(a) => create(a, settings),
        Command::TrainTokenizer(a) => train_tokenizer(a, settings),
        Command::Align(a) => align(a, settings),
        Command::Eval(a) => eval(a, settings),
        Command::Correlate(a) => correlate(a, settings),
        Command::Synth {
            command: SynthCommand::Gen(a),
        } => synth_gen(a, settings),
    })
}

fn create(a: CreateArgs, mut s: Settings) -> Result<()> {
    let input: PathBuf = s.required("input", a.input)?;
    let mt: String = s.required("mt", a.mt)?;
    let mlm: String = s.required("mlm", a.mlm)?;
    let k = s.get("k", a.k, 5)?;
    let min_valid = s.get("min_valid", a.min_valid, 4)?;
    let src_lang = s.get("src_lang", a.src_lang, "src".to_string())?;
    let tgt_lang = s.get("tgt_lang", a.tgt_lang, "tgt".to_string())?;
    let sample_n = s.opt::<usize>("sample", a.sample)?;
    let seed = s.get("seed", a.seed, 0u64)?;
    let lowercase = s.flag("lowercase", a.lowercase)?;
    let retries = s.get("retries", a.retries, 3u32)?;
    let no_cache = s.flag("no_cache", a.no_cache)?;
    let cache_dir = s.opt::<PathBuf>("cache_dir", a.cache_dir)?;
    // Cache settings do not change results.
    s.resolved.remove("no_cache");
    s.resolved.remove("cache_dir");

    let cfg = InferenceConfig { k, min_valid };
    cfg.validate().map_err(usage)?;
    let mt_sel: ProviderSelection = mt.parse().map_err(usage)?;
    let mlm_sel: ProviderSelection = mlm.parse().map_err(usage)?;
    let opts = ProviderOptions {
        cache_dir: if no_cache {
            None
        } else {
            Some(cache_dir.unwrap_or_else(|| PathBuf::from(".silverbench-cache")))
        },
        retry: crate::providers::RetryPolicy {
            attempts: retries.max(1),
            ..Default::default()
        },
    };
    let translator = build_translator(&mt_sel, &opts).map_err(usage)?;
    let fill_mask = build_fill_mask(&mlm_sel, &opts).map_err(usage)?;
    s.note("mt_identity", Value::String(translator.name()));
    s.note("mlm_identity", Value::String(fill_mask.name()));

    let mut mono = load_sentences(&input, &src_lang).map_err(data)?;
    if let Some(n) = sample_n {
        if n < mono.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked: Vec<usize> = sample(&mut rng, mono.len(), n).into_vec();
            picked.sort_unstable();
            mono = picked.into_iter().map(|i| mono[i].clone()).collect();
        }
    }
    if lowercase {
        for (_, sent) in &mut mono {
            *sent = sent.lowercased();
        }
    }

    let pipeline = SilverPipeline {
        mt: translator.as_ref(),
        mlm: fill_mask.as_ref(),
        cfg,
        target_language: tgt_lang,
    };
    let (records, stats) = pipeline.run(&mono).map_err(|e| match e {
        InferenceError::Usage(m) => CliError::Usage(m),
        InferenceError::Provider(p) => CliError::Provider(p.to_string()),
    })?;

    let (config, header) = s.header("create");
    write_silver_file(&a.out, Some(&header), &records).map_err(data)?;
    let stats_path = a.stats.unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".stats.json");
        PathBuf::from(p)
    });
    let mut body = serde_json::to_value(&stats).expect("stats serialize");
    body["position_yield"] = json!(stats.position_yield());
    write_json(&stats_path, &header, &config, body)?;
    println!(
        "{} sentences, {} with links, {} links, position yield {:.4}",
        stats.sentences,
        stats.aligned_sentences,
        stats.links,
        stats.position_yield()
    );
    if !stats.skipped.is_empty() {
        return Err(CliError::Provider(format!(
            "{} sentence(s) skipped after provider failures; first: {}: {}",
            stats.skipped.len(),
            stats.skipped[0].id,
            stats.skipped[0].reason
        )));
    }
    Ok(())
}

fn train_tokenizer(a: TrainArgs, mut s: Settings) -> Result<()> {
    let source: PathBuf = s.required("source", a.source)?;
    let target: PathBuf = s.required("target", a.target)?;
    let kind = s.get("kind", a.kind, "bpe".to_string())?;
    let size = s.opt::<usize>("size", a.size)?;
    let pairs = corpus::load_parallel(&source, &target).map_err(data)?;
    let vocab = build_vocab(&kind, size, &pairs)?;
    let (config, header) = s.header("train-tokenizer");
    let body: Value = serde_json::from_str(&vocab.to_json()).expect("vocab json");
    write_json(&a.out, &header, &config, body)?;
    println!("{} pieces, {} merges", vocab.size(), vocab.merges().len());
    Ok(())
}

fn all_words(pairs: &[SentencePair]) -> impl Iterator<Item = &str> {
    pairs
        .iter()
        .flat_map(|p| p.source.words.iter().chain(&p.target.words))
        .map(String::as_str)
}

fn build_vocab(kind: &str, size: Option<usize>, pairs: &[SentencePair]) -> Result<SubwordVocab> {
    if kind == "char" {
        let n = alphabet_size(all_words(pairs));
        return train(VocabKind::Bpe, all_words(pairs), n).map_err(data);
    }
    let kind: VocabKind = kind.parse().map_err(usage)?;
    let size = match (kind, size) {
        (VocabKind::Word, _) => 0,
        (_, Some(n)) => n,
        (_, None) => return Err(usage("--size is required for subword tokenizers")),
    };
    train(kind, all_words(pairs), size).map_err(data)
}

fn align(a: AlignArgs, mut s: Settings) -> Result<()> {
    let method: SymmetrizationMethod = s
        .get("sym", a.sym, "gdfa".to_string())?
        .parse()
        .map_err(usage)?;
    let iterations = s.get("iters", a.iters, 5usize)?;
    if iterations == 0 {
        return Err(usage("--iters must be at least 1"));
    }
    let cfg = AlignerConfig { iterations, method };
    let src_tokens = s.opt::<PathBuf>("src_tokens", a.src_tokens)?;
    let tgt_tokens = s.opt::<PathBuf>("tgt_tokens", a.tgt_tokens)?;
    let tokenized: Vec<(TokenizedSentence, TokenizedSentence)> = match (src_tokens, tgt_tokens) {
        (Some(sp), Some(tp)) => {
            let src = read_pretokenized(&sp).map_err(data)?;
            let tgt = read_pretokenized(&tp).map_err(data)?;
            if src.len() != tgt.len() {
                return Err(data(format!(
                    "{} source vs {} target token lines",
                    src.len(),
                    tgt.len()
                )));
            }
            src.into_iter()
                .zip(tgt)
                .map(|(a, b)| (a.into(), b.into()))
                .collect()
        }
        (None, None) => {
            let source: PathBuf = s.required("source", a.source)?;
            let target: PathBuf = s.required("target", a.target)?;
            let pairs = corpus::load_parallel(&source, &target).map_err(data)?;
            let tok = s.get("tokenizer", a.tokenizer, "word".to_string())?;
            let vocab = match tok.as_str() {
                "word" | "char" => build_vocab(&tok, None, &pairs)?,
                path => SubwordVocab::read(Path::new(path)).map_err(data)?,
            };
            pairs
                .iter()
                .map(|p| (vocab.tokenize(&p.source), vocab.tokenize(&p.target)))
                .collect()
        }
        _ => return Err(usage("--src-tokens and --tgt-tokens go together")),
    };
    let links = align_tokenized(&tokenized, &cfg).map_err(data)?;
    let (_, header) = s.header("align");
    write_pharaoh_file(&a.out, Some(&header), &links).map_err(data)?;
    println!("aligned {} sentence pairs", links.len());
    Ok(())
}

enum GoldFormat {
    Pharaoh,
    Wpt,
    Silver,
}

fn gold_format(explicit: Option<&str>, path: &Path) -> Result<GoldFormat> {
    let name = match explicit {
        Some(f) => f.to_string(),
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => "silver".into(),
            Some("wpt") => "wpt".into(),
            _ => "pharaoh".into(),
        },
    };
    match name.as_str() {
        "pharaoh" => Ok(GoldFormat::Pharaoh),
        "wpt" => Ok(GoldFormat::Wpt),
        "silver" => Ok(GoldFormat::Silver),
        other => Err(usage(format!("unknown gold format {other:?}"))),
    }
}

/// Index of a 1-based numeric sentence id.
fn id_index(id: &str) -> Result<usize> {
    match id.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n - 1),
        _ => Err(data(format!(
            "sentence id {id:?} is not a 1-based line number"
        ))),
    }
}

/// Gold alignments laid out by line, at least `len` entries long, plus the
/// sentence pairs when the format carries them.
fn load_gold(
    path: &Path,
    format: GoldFormat,
    len: usize,
) -> Result<(Vec<AlignmentSet>, Option<Vec<SentencePair>>)> {
    match format {
        GoldFormat::Pharaoh => Ok((read_pharaoh_file(path).map_err(data)?, None)),
        GoldFormat::Wpt => {
            let groups = read_wpt_file(path).map_err(data)?;
            let mut out = vec![AlignmentSet::new(); len];
            for (id, set) in groups {
                let i = id_index(&id)?;
                if i >= out.len() {
                    out.resize(i + 1, AlignmentSet::new());
                }
                out[i] = set;
            }
            Ok((out, None))
        }
        GoldFormat::Silver => {
            let (sets, pairs) = silver_by_line(path, len)?;
            Ok((sets, Some(pairs)))
        }
    }
}

/// Silver links laid out by line id; lines without a record get no links.
fn silver_by_line(path: &Path, len: usize) -> Result<(Vec<AlignmentSet>, Vec<SentencePair>)> {
    let records = read_silver_file(path).map_err(data)?;
    let mut sets = vec![AlignmentSet::new(); len];
    let mut pairs: Vec<Option<SentencePair>> = vec![None; len];
    for r in records {
        let i = id_index(&r.pair.id)?;
        if i >= sets.len() {
            sets.resize(i + 1, AlignmentSet::new());
            pairs.resize(i + 1, None);
        }
        sets[i] = r.links;
        pairs[i] = Some(r.pair);
    }
    let pairs = pairs
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.unwrap_or_else(|| SentencePair {
                id: corpus::line_id(i, len),
                source: corpus::Sentence::new(Vec::<String>::new(), "src"),
                target: corpus::Sentence::new(Vec::<String>::new(), "tgt"),
            })
        })
        .collect();
    Ok((sets, pairs))
}

fn eval(a: EvalArgs, mut s: Settings) -> Result<()> {
    s.note("pred", path_value(&a.pred));
    s.note("gold", path_value(&a.gold));
    let gold_fmt = s.opt::<String>("gold_format", a.gold_format)?;
    let partial = s.opt::<PathBuf>("partial", a.partial)?;
    let source = s.opt::<PathBuf>("source", a.source)?;
    let target = s.opt::<PathBuf>("target", a.target)?;
    let pos = s.opt::<PathBuf>("pos", a.pos)?;
    let freq = s.flag("freq", a.freq)?;
    let freq_source = s.opt::<PathBuf>("freq_source", a.freq_source)?;
    let freq_target = s.opt::<PathBuf>("freq_target", a.freq_target)?;

    let mut preds = read_pharaoh_file(&a.pred).map_err(data)?;
    let (golds, gold_pairs) = load_gold(
        &a.gold,
        gold_format(gold_fmt.as_deref(), &a.gold)?,
        preds.len(),
    )?;
    if preds.len() != golds.len() {
        return Err(data(format!(
            "{} predicted sentences but {} gold sentences",
            preds.len(),
            golds.len()
        )));
    }
    let pairs = match (source, target) {
        (Some(sp), Some(tp)) => {
            let pairs = corpus::load_parallel(&sp, &tp).map_err(data)?;
            corpus::attach(&pairs, &golds).map_err(data)?;
            corpus::attach(&pairs, &preds).map_err(data)?;
            Some(pairs)
        }
        (None, None) => gold_pairs,
        _ => return Err(usage("--source and --target go together")),
    };
    if let Some(p) = &partial {
        let (silver, _) = silver_by_line(p, preds.len())?;
        preds = preds
            .iter()
            .zip(&silver)
            .map(|(a, s)| partial_filter(a, s))
            .collect();
    }

    let report = evaluate(&preds, &golds).map_err(data)?;
    let mut out = report.to_string();
    let mut body = json!({ "report": report });
    if let Some(pos_path) = pos {
        let pairs = pairs
            .as_ref()
            .ok_or_else(|| usage("--pos needs --source/--target"))?;
        let tags = AnnotationSidecar::read(&pos_path).map_err(data)?;
        tags.check_against(pairs).map_err(data)?;
        let b = breakdown_by_pos(pairs, &preds, &golds, &tags).map_err(data)?;
        let _ = write!(out, "\nby part of speech\n{b}");
        body["by_pos"] = serde_json::to_value(&b).expect("json");
    }
    if freq {
        let pairs = pairs
            .as_ref()
            .ok_or_else(|| usage("--freq needs --source/--target"))?;
        let counts = match (freq_source, freq_target) {
            (Some(fs), Some(ft)) => {
                FrequencyCounts::from_pairs(&corpus::load_parallel(&fs, &ft).map_err(data)?)
            }
            (None, None) => FrequencyCounts::from_pairs(pairs),
            _ => return Err(usage("--freq-source and --freq-target go together")),
        };
        let b = breakdown_by_frequency(pairs, &preds, &golds, &counts).map_err(data)?;
        let _ = write!(out, "\nby frequency\n{b}");
        body["by_frequency"] = serde_json::to_value(&b).expect("json");
    }
    print!("{out}");
    if let Some(path) = a.json {
        let (config, header) = s.header("eval");
        write_json(&path, &header, &config, body)?;
    }
    Ok(())
}

fn correlate(a: CorrelateArgs, mut s: Settings) -> Result<()> {
    let silver_path: PathBuf = s.required("silver", a.silver)?;
    let gold_path: PathBuf = s.required("gold", a.gold)?;
    let gold_fmt = s.opt::<String>("gold_format", a.gold_format)?;
    let runs: Vec<String> = s.get("run", Some(a.runs).filter(|r| !r.is_empty()), Vec::new())?;
    if runs.len() < 2 {
        return Err(usage("need at least two --run NAME=FILE configurations"));
    }
    let mut results: BTreeMap<String, (EvalReport, EvalReport)> = BTreeMap::new();
    for run in &runs {
        let (name, file) = run
            .split_once('=')
            .ok_or_else(|| usage(format!("--run {run:?} is not NAME=FILE")))?;
        let preds = read_pharaoh_file(Path::new(file)).map_err(data)?;
        let (silver, _) = silver_by_line(&silver_path, preds.len())?;
        let (golds, _) = load_gold(
            &gold_path,
            gold_format(gold_fmt.as_deref(), &gold_path)?,
            preds.len(),
        )?;
        if silver.len() != preds.len() || golds.len() != preds.len() {
            return Err(data(format!(
                "{name}: prediction, silver and gold sentence counts differ"
            )));
        }
        let filtered: Vec<AlignmentSet> = preds
            .iter()
            .zip(&silver)
            .map(|(p, s)| partial_filter(p, s))
            .collect();
        let on_silver = evaluate(&filtered, &silver).map_err(data)?;
        let on_gold = evaluate(&preds, &golds).map_err(data)?;
        if results
            .insert(name.to_string(), (on_silver, on_gold))
            .is_some()
        {
            return Err(usage(format!("duplicate configuration name {name:?}")));
        }
    }
    let ranking = rank_configs(&results).map_err(data)?;
    let (_, header) = s.header("correlate");
    let mut csv =
        format!("{header}\nconfig,f1_silver,f1_gold,aer_silver,aer_gold,rank_silver,rank_gold\n");
    for row in &ranking.rows {
        let (rs, rg) = ranking.ranks_of(&row.config);
        let _ = writeln!(
            csv,
            "{},{:.6},{:.6},{:.6},{:.6},{rs},{rg}",
            row.config, row.x.f1, row.y.f1, row.x.aer, row.y.aer
        );
    }
    let r_aer = ranking
        .r_aer
        .map_or("undefined".to_string(), |r| format!("{r:.6}"));
    let _ = writeln!(
        csv,
        "# pearson_r_f1={:.6} pearson_r_aer={r_aer}",
        ranking.r_f1
    );
    match a.out {
        Some(path) => write_text(&path, &csv)?,
        None => print!("{csv}"),
    }
    println!("pearson r (F1, silver vs gold) = {:.4}", ranking.r_f1);
    Ok(())
}

fn synth_gen(a: SynthGenArgs, mut s: Settings) -> Result<()> {
    let d = SynthParams::default();
    let params = SynthParams {
        words: s.get("words", a.words, d.words)?,
        sentences: s.get("sentences", a.sentences, d.sentences)?,
        fusion: s.get("fusion", a.fusion, d.fusion)?,
        reverse: s.flag("reverse", a.reverse)?,
        seed: s.get("seed", a.seed, d.seed)?,
        class_size: s.get("class_size", a.class_size, d.class_size)?,
        min_len: s.get("min_len", a.min_len, d.min_len)?,
        max_len: s.get("max_len", a.max_len, d.max_len)?,
        ..d
    };
    params.validate().map_err(usage)?;
    let corpus = generate(&params).map_err(data)?;
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| data(format!("{}: {e}", a.out_dir.display())))?;
    let (config, header) = s.header("synth gen");
    let dir = &a.out_dir;
    let spec = serde_json::to_value(&corpus.spec).expect("spec json");
    write_json(&dir.join("spec.json"), &header, &config, spec)?;
    write_sentences(&dir.join("source.txt"), Some(&header), &corpus.sources).map_err(data)?;
    write_sentences(&dir.join("target.txt"), Some(&header), &corpus.targets).map_err(data)?;
    write_pharaoh_file(&dir.join("truth.pharaoh"), Some(&header), &corpus.truth).map_err(data)?;
    println!(
        "{} sentences, {} lexicon entries, {} fusion rules -> {}",
        corpus.sources.len(),
        corpus.spec.lexicon.len(),
        corpus.spec.fusion_rules.len(),
        dir.display()
    );
    Ok(())
}
