//! Command-line front end. [`dispatch`] parses an argument vector, runs one
//! subcommand and returns the process exit code.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{self, CorpusError, FrequencyTable, Selection, SentenceStore};
use crate::grid::{max_score, BinIndex, Bounds, GridError};
use crate::metrics::{compare, CompareOptions, Metric, MetricError, DEFAULT_RBO_P, DEFAULT_TOP_FRACTION};
use crate::rank::{normalize_scores, RankError, Ranking, TieBreak};
use crate::reduce::{fit_pooled_sets, PcaError, PcaModel};
use crate::sampler::{self, SampleError, DEFAULT_TOP_KEYWORDS};
use crate::sweep::{
    self, default_exclusions, similarity_matrix, Method, ReducedSpace, SweepConfig, SweepError,
    FREQUENCY_LABEL, RANDOM_LABEL,
};
use crate::truth::{self, CountTable, TruthError, RANDOM_BASELINE_RUNS};
use crate::vectors::{
    self, load_vector_set, store_vector_set, synth_clusters, ClusterSpec, Manifest, ManifestEntry,
    VectorError, VectorSet,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Truth(#[from] TruthError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

#[derive(Debug, Parser)]
#[command(name = "polysemy", version, about = "Estimate word polysemy from contextual embeddings")]
pub struct Cli {
    /// Seed for every random draw; drawn and recorded when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus statistics and sentence selection.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Validate or synthesize vector files.
    #[command(subcommand)]
    Vectors(VectorsCmd),
    /// Fit or apply a PCA model.
    #[command(subcommand)]
    Reduce(ReduceCmd),
    /// Polysemy scores for one (D, L) configuration.
    Score(ScoreArgs),
    /// Turn a score file into a ranking.
    Rank(RankArgs),
    /// Compare two rankings on every metric.
    Compare(CompareArgs),
    /// Evaluate a grid of (D, L) configurations against references.
    Sweep(SweepArgs),
    /// Frequency and random baseline rankings.
    #[command(subcommand)]
    Baseline(BaselineCmd),
    /// Reference rankings from sense inventories.
    #[command(subcommand)]
    Truth(TruthCmd),
    /// Sentences from mutually distant bins of one word.
    Sample(SampleArgs),
    /// Most frequent context words per bin.
    Keywords(KeywordsArgs),
    /// Pairwise similarity matrices between rankings.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum CorpusCmd {
    /// Token frequencies and the top-k word list.
    Freq {
        #[arg(long)]
        corpus: PathBuf,
        /// Stopword list, one per line (default: bundled English list).
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long, default_value_t = corpus::DEFAULT_TOP_K)]
        top_k: usize,
        /// Frequency table output (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Selected words, one per line.
        #[arg(long)]
        words_out: Option<PathBuf>,
    },
    /// Sample sentences containing each word exactly once.
    Select {
        #[arg(long)]
        corpus: PathBuf,
        /// Word list, one per line.
        #[arg(long)]
        words: PathBuf,
        #[arg(long, default_value_t = corpus::DEFAULT_SENTENCES_PER_WORD)]
        per_word: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum VectorsCmd {
    /// Check vector files or a manifest; prints `word N D_raw ids` per file.
    Validate {
        files: Vec<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Write synthetic cluster data.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Single word mode: file to write.
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "word", requires = "out")]
    word: String,
    #[arg(long, default_value_t = 2, requires = "out")]
    k: usize,
    /// Manifest mode: directory receiving one file per word, a manifest and
    /// the true cluster counts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 20, requires = "out_dir")]
    words: usize,
    /// Word i gets `1 + i % max_k` clusters.
    #[arg(long, default_value_t = 4, requires = "out_dir")]
    max_k: usize,
    #[arg(long, default_value_t = 50)]
    per_cluster: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 0.05)]
    spread: f64,
    #[arg(long, default_value_t = 5.0)]
    separation: f64,
}

#[derive(Debug, Subcommand)]
enum ReduceCmd {
    /// Fit PCA on the pooled vectors of a manifest.
    Fit {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        dims: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a vector file; writes TSV points.
    Apply {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct SpaceArgs {
    /// Vector manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Vector files (alternative to --manifest).
    #[arg(long = "input", num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Reduced dimensionality; equal to the input width keeps the raw axes.
    #[arg(long)]
    dims: usize,
    #[arg(long)]
    levels: u32,
    /// Precomputed PCA model (default: fit on the inputs).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Fixed bounds: `lo:hi` for every dimension or `lo:hi,lo:hi,...`.
    #[arg(long, value_parser = parse_bounds)]
    bounds: Option<BoundList>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Score dump (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-level coverage dump `word l coverage`.
    #[arg(long)]
    coverage: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// `word<TAB>score` file.
    scores: PathBuf,
    #[arg(long, default_value = "lexicographic", value_parser = parse_tie_break)]
    tie_break: TieBreak,
    /// Min-max normalize to [0, 100].
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
    Json,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Comma-separated metric names or `all`.
    #[arg(long, default_value = "all", value_parser = parse_metrics)]
    metrics: MetricList,
    #[arg(long, default_value_t = DEFAULT_RBO_P)]
    rbo_p: f64,
    #[arg(long, default_value_t = DEFAULT_TOP_FRACTION)]
    top_fraction: f64,
    #[arg(long, default_value = "lexicographic", value_parser = parse_tie_break)]
    tie_break: TieBreak,
}

impl MetricArgs {
    fn options(&self) -> CompareOptions {
        CompareOptions { rbo_p: self.rbo_p, top_fraction: self.top_fraction }
    }
}

#[derive(Debug, Args)]
struct CompareArgs {
    candidate: PathBuf,
    truth: PathBuf,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Reference count table as `label=path` (repeatable).
    #[arg(long = "truth", value_parser = parse_labeled)]
    truths: Vec<(String, PathBuf)>,
    /// Frequency table; adds the frequency baseline.
    #[arg(long)]
    frequency: Option<PathBuf>,
    /// D values: `a..b` (inclusive) or a comma list.
    #[arg(long = "d", default_value = "2..20", value_parser = parse_value_range)]
    d: ValueRange,
    #[arg(long = "l", default_value = "2..19", value_parser = parse_value_range)]
    l: ValueRange,
    #[arg(long, default_value_t = RANDOM_BASELINE_RUNS)]
    random_runs: usize,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum BaselineCmd {
    /// Words ranked by corpus frequency.
    Freq {
        #[arg(long)]
        freq: PathBuf,
        #[command(flatten)]
        words: WordSource,
        #[arg(long, default_value = "lexicographic", value_parser = parse_tie_break)]
        tie_break: TieBreak,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LogNormal(0, 0.6) random scores.
    Random {
        #[command(flatten)]
        words: WordSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct WordSource {
    /// Word list, one per line.
    #[arg(long)]
    words: Option<PathBuf>,
    /// Take the words of a vector manifest.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl WordSource {
    fn load(&self) -> Result<Vec<String>> {
        match (&self.words, &self.manifest) {
            (Some(p), _) => read_word_list(p),
            (None, Some(m)) => Ok(Manifest::load(m)?.entries().iter().map(|e| e.word.clone()).collect()),
            (None, None) => Err(CliError::Usage("--words or --manifest is required".into())),
        }
    }
}

#[derive(Debug, Subcommand)]
enum TruthCmd {
    /// Sense counts per lemma from a sense-key list.
    Senses {
        keys: PathBuf,
        /// Count full keys instead of lexicographer-file-truncated keys.
        #[arg(long)]
        no_truncate: bool,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct WordSpaceArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    word: String,
    /// Sentence store TSV `sentence_id<TAB>text`.
    #[arg(long)]
    sentences: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    target: WordSpaceArgs,
    /// Level to sample at (default: the coarsest level with at least
    /// `count` occupied bins, capped at --levels).
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, default_value_t = 3)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    per_bin: usize,
}

#[derive(Debug, Args)]
struct KeywordsArgs {
    #[command(flatten)]
    target: WordSpaceArgs,
    /// Bin as `(c1,...,cD)`; default: the bins `sample` would pick.
    #[arg(long)]
    bin: Option<String>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long, default_value_t = 3)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_TOP_KEYWORDS)]
    top_n: usize,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Ranking file as `label=path` (repeatable).
    #[arg(long = "ranking", value_parser = parse_labeled)]
    rankings: Vec<(String, PathBuf)>,
    /// Count table as `label=path` (repeatable).
    #[arg(long = "counts", value_parser = parse_labeled)]
    counts: Vec<(String, PathBuf)>,
    /// Add the random baseline over the words of the first input.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = RANDOM_BASELINE_RUNS)]
    random_runs: usize,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct MetricList(Vec<Metric>);

fn parse_metrics(s: &str) -> std::result::Result<MetricList, String> {
    Metric::parse_list(s).map(MetricList)
}

#[derive(Debug, Clone)]
struct ValueRange(Vec<u64>);

fn parse_value_range(s: &str) -> std::result::Result<ValueRange, String> {
    parse_range(s).map(ValueRange)
}

fn parse_tie_break(s: &str) -> std::result::Result<TieBreak, String> {
    s.parse().map_err(|e: RankError| e.to_string())
}

fn parse_labeled(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((l, p)) if !l.is_empty() && !p.is_empty() => Ok((l.to_string(), PathBuf::from(p))),
        _ => Err(format!("expected label=path, got `{s}`")),
    }
}

/// `a..b` (inclusive), `a,b,c` or a single value.
pub fn parse_range(s: &str) -> std::result::Result<Vec<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad number `{t}` in `{s}`"));
    let out: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<std::result::Result<_, _>>()?
    };
    Ok(out)
}

#[derive(Debug, Clone)]
struct BoundList(Vec<(f64, f64)>);

fn parse_bounds(s: &str) -> std::result::Result<BoundList, String> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{part}`"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
            Ok((lo, hi))
        })
        .collect::<std::result::Result<_, _>>()
        .map(BoundList)
}

fn read_word_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

fn load_stopwords(path: Option<&Path>) -> Result<HashSet<String>> {
    match path {
        Some(p) => Ok(corpus::parse_stopwords(&read_text(p)?)),
        None => Ok(corpus::default_stopwords()),
    }
}

/// Reproducibility record written next to every output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub seed_drawn: bool,
    pub formats: Formats,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct Formats {
    pub vectors: &'static str,
    pub pca: &'static str,
    pub ranking_normalization: &'static str,
}

const FORMATS: Formats = Formats { vectors: "PVS1", pca: "PPC1", ranking_normalization: "minmax-0-100" };

struct Ctx {
    args: Vec<String>,
    subcommand: String,
    seed: u64,
    seed_drawn: bool,
    seed_used: bool,
    out: Vec<u8>,
}

impl Ctx {
    fn seed(&mut self) -> u64 {
        self.seed_used = true;
        if self.seed_drawn {
            warn!("no --seed given; using drawn seed {}", self.seed);
        }
        self.seed
    }

    fn manifest(&self, details: serde_json::Value) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand.clone(),
            args: self.args.clone(),
            seed: self.seed_used.then_some(self.seed),
            seed_drawn: self.seed_used && self.seed_drawn,
            formats: FORMATS,
            details,
        }
    }

    fn write_manifest(&self, path: &Path, details: serde_json::Value) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.manifest(details)).expect("manifest serializes");
        write_text(path, &(json + "\n"))
    }

    /// Writes `text` to `path` plus a `<path>.run.json` sidecar, or to stdout.
    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => {
                write_text(p, text)?;
                let mut side = p.as_os_str().to_owned();
                side.push(".run.json");
                self.write_manifest(Path::new(&side), serde_json::Value::Null)
            }
            None => {
                self.out.extend_from_slice(text.as_bytes());
                Ok(())
            }
        }
    }
}

/// Parses `argv` (including the program name) and runs the subcommand,
/// writing results to `out` and diagnostics to `err`.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let (seed, seed_drawn) = match cli.seed {
        Some(s) => (s, false),
        None => (rand::random::<u64>(), true),
    };
    let mut ctx = Ctx {
        args: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        subcommand: subcommand_name(&cli.command),
        seed,
        seed_drawn,
        seed_used: false,
        out: Vec::new(),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_DATA;
        }
    };
    let result = pool.install(|| execute(cli.command, &mut ctx));
    if out.write_all(&ctx.out).and_then(|()| out.flush()).is_err() {
        let _ = writeln!(err, "error: cannot write output");
        return EXIT_DATA;
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// [`dispatch`] on the process arguments and standard streams.
pub fn main_with_env() -> i32 {
    // unlocked handles: workers log to stderr while dispatch holds these
    dispatch(std::env::args_os(), &mut io::stdout(), &mut io::stderr())
}

fn subcommand_name(c: &Command) -> String {
    match c {
        Command::Corpus(CorpusCmd::Freq { .. }) => "corpus freq",
        Command::Corpus(CorpusCmd::Select { .. }) => "corpus select",
        Command::Vectors(VectorsCmd::Validate { .. }) => "vectors validate",
        Command::Vectors(VectorsCmd::Synth(_)) => "vectors synth",
        Command::Reduce(ReduceCmd::Fit { .. }) => "reduce fit",
        Command::Reduce(ReduceCmd::Apply { .. }) => "reduce apply",
        Command::Score(_) => "score",
        Command::Rank(_) => "rank",
        Command::Compare(_) => "compare",
        Command::Sweep(_) => "sweep",
        Command::Baseline(BaselineCmd::Freq { .. }) => "baseline freq",
        Command::Baseline(BaselineCmd::Random { .. }) => "baseline random",
        Command::Truth(TruthCmd::Senses { .. }) => "truth senses",
        Command::Sample(_) => "sample",
        Command::Keywords(_) => "keywords",
        Command::Report(_) => "report",
    }
    .to_string()
}

fn execute(cmd: Command, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        Command::Corpus(c) => corpus_cmd(c, ctx),
        Command::Vectors(VectorsCmd::Validate { files, manifest }) => validate(files, manifest, ctx),
        Command::Vectors(VectorsCmd::Synth(a)) => synth(a, ctx),
        Command::Reduce(c) => reduce_cmd(c, ctx),
        Command::Score(a) => score(a, ctx),
        Command::Rank(a) => rank(a, ctx),
        Command::Compare(a) => compare_cmd(a, ctx),
        Command::Sweep(a) => sweep_cmd(a, ctx),
        Command::Baseline(c) => baseline(c, ctx),
        Command::Truth(TruthCmd::Senses { keys, no_truncate, label, out }) => {
            let counts = truth::sense_counts(&read_text(&keys)?, !no_truncate)?;
            let label = label.unwrap_or_else(|| if no_truncate { "wordnet" } else { "wordnet-reduced" }.into());
            let table = CountTable::new(label, counts.into_iter().map(|(w, c)| (w, c as u64)).collect())?;
            ctx.emit(out.as_deref(), &table.to_tsv())
        }
        Command::Sample(a) => sample(a, ctx),
        Command::Keywords(a) => keywords(a, ctx),
        Command::Report(a) => report(a, ctx),
    }
}

fn corpus_cmd(cmd: CorpusCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        CorpusCmd::Freq { corpus: path, stopwords, top_k, out, words_out } => {
            let stop = load_stopwords(stopwords.as_deref())?;
            let file = File::open(&path).map_err(io_err(&path))?;
            let table = corpus::build_frequency_table(BufReader::new(file), &stop)?;
            info!("{} distinct content tokens", table.len());
            if let Some(w) = words_out {
                let mut text = corpus::select_words(&table, top_k).join("\n");
                text.push('\n');
                write_text(&w, &text)?;
            }
            ctx.emit(out.as_deref(), &table.to_tsv())
        }
        CorpusCmd::Select { corpus: path, words, per_word, out } => {
            if per_word == 0 {
                return Err(CliError::Usage("--per-word must be positive".into()));
            }
            let words = read_word_list(&words)?;
            let seed = ctx.seed();
            let file = File::open(&path).map_err(io_err(&path))?;
            let sel = corpus::select_sentences_multi(BufReader::new(file), &words, per_word, seed)?;
            create_dir(&out)?;
            let mut merged = SentenceStore::default();
            let mut dropped = String::from("word\tqualifying\n");
            for (word, s) in sel {
                match s {
                    Selection::Selected { ids, store } => {
                        write_text(&out.join("ids").join(format!("{word}.txt")), &(ids.join("\n") + "\n"))?;
                        write_text(&out.join("sentences").join(format!("{word}.tsv")), &store.to_tsv())?;
                        for (id, text) in store.iter() {
                            if merged.get(id).is_none() {
                                merged.insert(id.to_string(), text.to_string())?;
                            }
                        }
                    }
                    Selection::Insufficient { qualifying } => {
                        warn!("{word}: only {qualifying} qualifying sentences; dropped");
                        dropped.push_str(&format!("{word}\t{qualifying}\n"));
                    }
                }
            }
            write_text(&out.join("sentences.tsv"), &merged.to_tsv())?;
            write_text(&out.join("dropped.tsv"), &dropped)?;
            ctx.write_manifest(&out.join("run.json"), serde_json::json!({ "per_word": per_word }))
        }
    }
}

fn validate(files: Vec<PathBuf>, manifest: Option<PathBuf>, ctx: &mut Ctx) -> Result<()> {
    let mut report = String::from("word\tn\tdim\tsentence_ids\tpath\n");
    let mut bad = 0;
    let line = |set: &VectorSet, path: &Path| {
        format!(
            "{}\t{}\t{}\t{}\t{}\n",
            set.word(),
            set.len(),
            set.dim(),
            set.sentence_ids().is_some(),
            path.display()
        )
    };
    if let Some(m) = &manifest {
        let man = Manifest::load(m)?;
        for set in man.load_all()? {
            let path = &man.get(set.word()).expect("loaded from manifest").path;
            report.push_str(&line(&set, path));
        }
    }
    for f in &files {
        match load_vector_set(f) {
            Ok(set) => report.push_str(&line(&set, f)),
            Err(e) => {
                bad += 1;
                warn!("{}: {e}", f.display());
            }
        }
    }
    if files.is_empty() && manifest.is_none() {
        return Err(CliError::Usage("give vector files or --manifest".into()));
    }
    ctx.emit(None, &report)?;
    if bad > 0 {
        return Err(CliError::Data(format!("{bad} invalid file(s)")));
    }
    Ok(())
}

fn synth(a: SynthArgs, ctx: &mut Ctx) -> Result<()> {
    let seed = ctx.seed();
    let spec = |k, seed| ClusterSpec {
        k,
        per_cluster: a.per_cluster,
        dim: a.dim,
        spread: a.spread,
        separation: a.separation,
        seed,
    };
    match (&a.out, &a.out_dir) {
        (Some(path), None) => {
            let set = synth_clusters(&a.word, spec(a.k, seed))?;
            store_vector_set(&set, path)?;
            Ok(())
        }
        (None, Some(dir)) => {
            if a.max_k == 0 || a.words == 0 {
                return Err(CliError::Usage("--words and --max-k must be positive".into()));
            }
            create_dir(dir)?;
            let mut entries = Vec::with_capacity(a.words);
            let mut counts = std::collections::BTreeMap::new();
            let width = a.words.to_string().len();
            for i in 0..a.words {
                let word = format!("w{i:0width$}");
                let k = 1 + i % a.max_k;
                let s = seed.wrapping_add(i as u64);
                let set = synth_clusters(&word, spec(k, s))?;
                let path = dir.join(format!("{word}.pvs"));
                store_vector_set(&set, &path)?;
                entries.push(ManifestEntry { word: word.clone(), path, n: set.len(), dim: set.dim() });
                counts.insert(word, k as u64);
            }
            let manifest = Manifest::new(entries)?;
            write_text(&dir.join("manifest.tsv"), &manifest.to_tsv(dir))?;
            write_text(&dir.join("clusters.tsv"), &CountTable::new("clusters", counts)?.to_tsv())?;
            ctx.write_manifest(&dir.join("run.json"), serde_json::Value::Null)
        }
        _ => Err(CliError::Usage("give exactly one of --out or --out-dir".into())),
    }
}

fn load_sets(manifest: Option<&Path>, inputs: &[PathBuf]) -> Result<Vec<VectorSet>> {
    let mut sets = match manifest {
        Some(m) => Manifest::load(m)?.load_all()?,
        None => Vec::new(),
    };
    for p in inputs {
        sets.push(load_vector_set(p)?);
    }
    if sets.is_empty() {
        return Err(CliError::Usage("give --manifest or --input files".into()));
    }
    let mut seen = HashSet::new();
    for s in &sets {
        if !seen.insert(s.word().to_string()) {
            return Err(CliError::Data(format!("word `{}` appears twice", s.word())));
        }
    }
    Ok(sets)
}

fn reduce_cmd(cmd: ReduceCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        ReduceCmd::Fit { manifest, dims, out } => {
            let sets = load_sets(Some(&manifest), &[])?;
            let model = fit_pooled_sets(&sets)?.truncate(dims)?;
            model.save(&out)?;
            let mut side = out.into_os_string();
            side.push(".run.json");
            ctx.write_manifest(Path::new(&side), serde_json::json!({ "dims": dims }))
        }
        ReduceCmd::Apply { model, input, out } => {
            let model = PcaModel::load(&model)?;
            let set = load_vector_set(&input)?;
            let pts = model.transform_set(&set)?;
            let text = vectors::write_points_tsv(set.word(), &pts, set.sentence_ids());
            ctx.emit(out.as_deref(), &text)
        }
    }
}

struct Space {
    sets: Vec<VectorSet>,
    space: ReducedSpace,
    levels: u32,
}

fn build_space(a: &SpaceArgs) -> Result<Space> {
    let sets = load_sets(a.manifest.as_deref(), &a.inputs)?;
    let model = match &a.model {
        Some(p) => {
            let m = PcaModel::load(p)?;
            if m.dims() == a.dims { Some(m) } else { Some(m.truncate(a.dims)?) }
        }
        None => sweep::reducer_for(&fit_pooled_sets(&sets)?, a.dims)?,
    };
    let mut space = ReducedSpace::build(&sets, model.as_ref())?;
    if let Some(BoundList(b)) = &a.bounds {
        let pairs = if b.len() == 1 { vec![b[0]; a.dims] } else { b.clone() };
        if pairs.len() != a.dims {
            return Err(CliError::Usage(format!("--bounds gives {} ranges for {} dims", pairs.len(), a.dims)));
        }
        space = space.with_bounds(Bounds::new(pairs)?);
    }
    // validates the level range up front
    space.grid(a.levels)?;
    Ok(Space { sets, space, levels: a.levels })
}

fn score(a: ScoreArgs, ctx: &mut Ctx) -> Result<()> {
    let s = build_space(&a.space)?;
    let grid = s.space.grid(s.levels)?;
    let mut text = String::new();
    let mut cov = String::from("word\tl\tcoverage\n");
    for (w, p) in s.space.words.iter().zip(&s.space.points) {
        let profile = grid.coverage(p)?;
        text.push_str(&format!("{w}\t{}\n", crate::grid::polysemy_score(&profile)));
        for (l, c) in profile.per_level().iter().enumerate() {
            cov.push_str(&format!("{w}\t{}\t{c}\n", l + 1));
        }
    }
    info!("max attainable score at L={}: {}", s.levels, max_score(s.levels));
    if let Some(c) = &a.coverage {
        write_text(c, &cov)?;
    }
    ctx.emit(a.out.as_deref(), &text)
}

fn rank(a: RankArgs, ctx: &mut Ctx) -> Result<()> {
    let text = read_text(&a.scores)?;
    let mut r = Ranking::from_tsv(&text, a.tie_break)?;
    if r.tie_break() != a.tie_break {
        r = r.with_tie_break(a.tie_break);
    }
    if a.normalize {
        r = normalize_scores(&r);
    }
    ctx.emit(a.out.as_deref(), &r.to_tsv())
}

fn load_ranking(path: &Path, tb: TieBreak) -> Result<Ranking> {
    Ok(Ranking::from_tsv(&read_text(path)?, tb)?)
}

fn compare_cmd(a: CompareArgs, ctx: &mut Ctx) -> Result<()> {
    let tb = a.metric.tie_break;
    let c = load_ranking(&a.candidate, tb)?;
    let t = load_ranking(&a.truth, tb)?;
    let rep = compare(
        &a.candidate.display().to_string(),
        &c,
        &a.truth.display().to_string(),
        &t,
        a.metric.options(),
    )?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&rep).expect("report serializes") + "\n",
        Format::Tsv => rep.to_tsv(),
        Format::Text => {
            let mut s = format!("n\t{}\n", rep.n);
            for m in &a.metric.metrics.0 {
                s.push_str(&format!("{m}\t{}", rep.value(*m)));
                if let Some(p) = rep.p_value(*m) {
                    s.push_str(&format!("\tp={p}\t{}", crate::metrics::significance_marker(p)));
                }
                s.push('\n');
            }
            s
        }
    };
    ctx.emit(None, &text)
}

fn to_u32(v: &[u64], flag: &str) -> Result<Vec<u32>> {
    v.iter()
        .map(|&x| u32::try_from(x).map_err(|_| CliError::Usage(format!("{flag} value {x} too large"))))
        .collect()
}

fn sweep_cmd(a: SweepArgs, ctx: &mut Ctx) -> Result<()> {
    let tb = a.metric.tie_break;
    let manifest = Manifest::load(&a.manifest)?;
    let words: Vec<String> = manifest.entries().iter().map(|e| e.word.clone()).collect();
    let mut truths: Vec<(String, Method)> = Vec::new();
    for (label, path) in &a.truths {
        let table = truth::load_count_table(path, label)?;
        truths.push((label.clone(), Method::Fixed(table.to_ranking(tb)?)));
    }
    if let Some(f) = &a.frequency {
        let table = FrequencyTable::from_tsv(&read_text(f)?)?;
        truths.push((FREQUENCY_LABEL.into(), Method::Fixed(truth::frequency_ranking(&table, &words, tb)?)));
    }
    let seed = ctx.seed();
    if a.random_runs > 0 {
        truths.push((RANDOM_LABEL.into(), Method::random(&words, seed, a.random_runs)?));
    }
    if truths.is_empty() {
        return Err(CliError::Usage("no references: give --truth, --frequency or --random-runs > 0".into()));
    }
    let config = SweepConfig {
        d_values: a.d.0.iter().map(|&d| d as usize).collect(),
        l_values: to_u32(&a.l.0, "--l")?,
        metrics: a.metric.metrics.0.clone(),
        tie_break: tb,
        random_runs: a.random_runs,
        seed,
        compare: a.metric.options(),
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let sets = manifest.load_all()?;
    let result = sweep::run_sweep(&sets, &truths, &config)?;
    let failed = result.results.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        warn!("{failed} of {} configurations failed", result.results.len());
    }
    result.write(&a.out, &default_exclusions())?;
    ctx.write_manifest(
        &a.out.join("run.json"),
        serde_json::json!({
            "d_values": config.d_values,
            "l_values": config.l_values,
            "metrics": config.metrics,
            "tie_break": tb.to_string(),
            "normalization": "minmax-0-100",
            "rbo_p": config.compare.rbo_p,
            "top_fraction": config.compare.top_fraction,
            "random_runs": config.random_runs,
            "references": result.truth_labels,
            "configurations": result.results.len(),
            "failed": failed,
        }),
    )?;
    let best = result.best_tsv(&default_exclusions());
    ctx.emit(None, &best)
}

fn baseline(cmd: BaselineCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        BaselineCmd::Freq { freq, words, tie_break, out } => {
            let table = FrequencyTable::from_tsv(&read_text(&freq)?)?;
            let r = truth::frequency_ranking(&table, &words.load()?, tie_break)?;
            ctx.emit(out.as_deref(), &r.to_tsv())
        }
        BaselineCmd::Random { words, out } => {
            let seed = ctx.seed();
            let r = truth::random_ranking(&words.load()?, seed)?;
            ctx.emit(out.as_deref(), &r.to_tsv())
        }
    }
}

struct Target {
    space: Space,
    index: usize,
    ids: Vec<String>,
    store: SentenceStore,
}

fn load_target(a: &WordSpaceArgs) -> Result<Target> {
    let space = build_space(&a.space)?;
    let index = space
        .space
        .words
        .iter()
        .position(|w| *w == a.word)
        .ok_or_else(|| CliError::Data(format!("unknown word `{}`", a.word)))?;
    let ids = space.sets[index]
        .sentence_ids()
        .ok_or_else(|| CliError::Data(format!("vectors of `{}` carry no sentence ids", a.word)))?
        .to_vec();
    let store = SentenceStore::from_tsv(&read_text(&a.sentences)?)?;
    Ok(Target { space, index, ids, store })
}

/// The coarsest level with at least `count` occupied bins, capped at `max`.
fn default_level(t: &Target, count: usize) -> Result<u32> {
    let grid = t.space.space.grid(t.space.levels)?;
    let profile = grid.coverage(&t.space.space.points[t.index])?;
    Ok(profile
        .occupied()
        .iter()
        .position(|&c| c >= count)
        .map_or(t.space.levels, |i| i as u32 + 1))
}

fn sample(a: SampleArgs, ctx: &mut Ctx) -> Result<()> {
    let t = load_target(&a.target)?;
    let level = match a.level {
        Some(l) => l,
        None => default_level(&t, a.count)?,
    };
    let grid = t.space.space.grid(t.space.levels)?;
    let samples = sampler::sample_diverse(
        &grid,
        &t.space.space.points[t.index],
        &t.ids,
        &t.store,
        level,
        a.count,
        a.per_bin,
    )?;
    let mut text = String::new();
    match a.target.format {
        Format::Tsv => {
            text.push_str("bin\tlevel\tpopulation\tsentence_id\ttext\n");
            for s in &samples {
                for (id, sent) in &s.sentences {
                    text.push_str(&format!("{}\t{level}\t{}\t{id}\t{sent}\n", s.bin, s.population));
                }
            }
        }
        Format::Json => {
            let v: Vec<_> = samples
                .iter()
                .map(|s| serde_json::json!({ "bin": s.bin.to_string(), "level": level, "population": s.population, "sentences": s.sentences }))
                .collect();
            text = serde_json::to_string_pretty(&v).expect("json") + "\n";
        }
        Format::Text => {
            for s in &samples {
                text.push_str(&format!("bin={} level={level} population={}\n", s.bin, s.population));
                for (id, sent) in &s.sentences {
                    text.push_str(&format!("  {id}\t{sent}\n"));
                }
            }
        }
    }
    ctx.emit(None, &text)
}

fn keywords(a: KeywordsArgs, ctx: &mut Ctx) -> Result<()> {
    let t = load_target(&a.target)?;
    let stop = load_stopwords(a.stopwords.as_deref())?;
    let grid = t.space.space.grid(t.space.levels)?;
    let points = &t.space.space.points[t.index];
    let bins: Vec<BinIndex> = match &a.bin {
        Some(b) => {
            let level = a.level.unwrap_or(t.space.levels);
            vec![BinIndex::parse(level, b).ok_or_else(|| CliError::Usage(format!("bad bin `{b}`")))?]
        }
        None => {
            let level = match a.level {
                Some(l) => l,
                None => default_level(&t, a.count)?,
            };
            sampler::sample_diverse(&grid, points, &t.ids, &t.store, level, a.count, 0)?
                .into_iter()
                .map(|s| s.bin)
                .collect()
        }
    };
    let mut text = String::new();
    if matches!(a.target.format, Format::Tsv) {
        text.push_str("bin\tlevel\trank\ttoken\tcount\n");
    }
    for bin in &bins {
        let kw = sampler::bin_keywords(&grid, points, &t.ids, &t.store, bin, &a.target.word, &stop, a.top_n)?;
        match a.target.format {
            Format::Tsv => {
                for (i, (w, c)) in kw.iter().enumerate() {
                    text.push_str(&format!("{bin}\t{}\t{}\t{w}\t{c}\n", bin.level, i + 1));
                }
            }
            _ => {
                text.push_str(&format!("bin={bin} level={}\n", bin.level));
                let words: Vec<String> = kw.iter().map(|(w, c)| format!("{w}({c})")).collect();
                text.push_str(&format!("  {}\n", words.join(" ")));
            }
        }
    }
    ctx.emit(None, &text)
}

fn report(a: ReportArgs, ctx: &mut Ctx) -> Result<()> {
    let tb = a.metric.tie_break;
    let mut methods: Vec<(String, Method)> = Vec::new();
    for (label, path) in &a.rankings {
        methods.push((label.clone(), Method::Fixed(load_ranking(path, tb)?)));
    }
    for (label, path) in &a.counts {
        methods.push((label.clone(), Method::Fixed(truth::load_count_table(path, label)?.to_ranking(tb)?)));
    }
    if a.random {
        let Some((_, Method::Fixed(first))) = methods.first() else {
            return Err(CliError::Usage("--random needs at least one input ranking".into()));
        };
        let words: Vec<String> = first.words().map(String::from).collect();
        let seed = ctx.seed();
        let m = Method::random(&words, seed, a.random_runs)?;
        methods.push((RANDOM_LABEL.into(), m));
    }
    if methods.len() < 2 {
        return Err(CliError::Usage("report needs at least two rankings".into()));
    }
    create_dir(&a.out)?;
    for &m in &a.metric.metrics.0 {
        similarity_matrix(&methods, m, a.metric.options())?.write(&a.out)?;
    }
    ctx.write_manifest(
        &a.out.join("run.json"),
        serde_json::json!({
            "labels": methods.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>(),
            "metrics": a.metric.metrics.0,
            "tie_break": tb.to_string(),
            "random_runs": if a.random { a.random_runs } else { 0 },
        }),
    )
}
