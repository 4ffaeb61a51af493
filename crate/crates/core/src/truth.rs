//! Ground-truth rankings from exported count tables, WordNet sense-key
//! coarsening, and the frequency and random baselines.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use thiserror::Error;

use crate::corpus::FrequencyTable;
use crate::rank::{build_ranking, RankError, Ranking, TieBreak};

/// Parameters of the underlying normal of the random-baseline log-normal.
pub const RANDOM_BASELINE_MU: f64 = 0.0;
pub const RANDOM_BASELINE_SIGMA: f64 = 0.6;
pub const RANDOM_BASELINE_RUNS: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum TruthError {
    #[error("malformed sense key {0:?}")]
    BadSenseKey(String),
    #[error("sense keys mix lemmas {0:?} and {1:?}")]
    MixedLemmas(String, String),
    #[error("no sense keys")]
    NoKeys,
    #[error("empty table")]
    EmptyTable,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate word {word:?}")]
    Duplicate { line: usize, word: String },
    #[error("unknown source label {0:?}")]
    UnknownSource(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Rank(#[from] RankError),
}

/// The six supported human-derived resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    WordNet,
    WordNetReduced,
    WordNetDomains,
    OntoNotes,
    Oxford,
    Wikipedia,
}

impl Source {
    pub const ALL: [Source; 6] = [
        Source::WordNet,
        Source::WordNetReduced,
        Source::WordNetDomains,
        Source::OntoNotes,
        Source::Oxford,
        Source::Wikipedia,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Source::WordNet => "wordnet",
            Source::WordNetReduced => "wordnet-reduced",
            Source::WordNetDomains => "wordnet-domains",
            Source::OntoNotes => "ontonotes",
            Source::Oxford => "oxford",
            Source::Wikipedia => "wikipedia",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Source {
    type Err = TruthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Source::ALL
            .into_iter()
            .find(|src| src.label() == s)
            .ok_or_else(|| TruthError::UnknownSource(s.to_string()))
    }
}

/// `lemma%ss_type:lex_filenum:lex_id:head_word:head_id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SenseKey {
    pub lemma: String,
    pub ss_type: u32,
    pub lex_filenum: u32,
    /// Everything after `lex_filenum` (without the leading colon); empty for a
    /// truncated key.
    pub remainder: String,
}

impl FromStr for SenseKey {
    type Err = TruthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TruthError::BadSenseKey(s.to_string());
        let (lemma, rest) = s.trim().split_once('%').ok_or_else(bad)?;
        if lemma.is_empty() {
            return Err(bad());
        }
        let mut parts = rest.splitn(3, ':');
        let ss_type = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let lex_filenum = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let remainder = parts.next().unwrap_or("").to_string();
        Ok(SenseKey {
            lemma: lemma.to_string(),
            ss_type,
            lex_filenum,
            remainder,
        })
    }
}

impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}%{}:{:02}", self.lemma, self.ss_type, self.lex_filenum)?;
        if !self.remainder.is_empty() {
            write!(f, ":{}", self.remainder)?;
        }
        Ok(())
    }
}

/// Drops everything after `lex_filenum`: `eat%2:34:00::` becomes `eat%2:34`.
pub fn truncate_sense_key(key: &SenseKey) -> String {
    format!("{}%{}:{:02}", key.lemma, key.ss_type, key.lex_filenum)
}

/// Distinct truncated keys among one lemma's keys.
pub fn reduced_sense_count(keys: &[SenseKey]) -> Result<usize, TruthError> {
    let first = keys.first().ok_or(TruthError::NoKeys)?;
    if let Some(other) = keys.iter().find(|k| k.lemma != first.lemma) {
        return Err(TruthError::MixedLemmas(first.lemma.clone(), other.lemma.clone()));
    }
    Ok(keys.iter().map(truncate_sense_key).collect::<HashSet<_>>().len())
}

/// Parses one key per line (blank lines ignored) and counts senses per lemma,
/// either as distinct full keys or as distinct truncated keys.
pub fn sense_counts(text: &str, truncate: bool) -> Result<BTreeMap<String, usize>, TruthError> {
    let mut by_lemma: BTreeMap<String, Vec<SenseKey>> = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let key: SenseKey = line.parse()?;
        by_lemma.entry(key.lemma.clone()).or_default().push(key);
    }
    by_lemma
        .into_iter()
        .map(|(lemma, keys)| {
            let n = if truncate {
                reduced_sense_count(&keys)?
            } else {
                keys.iter().collect::<HashSet<_>>().len()
            };
            Ok((lemma, n))
        })
        .collect()
}

/// Word -> positive count from one resource.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub label: String,
    counts: BTreeMap<String, u64>,
}

impl CountTable {
    pub fn new(label: impl Into<String>, counts: BTreeMap<String, u64>) -> Result<Self, TruthError> {
        if counts.is_empty() {
            return Err(TruthError::EmptyTable);
        }
        if let Some((w, _)) = counts.iter().find(|(_, &c)| c == 0) {
            return Err(TruthError::Parse {
                line: 0,
                reason: format!("count for {w:?} must be positive"),
            });
        }
        Ok(Self {
            label: label.into(),
            counts,
        })
    }

    pub fn get(&self, word: &str) -> Option<u64> {
        self.counts.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn to_ranking(&self, tie_break: TieBreak) -> Result<Ranking, TruthError> {
        Ok(build_ranking(
            self.counts.iter().map(|(w, &c)| (w.clone(), c as f64)),
            tie_break,
        )?)
    }

    pub fn to_tsv(&self) -> String {
        self.counts.iter().map(|(w, c)| format!("{w}\t{c}\n")).collect()
    }
}

/// Parses `word<TAB>count` lines.
pub fn parse_count_table(text: &str, label: &str) -> Result<CountTable, TruthError> {
    let mut counts = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |reason: String| TruthError::Parse { line: line_no, reason };
        let (w, c) = line
            .split_once('\t')
            .ok_or_else(|| perr("expected word<TAB>count".into()))?;
        let c: i64 = c
            .trim()
            .parse()
            .map_err(|_| perr(format!("count {c:?} is not an integer")))?;
        if c <= 0 {
            return Err(perr(format!("count {c} must be positive")));
        }
        if counts.insert(w.to_string(), c as u64).is_some() {
            return Err(TruthError::Duplicate {
                line: line_no,
                word: w.to_string(),
            });
        }
    }
    CountTable::new(label, counts)
}

pub fn load_count_table(path: &std::path::Path, label: &str) -> Result<CountTable, TruthError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TruthError::Io(format!("{}: {e}", path.display())))?;
    parse_count_table(&text, label)
}

/// Words ranked by corpus frequency; words missing from the table are dropped
/// with a warning.
pub fn frequency_ranking(
    table: &FrequencyTable,
    words: &[String],
    tie_break: TieBreak,
) -> Result<Ranking, TruthError> {
    let mut items = Vec::with_capacity(words.len());
    let mut missing = 0;
    for w in words {
        match table.get(w) {
            Some(c) => items.push((w.clone(), c as f64)),
            None => missing += 1,
        }
    }
    if missing > 0 {
        warn!("frequency baseline: {missing} word(s) absent from the frequency table were dropped");
    }
    Ok(build_ranking(items, tie_break)?)
}

/// Independent `LogNormal(0, 0.6)` scores, deterministic per seed.
pub fn random_ranking(words: &[String], seed: u64) -> Result<Ranking, TruthError> {
    let dist = LogNormal::new(RANDOM_BASELINE_MU, RANDOM_BASELINE_SIGMA).expect("valid parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniq: Vec<&String> = words.iter().collect();
    uniq.sort();
    uniq.dedup();
    let items: Vec<(String, f64)> = uniq
        .into_iter()
        .map(|w| (w.clone(), dist.sample(&mut rng)))
        .collect();
    Ok(build_ranking(items, TieBreak::Lexicographic)?)
}

/// Seeds for the `runs` random-baseline repetitions derived from one seed.
pub fn random_run_seeds(seed: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64)
        .map(|i| seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i.wrapping_mul(0xd1b5_4a32_d192_ed03) ^ i))
        .collect()
}
