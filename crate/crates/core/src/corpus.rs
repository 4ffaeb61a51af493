//! Word and sentence selection over a one-sentence-per-line text corpus.
//!
//! Tokens are lowercased and split on every character that is neither a
//! letter nor a digit; tokens containing a digit are dropped whole.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_TOP_K: usize = 2000;
pub const DEFAULT_SENTENCES_PER_WORD: usize = 3000;
pub const MIN_TOKEN_CHARS: usize = 3;

/// English stopword list shipped with the crate.
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Read(#[from] std::io::Error),
    #[error("duplicate sentence id {0:?}")]
    DuplicateId(String),
    #[error("malformed sentence store line {line}: {reason}")]
    Store { line: usize, reason: String },
}

/// Lowercased tokens of a sentence, digits-bearing tokens removed.
pub fn tokenize(sentence: &str) -> impl Iterator<Item = String> + '_ {
    sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !t.chars().any(|c| c.is_numeric()))
        .map(str::to_lowercase)
}

/// Whether a token survives the frequency-table filters.
pub fn is_content_token(token: &str, stopwords: &HashSet<String>) -> bool {
    token.chars().count() >= MIN_TOKEN_CHARS && !stopwords.contains(token)
}

pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
}

impl FrequencyTable {
    pub fn get(&self, token: &str) -> Option<u64> {
        self.counts.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Commutative merge of a partial table.
    pub fn merge(&mut self, other: FrequencyTable) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
    }

    pub fn add_sentence(&mut self, sentence: &str, stopwords: &HashSet<String>) {
        for tok in tokenize(sentence) {
            if is_content_token(&tok, stopwords) {
                *self.counts.entry(tok).or_default() += 1;
            }
        }
    }

    /// Entries by descending count, ties lexicographic.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.counts.iter().map(|(k, &c)| (k.as_str(), c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn to_tsv(&self) -> String {
        self.sorted()
            .into_iter()
            .map(|(w, c)| format!("{w}\t{c}\n"))
            .collect()
    }

    /// Reads a `token<TAB>count` dump.
    pub fn from_tsv(text: &str) -> Result<Self, CorpusError> {
        let mut counts = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| CorpusError::Store {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (w, c) = line.split_once('\t').ok_or_else(|| bad("expected token<TAB>count"))?;
            let c: u64 = c.trim().parse().map_err(|_| bad("count is not an integer"))?;
            if c == 0 {
                return Err(bad("count must be positive"));
            }
            if counts.insert(w.to_string(), c).is_some() {
                return Err(bad("duplicate token"));
            }
        }
        Ok(Self { counts })
    }
}

impl FromIterator<(String, u64)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (String, u64)>>(iter: I) -> Self {
        let mut t = FrequencyTable::default();
        for (k, v) in iter {
            *t.counts.entry(k).or_default() += v;
        }
        t
    }
}

pub fn build_frequency_table<R: BufRead>(
    corpus: R,
    stopwords: &HashSet<String>,
) -> Result<FrequencyTable, CorpusError> {
    let mut table = FrequencyTable::default();
    for line in corpus.lines() {
        table.add_sentence(&line?, stopwords);
    }
    Ok(table)
}

/// The `top_k` most frequent words, descending count then lexicographic.
pub fn select_words(table: &FrequencyTable, top_k: usize) -> Vec<String> {
    table
        .sorted()
        .into_iter()
        .take(top_k)
        .map(|(w, _)| w.to_string())
        .collect()
}

/// Insertion-ordered `sentence_id -> text` map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceStore {
    sentences: IndexMap<String, String>,
}

impl SentenceStore {
    pub fn insert(&mut self, id: String, text: String) -> Result<(), CorpusError> {
        match self.sentences.get(&id) {
            Some(existing) if *existing == text => Ok(()),
            Some(_) => Err(CorpusError::DuplicateId(id)),
            None => {
                self.sentences.insert(id, text);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.sentences.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.sentences.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn extend(&mut self, other: SentenceStore) -> Result<(), CorpusError> {
        for (k, v) in other.sentences {
            self.insert(k, v)?;
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        self.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect()
    }

    pub fn from_tsv(text: &str) -> Result<Self, CorpusError> {
        let mut store = Self::default();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (id, s) = line.split_once('\t').ok_or_else(|| CorpusError::Store {
                line: i + 1,
                reason: "expected sentence_id<TAB>text".into(),
            })?;
            if store.sentences.contains_key(id) {
                return Err(CorpusError::DuplicateId(id.to_string()));
            }
            store.sentences.insert(id.to_string(), s.to_string());
        }
        Ok(store)
    }
}

/// Outcome of selecting sentences for one word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Selected {
        ids: Vec<String>,
        store: SentenceStore,
    },
    /// Fewer than `m` sentences contain the word exactly once; drop the word.
    Insufficient { qualifying: usize },
}

impl Selection {
    pub fn is_selected(&self) -> bool {
        matches!(self, Selection::Selected { .. })
    }
}

/// Sentence id for a 1-based corpus line number.
pub fn sentence_id(line_no: usize) -> String {
    format!("s{line_no}")
}

fn word_seed(seed: u64, word: &str) -> u64 {
    // FNV-1a over the word, mixed with the run seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in word.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ seed.rotate_left(17)
}

struct Reservoir {
    rng: ChaCha8Rng,
    seen: usize,
    picked: Vec<(usize, String)>,
}

/// One pass over the corpus, drawing `m` uniform sentences per word among
/// those containing the word exactly once. Reservoirs are seeded per word, so
/// a word's selection does not depend on which other words are requested.
pub fn select_sentences_multi<R: BufRead>(
    corpus: R,
    words: &[String],
    m: usize,
    seed: u64,
) -> Result<BTreeMap<String, Selection>, CorpusError> {
    assert!(m >= 1, "m must be positive");
    let mut reservoirs: HashMap<&str, Reservoir> = words
        .iter()
        .map(|w| {
            (
                w.as_str(),
                Reservoir {
                    rng: ChaCha8Rng::seed_from_u64(word_seed(seed, w)),
                    seen: 0,
                    picked: Vec::with_capacity(m),
                },
            )
        })
        .collect();
    let mut counts: HashMap<String, usize> = HashMap::new();
    for (idx, line) in corpus.lines().enumerate() {
        let line = line?;
        counts.clear();
        for tok in tokenize(&line) {
            *counts.entry(tok).or_default() += 1;
        }
        for (tok, c) in &counts {
            if *c != 1 {
                continue;
            }
            if let Some(r) = reservoirs.get_mut(tok.as_str()) {
                r.seen += 1;
                if r.picked.len() < m {
                    r.picked.push((idx + 1, line.clone()));
                } else {
                    let j = r.rng.random_range(0..r.seen);
                    if j < m {
                        r.picked[j] = (idx + 1, line.clone());
                    }
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    for (word, mut r) in reservoirs {
        let sel = if r.seen < m {
            Selection::Insufficient { qualifying: r.seen }
        } else {
            r.picked.sort_by_key(|(n, _)| *n);
            let mut store = SentenceStore::default();
            let mut ids = Vec::with_capacity(m);
            for (n, text) in r.picked {
                let id = sentence_id(n);
                store.insert(id.clone(), text)?;
                ids.push(id);
            }
            Selection::Selected { ids, store }
        };
        out.insert(word.to_string(), sel);
    }
    Ok(out)
}

pub fn select_sentences<R: BufRead>(
    corpus: R,
    word: &str,
    m: usize,
    seed: u64,
) -> Result<Selection, CorpusError> {
    let words = [word.to_string()];
    let mut map = select_sentences_multi(corpus, &words, m, seed)?;
    Ok(map.remove(word).expect("requested word present"))
}
