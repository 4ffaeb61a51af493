//! Rankings: ordered `(word, score)` lists with a recorded tie-break strategy.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("ranking is empty")]
    Empty,
    #[error("duplicate word {0:?}")]
    Duplicate(String),
    #[error("invalid score {score} for {word:?}")]
    BadScore { word: String, score: f64 },
    #[error("rankings have no words in common")]
    EmptyIntersection,
    #[error("rankings cover different word sets")]
    WordSetMismatch,
    #[error("unknown tie-break strategy {0:?} (lexicographic, input, random:<seed>)")]
    UnknownTieBreak(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// How equal scores are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Ascending word order.
    #[default]
    Lexicographic,
    /// A seeded pseudo-random order that depends only on `(seed, word)`.
    Random(u64),
    /// Order of first appearance in the input.
    InputOrder,
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieBreak::Lexicographic => write!(f, "lexicographic"),
            TieBreak::Random(seed) => write!(f, "random:{seed}"),
            TieBreak::InputOrder => write!(f, "input"),
        }
    }
}

impl FromStr for TieBreak {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lexicographic" | "lex" => Ok(TieBreak::Lexicographic),
            "input" | "input-order" => Ok(TieBreak::InputOrder),
            _ => s
                .strip_prefix("random:")
                .and_then(|n| n.parse().ok())
                .map(TieBreak::Random)
                .ok_or_else(|| RankError::UnknownTieBreak(s.to_string())),
        }
    }
}

/// SplitMix64 finalizer over an FNV-1a hash of the word.
fn tie_key(seed: u64, word: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in word.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    items: Vec<(String, f64)>,
    normalized: bool,
    tie_break: TieBreak,
}

impl Ranking {
    pub fn items(&self) -> &[(String, f64)] {
        &self.items
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(w, _)| w.as_str())
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.items.iter().map(|(_, s)| *s)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn score_map(&self) -> HashMap<&str, f64> {
        self.items.iter().map(|(w, s)| (w.as_str(), *s)).collect()
    }

    /// Scores of `words`, in the given order.
    pub fn aligned_scores(&self, words: &[&str]) -> Result<Vec<f64>, RankError> {
        let map = self.score_map();
        words
            .iter()
            .map(|w| map.get(w).copied().ok_or(RankError::WordSetMismatch))
            .collect()
    }

    /// Same items under a different tie-break.
    pub fn with_tie_break(&self, tie_break: TieBreak) -> Ranking {
        let mut r = build_ranking(self.items.iter().cloned(), tie_break)
            .expect("items already validated");
        r.normalized = self.normalized;
        r
    }

    /// `word<TAB>score` lines after a `#` header recording metadata.
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "# normalization={} tie_break={}\n",
            if self.normalized { "minmax-0-100" } else { "none" },
            self.tie_break
        );
        for (w, s) in &self.items {
            out.push_str(&format!("{w}\t{s}\n"));
        }
        out
    }

    /// Parses a ranking or score file; the header, when present, restores the
    /// metadata, otherwise `default_tie_break` applies and items are re-sorted.
    pub fn from_tsv(text: &str, default_tie_break: TieBreak) -> Result<Ranking, RankError> {
        let mut tie_break = default_tie_break;
        let mut normalized = false;
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("tie_break", v)) => tie_break = v.parse()?,
                        Some(("normalization", v)) => normalized = v != "none",
                        _ => {}
                    }
                }
                continue;
            }
            let perr = |reason: &str| RankError::Parse {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (w, s) = line.split_once('\t').ok_or_else(|| perr("expected word<TAB>score"))?;
            let s: f64 = s.trim().parse().map_err(|_| perr("score is not a number"))?;
            items.push((w.to_string(), s));
        }
        let mut r = build_ranking(items, tie_break)?;
        r.normalized = normalized && r.scores().all(|s| (0.0..=100.0).contains(&s));
        Ok(r)
    }
}

fn order(tie_break: TieBreak, items: &mut [(String, f64, usize)]) {
    items.sort_by(|a, b| {
        b.1.total_cmp(&a.1).then_with(|| match tie_break {
            TieBreak::Lexicographic => a.0.cmp(&b.0),
            TieBreak::InputOrder => a.2.cmp(&b.2),
            TieBreak::Random(seed) => tie_key(seed, &a.0)
                .cmp(&tie_key(seed, &b.0))
                .then_with(|| a.0.cmp(&b.0)),
        })
    });
}

/// Sorts `(word, score)` pairs by descending score under `tie_break`.
pub fn build_ranking(
    scores: impl IntoIterator<Item = (String, f64)>,
    tie_break: TieBreak,
) -> Result<Ranking, RankError> {
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for (i, (w, s)) in scores.into_iter().enumerate() {
        if !s.is_finite() || s < 0.0 {
            return Err(RankError::BadScore { word: w, score: s });
        }
        if !seen.insert(w.clone()) {
            return Err(RankError::Duplicate(w));
        }
        items.push((w, s, i));
    }
    if items.is_empty() {
        return Err(RankError::Empty);
    }
    order(tie_break, &mut items);
    Ok(Ranking {
        items: items.into_iter().map(|(w, s, _)| (w, s)).collect(),
        normalized: false,
        tie_break,
    })
}

/// Min-max map to `[0, 100]`; a constant ranking maps to all 100.
/// Item order is kept as is.
pub fn normalize_scores(r: &Ranking) -> Ranking {
    let (lo, hi) = r
        .scores()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    // already spans [0, 100]; rescaling again would only add rounding noise
    if r.normalized && hi == 100.0 && (lo == 0.0 || lo == hi) {
        return r.clone();
    }
    let items = r
        .items
        .iter()
        .map(|(w, s)| {
            let v = if hi > lo { (s - lo) / (hi - lo) * 100.0 } else { 100.0 };
            (w.clone(), v.clamp(0.0, 100.0))
        })
        .collect();
    Ranking {
        items,
        normalized: true,
        tie_break: r.tie_break,
    }
}

/// Restricts both rankings to their common words. Each keeps its own scores
/// and order; filtering a sorted list keeps it sorted under the same rule.
pub fn intersect(a: &Ranking, b: &Ranking) -> Result<(Ranking, Ranking), RankError> {
    let in_a: HashSet<&str> = a.words().collect();
    let common: HashSet<&str> = b.words().filter(|w| in_a.contains(w)).collect();
    if common.is_empty() {
        return Err(RankError::EmptyIntersection);
    }
    let restrict = |r: &Ranking| Ranking {
        items: r
            .items
            .iter()
            .filter(|(w, _)| common.contains(w.as_str()))
            .cloned()
            .collect(),
        normalized: r.normalized,
        tie_break: r.tie_break,
    };
    Ok((restrict(a), restrict(b)))
}
