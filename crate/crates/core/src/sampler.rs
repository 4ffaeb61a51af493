//! Picks example sentences from bins that are far apart in the reduced space,
//! and summarizes a bin by its most frequent content words.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::corpus::{is_content_token, tokenize, SentenceStore};
use crate::grid::{BinIndex, GridConfig, GridError};
use crate::vectors::{euclidean, Points};

pub const DEFAULT_TOP_KEYWORDS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{ids} sentence ids for {rows} vectors")]
    IdCount { ids: usize, rows: usize },
    #[error("level {level} is outside 1..={max}")]
    Level { level: u32, max: u32 },
    #[error("bin {0} holds no vectors")]
    EmptyBin(String),
    #[error("sentence {0} missing from the sentence store")]
    MissingSentence(String),
}

/// An occupied bin and the indices of the vectors it holds, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub index: BinIndex,
    pub members: Vec<usize>,
}

/// Occupied bins at `level`, sorted by coordinates.
pub fn occupied_bins(grid: &GridConfig, points: &Points, level: u32) -> Result<Vec<Bin>, SampleError> {
    check_level(grid, level)?;
    let mut map: BTreeMap<BinIndex, Vec<usize>> = BTreeMap::new();
    for (i, row) in points.rows().enumerate() {
        map.entry(grid.bin_index(row, level)?).or_default().push(i);
    }
    Ok(map.into_iter().map(|(index, members)| Bin { index, members }).collect())
}

fn check_level(grid: &GridConfig, level: u32) -> Result<(), SampleError> {
    if level == 0 || level > grid.levels() {
        return Err(SampleError::Level { level, max: grid.levels() });
    }
    Ok(())
}

/// Sentences drawn from one selected bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSample {
    pub bin: BinIndex,
    pub population: usize,
    pub sentences: Vec<(String, String)>,
}

/// Greedy farthest-point choice of `count` occupied bins: start from the most
/// populated bin, then repeatedly add the bin whose center is farthest from
/// every chosen center. Ties go to the smaller coordinates. The first
/// `per_bin` sentences (in vector order) of each chosen bin are returned.
pub fn sample_diverse(
    grid: &GridConfig,
    points: &Points,
    sentence_ids: &[String],
    store: &SentenceStore,
    level: u32,
    count: usize,
    per_bin: usize,
) -> Result<Vec<BinSample>, SampleError> {
    if sentence_ids.len() != points.len() {
        return Err(SampleError::IdCount { ids: sentence_ids.len(), rows: points.len() });
    }
    let bins = occupied_bins(grid, points, level)?;
    let chosen = farthest_bins(grid, &bins, count);
    chosen
        .into_iter()
        .map(|b| {
            let bin = &bins[b];
            let sentences = bin
                .members
                .iter()
                .take(per_bin)
                .map(|&i| {
                    let id = &sentence_ids[i];
                    store
                        .get(id)
                        .map(|t| (id.clone(), t.to_string()))
                        .ok_or_else(|| SampleError::MissingSentence(id.clone()))
                })
                .collect::<Result<_, _>>()?;
            Ok(BinSample { bin: bin.index.clone(), population: bin.members.len(), sentences })
        })
        .collect()
}

/// Indices into `bins` in selection order.
fn farthest_bins(grid: &GridConfig, bins: &[Bin], count: usize) -> Vec<usize> {
    if bins.is_empty() || count == 0 {
        return Vec::new();
    }
    let centers: Vec<Vec<f64>> = bins.iter().map(|b| grid.bin_center(&b.index)).collect();
    // bins are sorted by coordinates, so strict comparisons keep the smallest on ties
    let mut first = 0;
    for (i, b) in bins.iter().enumerate() {
        if b.members.len() > bins[first].members.len() {
            first = i;
        }
    }
    let mut chosen = vec![first];
    let mut nearest: Vec<f64> = centers.iter().map(|c| euclidean(c, &centers[first])).collect();
    while chosen.len() < count.min(bins.len()) {
        let mut next: Option<usize> = None;
        for i in 0..bins.len() {
            if chosen.contains(&i) {
                continue;
            }
            if next.is_none_or(|n| nearest[i] > nearest[n]) {
                next = Some(i);
            }
        }
        let Some(n) = next else { break };
        chosen.push(n);
        for (i, c) in centers.iter().enumerate() {
            nearest[i] = nearest[i].min(euclidean(c, &centers[n]));
        }
    }
    chosen
}

/// Most frequent content tokens across the sentences of one bin, excluding
/// the target word. Sorted by count descending, then alphabetically.
#[allow(clippy::too_many_arguments)]
pub fn bin_keywords(
    grid: &GridConfig,
    points: &Points,
    sentence_ids: &[String],
    store: &SentenceStore,
    bin: &BinIndex,
    word: &str,
    stopwords: &HashSet<String>,
    top_n: usize,
) -> Result<Vec<(String, u64)>, SampleError> {
    if sentence_ids.len() != points.len() {
        return Err(SampleError::IdCount { ids: sentence_ids.len(), rows: points.len() });
    }
    check_level(grid, bin.level)?;
    let target = word.to_lowercase();
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut any = false;
    for (i, row) in points.rows().enumerate() {
        if grid.bin_index(row, bin.level)? != *bin {
            continue;
        }
        any = true;
        let id = &sentence_ids[i];
        let text = store.get(id).ok_or_else(|| SampleError::MissingSentence(id.clone()))?;
        for tok in tokenize(text) {
            if tok != target && is_content_token(&tok, stopwords) {
                *counts.entry(tok).or_default() += 1;
            }
        }
    }
    if !any {
        return Err(SampleError::EmptyBin(bin.to_string()));
    }
    let mut out: Vec<(String, u64)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(top_n);
    Ok(out)
}
