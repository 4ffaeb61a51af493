//! Pick sentences from bins far apart in the reduced space, then list the
//! words that characterize one bin.

use std::collections::HashSet;
use std::error::Error;
use std::fmt::Write;

use polysemy::corpus::SentenceStore;
use polysemy::grid::{compute_bounds, GridConfig};
use polysemy::sampler::{bin_keywords, sample_diverse};
use polysemy::vectors::Points;

/// Two usages of "bank", each a tight group of contexts.
const CONTEXTS: [(&str, [f64; 2]); 8] = [
    ("the bank raised interest rates again", [0.10, 0.12]),
    ("she opened an account at the bank", [0.12, 0.10]),
    ("the bank approved the loan on monday", [0.11, 0.14]),
    ("interest on savings at the bank fell", [0.14, 0.11]),
    ("we sat on the bank of the river", [0.90, 0.88]),
    ("the river bank was muddy after rain", [0.88, 0.91]),
    ("fish gathered near the grassy bank", [0.91, 0.90]),
    ("the river flooded its east bank", [0.87, 0.89]),
];

pub fn run() -> Result<String, Box<dyn Error>> {
    let mut store = SentenceStore::default();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, (text, point)) in CONTEXTS.iter().enumerate() {
        let id = format!("s{}", i + 1);
        store.insert(id.clone(), text.to_string())?;
        ids.push(id);
        rows.push(point.to_vec());
    }
    let points = Points::from_rows(&rows)?;
    let grid = GridConfig::new(3, compute_bounds(points.rows())?)?;

    let mut out = String::new();
    let samples = sample_diverse(&grid, &points, &ids, &store, 2, 2, 2)?;
    let stop: HashSet<String> = ["the", "at", "on", "of", "its", "an", "was", "we", "she"].iter().map(|s| s.to_string()).collect();
    for s in &samples {
        writeln!(out, "bin {} ({} contexts)", s.bin, s.population)?;
        for (id, text) in &s.sentences {
            writeln!(out, "  {id}: {text}")?;
        }
        let kw = bin_keywords(&grid, &points, &ids, &store, &s.bin, "bank", &stop, 3)?;
        writeln!(out, "  keywords: {kw:?}")?;
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
