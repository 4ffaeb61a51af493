//! Sweep PCA width and grid depth over synthetic words whose cluster counts
//! are known, then pick the best configuration per metric.

use std::collections::BTreeMap;
use std::error::Error;
use std::fmt::Write;

use polysemy::rank::TieBreak;
use polysemy::sweep::{default_exclusions, run_sweep, Method, SweepConfig, RANDOM_LABEL};
use polysemy::truth::CountTable;
use polysemy::vectors::{synth_clusters, ClusterSpec, VectorSet};

pub fn run() -> Result<String, Box<dyn Error>> {
    let mut sets: Vec<VectorSet> = Vec::new();
    let mut counts = BTreeMap::new();
    for i in 0..12 {
        let k = 1 + i % 6;
        let word = format!("w{i:02}");
        let spec = ClusterSpec { k, per_cluster: 15, dim: 10, spread: 0.1, separation: 1.5, seed: 40 + i as u64 };
        sets.push(synth_clusters(&word, spec)?);
        counts.insert(word, k as u64);
    }
    let words: Vec<String> = counts.keys().cloned().collect();
    let truths = vec![
        ("clusters".to_string(), Method::Fixed(CountTable::new("clusters", counts)?.to_ranking(TieBreak::Lexicographic)?)),
        (RANDOM_LABEL.to_string(), Method::random(&words, 1, 10)?),
    ];
    let config = SweepConfig {
        d_values: vec![2, 3, 4],
        l_values: (3..=8).collect(),
        random_runs: 10,
        seed: 1,
        ..Default::default()
    };
    let result = run_sweep(&sets, &truths, &config)?;

    let dir = tempfile::tempdir()?;
    result.write(dir.path(), &default_exclusions())?;
    let mut out = String::new();
    writeln!(out, "{} configurations", result.results.len())?;
    out.push_str(&result.best_tsv(&default_exclusions()));
    writeln!(out, "\nkendall matrix (percent):")?;
    out.push_str(&std::fs::read_to_string(dir.path().join("kendall/matrix.tsv"))?);
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
