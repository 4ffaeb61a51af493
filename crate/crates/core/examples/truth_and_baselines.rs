//! Reference rankings: sense counts from WordNet-style keys, corpus
//! frequency, and the averaged random baseline.

use std::error::Error;
use std::fmt::Write;

use polysemy::corpus::{build_frequency_table, default_stopwords};
use polysemy::metrics::CompareOptions;
use polysemy::rank::{build_ranking, TieBreak};
use polysemy::sweep::{compare_methods, Method};
use polysemy::truth::{frequency_ranking, sense_counts, CountTable};

const KEYS: &str = "\
eat%2:34:00::
eat%2:34:01::
bank%1:17:01::
bank%1:14:00::
bank%1:14:01::
run%2:38:00::
run%2:41:00::
run%2:30:00::
";

const CORPUS: &str = "\
They run along the bank every morning.
We eat at the bank of the river.
Run the tests before you eat.
The bank will run a new campaign.
";

pub fn run() -> Result<String, Box<dyn Error>> {
    let mut out = String::new();
    let full = sense_counts(KEYS, false)?;
    let merged = sense_counts(KEYS, true)?;
    writeln!(out, "senses (full keys): {full:?}")?;
    writeln!(out, "senses (lexicographer file and number only): {merged:?}")?;

    let table = CountTable::new("senses", merged.into_iter().map(|(w, n)| (w, n as u64)).collect())?;
    let senses = table.to_ranking(TieBreak::Lexicographic)?;
    let words: Vec<String> = senses.words().map(str::to_string).collect();

    let freq = build_frequency_table(CORPUS.as_bytes(), &default_stopwords())?;
    let by_freq = frequency_ranking(&freq, &words, TieBreak::Lexicographic)?;
    writeln!(out, "frequency ranking:\n{}", by_freq.to_tsv())?;

    let predicted = build_ranking(
        [("bank", 0.9), ("run", 1.1), ("eat", 0.2)].map(|(w, s)| (w.to_string(), s)),
        TieBreak::Lexicographic,
    )?;
    let opts = CompareOptions::default();
    let truth = Method::Fixed(senses);
    for (label, method) in [
        ("grid", Method::Fixed(predicted)),
        ("frequency", Method::Fixed(by_freq)),
        ("random", Method::random(&words, 11, 30)?),
    ] {
        let r = compare_methods(label, &method, "senses", &truth, opts)?;
        writeln!(out, "{label:<9} vs senses: cosine {:.3} kendall {:+.3}", r.cosine, r.kendall.coef)?;
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
