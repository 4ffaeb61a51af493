//! Count content words in a small corpus, keep the most frequent, and draw
//! sentences where each kept word occurs exactly once.

use std::error::Error;
use std::fmt::Write;

use polysemy::corpus::{build_frequency_table, default_stopwords, select_sentences_multi, select_words, Selection};

const CORPUS: &str = "\
The river bank flooded after the storm.
She works at a bank downtown.
Storm clouds gathered over the river.
The bank bank of the river eroded.
A storm warning closed the bank early.
The river carried debris from the storm.
";

pub fn run() -> Result<String, Box<dyn Error>> {
    let table = build_frequency_table(CORPUS.as_bytes(), &default_stopwords())?;
    let words = select_words(&table, 3);
    let mut out = String::new();
    for w in &words {
        writeln!(out, "{w}\t{}", table.get(w).unwrap_or(0))?;
    }
    for (word, sel) in select_sentences_multi(CORPUS.as_bytes(), &words, 2, 42)? {
        match sel {
            Selection::Selected { ids, store } => {
                for id in ids {
                    writeln!(out, "{word} {id}: {}", store.get(&id).unwrap_or_default())?;
                }
            }
            Selection::Insufficient { qualifying } => writeln!(out, "{word}: only {qualifying} usable sentences")?,
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
