//! Compare a predicted ranking with a reference using all six metrics.

use std::error::Error;
use std::fmt::Write;

use polysemy::metrics::{compare, rbo_prefix_weight, significance_marker, CompareOptions, Metric};
use polysemy::rank::{build_ranking, TieBreak};

pub fn run() -> Result<String, Box<dyn Error>> {
    let predicted = build_ranking(
        [("run", 0.61), ("set", 0.58), ("bank", 0.40), ("play", 0.44), ("eat", 0.12), ("table", 0.30), ("dog", 0.05)]
            .map(|(w, s)| (w.to_string(), s)),
        TieBreak::Lexicographic,
    )?;
    // sense counts; words absent from either side are dropped before comparing
    let senses = build_ranking(
        [("run", 57.0), ("set", 45.0), ("play", 35.0), ("bank", 10.0), ("table", 6.0), ("eat", 6.0), ("cat", 8.0)]
            .map(|(w, s)| (w.to_string(), s)),
        TieBreak::Lexicographic,
    )?;

    let report = compare("grid", &predicted, "senses", &senses, CompareOptions::default())?;
    let mut out = format!("{} words in common\n", report.n);
    for m in Metric::ALL {
        let marker = report.p_value(m).map(significance_marker).unwrap_or("");
        writeln!(out, "{:<9} {:>7.2}{marker}", m.name(), report.value(m) * m.percent_scale())?;
    }
    writeln!(out, "top 50 ranks carry {:.1}% of RBO weight at p=0.98", 100.0 * rbo_prefix_weight(0.98, 50)?)?;
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
