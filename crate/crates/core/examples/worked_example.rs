//! Ten contexts each for two words on a 2-D grid with three levels. The first
//! word spreads over the space, the second stays in the upper-left quadrant.

use std::error::Error;
use std::fmt::Write;

use polysemy::grid::{compute_bounds, max_score, GridConfig};
use polysemy::vectors::Points;

const WORD1: [[f64; 2]; 10] = [
    [0.0, 0.0], [0.1875, 0.1875], [0.4375, 0.1875], [0.1875, 0.4375], [0.6875, 0.0625],
    [0.9375, 0.3125], [0.5625, 0.1875], [0.8125, 0.8125], [1.0, 1.0], [0.5625, 0.6875],
];

const WORD2: [[f64; 2]; 10] = [
    [0.0625, 0.5625], [0.1875, 0.6875], [0.3125, 0.5625], [0.4375, 0.6875], [0.0625, 0.8125],
    [0.3125, 0.8125], [0.4375, 0.9375], [0.2075, 0.6675], [0.2925, 0.8325], [0.4575, 0.9175],
];

pub fn run() -> Result<String, Box<dyn Error>> {
    let load = |rows: &[[f64; 2]]| Points::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    let (word1, word2) = (load(&WORD1)?, load(&WORD2)?);

    // one box for every word, so bins mean the same thing across words
    let bounds = compute_bounds(word1.rows().chain(word2.rows()))?;
    let grid = GridConfig::new(3, bounds)?;
    let mut out = String::new();
    for (name, pts) in [("word1", &word1), ("word2", &word2)] {
        let cov = grid.coverage(pts)?;
        writeln!(
            out,
            "{name}: occupied {:?} coverage {:?} score {}",
            cov.occupied(),
            cov.per_level(),
            grid.score(pts)?
        )?;
    }
    writeln!(out, "maximum score at L=3: {}", max_score(3))?;
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
