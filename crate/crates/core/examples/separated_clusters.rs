//! Synthetic words with 1, 2, 4 and 8 well separated sense clusters. With a
//! shared bounding box the score grows with the number of clusters.

use std::error::Error;
use std::fmt::Write;

use polysemy::grid::{Bounds, GridConfig};
use polysemy::vectors::{synth_center_radius, synth_clusters, ClusterSpec};

pub fn run() -> Result<String, Box<dyn Error>> {
    let (dim, spread, separation) = (3, 0.05, 5.0);
    let r = synth_center_radius(8, dim, separation) + spread + 1.0;
    let grid = GridConfig::new(8, Bounds::uniform(dim, -r, r)?)?;

    let mut out = String::new();
    let mut last = 0.0;
    for k in [1, 2, 4, 8] {
        let spec = ClusterSpec { k, per_cluster: 50, dim, spread, separation, seed: 7 };
        let set = synth_clusters(&format!("k{k}"), spec)?;
        let cov = grid.coverage(&set.to_points())?;
        let score = grid.score(&set.to_points())?;
        writeln!(out, "k={k}: score {score:.6}, occupied bins per level {:?}", cov.occupied())?;
        if score <= last {
            return Err(format!("score did not increase at k={k}").into());
        }
        last = score;
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
