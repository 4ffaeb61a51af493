//! Fit one PCA on the pooled vectors of several words, keep the leading
//! components, and round-trip the model through its binary format.

use std::error::Error;
use std::fmt::Write;

use polysemy::reduce::{fit_pooled_sets, PcaModel};
use polysemy::vectors::{synth_clusters, ClusterSpec, VectorSet};

pub fn run() -> Result<String, Box<dyn Error>> {
    let sets: Vec<VectorSet> = (0..4)
        .map(|i| {
            let spec = ClusterSpec { k: i + 1, per_cluster: 30, dim: 16, spread: 0.2, separation: 2.0, seed: i as u64 };
            synth_clusters(&format!("w{i}"), spec)
        })
        .collect::<Result<_, _>>()?;

    let full = fit_pooled_sets(&sets)?;
    let total: f64 = full.explained_variance().iter().sum();
    let mut out = String::new();
    let mut acc = 0.0;
    for (i, v) in full.explained_variance().iter().take(5).enumerate() {
        acc += v;
        writeln!(out, "component {}: variance {v:.4}, cumulative {:.1}%", i + 1, 100.0 * acc / total)?;
    }

    let model = full.truncate(3)?;
    let restored = PcaModel::from_bytes(&model.to_bytes())?;
    let projected = restored.transform_set(&sets[0])?;
    writeln!(out, "{} -> {} dims; first row {:.4?}", restored.raw_dim(), restored.dims(), projected.row(0))?;
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run()?);
    Ok(())
}
