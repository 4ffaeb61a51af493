//! Polysemy estimation from contextual embeddings.
//!
//! A word's occurrences are embedded, projected with a shared PCA, and binned
//! on a hierarchy of regular grids over a common bounding box. The more bins a
//! word's vectors occupy across levels, the higher its polysemy score. Scores
//! become rankings that are compared against sense-count rankings with six
//! metrics (cosine, Spearman, Kendall, p@k, NDCG, RBO).
//!
//! Modules follow the pipeline: [`corpus`] selects words and sentences,
//! [`vectors`] holds embedding sets, [`reduce`] fits PCA, [`grid`] scores,
//! [`rank`] and [`metrics`] compare, [`truth`] builds references and
//! baselines, [`sweep`] runs the (D, L) grid, [`sampler`] pulls sentences
//! and keywords from distant bins, and [`cli`] wires it all to a command line.

pub mod cli;
pub mod corpus;
pub mod grid;
pub mod metrics;
pub mod rank;
pub mod reduce;
pub mod sampler;
pub mod sweep;
pub mod truth;
pub mod vectors;

pub use grid::{compute_bounds, polysemy_score, BinIndex, Bounds, CoverageProfile, GridConfig};
pub use metrics::{compare, ComparisonReport, CompareOptions, Metric};
pub use rank::{build_ranking, intersect, normalize_scores, Ranking, TieBreak};
pub use reduce::{fit_pca, PcaModel};
pub use vectors::{load_vector_set, store_vector_set, Manifest, Points, VectorSet};
