//! The (D, L) experiment grid: reduce, score, rank and compare every
//! configuration against every reference, then pick the best configuration
//! per metric and assemble similarity matrices.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{compute_bounds, Bounds, GridConfig, GridError};
use crate::metrics::{
    compare, significance_marker, CompareOptions, ComparisonReport, Correlation, Metric,
    MetricError,
};
use crate::rank::{build_ranking, RankError, Ranking, TieBreak};
use crate::reduce::{fit_pooled_sets, PcaError, PcaModel};
use crate::truth::{random_ranking, random_run_seeds, TruthError};
use crate::vectors::{Manifest, Points, VectorError, VectorSet};

pub const RANDOM_LABEL: &str = "random";
pub const FREQUENCY_LABEL: &str = "frequency";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Truth(#[from] TruthError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid sweep: {0}")]
    Config(String),
    #[error("metric {0} has no successful configuration")]
    NoResult(Metric),
}

/// A reference ranking, or a random baseline evaluated over several seeds
/// whose metric values are averaged.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Fixed(Ranking),
    Random(Vec<Ranking>),
}

impl Method {
    pub fn random(words: &[String], seed: u64, runs: usize) -> Result<Method, SweepError> {
        if runs == 0 {
            return Err(SweepError::Config("random baseline needs at least one run".into()));
        }
        let runs = random_run_seeds(seed, runs)
            .into_iter()
            .map(|s| random_ranking(words, s))
            .collect::<Result<_, _>>()?;
        Ok(Method::Random(runs))
    }

    fn runs(&self) -> &[Ranking] {
        match self {
            Method::Fixed(r) => std::slice::from_ref(r),
            Method::Random(rs) => rs,
        }
    }
}

/// Arithmetic mean of each metric (and p-value) over several reports.
pub fn average_reports(reports: &[ComparisonReport]) -> ComparisonReport {
    let n = reports.len() as f64;
    let mean = |f: &dyn Fn(&ComparisonReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let first = &reports[0];
    ComparisonReport {
        candidate: first.candidate.clone(),
        truth: first.truth.clone(),
        n: first.n,
        cosine: mean(&|r| r.cosine),
        spearman: Correlation {
            coef: mean(&|r| r.spearman.coef),
            p_value: mean(&|r| r.spearman.p_value),
        },
        kendall: Correlation {
            coef: mean(&|r| r.kendall.coef),
            p_value: mean(&|r| r.kendall.p_value),
        },
        p_at_k: mean(&|r| r.p_at_k),
        k: first.k,
        ndcg: mean(&|r| r.ndcg),
        rbo: mean(&|r| r.rbo),
        rbo_p: first.rbo_p,
    }
}

/// Compares two methods; random runs are paired index by index (or each run
/// against the fixed side) and averaged.
pub fn compare_methods(
    cand_label: &str,
    candidate: &Method,
    truth_label: &str,
    truth: &Method,
    opts: CompareOptions,
) -> Result<ComparisonReport, MetricError> {
    let (cr, tr) = (candidate.runs(), truth.runs());
    let n = cr.len().max(tr.len());
    let reports = (0..n)
        .map(|i| compare(cand_label, &cr[i % cr.len()], truth_label, &tr[i % tr.len()], opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(average_reports(&reports))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub d_values: Vec<usize>,
    pub l_values: Vec<u32>,
    pub metrics: Vec<Metric>,
    pub tie_break: TieBreak,
    pub random_runs: usize,
    pub seed: u64,
    pub compare: CompareOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_values: (2..=20).collect(),
            l_values: (2..=19).collect(),
            metrics: Metric::ALL.to_vec(),
            tie_break: TieBreak::Lexicographic,
            random_runs: crate::truth::RANDOM_BASELINE_RUNS,
            seed: 0,
            compare: CompareOptions::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.d_values.is_empty() || self.l_values.is_empty() {
            return Err(SweepError::Config("empty D or L grid".into()));
        }
        if self.d_values.contains(&0) {
            return Err(SweepError::Config("D values must be >= 1".into()));
        }
        if self.l_values.iter().any(|&l| l < 2) {
            return Err(SweepError::Config("L values must be >= 2".into()));
        }
        if self.metrics.is_empty() {
            return Err(SweepError::Config("no metrics selected".into()));
        }
        Ok(())
    }

    /// All `(d, l)` pairs, D-major.
    pub fn configurations(&self) -> Vec<(usize, u32)> {
        self.d_values
            .iter()
            .flat_map(|&d| self.l_values.iter().map(move |&l| (d, l)))
            .collect()
    }
}

pub fn config_label(d: usize, l: u32) -> String {
    format!("D{d}L{l}")
}

/// Every word's vectors projected to `d` dims plus the shared bounding box.
#[derive(Debug, Clone)]
pub struct ReducedSpace {
    pub words: Vec<String>,
    pub points: Vec<Points>,
    pub bounds: Bounds,
}

impl ReducedSpace {
    /// Projects with `model`; `None` keeps the original axes.
    pub fn build(sets: &[VectorSet], model: Option<&PcaModel>) -> Result<Self, SweepError> {
        let points: Vec<Points> = sets
            .par_iter()
            .map(|s| match model {
                Some(m) => m.transform_set(s).map_err(SweepError::from),
                None => Ok(s.to_points()),
            })
            .collect::<Result<_, _>>()?;
        let bounds = compute_bounds(points.iter().flat_map(|p| p.rows()))?;
        Ok(Self {
            words: sets.iter().map(|s| s.word().to_string()).collect(),
            points,
            bounds,
        })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn dims(&self) -> usize {
        self.bounds.dims()
    }

    pub fn grid(&self, levels: u32) -> Result<GridConfig, GridError> {
        GridConfig::new(levels, self.bounds.clone())
    }

    /// Raw polysemy score of every word at `levels`.
    pub fn scores(&self, levels: u32) -> Result<Vec<(String, f64)>, GridError> {
        let grid = self.grid(levels)?;
        self.points
            .par_iter()
            .zip(self.words.par_iter())
            .map(|(p, w)| Ok((w.clone(), grid.score(p)?)))
            .collect()
    }

    pub fn points_of(&self, word: &str) -> Option<&Points> {
        self.words.iter().position(|w| w == word).map(|i| &self.points[i])
    }
}

/// Projection to `d` dims: PCA below the input width, identity at it.
pub fn reducer_for(full: &PcaModel, d: usize) -> Result<Option<PcaModel>, PcaError> {
    if d == full.raw_dim() {
        Ok(None)
    } else {
        full.truncate(d).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigOutcome {
    pub ranking: Ranking,
    /// Aligned with [`SweepResult::truth_labels`]; `None` when the pair could
    /// not be compared.
    pub comparisons: Vec<Option<ComparisonReport>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigResult {
    pub d: usize,
    pub l: u32,
    pub outcome: Result<ConfigOutcome, String>,
}

impl ConfigResult {
    pub fn label(&self) -> String {
        config_label(self.d, self.l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub truth_labels: Vec<String>,
    pub results: Vec<ConfigResult>,
}

/// Runs every configuration. The full PCA is fit once; each D truncates it.
pub fn run_sweep(
    sets: &[VectorSet],
    truths: &[(String, Method)],
    config: &SweepConfig,
) -> Result<SweepResult, SweepError> {
    config.validate()?;
    if truths.is_empty() {
        return Err(SweepError::Config("at least one reference ranking is required".into()));
    }
    if sets.is_empty() {
        return Err(SweepError::Config("no vector sets".into()));
    }
    let full = fit_pooled_sets(sets)?;
    let mut results = Vec::with_capacity(config.d_values.len() * config.l_values.len());
    for &d in &config.d_values {
        let space = reducer_for(&full, d)
            .map_err(SweepError::from)
            .and_then(|m| ReducedSpace::build(sets, m.as_ref()));
        let space = match space {
            Ok(s) => s,
            Err(e) => {
                warn!("D={d}: {e}; skipping {} configurations", config.l_values.len());
                results.extend(config.l_values.iter().map(|&l| ConfigResult {
                    d,
                    l,
                    outcome: Err(e.to_string()),
                }));
                continue;
            }
        };
        info!("D={d}: projected {} words", space.words.len());
        let per_l: Vec<ConfigResult> = config
            .l_values
            .par_iter()
            .map(|&l| ConfigResult {
                d,
                l,
                outcome: evaluate(&space, l, truths, config).map_err(|e| {
                    warn!("{}: {e}", config_label(d, l));
                    e.to_string()
                }),
            })
            .collect();
        results.extend(per_l);
    }
    Ok(SweepResult {
        config: config.clone(),
        truth_labels: truths.iter().map(|(l, _)| l.clone()).collect(),
        results,
    })
}

fn evaluate(
    space: &ReducedSpace,
    l: u32,
    truths: &[(String, Method)],
    config: &SweepConfig,
) -> Result<ConfigOutcome, SweepError> {
    let ranking = build_ranking(space.scores(l)?, config.tie_break)?;
    let label = config_label(space.dims(), l);
    let cand = Method::Fixed(ranking);
    let comparisons = truths
        .iter()
        .map(|(tl, t)| compare_methods(&label, &cand, tl, t, config.compare).ok())
        .collect();
    let Method::Fixed(ranking) = cand else { unreachable!() };
    Ok(ConfigOutcome { ranking, comparisons })
}

/// Loads a manifest and runs the sweep over its sets.
pub fn run_sweep_manifest(
    manifest: &Manifest,
    truths: &[(String, Method)],
    config: &SweepConfig,
) -> Result<SweepResult, SweepError> {
    let sets = manifest.load_all()?;
    run_sweep(&sets, truths, config)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestConfig {
    pub d: usize,
    pub l: u32,
    pub mean: f64,
}

/// Configuration maximizing the unweighted mean of `metric` over references
/// not in `exclude`. Means are compared at the two-decimal percent precision
/// of the written matrices; ties go to smaller D, then smaller L.
pub fn best_config(
    result: &SweepResult,
    metric: Metric,
    exclude: &[&str],
) -> Result<BestConfig, SweepError> {
    let keep: Vec<usize> = result
        .truth_labels
        .iter()
        .enumerate()
        .filter(|(_, l)| !exclude.contains(&l.as_str()))
        .map(|(i, _)| i)
        .collect();
    let mut best: Option<BestConfig> = None;
    for r in &result.results {
        let Ok(out) = &r.outcome else { continue };
        let vals: Vec<f64> = keep
            .iter()
            .filter_map(|&i| out.comparisons[i].as_ref().map(|c| c.value(metric)))
            .collect();
        if vals.is_empty() {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let cand = BestConfig { d: r.d, l: r.l, mean };
        // means that print identically in the matrix count as tied
        let better = match best {
            None => true,
            Some(b) => {
                let (x, y) = (reported(metric, mean), reported(metric, b.mean));
                x > y || (x == y && (r.d, r.l) < (b.d, b.l))
            }
        };
        if better {
            best = Some(cand);
        }
    }
    best.ok_or(SweepError::NoResult(metric))
}

fn reported(m: Metric, v: f64) -> i64 {
    (v * m.percent_scale() * 100.0).round() as i64
}

pub fn default_exclusions() -> [&'static str; 2] {
    [RANDOM_LABEL, FREQUENCY_LABEL]
}

fn fmt_percent(m: Metric, v: f64) -> String {
    format!("{:.2}", v * m.percent_scale())
}

fn write_file(path: &Path, contents: &str) -> Result<(), SweepError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| SweepError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| SweepError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl SweepResult {
    pub fn best_configs(&self, exclude: &[&str]) -> BTreeMap<Metric, Result<BestConfig, String>> {
        self.config
            .metrics
            .iter()
            .map(|&m| (m, best_config(self, m, exclude).map_err(|e| e.to_string())))
            .collect()
    }

    /// Rows are configurations, columns references; values in percent, with
    /// a significance column after each reference for rho and tau.
    pub fn matrix_tsv(&self, metric: Metric) -> String {
        let mut out = String::from("config");
        for t in &self.truth_labels {
            out.push('\t');
            out.push_str(t);
            if metric.has_p_value() {
                out.push_str(&format!("\t{t}_sig"));
            }
        }
        out.push('\n');
        for r in &self.results {
            out.push_str(&r.label());
            for i in 0..self.truth_labels.len() {
                let cell = r.outcome.as_ref().ok().and_then(|o| o.comparisons[i].as_ref());
                match cell {
                    Some(c) => {
                        out.push('\t');
                        out.push_str(&fmt_percent(metric, c.value(metric)));
                        if let Some(p) = c.p_value(metric) {
                            out.push('\t');
                            out.push_str(significance_marker(p));
                        }
                    }
                    None => {
                        out.push_str("\tNA");
                        if metric.has_p_value() {
                            out.push('\t');
                        }
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Long format at full precision: `config d l reference n value p_value`.
    pub fn matrix_full_tsv(&self, metric: Metric) -> String {
        let mut out = String::from("config\td\tl\treference\tn\tvalue\tp_value\n");
        for r in &self.results {
            for (i, t) in self.truth_labels.iter().enumerate() {
                let cell = r.outcome.as_ref().ok().and_then(|o| o.comparisons[i].as_ref());
                let (n, v, p) = match cell {
                    Some(c) => (
                        c.n.to_string(),
                        c.value(metric).to_string(),
                        c.p_value(metric).map_or("NA".into(), |p| p.to_string()),
                    ),
                    None => ("NA".into(), "NA".into(), "NA".into()),
                };
                out.push_str(&format!("{}\t{}\t{}\t{t}\t{n}\t{v}\t{p}\n", r.label(), r.d, r.l));
            }
        }
        out
    }

    pub fn best_tsv(&self, exclude: &[&str]) -> String {
        let mut out = String::from("metric\tconfig\td\tl\tmean\n");
        for (m, b) in self.best_configs(exclude) {
            match b {
                Ok(b) => out.push_str(&format!(
                    "{m}\t{}\t{}\t{}\t{}\n",
                    config_label(b.d, b.l),
                    b.d,
                    b.l,
                    b.mean
                )),
                Err(_) => out.push_str(&format!("{m}\tNA\tNA\tNA\tNA\n")),
            }
        }
        out
    }

    /// Writes `<metric>/matrix.tsv`, `<metric>/matrix_full.tsv`,
    /// `rankings/D<d>L<l>.tsv`, `best.tsv` and `failures.tsv` under `dir`.
    pub fn write(&self, dir: &Path, exclude: &[&str]) -> Result<(), SweepError> {
        for &m in &self.config.metrics {
            write_file(&dir.join(m.name()).join("matrix.tsv"), &self.matrix_tsv(m))?;
            write_file(&dir.join(m.name()).join("matrix_full.tsv"), &self.matrix_full_tsv(m))?;
        }
        let mut failures = String::from("config\terror\n");
        for r in &self.results {
            match &r.outcome {
                Ok(o) => write_file(
                    &dir.join("rankings").join(format!("{}.tsv", r.label())),
                    &o.ranking.to_tsv(),
                )?,
                Err(e) => failures.push_str(&format!("{}\t{}\n", r.label(), e.replace(['\t', '\n'], " "))),
            }
        }
        write_file(&dir.join("failures.tsv"), &failures)?;
        write_file(&dir.join("best.tsv"), &self.best_tsv(exclude))
    }
}

/// One cell of a similarity matrix; `value` is `None` when the pair shares no
/// words or a metric is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCell {
    pub row: usize,
    pub col: usize,
    pub value: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub metric: Metric,
    pub labels: Vec<String>,
    pub cells: Vec<MatrixCell>,
}

/// Pairwise comparisons between methods. Symmetric metrics fill the strict
/// lower triangle; NDCG fills the full matrix with references as rows and
/// candidates as columns.
pub fn similarity_matrix(
    methods: &[(String, Method)],
    metric: Metric,
    opts: CompareOptions,
) -> Result<SimilarityMatrix, SweepError> {
    if methods.len() < 2 {
        return Err(SweepError::Config("need at least two rankings".into()));
    }
    let n = methods.len();
    let pairs: Vec<(usize, usize)> = if metric.is_symmetric() {
        (0..n).flat_map(|r| (0..r).map(move |c| (r, c))).collect()
    } else {
        (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect()
    };
    let cells = pairs
        .par_iter()
        .map(|&(row, col)| {
            let (tl, t) = &methods[row];
            let (cl, c) = &methods[col];
            let rep = compare_methods(cl, c, tl, t, opts).ok();
            MatrixCell {
                row,
                col,
                value: rep.as_ref().map(|r| r.value(metric)),
                p_value: rep.as_ref().and_then(|r| r.p_value(metric)),
            }
        })
        .collect();
    Ok(SimilarityMatrix {
        metric,
        labels: methods.iter().map(|(l, _)| l.clone()).collect(),
        cells,
    })
}

impl SimilarityMatrix {
    pub fn get(&self, row: usize, col: usize) -> Option<&MatrixCell> {
        self.cells.iter().find(|c| c.row == row && c.col == col)
    }

    /// Square percent table, blank where no cell is defined.
    pub fn to_tsv(&self) -> String {
        let m = self.metric;
        let mut out = String::from("reference\\candidate");
        for l in &self.labels {
            out.push('\t');
            out.push_str(l);
            if m.has_p_value() {
                out.push_str(&format!("\t{l}_sig"));
            }
        }
        out.push('\n');
        for (r, rl) in self.labels.iter().enumerate() {
            out.push_str(rl);
            for c in 0..self.labels.len() {
                let cell = self.get(r, c);
                out.push('\t');
                match cell {
                    Some(MatrixCell { value: Some(v), .. }) => out.push_str(&fmt_percent(m, *v)),
                    Some(_) => out.push_str("NA"),
                    None => {}
                }
                if m.has_p_value() {
                    out.push('\t');
                    if let Some(p) = cell.and_then(|c| c.p_value) {
                        out.push_str(significance_marker(p));
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_full_tsv(&self) -> String {
        let mut out = String::from("reference\tcandidate\tvalue\tp_value\n");
        for c in &self.cells {
            let v = c.value.map_or("NA".into(), |v| v.to_string());
            let p = c.p_value.map_or("NA".into(), |p| p.to_string());
            out.push_str(&format!("{}\t{}\t{v}\t{p}\n", self.labels[c.row], self.labels[c.col]));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), SweepError> {
        let sub = dir.join(self.metric.name());
        write_file(&sub.join("matrix.tsv"), &self.to_tsv())?;
        write_file(&sub.join("matrix_full.tsv"), &self.to_full_tsv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{synth_clusters, ClusterSpec};

    fn rk(pairs: &[(&str, f64)]) -> Ranking {
        build_ranking(pairs.iter().map(|(w, s)| (w.to_string(), *s)), TieBreak::Lexicographic).unwrap()
    }

    fn synthetic(words: usize) -> (Vec<VectorSet>, Vec<(String, Method)>) {
        let mut sets = Vec::new();
        let mut truth = Vec::new();
        for i in 0..words {
            let k = 1 + i % 4;
            let w = format!("w{i:02}");
            let spec = ClusterSpec { k, per_cluster: 8, dim: 4, spread: 0.2, separation: 2.0, seed: i as u64 };
            sets.push(synth_clusters(&w, spec).unwrap());
            truth.push((w, k as f64));
        }
        let truth = build_ranking(truth, TieBreak::Lexicographic).unwrap();
        (sets, vec![("clusters".to_string(), Method::Fixed(truth))])
    }

    #[test]
    fn one_configuration() {
        let (sets, truths) = synthetic(6);
        let cfg = SweepConfig { d_values: vec![2], l_values: vec![3], random_runs: 0, ..Default::default() };
        let res = run_sweep(&sets, &truths, &cfg).unwrap();
        assert_eq!(res.results.len(), 1);
        let out = res.results[0].outcome.as_ref().unwrap();
        assert_eq!(out.ranking.len(), 6);
        assert!(out.comparisons[0].is_some());
    }

    #[test]
    fn failed_configuration_is_recorded() {
        let (sets, truths) = synthetic(4);
        let cfg = SweepConfig { d_values: vec![2, 9], l_values: vec![2], ..Default::default() };
        let res = run_sweep(&sets, &truths, &cfg).unwrap();
        assert!(res.results[0].outcome.is_ok());
        assert!(res.results[1].outcome.is_err());
    }

    #[test]
    fn default_grid_has_342_cells() {
        assert_eq!(SweepConfig::default().configurations().len(), 342);
    }

    fn fake_result(cells: &[((usize, u32), &[f64])]) -> SweepResult {
        let labels = vec!["a".to_string(), "b".to_string(), RANDOM_LABEL.to_string()];
        let results = cells
            .iter()
            .map(|&((d, l), vals)| {
                let comparisons = vals
                    .iter()
                    .map(|&v| {
                        Some(ComparisonReport {
                            candidate: config_label(d, l),
                            truth: String::new(),
                            n: 10,
                            cosine: v,
                            spearman: Correlation { coef: v, p_value: 0.5 },
                            kendall: Correlation { coef: v, p_value: 0.5 },
                            p_at_k: v,
                            k: 1,
                            ndcg: v,
                            rbo: v,
                            rbo_p: 0.98,
                        })
                    })
                    .collect();
                ConfigResult {
                    d,
                    l,
                    outcome: Ok(ConfigOutcome { ranking: rk(&[("x", 1.0)]), comparisons }),
                }
            })
            .collect();
        SweepResult { config: SweepConfig::default(), truth_labels: labels, results }
    }

    #[test]
    fn best_config_rules() {
        let single = fake_result(&[((3, 4), &[0.1, 0.2, 0.3])]);
        let b = best_config(&single, Metric::Cosine, &default_exclusions()).unwrap();
        assert_eq!((b.d, b.l), (3, 4));

        // config (4,2) dominates everywhere except the excluded random column
        let dom = fake_result(&[((2, 2), &[0.1, 0.1, 0.9]), ((4, 2), &[0.5, 0.6, 0.0])]);
        let b = best_config(&dom, Metric::Kendall, &default_exclusions()).unwrap();
        assert_eq!((b.d, b.l), (4, 2));

        let tie = fake_result(&[((3, 5), &[0.4, 0.2, 0.0]), ((3, 4), &[0.2, 0.4, 0.0]), ((5, 2), &[0.3, 0.3, 0.0])]);
        let b = best_config(&tie, Metric::Rbo, &default_exclusions()).unwrap();
        assert_eq!((b.d, b.l), (3, 4));
    }

    #[test]
    fn best_config_order_invariant() {
        let a = fake_result(&[((2, 3), &[0.3, 0.1, 0.0]), ((3, 2), &[0.2, 0.2, 0.0]), ((2, 5), &[0.1, 0.3, 0.0])]);
        let mut b = a.clone();
        b.results.reverse();
        let ba = best_config(&a, Metric::Ndcg, &[]).unwrap();
        let bb = best_config(&b, Metric::Ndcg, &[]).unwrap();
        assert_eq!((ba.d, ba.l), (bb.d, bb.l));
    }

    #[test]
    fn similarity_matrix_shapes() {
        let methods: Vec<(String, Method)> = (0..8)
            .map(|i| {
                let r = rk(&[("a", 1.0 + i as f64), ("b", 2.0), ("c", 3.0 - 0.1 * i as f64), ("d", 0.5)]);
                (format!("m{i}"), Method::Fixed(r))
            })
            .collect();
        let cos = similarity_matrix(&methods, Metric::Cosine, CompareOptions::default()).unwrap();
        assert_eq!(cos.cells.len(), 28);
        let nd = similarity_matrix(&methods, Metric::Ndcg, CompareOptions::default()).unwrap();
        assert_eq!(nd.cells.len(), 64);
        for i in 0..8 {
            assert_eq!(nd.get(i, i).unwrap().value, Some(1.0));
        }

        let same = rk(&[("a", 3.0), ("b", 2.0), ("c", 1.0)]);
        let pair = vec![("x".into(), Method::Fixed(same.clone())), ("y".into(), Method::Fixed(same))];
        let m = similarity_matrix(&pair, Metric::Cosine, CompareOptions::default()).unwrap();
        assert!(m.to_tsv().contains("100.00"));
    }

    #[test]
    fn disjoint_pair_cell_absent() {
        let pair = vec![
            ("x".to_string(), Method::Fixed(rk(&[("a", 1.0), ("b", 2.0)]))),
            ("y".to_string(), Method::Fixed(rk(&[("c", 1.0), ("d", 2.0)]))),
        ];
        let m = similarity_matrix(&pair, Metric::Spearman, CompareOptions::default()).unwrap();
        assert_eq!(m.get(1, 0).unwrap().value, None);
        assert!(m.to_tsv().contains("NA"));
    }

    #[test]
    fn random_method_averages() {
        let words: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
        let rand = Method::random(&words, 1, 5).unwrap();
        let fixed = Method::Fixed(build_ranking(words.iter().enumerate().map(|(i, w)| (w.clone(), i as f64)), TieBreak::Lexicographic).unwrap());
        let avg = compare_methods("r", &rand, "f", &fixed, CompareOptions::default()).unwrap();
        let Method::Random(runs) = &rand else { unreachable!() };
        let manual: f64 = runs
            .iter()
            .map(|r| compare("r", r, "f", fixed.runs().first().unwrap(), CompareOptions::default()).unwrap().kendall.coef)
            .sum::<f64>()
            / 5.0;
        assert!((avg.kendall.coef - manual).abs() < 1e-15);
    }
}
