//! Ranking comparison metrics: cosine, Spearman's rho, Kendall's tau-b,
//! p@k, NDCG and rank-biased overlap, with asymptotic p-values for the two
//! rank correlations.

use std::collections::HashSet;
use std::f64::consts::{LN_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use statrs::function::{beta::beta_reg, erf::erfc};
use thiserror::Error;

use crate::rank::{intersect, normalize_scores, RankError, Ranking};

pub const DEFAULT_RBO_P: f64 = 0.98;
pub const DEFAULT_TOP_FRACTION: f64 = 0.10;
/// `*` in reports.
pub const SIGNIFICANT: f64 = 0.01;
/// `***` in reports.
pub const HIGHLY_SIGNIFICANT: f64 = 0.0001;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("score vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} items, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("non-finite score")]
    NonFinite,
    #[error("constant input has no rank variance")]
    Constant,
    #[error("ideal DCG is zero (all truth scores are zero)")]
    ZeroIdcg,
    #[error("truth score {0} outside [0, 100]")]
    TruthOutOfRange(f64),
    #[error("parameter {name} = {value} outside {range}")]
    BadParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(transparent)]
    Rank(#[from] RankError),
}

fn check_pair(a: &[f64], b: &[f64], needed: usize) -> Result<(), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < needed {
        return Err(MetricError::TooShort {
            needed,
            got: a.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    Ok(())
}

/// `a.b / (|a| |b|)`.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    check_pair(a, b, 1)?;
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(MetricError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// A correlation coefficient with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub coef: f64,
    pub p_value: f64,
}

/// 1-based ranks, tied values sharing the mean of their positions.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(MetricError::Constant);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a Spearman coefficient from the t statistic with
/// `n - 2` degrees of freedom. Uses `P(|T| >= t) = I_{1 - rho^2}(df/2, 1/2)`.
pub fn spearman_p_value(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 || n <= 2 {
        return if rho.abs() >= 1.0 { 0.0 } else { 1.0 };
    }
    let df = (n - 2) as f64;
    beta_reg(df / 2.0, 0.5, 1.0 - rho * rho).clamp(0.0, 1.0)
}

/// Pearson correlation of mid-ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<Correlation, MetricError> {
    check_pair(a, b, 2)?;
    let rho = pearson(&midranks(a), &midranks(b))?;
    Ok(Correlation {
        coef: rho,
        p_value: spearman_p_value(rho, a.len()),
    })
}

/// Pair counts behind tau-b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// `concordant - discordant`.
    pub s: i64,
    /// Pairs not tied in `a`.
    pub untied_a: u64,
    /// Pairs not tied in `b`.
    pub untied_b: u64,
}

fn tie_groups(sorted: impl Iterator<Item = f64>) -> Vec<u64> {
    let mut groups = Vec::new();
    let mut prev: Option<f64> = None;
    let mut run = 0u64;
    for v in sorted {
        if prev == Some(v) {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
            prev = Some(v);
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

fn pairs_in(groups: &[u64]) -> u64 {
    groups.iter().map(|t| t * (t - 1) / 2).sum()
}

/// Strict inversions of `v`, sorting it in place.
fn merge_count(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], buf) + merge_count(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    swaps
}

/// Knight's O(n log n) pair counting, plus the tie groups of each input.
fn count_pairs(a: &[f64], b: &[f64]) -> (PairCounts, Vec<u64>, Vec<u64>) {
    let n = a.len() as u64;
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]).then(b[i].total_cmp(&b[j])));
    let ties_a = tie_groups(idx.iter().map(|&i| a[i]));
    // pairs tied in both
    let mut joint = 0u64;
    let mut run = 1u64;
    for w in idx.windows(2) {
        if a[w[0]] == a[w[1]] && b[w[0]] == b[w[1]] {
            run += 1;
        } else {
            joint += run * (run - 1) / 2;
            run = 1;
        }
    }
    joint += run * (run - 1) / 2;

    let mut ys: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
    let mut scratch = Vec::with_capacity(ys.len());
    let swaps = merge_count(&mut ys, &mut scratch);
    let ties_b = tie_groups(ys.iter().copied());

    let total = n * (n - 1) / 2;
    let (ta, tb) = (pairs_in(&ties_a), pairs_in(&ties_b));
    let s = total as i64 - ta as i64 - tb as i64 + joint as i64 - 2 * swaps as i64;
    (
        PairCounts {
            s,
            untied_a: total - ta,
            untied_b: total - tb,
        },
        ties_a,
        ties_b,
    )
}

/// Variance of `S = C - D` under independence, tie-corrected.
pub fn kendall_s_variance(n: usize, ties_a: &[u64], ties_b: &[u64]) -> f64 {
    let n = n as f64;
    let f = |g: &[u64], w: fn(f64) -> f64| g.iter().map(|&t| w(t as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = f(ties_a, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = f(ties_b, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let t1 = f(ties_a, |t| t * (t - 1.0)) * f(ties_b, |t| t * (t - 1.0)) / (2.0 * n * (n - 1.0));
    let t2_num = f(ties_a, |t| t * (t - 1.0) * (t - 2.0)) * f(ties_b, |t| t * (t - 1.0) * (t - 2.0));
    let t2 = if t2_num == 0.0 {
        0.0
    } else {
        t2_num / (9.0 * n * (n - 1.0) * (n - 2.0))
    };
    (v0 - vt - vu) / 18.0 + t1 + t2
}

/// Tau-b with a normal-approximation two-sided p-value.
pub fn kendall(a: &[f64], b: &[f64]) -> Result<Correlation, MetricError> {
    check_pair(a, b, 2)?;
    let (pc, ties_a, ties_b) = count_pairs(a, b);
    if pc.untied_a == 0 || pc.untied_b == 0 {
        return Err(MetricError::Constant);
    }
    let tau = (pc.s as f64 / ((pc.untied_a as f64) * (pc.untied_b as f64)).sqrt()).clamp(-1.0, 1.0);
    let var = kendall_s_variance(a.len(), &ties_a, &ties_b);
    let p_value = if var > 0.0 {
        let z = pc.s as f64 / var.sqrt();
        erfc(z.abs() / SQRT_2).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(Correlation { coef: tau, p_value })
}

fn same_word_sets(a: &Ranking, b: &Ranking) -> Result<(), MetricError> {
    let wa: HashSet<&str> = a.words().collect();
    if a.len() != b.len() || !b.words().all(|w| wa.contains(w)) {
        return Err(RankError::WordSetMismatch.into());
    }
    if a.is_empty() {
        return Err(MetricError::TooShort { needed: 1, got: 0 });
    }
    Ok(())
}

/// `k = max(1, floor(fraction * n))`.
pub fn top_k_size(fraction: f64, n: usize) -> usize {
    // the epsilon keeps products like 0.1 * 30 from flooring one short
    ((fraction * n as f64 + 1e-9).floor() as usize).clamp(1, n.max(1))
}

/// Percentage of the candidate's top `k` that is in the truth's top `k`.
pub fn p_at_k(candidate: &Ranking, truth: &Ranking, fraction: f64) -> Result<f64, MetricError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(MetricError::BadParameter {
            name: "fraction",
            value: fraction,
            range: "(0, 1]",
        });
    }
    same_word_sets(candidate, truth)?;
    let k = top_k_size(fraction, candidate.len());
    let top: HashSet<&str> = truth.words().take(k).collect();
    let hits = candidate.words().take(k).filter(|w| top.contains(w)).count();
    Ok(100.0 * hits as f64 / k as f64)
}

fn gain(score: f64) -> f64 {
    (score * LN_2).exp_m1()
}

fn dcg(scores: impl Iterator<Item = f64>) -> f64 {
    scores
        .enumerate()
        .map(|(i, s)| gain(s) / ((i + 2) as f64).log2())
        .sum()
}

/// DCG of the candidate order under truth gains, over the truth's ideal DCG.
pub fn ndcg(candidate: &Ranking, truth: &Ranking) -> Result<f64, MetricError> {
    same_word_sets(candidate, truth)?;
    if let Some(bad) = truth.scores().find(|s| !(0.0..=100.0).contains(s)) {
        return Err(MetricError::TruthOutOfRange(bad));
    }
    let truth_scores = truth.score_map();
    let mut ideal: Vec<f64> = truth.scores().collect();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(ideal.into_iter());
    if idcg == 0.0 {
        return Err(MetricError::ZeroIdcg);
    }
    let got = dcg(candidate.words().map(|w| truth_scores[w]));
    Ok((got / idcg).clamp(0.0, 1.0))
}

fn check_persistence(p: f64) -> Result<(), MetricError> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(MetricError::BadParameter {
            name: "p",
            value: p,
            range: "[0, 1)",
        })
    }
}

/// `(1 - p) * sum_{d=1..n} p^(d-1) * A_d` over the two orders, where `A_d` is
/// the overlap fraction of the depth-`d` prefixes. `p = 0` keeps only depth 1.
pub fn rbo(candidate: &Ranking, truth: &Ranking, p: f64) -> Result<f64, MetricError> {
    check_persistence(p)?;
    same_word_sets(candidate, truth)?;
    let mut seen_a = HashSet::new();
    let mut seen_b = HashSet::new();
    let mut overlap = 0usize;
    let mut weight = 1.0;
    let mut sum = 0.0;
    for (d, (a, b)) in candidate.words().zip(truth.words()).enumerate() {
        if a == b {
            overlap += 1;
        } else {
            overlap += usize::from(seen_b.contains(a)) + usize::from(seen_a.contains(b));
        }
        seen_a.insert(a);
        seen_b.insert(b);
        sum += weight * overlap as f64 / (d + 1) as f64;
        weight *= p;
    }
    Ok(((1.0 - p) * sum).clamp(0.0, 1.0))
}

/// Share of the total RBO weight carried by ranks `1..=d`:
/// `1 - p^(d-1) + d (1-p)/p (ln(1/(1-p)) - sum_{i<d} p^i / i)`.
pub fn rbo_prefix_weight(p: f64, d: usize) -> Result<f64, MetricError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(MetricError::BadParameter {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    if d == 0 {
        return Err(MetricError::TooShort { needed: 1, got: 0 });
    }
    let tail: f64 = (1..d).map(|i| p.powi(i as i32) / i as f64).sum();
    let w = 1.0 - p.powi(d as i32 - 1) + d as f64 * (1.0 - p) / p * ((1.0 / (1.0 - p)).ln() - tail);
    Ok(w.clamp(0.0, 1.0))
}

/// `***` at `p <= 0.0001`, `*` at `p <= 0.01`, else empty.
pub fn significance_marker(p: f64) -> &'static str {
    if p <= HIGHLY_SIGNIFICANT {
        "***"
    } else if p <= SIGNIFICANT {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Cosine,
    Spearman,
    Kendall,
    PAtK,
    Ndcg,
    Rbo,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Cosine,
        Metric::Spearman,
        Metric::Kendall,
        Metric::PAtK,
        Metric::Ndcg,
        Metric::Rbo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Spearman => "spearman",
            Metric::Kendall => "kendall",
            Metric::PAtK => "p_at_k",
            Metric::Ndcg => "ndcg",
            Metric::Rbo => "rbo",
        }
    }

    pub fn is_symmetric(self) -> bool {
        self != Metric::Ndcg
    }

    pub fn has_p_value(self) -> bool {
        matches!(self, Metric::Spearman | Metric::Kendall)
    }

    /// Factor turning the raw value into a percentage.
    pub fn percent_scale(self) -> f64 {
        if self == Metric::PAtK {
            1.0
        } else {
            100.0
        }
    }

    /// Parses a comma list of metric names, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>, String> {
        if s == "all" {
            return Ok(Metric::ALL.to_vec());
        }
        let mut out: Vec<Metric> = s.split(',').map(str::parse).collect::<Result<_, _>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s || (s == "p@k" && *m == Metric::PAtK))
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    pub rbo_p: f64,
    pub top_fraction: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            rbo_p: DEFAULT_RBO_P,
            top_fraction: DEFAULT_TOP_FRACTION,
        }
    }
}

/// All six metrics for one (candidate, truth) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub candidate: String,
    pub truth: String,
    pub n: usize,
    pub cosine: f64,
    pub spearman: Correlation,
    pub kendall: Correlation,
    pub p_at_k: f64,
    pub k: usize,
    pub ndcg: f64,
    pub rbo: f64,
    pub rbo_p: f64,
}

impl ComparisonReport {
    pub fn value(&self, m: Metric) -> f64 {
        match m {
            Metric::Cosine => self.cosine,
            Metric::Spearman => self.spearman.coef,
            Metric::Kendall => self.kendall.coef,
            Metric::PAtK => self.p_at_k,
            Metric::Ndcg => self.ndcg,
            Metric::Rbo => self.rbo,
        }
    }

    pub fn p_value(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Spearman => Some(self.spearman.p_value),
            Metric::Kendall => Some(self.kendall.p_value),
            _ => None,
        }
    }

    /// `key<TAB>value` lines, full precision.
    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "candidate\t{}\ntruth\t{}\nn\t{}\nnormalization\tminmax-0-100\n",
            self.candidate, self.truth, self.n
        );
        out.push_str(&format!("cosine\t{}\n", self.cosine));
        out.push_str(&format!("spearman\t{}\nspearman_p\t{}\n", self.spearman.coef, self.spearman.p_value));
        out.push_str(&format!("kendall\t{}\nkendall_p\t{}\n", self.kendall.coef, self.kendall.p_value));
        out.push_str(&format!("p_at_k\t{}\nk\t{}\n", self.p_at_k, self.k));
        out.push_str(&format!("ndcg\t{}\n", self.ndcg));
        out.push_str(&format!("rbo\t{}\nrbo_p\t{}\n", self.rbo, self.rbo_p));
        out
    }
}

/// Normalizes both rankings to `[0, 100]`, restricts them to their common
/// words and computes every metric. The candidate's order drives p@k, NDCG
/// and RBO; score vectors are aligned on the truth's order.
pub fn compare(
    candidate_name: &str,
    candidate: &Ranking,
    truth_name: &str,
    truth: &Ranking,
    opts: CompareOptions,
) -> Result<ComparisonReport, MetricError> {
    let (c, t) = intersect(&normalize_scores(candidate), &normalize_scores(truth))?;
    let words: Vec<&str> = t.words().collect();
    let cs = c.aligned_scores(&words)?;
    let ts = t.aligned_scores(&words)?;
    Ok(ComparisonReport {
        candidate: candidate_name.to_string(),
        truth: truth_name.to_string(),
        n: words.len(),
        cosine: cosine(&cs, &ts)?,
        spearman: spearman(&cs, &ts)?,
        kendall: kendall(&cs, &ts)?,
        p_at_k: p_at_k(&c, &t, opts.top_fraction)?,
        k: top_k_size(opts.top_fraction, words.len()),
        ndcg: ndcg(&c, &t)?,
        rbo: rbo(&c, &t, opts.rbo_p)?,
        rbo_p: opts.rbo_p,
    })
}
