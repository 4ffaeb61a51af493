//! Reference implementations used as oracles. They follow the textbook
//! definitions and share no code with the library.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Average rank (1-based) of each value, by direct counting.
pub fn naive_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&u| u < v).count() as f64;
            let equal = x.iter().filter(|&&u| u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn naive_spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&naive_ranks(a), &naive_ranks(b))
}

/// Kendall tau-b over all O(n^2) pairs; also returns S and the tie-group sizes.
pub struct NaiveKendall {
    pub tau: f64,
    pub s: f64,
    pub ties_a: Vec<usize>,
    pub ties_b: Vec<usize>,
}

fn tie_groups(x: &[f64]) -> Vec<usize> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if j - i > 1 {
            out.push(j - i);
        }
        i = j;
    }
    out
}

pub fn naive_kendall(a: &[f64], b: &[f64]) -> NaiveKendall {
    let n = a.len();
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == 0.0 && db == 0.0 {
                continue;
            } else if da == 0.0 {
                tie_a += 1.0;
            } else if db == 0.0 {
                tie_b += 1.0;
            } else if (da > 0.0) == (db > 0.0) {
                conc += 1.0;
            } else {
                disc += 1.0;
            }
        }
    }
    let s = conc - disc;
    let tau = s / ((conc + disc + tie_a) * (conc + disc + tie_b)).sqrt();
    NaiveKendall { tau, s, ties_a: tie_groups(a), ties_b: tie_groups(b) }
}

/// Variance of S under independence with ties in both rankings.
pub fn naive_s_variance(n: usize, ta: &[usize], tb: &[usize]) -> f64 {
    let n = n as f64;
    let f = |t: &[usize], g: &dyn Fn(f64) -> f64| t.iter().map(|&x| g(x as f64)).sum::<f64>();
    let v0 = n * (n - 1.0) * (2.0 * n + 5.0);
    let vt = f(ta, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = f(tb, &|u| u * (u - 1.0) * (2.0 * u + 5.0));
    let t1 = f(ta, &|t| t * (t - 1.0)) * f(tb, &|u| u * (u - 1.0)) / (2.0 * n * (n - 1.0));
    let t2 = f(ta, &|t| t * (t - 1.0) * (t - 2.0)) * f(tb, &|u| u * (u - 1.0) * (u - 2.0))
        / (9.0 * n * (n - 1.0) * (n - 2.0));
    (v0 - vt - vu) / 18.0 + t1 + t2
}

/// Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Modified Lentz continued fraction for the incomplete beta function.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of Spearman's rho through the t distribution with
/// `n - 2` degrees of freedom.
pub fn oracle_spearman_p(rho: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t2 = rho * rho * df / (1.0 - rho * rho);
    inc_beta(df / 2.0, 0.5, df / (df + t2))
}

/// Complementary error function via the regularized upper incomplete gamma
/// `Q(1/2, x^2)`: series below `a + 1`, continued fraction above.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    let a = 0.5;
    let z = x * x;
    if z == 0.0 {
        return 1.0;
    }
    let lg = ln_gamma(a);
    if z < a + 1.0 {
        let mut sum = 1.0 / a;
        let mut term = sum;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= z / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        1.0 - sum * (-z + a * z.ln() - lg).exp()
    } else {
        const TINY: f64 = 1e-300;
        let mut b = z + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-z + a * z.ln() - lg).exp() * h
    }
}

pub fn oracle_kendall_p(a: &[f64], b: &[f64]) -> f64 {
    let k = naive_kendall(a, b);
    let var = naive_s_variance(a.len(), &k.ties_a, &k.ties_b);
    let z = k.s / var.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// RBO weight share of the first `d` ranks by summing the per-depth weights
/// `(1-p)/p * p^i / i * sum_{j<=min(i,d)} ...` directly, truncated far out.
pub fn rbo_prefix_weight_sum(p: f64, d: usize) -> f64 {
    // weight of rank r in infinite RBO: (1-p)/p * sum_{i>=r} p^i / i
    let depth = 200_000;
    let mut tail = vec![0.0; depth + 2];
    for i in (1..=depth).rev() {
        tail[i] = tail[i + 1] + p.powi(i as i32) / i as f64;
    }
    (1..=d).map(|r| (1.0 - p) / p * tail[r]).sum()
}

/// RBO for two orders of the same items: `(1-p) sum_d p^(d-1) |A_d ∩ B_d| / d`.
pub fn naive_rbo(a: &[&str], b: &[&str], p: f64) -> f64 {
    let mut sum = 0.0;
    for d in 1..=a.len() {
        let sa: std::collections::HashSet<_> = a[..d].iter().collect();
        let overlap = b[..d].iter().filter(|w| sa.contains(w)).count();
        sum += p.powi(d as i32 - 1) * overlap as f64 / d as f64;
    }
    (1.0 - p) * sum
}

/// DCG with gain `2^s - 1` and discount `log2(rank + 1)`.
pub fn naive_ndcg(order: &[f64], ideal_scores: &[f64]) -> f64 {
    let dcg = |s: &[f64]| -> f64 {
        s.iter()
            .enumerate()
            .map(|(i, &v)| (2f64.powf(v) - 1.0) / ((i + 2) as f64).log2())
            .sum()
    };
    let mut ideal = ideal_scores.to_vec();
    ideal.sort_by(|a, b| b.total_cmp(a));
    dcg(order) / dcg(&ideal)
}

/// Min-max rescaling to [0, 100].
pub fn minmax(x: &[f64]) -> Vec<f64> {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    x.iter().map(|v| if hi > lo { 100.0 * (v - lo) / (hi - lo) } else { 100.0 }).collect()
}

/// Coverage per level by enumerating occupied cells with a hash set.
pub fn naive_coverage(points: &[Vec<f64>], bounds: &[(f64, f64)], levels: u32) -> Vec<f64> {
    (1..=levels)
        .map(|l| {
            let side = (1u64 << l) as f64;
            let cells: std::collections::HashSet<Vec<u64>> = points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(bounds)
                        .map(|(v, (lo, hi))| (((v - lo) / (hi - lo) * side).floor() as u64).min((1u64 << l) - 1))
                        .collect()
                })
                .collect();
            cells.len() as f64 / side.powi(bounds.len() as i32)
        })
        .collect()
}

pub fn naive_score(coverage: &[f64]) -> f64 {
    let l = coverage.len() as i32;
    coverage.iter().enumerate().map(|(i, c)| c / 2f64.powi(l - (i as i32 + 1))).sum()
}
