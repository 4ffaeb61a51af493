mod common;

use std::collections::HashSet;

use polysemy::corpus::{default_stopwords, SentenceStore};
use polysemy::grid::{compute_bounds, max_score, Bounds, GridConfig};
use polysemy::metrics::{self, kendall, spearman, CompareOptions, Metric};
use polysemy::rank::{build_ranking, intersect, normalize_scores, Ranking, TieBreak};
use polysemy::reduce::fit_pca;
use polysemy::sampler::{bin_keywords, sample_diverse};
use polysemy::vectors::{decode_pvs1, encode_pvs1, Points, VectorSet};
use proptest::prelude::*;

use common::*;

fn points_strategy(dim: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0f64..100.0, dim), 1..max_n)
}

fn scores_strategy(max_n: usize, tied: bool) -> impl Strategy<Value = Vec<(f64, f64)>> {
    let v = if tied {
        (0u8..6).prop_map(f64::from).boxed()
    } else {
        (0.0f64..1e3).boxed()
    };
    prop::collection::vec((v.clone(), v), 3..max_n)
}

fn ranking(scores: &[f64]) -> Ranking {
    build_ranking(
        scores.iter().enumerate().map(|(i, &s)| (format!("w{i:03}"), s)),
        TieBreak::Lexicographic,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coverage_matches_cell_enumeration(rows in points_strategy(3, 60), levels in 1u32..7) {
        let bounds = compute_bounds(rows.iter().map(|r| r.as_slice())).unwrap();
        let grid = GridConfig::new(levels, bounds.clone()).unwrap();
        let got = grid.coverage(&Points::from_rows(&rows).unwrap()).unwrap();
        let want = naive_coverage(&rows, bounds.pairs(), levels);
        prop_assert_eq!(got.per_level(), &want[..]);
        prop_assert!((grid.score(&Points::from_rows(&rows).unwrap()).unwrap() - naive_score(&want)).abs() < 1e-12);
    }

    #[test]
    fn score_in_range(rows in points_strategy(2, 80), levels in 1u32..12) {
        let pts = Points::from_rows(&rows).unwrap();
        let grid = GridConfig::new(levels, compute_bounds(pts.rows()).unwrap()).unwrap();
        let s = grid.score(&pts).unwrap();
        prop_assert!(s > 0.0 && s <= max_score(levels) + 1e-15);
    }

    #[test]
    fn occupancy_nests_across_levels(rows in points_strategy(2, 80), levels in 2u32..10) {
        let pts = Points::from_rows(&rows).unwrap();
        let grid = GridConfig::new(levels, compute_bounds(pts.rows()).unwrap()).unwrap();
        let occ = grid.coverage(&pts).unwrap().occupied().to_vec();
        for w in occ.windows(2) {
            prop_assert!(w[0] <= w[1] && w[1] <= 4 * w[0]);
        }
    }

    #[test]
    fn adding_points_never_lowers_score(rows in points_strategy(3, 40), extra in points_strategy(3, 10), levels in 1u32..8) {
        let grid = GridConfig::new(levels, Bounds::uniform(3, -100.0, 100.0).unwrap()).unwrap();
        let before = grid.score(&Points::from_rows(&rows).unwrap()).unwrap();
        let mut all = rows.clone();
        all.extend(extra);
        let after = grid.score(&Points::from_rows(&all).unwrap()).unwrap();
        prop_assert!(after >= before);
    }

    #[test]
    fn row_order_is_irrelevant(rows in points_strategy(3, 40).prop_shuffle(), levels in 1u32..8) {
        let grid = GridConfig::new(levels, Bounds::uniform(3, -100.0, 100.0).unwrap()).unwrap();
        let mut rev = rows.clone();
        rev.reverse();
        prop_assert_eq!(
            grid.score(&Points::from_rows(&rows).unwrap()).unwrap(),
            grid.score(&Points::from_rows(&rev).unwrap()).unwrap()
        );
    }

    #[test]
    fn axis_affine_maps_preserve_score(
        rows in points_strategy(2, 50),
        scale in prop::collection::vec(prop_oneof![0.01f64..100.0, -100.0f64..-0.01], 2),
        shift in prop::collection::vec(-1e3f64..1e3, 2),
        levels in 1u32..8,
    ) {
        let score = |rows: &[Vec<f64>]| {
            let pts = Points::from_rows(rows).unwrap();
            GridConfig::new(levels, compute_bounds(pts.rows()).unwrap()).unwrap().score(&pts).unwrap()
        };
        let mapped: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(i, v)| v * scale[i] + shift[i]).collect())
            .collect();
        prop_assert_eq!(score(&rows), score(&mapped));
    }

    #[test]
    fn correlations_match_definitions(pairs in scores_strategy(120, false)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let rho = spearman(&a, &b).unwrap();
        prop_assert!((rho.coef - naive_spearman(&a, &b)).abs() < 1e-12);
        prop_assert!((rho.p_value - oracle_spearman_p(rho.coef, a.len())).abs() < 1e-9);
        let tau = kendall(&a, &b).unwrap();
        prop_assert!((tau.coef - naive_kendall(&a, &b).tau).abs() < 1e-12);
        prop_assert!((tau.p_value - oracle_kendall_p(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn correlations_with_ties(pairs in scores_strategy(120, true)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let constant = |x: &[f64]| x.iter().all(|v| *v == x[0]);
        prop_assume!(!constant(&a) && !constant(&b));
        let tau = kendall(&a, &b).unwrap();
        prop_assert!((tau.coef - naive_kendall(&a, &b).tau).abs() < 1e-12);
        prop_assert!((tau.p_value - oracle_kendall_p(&a, &b)).abs() < 1e-9);
        let rho = spearman(&a, &b).unwrap();
        prop_assert!((rho.coef - naive_spearman(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_metrics_are_symmetric(pairs in scores_strategy(60, false)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!((metrics::cosine(&a, &b).unwrap() - metrics::cosine(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!((spearman(&a, &b).unwrap().coef - spearman(&b, &a).unwrap().coef).abs() < 1e-15);
        prop_assert!((kendall(&a, &b).unwrap().coef - kendall(&b, &a).unwrap().coef).abs() < 1e-15);
        let (ra, rb) = (ranking(&a), ranking(&b));
        let p = 0.9;
        prop_assert!((metrics::rbo(&ra, &rb, p).unwrap() - metrics::rbo(&rb, &ra, p).unwrap()).abs() < 1e-15);
        prop_assert_eq!(metrics::p_at_k(&ra, &rb, 0.2).unwrap(), metrics::p_at_k(&rb, &ra, 0.2).unwrap());
    }

    #[test]
    fn rbo_and_ndcg_match_definitions(pairs in scores_strategy(80, false), p in 0.0f64..0.99) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (ra, rb) = (ranking(&a), ranking(&b));
        let wa: Vec<&str> = ra.words().collect();
        let wb: Vec<&str> = rb.words().collect();
        let r = metrics::rbo(&ra, &rb, p).unwrap();
        prop_assert!((r - naive_rbo(&wa, &wb, p)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&r));

        let truth = normalize_scores(&rb);
        let cand = normalize_scores(&ra);
        let tmap = truth.score_map();
        let order: Vec<f64> = cand.words().map(|w| tmap[w]).collect();
        let want = naive_ndcg(&order, &truth.scores().collect::<Vec<_>>());
        let got = metrics::ndcg(&cand, &truth).unwrap();
        prop_assert!((got - want).abs() < 1e-9 * want.max(1.0));
        prop_assert!(got > 0.0 && got <= 1.0);
    }

    #[test]
    fn normalization_bounds_and_idempotence(scores in prop::collection::vec(0.0f64..1e6, 1..50)) {
        let r = ranking(&scores);
        let n = normalize_scores(&r);
        prop_assert!(n.scores().all(|s| (0.0..=100.0).contains(&s)));
        prop_assert_eq!(n.items()[0].1, 100.0);
        let again = normalize_scores(&n);
        prop_assert_eq!(again.items(), n.items());
        let want = minmax(&scores);
        let m = n.score_map();
        for (i, w) in want.iter().enumerate() {
            let key = format!("w{:03}", i);
            prop_assert!((m[key.as_str()] - w).abs() < 1e-9);
        }
    }

    #[test]
    fn intersect_preserves_relative_order(a in prop::collection::vec(0.0f64..1.0, 2..40), keep in prop::collection::vec(any::<bool>(), 40)) {
        let ra = ranking(&a);
        let rb = build_ranking(
            ra.items().iter().enumerate().filter(|(i, _)| keep[*i]).map(|(i, (w, _))| (w.clone(), 100.0 - i as f64)),
            TieBreak::Lexicographic,
        );
        prop_assume!(rb.is_ok());
        let rb = rb.unwrap();
        let (ia, ib) = intersect(&ra, &rb).unwrap();
        let sa: HashSet<&str> = ia.words().collect();
        let sb: HashSet<&str> = ib.words().collect();
        prop_assert_eq!(sa, sb);
        let filtered: Vec<&str> = ra.words().filter(|w| rb.words().any(|x| x == *w)).collect();
        prop_assert_eq!(ia.words().collect::<Vec<_>>(), filtered);
    }

    #[test]
    fn pvs1_round_trip(
        word in "[a-z]{1,12}",
        n in 1usize..20,
        dim in 1usize..8,
        seed in any::<u64>(),
        with_ids in any::<bool>(),
    ) {
        let data: Vec<f32> = (0..n * dim).map(|i| ((seed as f32) * 1e-19 + i as f32).sin()).collect();
        let ids = with_ids.then(|| (0..n).map(|i| format!("s{i}")).collect());
        let set = VectorSet::new(&word, dim, data, ids).unwrap();
        prop_assert_eq!(decode_pvs1(&encode_pvs1(&set)).unwrap(), set);
    }

    #[test]
    fn pca_basis_orthonormal_and_nested(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 5), 6..40), d in 1usize..5) {
        let pts = Points::from_rows(&rows).unwrap();
        let full = fit_pca(&pts, 5).unwrap();
        let part = fit_pca(&pts, d).unwrap();
        prop_assert_eq!(&full.truncate(d).unwrap(), &part);
        let b = full.basis();
        let gram = b.transpose() * b;
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[(i, j)] - want).abs() < 1e-9);
            }
        }
        let v = full.explained_variance();
        prop_assert!(v.windows(2).all(|w| w[0] >= w[1] - 1e-9));
    }

    #[test]
    fn samples_land_in_their_bins(rows in points_strategy(2, 60), level in 1u32..5, count in 2usize..6) {
        let pts = Points::from_rows(&rows).unwrap();
        let grid = GridConfig::new(5, compute_bounds(pts.rows()).unwrap()).unwrap();
        let ids: Vec<String> = (0..rows.len()).map(|i| format!("s{i}")).collect();
        let mut store = SentenceStore::default();
        for (i, id) in ids.iter().enumerate() {
            store.insert(id.clone(), format!("target with token{} and more", i % 3)).unwrap();
        }
        let samples = sample_diverse(&grid, &pts, &ids, &store, level, count, 3).unwrap();
        prop_assert!(!samples.is_empty() && samples.len() <= count);
        let bins: HashSet<_> = samples.iter().map(|s| s.bin.clone()).collect();
        prop_assert_eq!(bins.len(), samples.len());
        for s in &samples {
            for (id, _) in &s.sentences {
                let i = ids.iter().position(|x| x == id).unwrap();
                prop_assert_eq!(&grid.bin_index(pts.row(i), level).unwrap(), &s.bin);
            }
            let stop = default_stopwords();
            let kw = bin_keywords(&grid, &pts, &ids, &store, &s.bin, "target", &stop, 2).unwrap();
            prop_assert!(kw.len() <= 2);
            prop_assert!(kw.iter().all(|(w, _)| w != "target" && !stop.contains(w)));
        }
    }
}

#[test]
fn rbo_prefix_weight_matches_summation() {
    for &p in &[0.5, 0.9, 0.95, 0.98] {
        for &d in &[1usize, 2, 10, 50, 200] {
            let closed = metrics::rbo_prefix_weight(p, d).unwrap();
            let summed = rbo_prefix_weight_sum(p, d);
            assert!((closed - summed).abs() < 1e-10, "p={p} d={d}: {closed} vs {summed}");
        }
    }
}

#[test]
fn oracle_sanity() {
    // textbook values
    assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-14);
    assert!((inc_beta(2.0, 3.0, 0.4) - 0.5248).abs() < 1e-12);
    assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
}

#[test]
fn metric_names_round_trip() {
    for m in Metric::ALL {
        assert_eq!(m.name().parse::<Metric>().unwrap(), m);
    }
    assert_eq!(Metric::parse_list("all").unwrap(), Metric::ALL.to_vec());
    let _ = CompareOptions::default();
}
