mod common;

use std::collections::BTreeMap;

use bippr_core::bench::{sample_pairs, PairMode};
use bippr_core::bippr::{estimate_ppr, PprParams};
use bippr_core::graph::{Graph, NodeId};
use bippr_core::mstp::{estimate_mstp, estimate_truncated_hitting, MstpParams};
use bippr_core::oracle::{exact_first_passage, exact_mstp_all, exact_ppr_from};
use bippr_core::sampling::Source;
use bippr_core::shardsim::{build_shared_walk_vectors, SharingParams};
use bippr_core::ubippr::{estimate_ppr_undirected, natural_delta};
use common::{mean_relative_error, ppr_matrix, random_graph, ALPHA};
use rayon::prelude::*;

/// Whether the sample mean lies within three standard errors of `truth`.
fn within_three_se(samples: &[f64], truth: f64) -> bool {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    (mean - truth).abs() <= 3.0 * se + 1e-12
}

fn cached_ppr<'a>(cache: &'a mut BTreeMap<NodeId, Vec<f64>>, g: &Graph, s: NodeId) -> &'a [f64] {
    cache
        .entry(s)
        .or_insert_with(|| exact_ppr_from(g, s, ALPHA, 1e-13).unwrap().values)
}

#[test]
fn bidirectional_estimate_is_unbiased() {
    let g = random_graph(20, 40, 1, false, true);
    let pi = ppr_matrix(&g, ALPHA);
    let params = PprParams::new(ALPHA, 0.05).with_r_max(0.1);
    for (s, t) in [(0, 7), (3, 3), (12, 5)] {
        let runs: Vec<f64> = (0..10_000u64)
            .into_par_iter()
            .map(|seed| {
                estimate_ppr(&g, &Source::Node(s), t, &params, seed)
                    .unwrap()
                    .value
            })
            .collect();
        assert!(within_three_se(&runs, pi[s][t]), "pair ({s}, {t})");
    }
}

#[test]
fn relative_and_additive_accuracy_at_default_c() {
    let g = random_graph(200, 800, 2, false, false);
    let delta = 4.0 / g.n() as f64;
    let params = PprParams::new(ALPHA, delta);
    let mut cache = BTreeMap::new();
    let mut rows = Vec::new();
    let (mut relative_misses, mut additive_misses, mut small) = (0, 0, 0);
    for mode in [PairMode::Uniform, PairMode::PageRank] {
        for (i, (s, t)) in sample_pairs(&g, mode, 2000, ALPHA, 3)
            .unwrap()
            .into_iter()
            .enumerate()
        {
            let pi = cached_ppr(&mut cache, &g, s)[t];
            let est = estimate_ppr(&g, &Source::Node(s), t, &params, i as u64)
                .unwrap()
                .value;
            rows.push((est, pi, delta));
            if pi >= delta && (est - pi).abs() > params.epsilon * pi {
                relative_misses += 1;
            }
            if pi <= delta {
                small += 1;
                if (est - pi).abs() > 2.0 * std::f64::consts::E * delta {
                    additive_misses += 1;
                }
            }
        }
    }
    let (mre, count) = mean_relative_error(&rows);
    assert!(count > 30, "only {count} significant pairs");
    assert!(mre < 0.10, "mean relative error {mre}");
    assert!(
        (relative_misses as f64) < params.p_fail * count as f64,
        "{relative_misses} of {count}"
    );
    assert!(
        (additive_misses as f64) <= params.p_fail * small as f64,
        "{additive_misses} of {small}"
    );
}

#[test]
fn undirected_estimator_envelope_and_corollary() {
    let g = random_graph(200, 400, 4, true, false);
    let mut cache = BTreeMap::new();
    let (mut envelope_misses, mut total) = (0, 0);
    let (mut corollary_misses, mut significant) = (0, 0);
    for mode in [PairMode::Uniform, PairMode::PageRank] {
        for (i, (s, t)) in sample_pairs(&g, mode, 500, ALPHA, 5)
            .unwrap()
            .into_iter()
            .enumerate()
        {
            let delta = natural_delta(&g, t);
            let params = PprParams::new(ALPHA, delta).strict();
            let pi = cached_ppr(&mut cache, &g, s)[t];
            let est = estimate_ppr_undirected(&g, s, t, &params, i as u64)
                .unwrap()
                .value;
            let err = (est - pi).abs();
            total += 1;
            if err > (params.epsilon * pi).max(2.0 * std::f64::consts::E * delta) {
                envelope_misses += 1;
            }
            if pi >= delta {
                significant += 1;
                if err > params.epsilon * pi {
                    corollary_misses += 1;
                }
            }
        }
    }
    assert!(significant > 50, "only {significant} pairs above d_t/2m");
    assert!(
        envelope_misses as f64 <= 0.1 * total as f64,
        "{envelope_misses} of {total}"
    );
    assert!(
        corollary_misses as f64 <= 0.1 * significant as f64,
        "{corollary_misses} of {significant}"
    );
}

#[test]
fn undirected_estimate_is_unbiased() {
    let g = random_graph(20, 30, 6, true, true);
    let pi = ppr_matrix(&g, ALPHA);
    let params = PprParams::new(ALPHA, 0.05).with_r_max(0.05);
    for (s, t) in [(0, 9), (4, 4), (17, 2)] {
        let runs: Vec<f64> = (0..10_000u64)
            .into_par_iter()
            .map(|seed| {
                estimate_ppr_undirected(&g, s, t, &params, seed)
                    .unwrap()
                    .value
            })
            .collect();
        assert!(within_three_se(&runs, pi[s][t]), "pair ({s}, {t})");
    }
}

#[test]
fn multi_step_estimate_is_unbiased_per_length() {
    let g = random_graph(15, 30, 7, false, true);
    let ell_max = 6;
    let params = MstpParams::new(ell_max, 0.1).with_eps_r(0.1).with_c(1.0);
    for (s, t) in [(0, 4), (9, 9)] {
        let exact = exact_mstp_all(&g, &Source::Node(s), ell_max).unwrap();
        let runs: Vec<Vec<f64>> = (0..5000u64)
            .into_par_iter()
            .map(|seed| {
                estimate_mstp(&g, &Source::Node(s), t, &params, seed)
                    .unwrap()
                    .values
            })
            .collect();
        for ell in 1..=ell_max {
            let column: Vec<f64> = runs.iter().map(|v| v[ell - 1]).collect();
            assert!(
                within_three_se(&column, exact[ell][t]),
                "pair ({s}, {t}) length {ell}"
            );
        }
    }
}

#[test]
fn truncated_hitting_matches_first_passage_oracle() {
    let g = random_graph(12, 20, 8, false, false);
    let ell_max = 5;
    let params = MstpParams::new(ell_max, 0.1).with_eps_r(0.05).with_c(1.0);
    let (s, t) = (0, 6);
    let dp = exact_first_passage(&g, &Source::Node(s), t, ell_max).unwrap();
    let runs: Vec<Vec<f64>> = (0..5000u64)
        .into_par_iter()
        .map(|seed| {
            estimate_truncated_hitting(&g, &Source::Node(s), t, &params, seed)
                .unwrap()
                .values
        })
        .collect();
    for ell in 1..=ell_max {
        let column: Vec<f64> = runs.iter().map(|v| v[ell - 1]).collect();
        assert!(within_three_se(&column, dp[ell - 1]), "length {ell}");
    }
}

#[test]
fn shared_walk_estimate_is_unbiased() {
    let g = random_graph(20, 40, 9, false, false);
    let pi = ppr_matrix(&g, ALPHA);
    let params = SharingParams::balanced(ALPHA, 0.05, 3, 7.0, 0.5, 10.0)
        .unwrap()
        .with_thresholds(0.05, 0.05)
        .with_walks(20, 40);
    let pairs = [(0, 5), (2, 2), (11, 19), (7, 13)];
    let runs: Vec<Vec<f64>> = (0..2000u64)
        .into_par_iter()
        .map(|seed| {
            let store = build_shared_walk_vectors(&g, &params, seed).unwrap();
            pairs
                .iter()
                .map(|&(s, t)| store.estimate(s, t).unwrap())
                .collect()
        })
        .collect();
    for (i, &(s, t)) in pairs.iter().enumerate() {
        let column: Vec<f64> = runs.iter().map(|v| v[i]).collect();
        assert!(within_three_se(&column, pi[s][t]), "pair ({s}, {t})");
    }
}
