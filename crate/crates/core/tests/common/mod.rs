//! Graph builders and oracle helpers shared by the integration tests.

#![allow(dead_code)]

use bippr_core::graph::{Graph, NodeId};
use bippr_core::oracle::{exact_ppr_from, DenseDist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHA: f64 = 0.2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cycle backbone (so no node dangles) plus `extra` random edges.
pub fn random_graph(n: usize, extra: usize, seed: u64, undirected: bool, weighted: bool) -> Graph {
    let mut rng = rng(seed);
    let weight = |rng: &mut ChaCha8Rng| {
        if weighted {
            rng.random_range(0.5..3.0)
        } else {
            1.0
        }
    };
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(n + extra);
    for v in 0..n {
        let w = weight(&mut rng);
        edges.push((v, (v + 1) % n, w));
    }
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        let w = weight(&mut rng);
        edges.push((u, v, w));
    }
    Graph::from_edges(n, &edges, undirected).unwrap()
}

/// `rows[s][t] = pi_s[t]`.
pub fn ppr_matrix(g: &Graph, alpha: f64) -> Vec<DenseDist> {
    (0..g.n())
        .map(|s| exact_ppr_from(g, s, alpha, 1e-12).unwrap())
        .collect()
}

/// Mean of `|est - truth| / truth` over pairs with `truth >= delta`, and
/// the number of such pairs.
pub fn mean_relative_error(pairs: &[(f64, f64, f64)]) -> (f64, usize) {
    let errs: Vec<f64> = pairs
        .iter()
        .filter(|&&(_, truth, delta)| truth >= delta)
        .map(|&(est, truth, _)| (est - truth).abs() / truth)
        .collect();
    if errs.is_empty() {
        return (f64::NAN, 0);
    }
    (errs.iter().sum::<f64>() / errs.len() as f64, errs.len())
}
