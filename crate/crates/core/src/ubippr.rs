//! Undirected bidirectional estimator: forward push from the source, walks
//! from the target, using `pi_s[t] d_s = pi_t[s] d_t`.

use serde::Serialize;

use crate::bippr::PprParams;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::localpush::forward_push;
use crate::oracle::exact_ppr_from;
use crate::sampling::{sum_over_walks, Source, WalkConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UndirectedEstimate {
    pub value: f64,
    pub walks_used: usize,
    pub forward_pushes: usize,
    pub r_max_used: f64,
    pub delta_used: f64,
}

fn require_undirected(g: &Graph) -> Result<()> {
    if g.is_undirected() {
        Ok(())
    } else {
        Err(Error::NotUndirected)
    }
}

/// Checks `|pi_s[t] d_s - pi_t[s] d_t| <= tol` with oracle values.
pub fn check_symmetry(g: &Graph, s: NodeId, t: NodeId, alpha: f64, tol: f64) -> Result<bool> {
    require_undirected(g)?;
    let pi_s = exact_ppr_from(g, s, alpha, tol * 1e-3)?;
    let pi_t = exact_ppr_from(g, t, alpha, tol * 1e-3)?;
    Ok((pi_s[t] * g.degree(s) - pi_t[s] * g.degree(t)).abs() <= tol)
}

/// Stationary threshold `d_t / sum_v d_v`.
pub fn natural_delta(g: &Graph, t: NodeId) -> f64 {
    g.degree(t) / g.total_degree()
}

/// `eps / sqrt(ln(1 / p_fail)) * sqrt(delta / d_t)`.
pub fn worst_case_r_max(epsilon: f64, p_fail: f64, delta: f64, d_t: f64) -> f64 {
    epsilon / (1.0 / p_fail).ln().sqrt() * (delta / d_t).sqrt()
}

/// `ceil(c d_t r_max / (eps^2 delta))`, at least one.
pub fn undirected_num_walks(params: &PprParams, d_t: f64, r_max: f64) -> usize {
    ((params.c * d_t * r_max / (params.epsilon * params.epsilon * params.delta)).ceil() as usize)
        .max(1)
}

/// Estimates `pi_s[t]` on an undirected graph. `params.r_max` defaults to
/// the worst-case balancing choice.
pub fn estimate_ppr_undirected(
    g: &Graph,
    s: NodeId,
    t: NodeId,
    params: &PprParams,
    seed: u64,
) -> Result<UndirectedEstimate> {
    require_undirected(g)?;
    params.validate()?;
    g.check_node(s)?;
    g.check_node(t)?;
    for v in [s, t] {
        if g.out_degree(v) == 0 {
            return Err(Error::IsolatedNode(v));
        }
    }
    let d_t = g.degree(t);
    let r_max = params
        .r_max
        .unwrap_or_else(|| worst_case_r_max(params.epsilon, params.p_fail, params.delta, d_t));
    let push = forward_push(g, s, r_max, params.alpha)?;
    let walks = undirected_num_walks(params, d_t, r_max);
    let sum = if push.residuals.is_empty() {
        0.0
    } else {
        let cfg = WalkConfig::new(params.alpha, seed)?;
        let residuals = &push.residuals;
        sum_over_walks(g, &Source::Node(t), &cfg, walks, |v| {
            residuals.get(v) * d_t / g.degree(v)
        })
    };
    Ok(UndirectedEstimate {
        value: push.estimates.get(t) + sum / walks as f64,
        walks_used: walks,
        forward_pushes: push.pushes,
        r_max_used: r_max,
        delta_used: params.delta,
    })
}

/// Instrumented forward push: whether the degree sum of pushed nodes is at
/// most `1 / (alpha r_max)`.
pub fn forward_work_bound_check(g: &Graph, s: NodeId, r_max: f64, alpha: f64) -> Result<bool> {
    require_undirected(g)?;
    let push = forward_push(g, s, r_max, alpha)?;
    Ok(push.pushed_degree_sum <= 1.0 / (alpha * r_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list_str;
    use crate::localpush::forward_push;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn star() -> Graph {
        parse_edge_list_str("c x\nc y\nc z\n", true).unwrap()
    }

    fn random_undirected(n: usize, extra: usize, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(NodeId, NodeId, f64)> =
            (1..n).map(|v| (rng.random_range(0..v), v, 1.0)).collect();
        for _ in 0..extra {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                edges.push((u, v, 1.0));
            }
        }
        Graph::from_edges(n, &edges, true).unwrap()
    }

    #[test]
    fn symmetry_examples() {
        let path = parse_edge_list_str("a b\n", true).unwrap();
        assert!(check_symmetry(&path, 0, 1, 0.2, 1e-9).unwrap());
        let g = star();
        let c = g.resolve("c").unwrap();
        let x = g.resolve("x").unwrap();
        assert!(check_symmetry(&g, c, x, 0.2, 1e-9).unwrap());
        let pi_x = exact_ppr_from(&g, x, 0.2, 1e-14).unwrap();
        let pi_c = exact_ppr_from(&g, c, 0.2, 1e-14).unwrap();
        assert!((pi_x[c] - 3.0 * pi_c[x]).abs() < 1e-12);
        assert!(check_symmetry(&g, x, x, 0.2, 1e-9).unwrap());
        let directed = parse_edge_list_str("a b\nb a\n", false).unwrap();
        assert!(matches!(
            check_symmetry(&directed, 0, 1, 0.2, 1e-9),
            Err(Error::NotUndirected)
        ));
    }

    #[test]
    fn symmetry_on_random_graphs() {
        for seed in 0..5 {
            let g = random_undirected(25, 30, seed);
            let pis: Vec<_> = (0..g.n())
                .map(|s| exact_ppr_from(&g, s, 0.2, 1e-14).unwrap())
                .collect();
            for s in 0..g.n() {
                for t in 0..g.n() {
                    assert!((pis[s][t] * g.degree(s) - pis[t][s] * g.degree(t)).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn worst_case_r_max_arithmetic() {
        let r = worst_case_r_max(0.5, 1.0 / std::f64::consts::E, 1e-3, 4.0);
        assert!((r - 0.5 * (1e-3f64 / 4.0).sqrt()).abs() < 1e-12);
        assert!((r - 0.0079).abs() < 1e-4);
    }

    #[test]
    fn zero_residual_reduces_to_push_estimate() {
        let g = parse_edge_list_str("a b\n", true).unwrap();
        let p = PprParams::new(0.2, 0.5).with_r_max(1e-15);
        let push = forward_push(&g, 0, 1e-15, 0.2).unwrap();
        let est = estimate_ppr_undirected(&g, 0, 1, &p, 3).unwrap();
        let residual_term: f64 = push.residuals.iter().map(|(_, r)| r).sum();
        assert!(residual_term < 1e-13);
        assert!((est.value - push.estimates.get(1)).abs() < 1e-13);
    }

    #[test]
    fn two_path_mean_matches_oracle() {
        let g = parse_edge_list_str("a b\n", true).unwrap();
        let truth = 0.8 / 1.8;
        let p = PprParams::new(0.2, natural_delta(&g, 1)).with_epsilon(0.1);
        let runs = 1000;
        let vals: Vec<f64> = (0..runs)
            .map(|i| estimate_ppr_undirected(&g, 0, 1, &p, i).unwrap().value)
            .collect();
        let mean = vals.iter().sum::<f64>() / runs as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let se = (var / runs as f64).sqrt();
        assert!(
            (mean - truth).abs() <= 3.0 * se.max(1e-12),
            "mean {mean} se {se}"
        );
    }

    #[test]
    fn rejects_isolated_and_directed() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0)], true).unwrap();
        let p = PprParams::new(0.2, 0.1);
        assert!(matches!(
            estimate_ppr_undirected(&g, 0, 2, &p, 0),
            Err(Error::IsolatedNode(2))
        ));
        let d = parse_edge_list_str("a b\nb a\n", false).unwrap();
        assert!(matches!(
            estimate_ppr_undirected(&d, 0, 1, &p, 0),
            Err(Error::NotUndirected)
        ));
    }

    #[test]
    fn work_bound_cases() {
        let g = random_undirected(50, 80, 7);
        assert!(forward_work_bound_check(&g, 0, 1.0, 0.2).unwrap());
        for s in 0..g.n() {
            assert!(forward_work_bound_check(&g, s, 0.01, 0.2).unwrap());
            let a = forward_push(&g, s, 0.02, 0.2).unwrap().pushed_degree_sum;
            assert!(a <= 1.0 / (0.2 * 0.02));
            let b = forward_push(&g, s, 0.01, 0.2).unwrap().pushed_degree_sum;
            assert!(b <= 1.0 / (0.2 * 0.01));
        }
    }
}
