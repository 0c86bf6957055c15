//! Exact reference computations by dense power iteration and path enumeration.

use std::collections::BTreeMap;
use std::ops::Index;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::sampling::{check_alpha, Source};

/// Dense vector of length n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseDist {
    pub values: Vec<f64>,
}

impl DenseDist {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Sum of the entries indexed by `set`.
    pub fn mass(&self, set: &[NodeId]) -> f64 {
        set.iter().map(|&v| self.values[v]).sum()
    }
}

impl Index<NodeId> for DenseDist {
    type Output = f64;
    fn index(&self, v: NodeId) -> &f64 {
        &self.values[v]
    }
}

/// One step of the chain: returns `x W`.
pub fn step(g: &Graph, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    for (u, &xu) in x.iter().enumerate() {
        if xu == 0.0 {
            continue;
        }
        for (v, w) in g.out_neighbors(u) {
            out[v] += xu * w;
        }
    }
    out
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Personalized PageRank of `source` by power iteration, within `tol` of the
/// fixed point in every coordinate.
///
/// Iterates `p <- alpha s + (1 - alpha) p W` from `p = s` until the L1 change
/// between iterates drops below `tol * alpha`.
pub fn exact_ppr(g: &Graph, source: &Source, alpha: f64, tol: f64) -> Result<DenseDist> {
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    source.check(g)?;
    let s = source.to_dense(g.n());
    let cap = ((tol * alpha / 2.0).ln() / (1.0 - alpha).ln())
        .ceil()
        .max(0.0) as usize
        + 64;
    let mut p = s.clone();
    let mut last_change = f64::INFINITY;
    for _ in 0..cap {
        let mut next = step(g, &p);
        for (x, &sv) in next.iter_mut().zip(&s) {
            *x = alpha * sv + (1.0 - alpha) * *x;
        }
        last_change = l1_distance(&next, &p);
        p = next;
        if last_change < tol * alpha {
            return Ok(DenseDist { values: p });
        }
    }
    Err(Error::NonConvergence {
        iterations: cap,
        last_change,
    })
}

pub fn exact_ppr_from(g: &Graph, s: NodeId, alpha: f64, tol: f64) -> Result<DenseDist> {
    exact_ppr(g, &Source::Node(s), alpha, tol)
}

/// Global PageRank: PPR from the uniform distribution, to tolerance 1e-12.
pub fn exact_global_pagerank(g: &Graph, alpha: f64) -> Result<DenseDist> {
    exact_ppr(g, &Source::uniform(g.n())?, alpha, 1e-12)
}

/// `s W^ell`.
pub fn exact_mstp(g: &Graph, source: &Source, ell: usize) -> Result<DenseDist> {
    source.check(g)?;
    let mut x = source.to_dense(g.n());
    for _ in 0..ell {
        x = step(g, &x);
    }
    Ok(DenseDist { values: x })
}

/// `s W^ell` for every `ell` in `0..=ell_max`.
pub fn exact_mstp_all(g: &Graph, source: &Source, ell_max: usize) -> Result<Vec<DenseDist>> {
    source.check(g)?;
    let mut x = source.to_dense(g.n());
    let mut out = Vec::with_capacity(ell_max + 1);
    for _ in 0..ell_max {
        let next = step(g, &x);
        out.push(DenseDist { values: x });
        x = next;
    }
    out.push(DenseDist { values: x });
    Ok(out)
}

/// Poisson weights `e^{-t} t^i / i!` for `i` in `0..=ell_max`.
pub fn heat_kernel_weights(t_param: f64, ell_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(ell_max + 1);
    let mut w = (-t_param).exp();
    for i in 0..=ell_max {
        if i > 0 {
            w *= t_param / i as f64;
        }
        out.push(w);
    }
    out
}

/// Heat kernel `sum_l weights[l] s W^l`, truncated at `ell_max`.
pub fn exact_heat_kernel(
    g: &Graph,
    source: &Source,
    t_param: f64,
    ell_max: usize,
) -> Result<DenseDist> {
    let weights = heat_kernel_weights(t_param, ell_max);
    let layers = exact_mstp_all(g, source, ell_max)?;
    let mut out = vec![0.0; g.n()];
    for (w, layer) in weights.iter().zip(&layers) {
        for (o, x) in out.iter_mut().zip(&layer.values) {
            *o += w * x;
        }
    }
    Ok(DenseDist { values: out })
}

/// Probability that a walk from `source` first visits `t` at step `ell`,
/// for `ell` in `1..=ell_max` (index `ell - 1`). Step 0 does not count as a visit.
pub fn exact_first_passage(
    g: &Graph,
    source: &Source,
    t: NodeId,
    ell_max: usize,
) -> Result<Vec<f64>> {
    g.check_node(t)?;
    source.check(g)?;
    let mut x = source.to_dense(g.n());
    let mut out = Vec::with_capacity(ell_max);
    for _ in 0..ell_max {
        x = step(g, &x);
        out.push(x[t]);
        x[t] = 0.0;
    }
    Ok(out)
}

/// Distribution over walk paths conditioned on the walk ending in a target set.
#[derive(Debug, Clone)]
pub struct ConditionalPaths {
    /// Conditional probability of each enumerated path (nodes including the start).
    pub paths: BTreeMap<Vec<NodeId>, f64>,
    /// Conditional probability of target-ending paths longer than `max_len`.
    pub tail_mass: f64,
    /// Unconditional probability `pi_s(T)` used as normalizer.
    pub target_mass: f64,
}

/// Enumerates every path of at most `max_len` edges that ends in `targets`.
/// A path of `l` edges has probability `alpha (1 - alpha)^l prod w`; the
/// result is normalized by the exact `pi_s(T)`.
pub fn exact_conditional_path_dist(
    g: &Graph,
    s: NodeId,
    targets: &[NodeId],
    alpha: f64,
    max_len: usize,
    path_cap: usize,
) -> Result<ConditionalPaths> {
    g.check_node(s)?;
    let mut is_target = vec![false; g.n()];
    for &t in targets {
        g.check_node(t)?;
        is_target[t] = true;
    }
    let pi = exact_ppr_from(g, s, alpha, 1e-14)?;
    let target_mass: f64 = (0..g.n()).filter(|&v| is_target[v]).map(|v| pi[v]).sum();

    let mut paths = BTreeMap::new();
    let mut visited = 0usize;
    let mut stack: Vec<(Vec<NodeId>, f64)> = vec![(vec![s], 1.0)];
    while let Some((path, prod)) = stack.pop() {
        visited += 1;
        if visited > path_cap {
            return Err(Error::EnumerationCap { cap: path_cap });
        }
        let len = path.len() - 1;
        let last = *path.last().expect("non-empty");
        if is_target[last] {
            let p = alpha * (1.0 - alpha).powi(len as i32) * prod;
            paths.insert(path.clone(), p);
        }
        if len < max_len {
            for (v, w) in g.out_neighbors(last) {
                let mut next = path.clone();
                next.push(v);
                stack.push((next, prod * w));
            }
        }
    }
    if paths.is_empty() || !(target_mass > 0.0) {
        return Err(Error::UnreachableTargets { max_len });
    }
    let covered: f64 = paths.values().sum();
    for p in paths.values_mut() {
        *p /= target_mass;
    }
    Ok(ConditionalPaths {
        paths,
        tail_mass: (1.0 - covered / target_mass).max(0.0),
        target_mass,
    })
}
