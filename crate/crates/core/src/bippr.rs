//! Bidirectional personalized PageRank estimation: reverse push from the
//! target combined with forward random walks from the source.

use std::f64::consts::E;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::localpush::{reverse_push, reverse_push_balanced, BalanceClock, PushResult};
use crate::oracle::{exact_global_pagerank, DenseDist};
use crate::sampling::{check_alpha, sum_over_walks, walk_endpoints, Source, WalkConfig};
use crate::sparse::SparseVec;

pub const DEFAULT_C: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PprParams {
    pub alpha: f64,
    /// Smallest PPR value the estimate must resolve with relative accuracy.
    pub delta: f64,
    pub epsilon: f64,
    pub p_fail: f64,
    pub c: f64,
    /// Overrides the runtime-balancing default.
    pub r_max: Option<f64>,
}

impl PprParams {
    pub fn new(alpha: f64, delta: f64) -> Self {
        Self {
            alpha,
            delta,
            epsilon: 0.5,
            p_fail: 0.1,
            c: DEFAULT_C,
            r_max: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_p_fail(mut self, p_fail: f64) -> Self {
        self.p_fail = p_fail;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = Some(r_max);
        self
    }

    /// Walk constant `(3 / eps^2) ln(2 / p_fail)` under which the accuracy
    /// guarantee is proven.
    pub fn theorem_c(&self) -> f64 {
        3.0 / (self.epsilon * self.epsilon) * (2.0 / self.p_fail).ln()
    }

    pub fn strict(mut self) -> Self {
        self.c = self.theorem_c();
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        let bad = |what: &str, x: f64| Err(Error::InvalidParameter(format!("{what} = {x}")));
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return bad("delta must lie in (0, 1]; got delta", self.delta);
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad("epsilon must lie in (0, 1]; got epsilon", self.epsilon);
        }
        if !(self.p_fail > 0.0 && self.p_fail < 1.0) {
            return bad("p_fail must lie in (0, 1); got p_fail", self.p_fail);
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad("c must be positive; got c", self.c);
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0) {
                return bad("r_max must be positive; got r_max", r);
            }
        }
        Ok(())
    }

    /// Whether `r_max` exceeds `2 e delta / (alpha epsilon)`, the accuracy
    /// guarantee's precondition.
    pub fn precondition_holds(&self, r_max: f64) -> bool {
        r_max > 2.0 * E * self.delta / (self.alpha * self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PprEstimate {
    pub value: f64,
    pub walks_used: usize,
    pub reverse_pushes: usize,
    pub reverse_work_units: u64,
    pub r_max_used: f64,
    pub precondition_holds: bool,
}

/// `eps * sqrt(d_avg * delta / ln(2 / p_fail))` with `d_avg = m / n`.
pub fn default_r_max(g: &Graph, params: &PprParams) -> f64 {
    r_max_for_degree(g.average_degree(), params)
}

pub fn r_max_for_degree(avg_degree: f64, params: &PprParams) -> f64 {
    params.epsilon * (avg_degree * params.delta / (2.0 / params.p_fail).ln()).sqrt()
}

/// `ceil(c r_max / delta)`, at least one.
pub fn num_walks(params: &PprParams, r_max: f64) -> usize {
    ((params.c * r_max / params.delta).ceil() as usize).max(1)
}

/// Walk count `3 ln(2 / p_fail) / (eps^2 delta)` for plain Monte Carlo.
pub fn monte_carlo_walks(params: &PprParams) -> usize {
    let c_mc = 3.0 * (2.0 / params.p_fail).ln();
    ((c_mc / (params.epsilon * params.epsilon * params.delta)).ceil() as usize).max(1)
}

/// `sum_v sigma[v] p[v] + (1/w) sum_i r[V_i]`.
pub fn combine(
    source: &Source,
    push: &PushResult,
    endpoint_residual_sum: f64,
    walks: usize,
) -> f64 {
    let reverse: f64 = source
        .entries()
        .iter()
        .map(|&(v, w)| w * push.estimates.get(v))
        .sum();
    if walks == 0 {
        reverse
    } else {
        reverse + endpoint_residual_sum / walks as f64
    }
}

fn run_walks(
    g: &Graph,
    source: &Source,
    push: &PushResult,
    walks: usize,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    if walks == 0 || push.residuals.is_empty() {
        return Ok(0.0);
    }
    let cfg = WalkConfig::new(alpha, seed)?;
    let residuals = &push.residuals;
    Ok(sum_over_walks(g, source, &cfg, walks, |v| residuals.get(v)))
}

fn check_inputs(g: &Graph, source: &Source, t: NodeId, params: &PprParams) -> Result<()> {
    params.validate()?;
    g.check_node(t)?;
    source.check(g)
}

/// Reverse push from `t` at `r_max`, then `ceil(c r_max / delta)` walks from
/// the source.
pub fn estimate_ppr(
    g: &Graph,
    source: &Source,
    t: NodeId,
    params: &PprParams,
    seed: u64,
) -> Result<PprEstimate> {
    check_inputs(g, source, t, params)?;
    let r_max = params.r_max.unwrap_or_else(|| default_r_max(g, params));
    let precondition_holds = params.precondition_holds(r_max);
    if !precondition_holds {
        debug!(
            "r_max = {r_max:.3e} is not above 2e*delta/(alpha*eps) = {:.3e}; accuracy guarantee does not apply",
            2.0 * E * params.delta / (params.alpha * params.epsilon)
        );
    }
    let push = reverse_push(g, t, r_max, params.alpha)?;
    let walks = num_walks(params, r_max);
    let sum = run_walks(g, source, &push, walks, params.alpha, seed)?;
    Ok(PprEstimate {
        value: combine(source, &push, sum, walks),
        walks_used: walks,
        reverse_pushes: push.pushes,
        reverse_work_units: push.work_units,
        r_max_used: r_max,
        precondition_holds,
    })
}

/// Balanced variant: max-residual reverse push until its work matches the
/// predicted walk cost, then `ceil(c achieved_rmax / delta)` walks.
pub fn estimate_ppr_balanced(
    g: &Graph,
    source: &Source,
    t: NodeId,
    params: &PprParams,
    clock: BalanceClock,
    seed: u64,
) -> Result<PprEstimate> {
    check_inputs(g, source, t, params)?;
    let push = reverse_push_balanced(g, t, params.alpha, params.delta, params.c, clock)?;
    let r_max = push.achieved_rmax;
    let walks = (params.c * r_max / params.delta).ceil() as usize;
    let sum = run_walks(g, source, &push, walks, params.alpha, seed)?;
    Ok(PprEstimate {
        value: combine(source, &push, sum, walks),
        walks_used: walks,
        reverse_pushes: push.pushes,
        reverse_work_units: push.work_units,
        r_max_used: r_max,
        precondition_holds: params.precondition_holds(r_max),
    })
}

/// Fraction of `walks` walks from the source that end at `t`.
pub fn monte_carlo_ppr(
    g: &Graph,
    source: &Source,
    t: NodeId,
    walks: usize,
    alpha: f64,
    seed: u64,
) -> Result<PprEstimate> {
    if walks == 0 {
        return Err(Error::InvalidParameter(
            "walk count must be positive".into(),
        ));
    }
    g.check_node(t)?;
    source.check(g)?;
    let cfg = WalkConfig::new(alpha, seed)?;
    let hits = sum_over_walks(g, source, &cfg, walks, |v| if v == t { 1.0 } else { 0.0 });
    Ok(PprEstimate {
        value: hits / walks as f64,
        walks_used: walks,
        reverse_pushes: 0,
        reverse_work_units: 0,
        r_max_used: 0.0,
        precondition_holds: false,
    })
}

/// Empirical endpoint distribution of `walks` walks from the source.
pub fn monte_carlo_ppr_all(
    g: &Graph,
    source: &Source,
    walks: usize,
    alpha: f64,
    seed: u64,
) -> Result<SparseVec> {
    if walks == 0 {
        return Err(Error::InvalidParameter(
            "walk count must be positive".into(),
        ));
    }
    source.check(g)?;
    let cfg = WalkConfig::new(alpha, seed)?;
    Ok(empirical_distribution(&walk_endpoints(
        g, source, &cfg, walks,
    )))
}

/// Endpoint frequencies `count / total` in node order.
pub fn empirical_distribution(endpoints: &[NodeId]) -> SparseVec {
    let mut counts: std::collections::BTreeMap<NodeId, usize> = Default::default();
    for &v in endpoints {
        *counts.entry(v).or_insert(0) += 1;
    }
    let w = endpoints.len() as f64;
    counts.into_iter().map(|(v, c)| (v, c as f64 / w)).collect()
}

/// `max(pi[t], 1/n)` with the global PageRank computed exactly.
pub fn choose_delta_from_target(g: &Graph, t: NodeId, alpha: f64) -> Result<f64> {
    g.check_node(t)?;
    let pr = exact_global_pagerank(g, alpha)?;
    Ok(delta_from_pagerank(&pr, t))
}

pub fn delta_from_pagerank(pagerank: &DenseDist, t: NodeId) -> f64 {
    pagerank[t].max(1.0 / pagerank.len() as f64)
}
