//! Bidirectional estimation of multi-step transition probabilities
//! `(s W^l)[t]` for every `l` up to `ell_max`, heat-kernel weighting, and
//! truncated first-hitting probabilities.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::oracle::heat_kernel_weights;
use crate::sampling::{walk_rng, Source, WALK_CHUNK};
use crate::sparse::SparseVec;

/// Multiplier applied to the sampled residual in each walk score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreMultiplier {
    /// `l + 1`, the number of terms the sampled index ranges over.
    Unbiased,
    /// `l`, as written in the published pseudocode.
    Literal,
}

impl ScoreMultiplier {
    fn factor(self, ell: usize) -> f64 {
        match self {
            ScoreMultiplier::Unbiased => (ell + 1) as f64,
            ScoreMultiplier::Literal => ell as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstpParams {
    pub ell_max: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub p_fail: f64,
    pub c: f64,
    /// Reverse threshold; defaults to `sqrt(delta / c)`.
    pub eps_r: Option<f64>,
    pub multiplier: ScoreMultiplier,
}

impl MstpParams {
    pub fn new(ell_max: usize, delta: f64) -> Self {
        Self {
            ell_max,
            delta,
            epsilon: 0.5,
            p_fail: 0.1,
            c: 7.0,
            eps_r: None,
            multiplier: ScoreMultiplier::Unbiased,
        }
    }

    pub fn with_eps_r(mut self, eps_r: f64) -> Self {
        self.eps_r = Some(eps_r);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    /// `max(6e / eps^2, 1 / ln 2) ln(2 ell_max / p_fail)`.
    pub fn theorem_c(&self) -> f64 {
        let lead = (6.0 * std::f64::consts::E / (self.epsilon * self.epsilon))
            .max(1.0 / std::f64::consts::LN_2);
        lead * (2.0 * self.ell_max as f64 / self.p_fail).ln()
    }

    pub fn strict(mut self) -> Self {
        self.c = self.theorem_c();
        self
    }

    pub fn resolved_eps_r(&self) -> f64 {
        self.eps_r.unwrap_or_else(|| (self.delta / self.c).sqrt())
    }

    /// `ceil(c ell_max eps_r / delta)`, at least one.
    pub fn num_paths(&self) -> usize {
        ((self.c * self.ell_max as f64 * self.resolved_eps_r() / self.delta).ceil() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.ell_max == 0 {
            return bad("ell_max must be at least 1".into());
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.p_fail > 0.0 && self.p_fail < 1.0) {
            return bad(format!("p_fail must lie in (0, 1), got {}", self.p_fail));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if let Some(e) = self.eps_r {
            if !(e > 0.0) {
                return bad(format!("eps_r must be positive, got {e}"));
            }
        }
        Ok(())
    }
}

/// Per-level estimate and residual vectors of the layered reverse push.
#[derive(Debug, Clone)]
pub struct LayeredReverseState {
    pub target: NodeId,
    pub ell_max: usize,
    pub estimates: Vec<SparseVec>,
    pub residuals: Vec<SparseVec>,
    /// Absorb residual at the target on levels >= 1 instead of pushing it.
    pub absorb_target: bool,
    pub pushes: usize,
    pub work_units: u64,
}

impl LayeredReverseState {
    pub fn new(target: NodeId, ell_max: usize) -> Self {
        let mut residuals = vec![SparseVec::new(); ell_max + 1];
        residuals[0].set(target, 1.0);
        Self {
            target,
            ell_max,
            estimates: vec![SparseVec::new(); ell_max + 1],
            residuals,
            absorb_target: false,
            pushes: 0,
            work_units: 0,
        }
    }

    pub fn absorbing(target: NodeId, ell_max: usize) -> Self {
        Self {
            absorb_target: true,
            ..Self::new(target, ell_max)
        }
    }

    /// Moves `r^i[v]` into `p^i[v]` and, below the top level, adds
    /// `W(u, v) r^i[v]` to `r^{i+1}[u]` for each in-neighbor `u`.
    pub fn push(&mut self, g: &Graph, v: NodeId, i: usize) {
        let r = self.residuals[i].take(v);
        if r == 0.0 {
            return;
        }
        self.estimates[i].add(v, r);
        self.pushes += 1;
        if i == self.ell_max || (self.absorb_target && i >= 1 && v == self.target) {
            self.work_units += 1;
            return;
        }
        let next = &mut self.residuals[i + 1];
        for (u, w) in g.in_neighbors(v) {
            next.add(u, w * r);
        }
        self.work_units += g.in_degree(v) as u64 + 1;
    }

    /// Pushes every `(v, i)` with `r^i[v] > eps_r`, level by level. In
    /// absorbing mode the target's residual on levels >= 1 is always absorbed.
    pub fn run(&mut self, g: &Graph, eps_r: f64) {
        for i in 0..=self.ell_max {
            if self.absorb_target && i >= 1 {
                let t = self.target;
                self.push(g, t, i);
            }
            let mut due: Vec<NodeId> = self.residuals[i]
                .iter()
                .filter(|&(_, r)| r > eps_r)
                .map(|(v, _)| v)
                .collect();
            due.sort_unstable();
            for v in due {
                self.push(g, v, i);
            }
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals
            .iter()
            .map(SparseVec::max_value)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MstpEstimate {
    /// Estimate for length `l` at index `l - 1`, `l` in `1..=ell_max`.
    pub values: Vec<f64>,
    pub paths_used: usize,
    pub reverse_pushes: usize,
    pub eps_r_used: f64,
}

impl MstpEstimate {
    pub fn at(&self, ell: usize) -> f64 {
        self.values[ell - 1]
    }
}

fn check_inputs(g: &Graph, source: &Source, t: NodeId, params: &MstpParams) -> Result<()> {
    params.validate()?;
    g.check_node(t)?;
    source.check(g)
}

/// Sum over `paths` fixed-length walks of the per-length scores.
fn forward_scores(
    g: &Graph,
    source: &Source,
    state: &LayeredReverseState,
    multiplier: ScoreMultiplier,
    paths: usize,
    seed: u64,
) -> Vec<f64> {
    let ell_max = state.ell_max;
    let kill_at_target = state.absorb_target;
    let chunks = paths.div_ceil(WALK_CHUNK);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * WALK_CHUNK;
            let hi = (lo + WALK_CHUNK).min(paths);
            let mut acc = vec![0.0; ell_max];
            let mut path = Vec::with_capacity(ell_max + 1);
            for i in lo..hi {
                let mut rng = walk_rng(seed, i as u64);
                path.clear();
                let mut v = source.sample_start(&mut rng);
                path.push(v);
                for _ in 0..ell_max {
                    match g.sample_out_neighbor(v, &mut rng) {
                        Some(u) => {
                            v = u;
                            path.push(u);
                        }
                        None => break,
                    }
                }
                // First step >= 1 at which the path sits on the target.
                let first_hit = if kill_at_target {
                    path.iter()
                        .skip(1)
                        .position(|&x| x == state.target)
                        .map(|p| p + 1)
                } else {
                    None
                };
                for ell in 1..=ell_max {
                    let k = rng.random_range(0..=ell);
                    if k >= path.len() {
                        continue;
                    }
                    if let Some(h) = first_hit {
                        if h < k {
                            continue;
                        }
                    }
                    let r = state.residuals[ell - k].get(path[k]);
                    if r != 0.0 {
                        acc[ell - 1] += multiplier.factor(ell) * r;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; ell_max];
    for part in partials {
        for (t, x) in total.iter_mut().zip(part) {
            *t += x;
        }
    }
    total
}

fn finish(
    source: &Source,
    state: &LayeredReverseState,
    params: &MstpParams,
    paths: usize,
    sums: Vec<f64>,
) -> MstpEstimate {
    let entries = source.entries();
    let values = (1..=state.ell_max)
        .map(|ell| {
            let reverse: f64 = entries
                .iter()
                .map(|&(v, w)| w * state.estimates[ell].get(v))
                .sum();
            reverse + sums[ell - 1] / paths as f64
        })
        .collect();
    MstpEstimate {
        values,
        paths_used: paths,
        reverse_pushes: state.pushes,
        eps_r_used: params.resolved_eps_r(),
    }
}

/// Estimates `(s W^l)[t]` for every `l` in `1..=ell_max` from one reverse
/// run and one shared set of sample paths.
pub fn estimate_mstp(
    g: &Graph,
    source: &Source,
    t: NodeId,
    params: &MstpParams,
    seed: u64,
) -> Result<MstpEstimate> {
    check_inputs(g, source, t, params)?;
    let mut state = LayeredReverseState::new(t, params.ell_max);
    state.run(g, params.resolved_eps_r());
    let paths = params.num_paths();
    let sums = forward_scores(g, source, &state, params.multiplier, paths, seed);
    Ok(finish(source, &state, params, paths, sums))
}

/// Estimates the probability that a walk from the source first reaches `t`
/// at step `l` (steps >= 1), for every `l` in `1..=ell_max`.
pub fn estimate_truncated_hitting(
    g: &Graph,
    source: &Source,
    t: NodeId,
    params: &MstpParams,
    seed: u64,
) -> Result<MstpEstimate> {
    check_inputs(g, source, t, params)?;
    let mut state = LayeredReverseState::absorbing(t, params.ell_max);
    state.run(g, params.resolved_eps_r());
    let paths = params.num_paths();
    let sums = forward_scores(g, source, &state, params.multiplier, paths, seed);
    Ok(finish(source, &state, params, paths, sums))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelParams {
    pub t_param: f64,
    pub ell_max: usize,
}

impl HeatKernelParams {
    /// Truncates at `round(t + 10 sqrt(t))`.
    pub fn new(t_param: f64) -> Result<Self> {
        if !(t_param > 0.0) || !t_param.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "heat-kernel t must be positive, got {t_param}"
            )));
        }
        let ell_max = ((t_param + 10.0 * t_param.sqrt()).round() as usize).max(1);
        Self::with_ell_max(t_param, ell_max)
    }

    pub fn with_ell_max(t_param: f64, ell_max: usize) -> Result<Self> {
        let hk = Self { t_param, ell_max };
        if hk.tail_mass() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "truncating the heat kernel at {ell_max} leaves tail mass {:.3e} > 1e-9",
                hk.tail_mass()
            )));
        }
        Ok(hk)
    }

    pub fn weights(&self) -> Vec<f64> {
        heat_kernel_weights(self.t_param, self.ell_max)
    }

    /// Poisson mass beyond `ell_max`.
    pub fn tail_mass(&self) -> f64 {
        (1.0 - self.weights().iter().sum::<f64>()).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatKernelEstimate {
    pub value: f64,
    pub tail_bound: f64,
    pub mstp: MstpEstimate,
}

/// `sum_l weight_l pihat^l` with `pihat^0 = s[t]`. The layered estimator
/// runs with `hk.ell_max` as its length bound.
pub fn estimate_heat_kernel(
    g: &Graph,
    source: &Source,
    t: NodeId,
    hk: &HeatKernelParams,
    params: &MstpParams,
    seed: u64,
) -> Result<HeatKernelEstimate> {
    let params = MstpParams {
        ell_max: hk.ell_max,
        ..*params
    };
    let mstp = estimate_mstp(g, source, t, &params, seed)?;
    let weights = hk.weights();
    let mut value = weights[0] * source.weight(t);
    for ell in 1..=hk.ell_max {
        value += weights[ell] * mstp.at(ell);
    }
    Ok(HeatKernelEstimate {
        value,
        tail_bound: hk.tail_mass(),
        mstp,
    })
}
