//! Exact sampling of walk paths from a source conditioned on ending in a
//! target set.
//!
//! A reverse push from the target set records, for every node, which
//! earlier pushes its residual came from. Each push freezes the pushing
//! node's provenance into an immutable snapshot. A sampled path is a random
//! walk prefix accepted in proportion to the residual at its endpoint,
//! followed by a descent through snapshots back to a target.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::sampling::{check_alpha, random_walk_path, walk_rng};
use crate::sparse::SparseVec;

pub const DEFAULT_ATTEMPT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerRef {
    /// Constant sampler naming a target.
    Terminal(NodeId),
    /// Index into the snapshot arena.
    Snapshot(usize),
}

/// Weighted collection of samplers, append-only until frozen.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    refs: Vec<SamplerRef>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Provenance {
    fn push(&mut self, r: SamplerRef, w: f64) {
        self.refs.push(r);
        self.weights.push(w);
    }

    fn freeze(&mut self) {
        let mut acc = 0.0;
        self.cumulative = self
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
    }

    pub fn entries(&self) -> impl Iterator<Item = (SamplerRef, f64)> + '_ {
        self.refs.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    /// Running sum of the weights in insertion order.
    pub fn total(&self) -> f64 {
        self.weights.iter().fold(0.0, |acc, w| acc + w)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SamplerRef {
        let total = *self
            .cumulative
            .last()
            .expect("sampling an empty provenance");
        let x = rng.random::<f64>() * total;
        let i = self
            .cumulative
            .partition_point(|&c| c <= x)
            .min(self.refs.len() - 1);
        self.refs[i]
    }
}

/// Provenance of `node`'s residual at the moment it pushed.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub node: NodeId,
    pub provenance: Provenance,
}

/// Incremental push state with residual and estimate provenance.
#[derive(Debug, Clone)]
pub struct PathSamplerBuilder<'g> {
    g: &'g Graph,
    alpha: f64,
    targets: Vec<NodeId>,
    estimates: SparseVec,
    residuals: SparseVec,
    live: BTreeMap<NodeId, Provenance>,
    estimate_prov: BTreeMap<NodeId, Provenance>,
    snapshots: Vec<Snapshot>,
    pushes: usize,
}

impl<'g> PathSamplerBuilder<'g> {
    pub fn new(g: &'g Graph, targets: &[NodeId], alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if targets.is_empty() {
            return Err(Error::InvalidParameter("target set is empty".into()));
        }
        let mut ts = targets.to_vec();
        ts.sort_unstable();
        ts.dedup();
        let mut residuals = SparseVec::new();
        let mut live = BTreeMap::new();
        for &t in &ts {
            g.check_node(t)?;
            residuals.set(t, 1.0);
            let mut p = Provenance::default();
            p.push(SamplerRef::Terminal(t), 1.0);
            live.insert(t, p);
        }
        Ok(PathSamplerBuilder {
            g,
            alpha,
            targets: ts,
            estimates: SparseVec::new(),
            residuals,
            live,
            estimate_prov: BTreeMap::new(),
            snapshots: Vec::new(),
            pushes: 0,
        })
    }

    /// One push at `v`; returns the new snapshot id, or `None` when `r[v] = 0`.
    pub fn push(&mut self, v: NodeId) -> Option<usize> {
        let r = self.residuals.take(v);
        if r == 0.0 {
            return None;
        }
        let mut provenance = self.live.remove(&v).unwrap_or_default();
        provenance.freeze();
        let id = self.snapshots.len();
        self.snapshots.push(Snapshot {
            node: v,
            provenance,
        });
        let snap = SamplerRef::Snapshot(id);
        self.estimates.add(v, self.alpha * r);
        self.estimate_prov
            .entry(v)
            .or_default()
            .push(snap, self.alpha * r);
        for (u, w) in self.g.in_neighbors(v) {
            let delta = (1.0 - self.alpha) * w * r;
            self.residuals.add(u, delta);
            self.live.entry(u).or_default().push(snap, delta);
        }
        self.pushes += 1;
        Some(id)
    }

    /// FIFO pushes until every residual is at most `eps_r`.
    pub fn run(&mut self, eps_r: f64) -> Result<()> {
        if !(eps_r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_r must be positive, got {eps_r}"
            )));
        }
        let mut queue: VecDeque<NodeId> = self
            .residuals
            .sorted()
            .into_iter()
            .filter(|&(_, r)| r > eps_r)
            .map(|(v, _)| v)
            .collect();
        let mut queued: std::collections::BTreeSet<NodeId> = queue.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            queued.remove(&v);
            if self.residuals.get(v) <= eps_r {
                continue;
            }
            self.push(v);
            let g = self.g;
            for (u, _) in g.in_neighbors(v) {
                if self.residuals.get(u) > eps_r && queued.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        Ok(())
    }

    /// Whether `r[u]` and `p[u]` equal the running sums of their provenance
    /// weights, bit for bit, for every node.
    pub fn invariants_hold(&self) -> bool {
        let live_ok = (0..self.g.n()).all(|u| {
            let sum = self.live.get(&u).map_or(0.0, Provenance::total);
            sum.to_bits() == self.residuals.get(u).to_bits()
        });
        let est_ok = (0..self.g.n()).all(|u| {
            let sum = self.estimate_prov.get(&u).map_or(0.0, Provenance::total);
            sum.to_bits() == self.estimates.get(u).to_bits()
        });
        live_ok && est_ok
    }

    pub fn residuals(&self) -> &SparseVec {
        &self.residuals
    }

    pub fn estimates(&self) -> &SparseVec {
        &self.estimates
    }

    pub fn live(&self, u: NodeId) -> Option<&Provenance> {
        self.live.get(&u)
    }

    pub fn estimate_provenance(&self, u: NodeId) -> Option<&Provenance> {
        self.estimate_prov.get(&u)
    }

    pub fn snapshot(&self, id: usize) -> &Snapshot {
        &self.snapshots[id]
    }

    pub fn finish(self, eps_r: f64) -> PathSamplerState {
        let mut live = self.live;
        let mut estimate_prov = self.estimate_prov;
        live.values_mut().for_each(Provenance::freeze);
        estimate_prov.values_mut().for_each(Provenance::freeze);
        PathSamplerState {
            alpha: self.alpha,
            eps_r,
            targets: self.targets,
            estimates: self.estimates,
            residuals: self.residuals,
            live,
            estimate_prov,
            snapshots: self.snapshots,
            pushes: self.pushes,
        }
    }
}

/// Immutable result of the provenance-tracking push.
#[derive(Debug, Clone)]
pub struct PathSamplerState {
    pub alpha: f64,
    pub eps_r: f64,
    pub targets: Vec<NodeId>,
    pub estimates: SparseVec,
    pub residuals: SparseVec,
    live: BTreeMap<NodeId, Provenance>,
    estimate_prov: BTreeMap<NodeId, Provenance>,
    snapshots: Vec<Snapshot>,
    pub pushes: usize,
}

impl PathSamplerState {
    pub fn snapshot_count(&self) -> usize {
        self.snapshots.len()
    }
}

pub fn precompute_path_samplers(
    g: &Graph,
    targets: &[NodeId],
    eps_r: f64,
    alpha: f64,
) -> Result<PathSamplerState> {
    let mut b = PathSamplerBuilder::new(g, targets, alpha)?;
    b.run(eps_r)?;
    Ok(b.finish(eps_r))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPath {
    /// Nodes from the source to a target, inclusive.
    pub path: Vec<NodeId>,
    /// Acceptance-loop iterations used.
    pub attempts: usize,
    /// Whether the source was accepted directly through its estimate.
    pub direct: bool,
}

impl SampledPath {
    pub fn target(&self) -> NodeId {
        *self.path.last().expect("paths are non-empty")
    }
}

/// Samples one path from `s`, distributed as a geometric-length walk from
/// `s` conditioned on ending in the target set.
pub fn sample_path_to_target<R: Rng + ?Sized>(
    g: &Graph,
    s: NodeId,
    state: &PathSamplerState,
    attempt_cap: usize,
    rng: &mut R,
) -> Result<SampledPath> {
    g.check_node(s)?;
    let p_s = state.estimates.get(s);
    let denom = p_s + state.eps_r;
    let direct_p = p_s / denom;
    let mut attempts = 0;
    let (mut path, mut current, direct) = loop {
        if attempts >= attempt_cap {
            return Err(Error::AcceptanceCap { cap: attempt_cap });
        }
        attempts += 1;
        let x: f64 = rng.random();
        if x < direct_p {
            let snap = state.estimate_prov[&s].sample(rng);
            break (vec![s], snap, true);
        }
        let walk = random_walk_path(g, s, state.alpha, None, rng);
        let u = *walk.last().expect("walks are non-empty");
        if x - direct_p < state.residuals.get(u) / denom {
            let next = state.live[&u].sample(rng);
            let mut path = walk;
            if let SamplerRef::Snapshot(id) = next {
                path.push(state.snapshots[id].node);
            }
            break (path, next, false);
        }
    };
    while let SamplerRef::Snapshot(id) = current {
        current = state.snapshots[id].provenance.sample(rng);
        if let SamplerRef::Snapshot(next) = current {
            path.push(state.snapshots[next].node);
        }
    }
    Ok(SampledPath {
        path,
        attempts,
        direct,
    })
}

/// Endpoint of [`sample_path_to_target`].
pub fn sample_target_exact<R: Rng + ?Sized>(
    g: &Graph,
    s: NodeId,
    state: &PathSamplerState,
    attempt_cap: usize,
    rng: &mut R,
) -> Result<NodeId> {
    sample_path_to_target(g, s, state, attempt_cap, rng).map(|p| p.target())
}

/// `count` independent paths, path `i` drawn from stream `i`.
pub fn sample_paths(
    g: &Graph,
    s: NodeId,
    state: &PathSamplerState,
    count: usize,
    attempt_cap: usize,
    seed: u64,
) -> Result<Vec<SampledPath>> {
    (0..count)
        .into_par_iter()
        .map(|i| sample_path_to_target(g, s, state, attempt_cap, &mut walk_rng(seed, i as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list_str;
    use crate::oracle::{exact_conditional_path_dist, exact_ppr_from};
    use crate::sampling::{Source, WalkConfig};
    use crate::search::{build_forward_vector, sample_targets, ReverseVector, TargetSamplerIndex};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    const ALPHA: f64 = 0.2;

    fn random_graph(n: usize, extra: usize, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(NodeId, NodeId, f64)> = (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect();
        for _ in 0..extra {
            edges.push((
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0.5..2.0),
            ));
        }
        Graph::from_edges(n, &edges, false).unwrap()
    }

    fn is_valid_walk(g: &Graph, path: &[NodeId]) -> bool {
        path.windows(2)
            .all(|e| g.out_neighbors(e[0]).any(|(v, _)| v == e[1]))
    }

    #[test]
    fn large_eps_keeps_terminal_samplers() {
        let g = random_graph(6, 4, 1);
        let state = precompute_path_samplers(&g, &[1, 4], 1.0, ALPHA).unwrap();
        assert_eq!(state.pushes, 0);
        assert_eq!(
            state.live[&1].entries().collect::<Vec<_>>(),
            vec![(SamplerRef::Terminal(1), 1.0)]
        );
        assert_eq!(
            state.live[&4].entries().collect::<Vec<_>>(),
            vec![(SamplerRef::Terminal(4), 1.0)]
        );
        assert!(precompute_path_samplers(&g, &[1], 0.0, ALPHA).is_err());
    }

    #[test]
    fn single_push_trace() {
        let g = parse_edge_list_str("a t\nb t\nb a\n", false).unwrap();
        let t = g.resolve("t").unwrap();
        let mut b = PathSamplerBuilder::new(&g, &[t], ALPHA).unwrap();
        let id = b.push(t).unwrap();
        let snap = b.snapshot(id);
        assert_eq!(snap.node, t);
        assert_eq!(
            snap.provenance.entries().collect::<Vec<_>>(),
            vec![(SamplerRef::Terminal(t), 1.0)]
        );
        assert_eq!(
            b.estimate_provenance(t)
                .unwrap()
                .entries()
                .collect::<Vec<_>>(),
            vec![(SamplerRef::Snapshot(id), ALPHA)]
        );
        for (u, w) in g.in_neighbors(t) {
            let got: Vec<_> = b.live(u).unwrap().entries().collect();
            assert_eq!(got, vec![(SamplerRef::Snapshot(id), (1.0 - ALPHA) * w)]);
        }
        assert!(b.invariants_hold());
    }

    #[test]
    fn repeated_push_keeps_old_snapshot() {
        // a -> b -> c and c -> b: b pushes, receives again from c, pushes again
        let g = parse_edge_list_str("a b\nb c\nc b\n", false).unwrap();
        let (a, b_node, c) = (0, 1, 2);
        let mut b = PathSamplerBuilder::new(&g, &[b_node], ALPHA).unwrap();
        let first = b.push(b_node).unwrap();
        let first_entries: Vec<_> = b.snapshot(first).provenance.entries().collect();
        let via_c = b.push(c).unwrap();
        let second = b.push(b_node).unwrap();
        assert_ne!(first, second);
        assert_eq!(
            b.snapshot(first).provenance.entries().collect::<Vec<_>>(),
            first_entries
        );
        assert_eq!(
            b.snapshot(second).provenance.entries().collect::<Vec<_>>(),
            vec![(
                SamplerRef::Snapshot(via_c),
                (1.0 - ALPHA) * 1.0 * (1.0 - ALPHA)
            )]
        );
        let a_refs: Vec<_> = b.live(a).unwrap().entries().map(|(r, _)| r).collect();
        assert_eq!(
            a_refs,
            vec![SamplerRef::Snapshot(first), SamplerRef::Snapshot(second)]
        );
        assert!(b.invariants_hold());
    }

    #[test]
    fn two_cycle_paths_have_odd_length() {
        let g = parse_edge_list_str("a b\nb a\n", false).unwrap();
        let state = precompute_path_samplers(&g, &[1], 0.05, ALPHA).unwrap();
        let samples = sample_paths(&g, 0, &state, 100_000, DEFAULT_ATTEMPT_CAP, 3).unwrap();
        let oracle = exact_conditional_path_dist(&g, 0, &[1], ALPHA, 200, 1_000_000).unwrap();
        let mut by_len: BTreeMap<usize, f64> = BTreeMap::new();
        for s in &samples {
            assert_eq!((s.path.len() - 1) % 2, 1);
            *by_len.entry(s.path.len() - 1).or_insert(0.0) += 1.0 / samples.len() as f64;
        }
        let mut exact: BTreeMap<usize, f64> = BTreeMap::new();
        for (p, q) in &oracle.paths {
            *exact.entry(p.len() - 1).or_insert(0.0) += q;
        }
        let keys: std::collections::BTreeSet<usize> =
            by_len.keys().chain(exact.keys()).copied().collect();
        let tv: f64 = keys
            .iter()
            .map(|k| (by_len.get(k).unwrap_or(&0.0) - exact.get(k).unwrap_or(&0.0)).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.01, "tv {tv}");
    }

    #[test]
    fn self_target_is_rejection_sampling() {
        let g = random_graph(5, 5, 2);
        let state = precompute_path_samplers(&g, &[3], 1.0, ALPHA).unwrap();
        let mut rng = walk_rng(1, 0);
        for _ in 0..200 {
            let p = sample_path_to_target(&g, 3, &state, DEFAULT_ATTEMPT_CAP, &mut rng).unwrap();
            assert_eq!(p.path[0], 3);
            assert_eq!(p.target(), 3);
            assert!(!p.direct);
            assert!(is_valid_walk(&g, &p.path));
        }
    }

    #[test]
    fn direct_acceptance_frequency() {
        let g = parse_edge_list_str("s t\nt s\ns x\nx s\n", false).unwrap();
        let (s, t) = (0, 1);
        let state = precompute_path_samplers(&g, &[t], 0.01, ALPHA).unwrap();
        let p_s = state.estimates.get(s);
        assert!(p_s > 0.0);
        let pi = exact_ppr_from(&g, s, ALPHA, 1e-14).unwrap();
        let n = 100_000;
        let samples = sample_paths(&g, s, &state, n, DEFAULT_ATTEMPT_CAP, 5).unwrap();
        let direct = samples.iter().filter(|p| p.direct).count() as f64 / n as f64;
        let expected = p_s / pi[t];
        assert!(
            (direct - expected).abs() <= 0.01,
            "direct {direct} expected {expected}"
        );
        assert!(samples
            .iter()
            .all(|p| p.target() == t && is_valid_walk(&g, &p.path)));
    }

    #[test]
    fn unreachable_target_hits_cap() {
        let g = parse_edge_list_str("a b\nb b\nc a\n", false).unwrap();
        let state = precompute_path_samplers(&g, &[2], 0.1, ALPHA).unwrap();
        let mut rng = walk_rng(0, 0);
        assert!(matches!(
            sample_path_to_target(&g, 0, &state, 1000, &mut rng),
            Err(Error::AcceptanceCap { cap: 1000 })
        ));
    }

    #[test]
    fn single_target_and_two_target_ratio() {
        let g = random_graph(8, 12, 6);
        let state = precompute_path_samplers(&g, &[5], 0.02, ALPHA).unwrap();
        let mut rng = walk_rng(2, 0);
        for _ in 0..100 {
            assert_eq!(
                sample_target_exact(&g, 0, &state, DEFAULT_ATTEMPT_CAP, &mut rng).unwrap(),
                5
            );
        }
        let pi = exact_ppr_from(&g, 0, ALPHA, 1e-14).unwrap();
        let state = precompute_path_samplers(&g, &[2, 6], 0.02, ALPHA).unwrap();
        let samples = sample_paths(&g, 0, &state, 100_000, DEFAULT_ATTEMPT_CAP, 8).unwrap();
        let c2 = samples.iter().filter(|p| p.target() == 2).count() as f64;
        let c6 = samples.len() as f64 - c2;
        let ratio = c2 / c6;
        let exact = pi[2] / pi[6];
        assert!(
            (ratio / exact - 1.0).abs() < 0.02,
            "ratio {ratio} exact {exact}"
        );
    }

    fn chi_square_passes(g: &Graph, s: NodeId, targets: &[NodeId], eps_r: f64, seed: u64) -> bool {
        let state = precompute_path_samplers(g, targets, eps_r, ALPHA).unwrap();
        let n = 100_000;
        let samples = sample_paths(g, s, &state, n, DEFAULT_ATTEMPT_CAP, seed).unwrap();
        let oracle = exact_conditional_path_dist(g, s, targets, ALPHA, 12, 5_000_000).unwrap();
        let mut counts: BTreeMap<&[NodeId], f64> = BTreeMap::new();
        for p in &samples {
            *counts.entry(p.path.as_slice()).or_insert(0.0) += 1.0;
        }
        let mut stat = 0.0;
        let mut bins = 0usize;
        let (mut other_obs, mut other_exp) = (n as f64, n as f64);
        for (path, q) in &oracle.paths {
            let exp = q * n as f64;
            if exp < 5.0 {
                continue;
            }
            let obs = counts.get(path.as_slice()).copied().unwrap_or(0.0);
            stat += (obs - exp).powi(2) / exp;
            other_obs -= obs;
            other_exp -= exp;
            bins += 1;
        }
        if other_exp >= 5.0 {
            stat += (other_obs - other_exp).powi(2) / other_exp;
            bins += 1;
        }
        let critical = ChiSquared::new((bins - 1) as f64)
            .unwrap()
            .inverse_cdf(0.999);
        stat <= critical
    }

    #[test]
    fn path_distribution_chi_square() {
        let g = parse_edge_list_str("a b\nb c\nc a\na c\nc d\nd b\n", false).unwrap();
        for (i, eps_r) in [1.0, 0.1, 0.01, 0.001].into_iter().enumerate() {
            assert!(
                chi_square_passes(&g, 0, &[3], eps_r, 10 + i as u64),
                "eps_r {eps_r}"
            );
            assert!(
                chi_square_passes(&g, 1, &[0, 3], eps_r, 20 + i as u64),
                "eps_r {eps_r}"
            );
        }
    }

    #[test]
    fn attempts_match_acceptance_rate() {
        let g = random_graph(10, 15, 9);
        let targets = [4, 7];
        let pi = exact_ppr_from(&g, 0, ALPHA, 1e-14).unwrap();
        let mass = pi[4] + pi[7];
        for eps_r in [0.2, 0.05, 0.01] {
            let state = precompute_path_samplers(&g, &targets, eps_r, ALPHA).unwrap();
            let samples = sample_paths(&g, 0, &state, 50_000, DEFAULT_ATTEMPT_CAP, 4).unwrap();
            let mean =
                samples.iter().map(|p| p.attempts as f64).sum::<f64>() / samples.len() as f64;
            let expected = (state.estimates.get(0) + eps_r) / mass;
            assert!(
                (mean / expected - 1.0).abs() < 0.1,
                "eps_r {eps_r}: mean {mean} expected {expected}"
            );
            assert!(expected <= 1.0 + eps_r / mass + 1e-12);
        }
    }

    #[test]
    fn agrees_with_approximate_sampler() {
        let g = random_graph(12, 20, 10);
        let targets = [3, 8, 11];
        let s = 0;
        let state = precompute_path_samplers(&g, &targets, 0.01, ALPHA).unwrap();
        let n = 100_000;
        let exact = sample_paths(&g, s, &state, n, DEFAULT_ATTEMPT_CAP, 1).unwrap();
        let cfg = WalkConfig::new(ALPHA, 2).unwrap();
        let x = build_forward_vector(&g, &Source::Node(s), 20_000, &cfg).unwrap();
        let ys: Vec<_> = targets
            .iter()
            .map(|&t| ReverseVector::build(&g, t, 0.01, ALPHA).unwrap())
            .collect();
        let approx = sample_targets(&x, &TargetSamplerIndex::build(&ys).unwrap(), n, 3).unwrap();
        let tv: f64 = targets
            .iter()
            .map(|&t| {
                let a = exact.iter().filter(|p| p.target() == t).count() as f64 / n as f64;
                let b =
                    approx.ranked.iter().find(|r| r.0 == t).map_or(0, |r| r.1) as f64 / n as f64;
                (a - b).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.05, "tv {tv}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn invariants_after_every_push(n in 3usize..15, extra in 0usize..30, seed in 0u64..500, eps_r in 0.001f64..0.5) {
            let g = random_graph(n, extra, seed);
            let targets: Vec<NodeId> = (0..n).filter(|v| v % 3 == (seed as usize) % 3).collect();
            prop_assume!(!targets.is_empty());
            let mut b = PathSamplerBuilder::new(&g, &targets, ALPHA).unwrap();
            let mut steps = 0;
            while let Some((v, _)) = b.residuals().sorted().into_iter().find(|&(_, r)| r > eps_r) {
                b.push(v);
                prop_assert!(b.invariants_hold());
                steps += 1;
                prop_assert!(steps < 100_000);
            }
            prop_assert!(b.residuals().iter().all(|(_, r)| r <= eps_r));
        }

        #[test]
        fn sampled_paths_are_valid_walks(n in 3usize..12, extra in 0usize..20, seed in 0u64..500, eps_r in 0.005f64..0.5) {
            let g = random_graph(n, extra, seed);
            let targets = [n - 1];
            let state = precompute_path_samplers(&g, &targets, eps_r, ALPHA).unwrap();
            let paths = sample_paths(&g, 0, &state, 200, DEFAULT_ATTEMPT_CAP, seed).unwrap();
            for p in paths {
                prop_assert_eq!(p.path[0], 0);
                prop_assert_eq!(p.target(), n - 1);
                prop_assert!(is_valid_walk(&g, &p.path));
            }
        }
    }
}
