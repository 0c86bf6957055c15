//! Seeded random walks, geometric walk lengths and alias tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

pub type WalkRng = ChaCha8Rng;

/// Walks are generated in chunks of this many per parallel task.
pub(crate) const WALK_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub alpha: f64,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(alpha: f64, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, seed })
    }

    /// Generator for walk number `index`. Each index gets its own stream,
    /// so walks can be produced in any order or in parallel.
    pub fn rng(&self, index: u64) -> WalkRng {
        walk_rng(self.seed, index)
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

pub fn walk_rng(seed: u64, stream: u64) -> WalkRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Walk length L with P[L = l] = (1 - alpha)^l * alpha, l = 0, 1, ...
#[inline]
pub fn sample_geometric_length<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> usize {
    let geo = Geometric::new(alpha).expect("alpha checked by caller");
    geo.sample(rng) as usize
}

/// Start of a walk: a single node or a distribution over nodes.
#[derive(Debug, Clone)]
pub enum Source {
    Node(NodeId),
    Distribution(SourceDistribution),
}

#[derive(Debug, Clone)]
pub struct SourceDistribution {
    entries: Vec<(NodeId, f64)>,
    table: AliasTable<NodeId>,
}

impl Source {
    /// Distribution proportional to the given non-negative weights.
    /// Entries for the same node are merged.
    pub fn distribution(weights: &[(NodeId, f64)]) -> Result<Source> {
        let mut merged: std::collections::BTreeMap<NodeId, f64> = Default::default();
        for &(v, w) in weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "source weight {w} for node {v}"
                )));
            }
            *merged.entry(v).or_insert(0.0) += w;
        }
        let total: f64 = merged.values().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroWeights);
        }
        let entries: Vec<(NodeId, f64)> = merged
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .map(|(v, w)| (v, w / total))
            .collect();
        let table = AliasTable::new(entries.clone())?;
        Ok(Source::Distribution(SourceDistribution { entries, table }))
    }

    pub fn uniform(n: usize) -> Result<Source> {
        let w: Vec<(NodeId, f64)> = (0..n).map(|v| (v, 1.0)).collect();
        Source::distribution(&w)
    }

    /// Non-zero entries in ascending node order, summing to one.
    pub fn entries(&self) -> Vec<(NodeId, f64)> {
        match self {
            Source::Node(v) => vec![(*v, 1.0)],
            Source::Distribution(d) => d.entries.clone(),
        }
    }

    pub fn weight(&self, v: NodeId) -> f64 {
        match self {
            Source::Node(s) => {
                if *s == v {
                    1.0
                } else {
                    0.0
                }
            }
            Source::Distribution(d) => d
                .entries
                .binary_search_by_key(&v, |&(u, _)| u)
                .map(|i| d.entries[i].1)
                .unwrap_or(0.0),
        }
    }

    #[inline]
    pub fn sample_start<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        match self {
            Source::Node(v) => *v,
            Source::Distribution(d) => *d.table.sample(rng),
        }
    }

    pub fn check(&self, g: &Graph) -> Result<()> {
        for (v, _) in self.entries() {
            g.check_node(v)?;
        }
        Ok(())
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (v, w) in self.entries() {
            out[v] += w;
        }
        out
    }
}

impl From<NodeId> for Source {
    fn from(v: NodeId) -> Self {
        Source::Node(v)
    }
}

/// Endpoint of a geometric-length walk. A walk reaching a node with no
/// out-edges stops there.
#[inline]
pub fn random_walk_endpoint<R: Rng + ?Sized>(
    g: &Graph,
    start: &Source,
    alpha: f64,
    rng: &mut R,
) -> NodeId {
    let mut v = start.sample_start(rng);
    let len = sample_geometric_length(alpha, rng);
    for _ in 0..len {
        match g.sample_out_neighbor(v, rng) {
            Some(u) => v = u,
            None => break,
        }
    }
    v
}

/// Visited nodes of a walk, including the start. With `fixed_len` the walk
/// takes exactly that many steps (fewer only at a dangling node); otherwise
/// its length is geometric.
pub fn random_walk_path<R: Rng + ?Sized>(
    g: &Graph,
    start: NodeId,
    alpha: f64,
    fixed_len: Option<usize>,
    rng: &mut R,
) -> Vec<NodeId> {
    let len = match fixed_len {
        Some(l) => l,
        None => sample_geometric_length(alpha, rng),
    };
    let mut path = Vec::with_capacity(len + 1);
    path.push(start);
    let mut v = start;
    for _ in 0..len {
        match g.sample_out_neighbor(v, rng) {
            Some(u) => {
                v = u;
                path.push(u);
            }
            None => break,
        }
    }
    path
}

/// Endpoints of `count` independent walks, walk `i` drawn from stream `i`.
/// The result is identical for any thread count.
pub fn walk_endpoints(g: &Graph, start: &Source, cfg: &WalkConfig, count: usize) -> Vec<NodeId> {
    let chunks = count.div_ceil(WALK_CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let lo = c * WALK_CHUNK;
            let hi = (lo + WALK_CHUNK).min(count);
            (lo..hi).map(move |i| {
                let mut rng = cfg.rng(i as u64);
                random_walk_endpoint(g, start, cfg.alpha, &mut rng)
            })
        })
        .collect()
}

/// Sum of `f(endpoint)` over `count` walks, walk `i` drawn from stream `i`.
/// Partial sums are formed per fixed-size chunk and combined in chunk order,
/// so the result is identical for any thread count.
pub fn sum_over_walks<F>(g: &Graph, start: &Source, cfg: &WalkConfig, count: usize, f: F) -> f64
where
    F: Fn(NodeId) -> f64 + Sync,
{
    let chunks = count.div_ceil(WALK_CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * WALK_CHUNK;
            let hi = (lo + WALK_CHUNK).min(count);
            let mut acc = 0.0;
            for i in lo..hi {
                let mut rng = cfg.rng(i as u64);
                acc += f(random_walk_endpoint(g, start, cfg.alpha, &mut rng));
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Discrete distribution with O(1) sampling (Vose's alias method).
#[derive(Debug, Clone)]
pub struct AliasTable<T> {
    prob: Vec<f64>,
    alias: Vec<usize>,
    payload: Vec<T>,
    total_weight: f64,
}

impl<T> AliasTable<T> {
    pub fn new(items: Vec<(T, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::ZeroWeights);
        }
        let mut payload = Vec::with_capacity(items.len());
        let mut weights = Vec::with_capacity(items.len());
        for (item, w) in items {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "alias weight {w} is not a finite non-negative number"
                )));
            }
            payload.push(item);
            weights.push(w);
        }
        let total_weight: f64 = weights.iter().sum();
        if !(total_weight > 0.0) {
            return Err(Error::ZeroWeights);
        }

        let k = weights.len();
        let mut scaled: Vec<f64> = weights
            .iter()
            .map(|w| w * k as f64 / total_weight)
            .collect();
        let mut prob = vec![0.0; k];
        let mut alias: Vec<usize> = (0..k).collect();
        let mut small = Vec::new();
        let mut large = Vec::new();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        let heaviest = (0..k)
            .max_by(|&a, &b| weights[a].total_cmp(&weights[b]))
            .expect("non-empty");
        for i in large.into_iter().chain(small) {
            if weights[i] > 0.0 {
                prob[i] = 1.0;
            } else {
                prob[i] = 0.0;
                alias[i] = heaviest;
            }
        }
        Ok(Self {
            prob,
            alias,
            payload,
            total_weight,
        })
    }

    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &T {
        &self.payload[self.sample_index(rng)]
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    pub fn payload(&self) -> &[T] {
        &self.payload
    }

    /// Exact sampling probability of each item implied by the table.
    pub fn probabilities(&self) -> Vec<f64> {
        let k = self.prob.len() as f64;
        let mut out = vec![0.0; self.prob.len()];
        for i in 0..self.prob.len() {
            out[i] += self.prob[i] / k;
            out[self.alias[i]] += (1.0 - self.prob[i]) / k;
        }
        out
    }
}

pub fn build_alias<T>(weights: Vec<(T, f64)>) -> Result<AliasTable<T>> {
    AliasTable::new(weights)
}
