//! In-process simulation of sharded precomputation and serving.
//!
//! Forward and reverse vectors live on `2n` coordinates. Shard `i` holds
//! every coordinate `v` with `h(v) = i`; a broker sends one request per shard
//! and adds the returned partial dot products. Partials are exact sums, so
//! the broker's answer is bit-identical to the unsharded dot product for any
//! shard count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::localpush::{forward_push_with, reverse_push, ForwardRule};
use crate::numeric::ExactSum;
use crate::sampling::Source;
use crate::sampling::{check_alpha, WalkConfig};
use crate::search::{build_forward_vector, ForwardVector, ReverseVector};
use crate::sparse::SparseVec;

const SHARD_MAGIC: &[u8; 4] = b"BPSD";
const MANIFEST_MAGIC: &[u8; 4] = b"BPMF";
const FORMAT_VERSION: u32 = 1;

type ShardFn = Arc<dyn Fn(usize) -> usize + Send + Sync>;

/// Coordinate to shard assignment. Defaults to `v mod k`.
#[derive(Clone)]
pub struct Sharding {
    k: usize,
    custom: Option<ShardFn>,
}

impl fmt::Debug for Sharding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sharding")
            .field("k", &self.k)
            .field("custom", &self.custom.is_some())
            .finish()
    }
}

impl Sharding {
    pub fn modulo(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "shard count must be at least 1".into(),
            ));
        }
        Ok(Sharding { k, custom: None })
    }

    /// `h` must map every coordinate into `0..k`.
    pub fn custom(k: usize, h: impl Fn(usize) -> usize + Send + Sync + 'static) -> Result<Self> {
        let mut s = Sharding::modulo(k)?;
        s.custom = Some(Arc::new(h));
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn shard(&self, coord: usize) -> usize {
        match &self.custom {
            None => coord % self.k,
            Some(h) => {
                let i = h(coord);
                assert!(
                    i < self.k,
                    "sharding function returned {i} for k = {}",
                    self.k
                );
                i
            }
        }
    }
}

/// Local slices of forward and reverse vectors, keyed by owner node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Shard {
    pub id: usize,
    forward: BTreeMap<NodeId, Vec<(usize, f64)>>,
    reverse: BTreeMap<NodeId, Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShardRequest {
    /// `sum_v x^s(v) y^t(v)` over local coordinates.
    Pair { s: NodeId, t: NodeId },
    /// `sum_u r_s(u) sum_v x~^u(v) y^t(v)` over local coordinates.
    Shared {
        t: NodeId,
        residuals: Vec<(NodeId, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShardResponse {
    pub shard: usize,
    pub partial: ExactSum,
}

fn merge_join(a: &[(usize, f64)], b: &[(usize, f64)], scale: f64, acc: &mut ExactSum) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc.add(scale * a[i].1 * b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
}

impl Shard {
    pub fn handle(&self, req: &ShardRequest) -> ShardResponse {
        let mut partial = ExactSum::new();
        match req {
            ShardRequest::Pair { s, t } => {
                if let (Some(x), Some(y)) = (self.forward.get(s), self.reverse.get(t)) {
                    merge_join(x, y, 1.0, &mut partial);
                }
            }
            ShardRequest::Shared { t, residuals } => {
                if let Some(y) = self.reverse.get(t) {
                    for (u, r) in residuals {
                        if let Some(x) = self.forward.get(u) {
                            merge_join(x, y, *r, &mut partial);
                        }
                    }
                }
            }
        }
        ShardResponse {
            shard: self.id,
            partial,
        }
    }

    pub fn forward_slice(&self, owner: NodeId) -> &[(usize, f64)] {
        self.forward.get(&owner).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn reverse_slice(&self, owner: NodeId) -> &[(usize, f64)] {
        self.reverse.get(&owner).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn nnz(&self) -> usize {
        self.forward
            .values()
            .chain(self.reverse.values())
            .map(Vec::len)
            .sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::with_header(SHARD_MAGIC, FORMAT_VERSION);
        w.put_usize(self.id);
        for part in [&self.forward, &self.reverse] {
            w.put_usize(part.len());
            for (owner, coords) in part {
                w.put_usize(*owner);
                let (ids, vals): (Vec<usize>, Vec<f64>) = coords.iter().copied().unzip();
                w.put_usizes(&ids);
                w.put_f64s(&vals);
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (mut r, version) = ByteReader::read_header(bytes, SHARD_MAGIC)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported shard version {version}"
            )));
        }
        let id = r.get_usize()?;
        let mut parts = [BTreeMap::new(), BTreeMap::new()];
        for part in parts.iter_mut() {
            let len = r.get_usize()?;
            for _ in 0..len {
                let owner = r.get_usize()?;
                let ids = r.get_usizes()?;
                let vals = r.get_f64s()?;
                if ids.len() != vals.len() || ids.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Format("corrupt shard slice".into()));
                }
                part.insert(owner, ids.into_iter().zip(vals).collect());
            }
        }
        r.finish()?;
        let [forward, reverse] = parts;
        Ok(Shard {
            id,
            forward,
            reverse,
        })
    }
}

/// Partitions every coordinate of every vector onto shard `h(v)`.
pub fn shard_vectors(
    forward: &[(NodeId, ForwardVector)],
    reverse: &[ReverseVector],
    sharding: &Sharding,
) -> Vec<Shard> {
    let mut shards: Vec<Shard> = (0..sharding.k())
        .map(|id| Shard {
            id,
            ..Shard::default()
        })
        .collect();
    for (owner, x) in forward {
        for (c, v) in x.coords() {
            shards[sharding.shard(c)]
                .forward
                .entry(*owner)
                .or_default()
                .push((c, v));
        }
    }
    for y in reverse {
        for (c, v) in y.coords() {
            shards[sharding.shard(c)]
                .reverse
                .entry(y.target)
                .or_default()
                .push((c, v));
        }
    }
    shards
}

/// Union of one owner's slices across shards, in coordinate order.
pub fn reassemble(shards: &[Shard], owner: NodeId, reverse: bool) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = shards
        .iter()
        .flat_map(|s| {
            if reverse {
                s.reverse_slice(owner)
            } else {
                s.forward_slice(owner)
            }
            .iter()
            .copied()
        })
        .collect();
    out.sort_by_key(|&(c, _)| c);
    out
}

/// Exactly rounded `sum_v x(v) y(v)`.
pub fn exact_dot(x: &ForwardVector, y: &ReverseVector) -> f64 {
    let mut acc = ExactSum::new();
    merge_join(&x.coords(), &y.coords(), 1.0, &mut acc);
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BrokerQuery {
    pub s: NodeId,
    pub t: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrokerAnswer {
    pub estimate: f64,
    /// Rounded partial from each shard, in shard order.
    pub partials: Vec<f64>,
}

/// Forward estimate and residual of a walk-sharing source.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForwardEntry {
    pub estimates: SparseVec,
    pub residuals: SparseVec,
}

#[derive(Debug, Clone)]
pub struct Broker {
    shards: Vec<Shard>,
    known_forward: BTreeSet<NodeId>,
    known_reverse: BTreeSet<NodeId>,
    /// Present in walk-sharing mode.
    forward_store: Option<BTreeMap<NodeId, ForwardEntry>>,
}

impl Broker {
    /// Direct mode: every source owns a stored forward vector.
    pub fn direct(
        forward: &[(NodeId, ForwardVector)],
        reverse: &[ReverseVector],
        sharding: &Sharding,
    ) -> Self {
        Broker {
            shards: shard_vectors(forward, reverse, sharding),
            known_forward: forward.iter().map(|(s, _)| *s).collect(),
            known_reverse: reverse.iter().map(|y| y.target).collect(),
            forward_store: None,
        }
    }

    pub fn shards(&self) -> &[Shard] {
        &self.shards
    }

    pub fn estimate(&self, q: BrokerQuery) -> Result<BrokerAnswer> {
        broker_estimate(q, self)
    }
}

/// Fans the query out to every shard and adds the partials in shard order.
pub fn broker_estimate(q: BrokerQuery, broker: &Broker) -> Result<BrokerAnswer> {
    if !broker.known_reverse.contains(&q.t) {
        return Err(Error::UnknownNode(format!(
            "no reverse vector for target {}",
            q.t
        )));
    }
    let mut total = ExactSum::new();
    let req = match &broker.forward_store {
        None => {
            if !broker.known_forward.contains(&q.s) {
                return Err(Error::UnknownNode(format!(
                    "no forward vector for source {}",
                    q.s
                )));
            }
            ShardRequest::Pair { s: q.s, t: q.t }
        }
        Some(store) => {
            let entry = store.get(&q.s).ok_or_else(|| {
                Error::UnknownNode(format!("no forward residuals for source {}", q.s))
            })?;
            total.add(entry.estimates.get(q.t));
            ShardRequest::Shared {
                t: q.t,
                residuals: entry.residuals.sorted(),
            }
        }
    };
    let responses: Vec<ShardResponse> = broker.shards.par_iter().map(|s| s.handle(&req)).collect();
    let partials = responses.iter().map(|r| r.partial.value()).collect();
    for r in &responses {
        total.merge(&r.partial);
    }
    Ok(BrokerAnswer {
        estimate: total.value(),
        partials,
    })
}

/// Parameters of the walk-sharing precomputation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharingParams {
    pub alpha: f64,
    pub delta: f64,
    pub d_max: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub r_reverse: f64,
    pub r_forward: f64,
    /// Walks per node whose out-degree is at most `d_max`.
    pub shared_walks: usize,
    /// Walks per node whose out-degree exceeds `d_max`.
    pub full_walks: usize,
}

impl SharingParams {
    /// `r_r = (c2^2 delta / (c1 c3))^(1/3)`, `r_f = (c3^2 delta / (c1 c2))^(1/3)`,
    /// `n_w = c1 r_f r_r / delta`, full count `c1 r_r / delta`.
    pub fn balanced(
        alpha: f64,
        delta: f64,
        d_max: usize,
        c1: f64,
        c2: f64,
        c3: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        for (name, v) in [("delta", delta), ("c1", c1), ("c2", c2), ("c3", c3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let r_reverse = (c2 * c2 * delta / (c1 * c3)).cbrt();
        let r_forward = (c3 * c3 * delta / (c1 * c2)).cbrt();
        Ok(SharingParams {
            alpha,
            delta,
            d_max,
            c1,
            c2,
            c3,
            r_reverse,
            r_forward,
            shared_walks: walk_count(c1 * r_forward * r_reverse / delta),
            full_walks: walk_count(c1 * r_reverse / delta),
        })
    }

    pub fn with_thresholds(mut self, r_reverse: f64, r_forward: f64) -> Self {
        self.r_reverse = r_reverse;
        self.r_forward = r_forward;
        self
    }

    pub fn with_walks(mut self, shared: usize, full: usize) -> Self {
        self.shared_walks = shared.max(1);
        self.full_walks = full.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.r_reverse > 0.0 && self.r_forward > 0.0) {
            return Err(Error::InvalidParameter(
                "push thresholds must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn walk_count(x: f64) -> usize {
    (x.ceil() as usize).max(1)
}

/// `w max(delta, pi[t]) / c1`.
pub fn variable_delta_r_max(w: usize, delta: f64, pi_t: f64, c1: f64) -> f64 {
    w as f64 * delta.max(pi_t) / c1
}

/// Per-node forward residuals, walk vectors and reverse vectors.
#[derive(Debug, Clone)]
pub struct SharedWalkStore {
    pub params: SharingParams,
    pub n: usize,
    pub forward: Vec<ForwardEntry>,
    pub walk_vectors: Vec<ForwardVector>,
    pub full_walk: Vec<bool>,
    pub reverse: Vec<ReverseVector>,
}

fn node_seed(seed: u64, v: NodeId) -> u64 {
    seed ^ (v as u64)
        .wrapping_add(1)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Forward push that never pushes from nodes above `d_max`, stopping once
/// every pushable residual is at most `r_forward`.
pub fn shared_forward_push(g: &Graph, s: NodeId, params: &SharingParams) -> ForwardEntry {
    let rule = ForwardRule {
        threshold: params.r_forward,
        degree_normalized: false,
        max_degree: Some(params.d_max),
    };
    let push = forward_push_with(g, s, params.alpha, rule);
    ForwardEntry {
        estimates: push.estimates,
        residuals: push.residuals,
    }
}

pub fn build_shared_walk_vectors(
    g: &Graph,
    params: &SharingParams,
    seed: u64,
) -> Result<SharedWalkStore> {
    params.validate()?;
    let per_node: Vec<(ForwardEntry, ForwardVector, bool, ReverseVector)> = (0..g.n())
        .into_par_iter()
        .map(|v| {
            let forward = shared_forward_push(g, v, params);
            let full = g.out_degree(v) > params.d_max;
            let walks = if full {
                params.full_walks
            } else {
                params.shared_walks
            };
            let cfg = WalkConfig::new(params.alpha, node_seed(seed, v))?;
            let x = build_forward_vector(g, &Source::Node(v), walks, &cfg)?;
            let y = ReverseVector::build(g, v, params.r_reverse, params.alpha)?;
            Ok((forward, x, full, y))
        })
        .collect::<Result<_>>()?;
    let mut store = SharedWalkStore {
        params: *params,
        n: g.n(),
        forward: Vec::with_capacity(g.n()),
        walk_vectors: Vec::with_capacity(g.n()),
        full_walk: Vec::with_capacity(g.n()),
        reverse: Vec::with_capacity(g.n()),
    };
    for (f, x, full, y) in per_node {
        store.forward.push(f);
        store.walk_vectors.push(x);
        store.full_walk.push(full);
        store.reverse.push(y);
    }
    Ok(store)
}

impl SharedWalkStore {
    /// `p_s(t) + sum_u r_s(u) <x~^u, y^t>`, exactly rounded.
    pub fn estimate(&self, s: NodeId, t: NodeId) -> Result<f64> {
        if s >= self.n || t >= self.n {
            return Err(Error::NodeOutOfRange(s.max(t)));
        }
        let entry = &self.forward[s];
        let y = self.reverse[t].coords();
        let mut acc = ExactSum::new();
        acc.add(entry.estimates.get(t));
        for (u, r) in entry.residuals.sorted() {
            merge_join(&self.walk_vectors[u].coords(), &y, r, &mut acc);
        }
        Ok(acc.value())
    }

    pub fn broker(&self, sharding: &Sharding) -> Broker {
        let forward: Vec<(NodeId, ForwardVector)> =
            self.walk_vectors.iter().cloned().enumerate().collect();
        Broker {
            shards: shard_vectors(&forward, &self.reverse, sharding),
            known_forward: (0..self.n).collect(),
            known_reverse: (0..self.n).collect(),
            forward_store: Some(self.forward.iter().cloned().enumerate().collect()),
        }
    }

    pub fn manifest(&self, k: usize) -> Manifest {
        Manifest {
            params: self.params,
            n: self.n,
            k,
            forward: self.forward.clone(),
            full_walk: self.full_walk.clone(),
        }
    }

    /// Writes `manifest.bin` and one `shard-NNN.bin` per shard into `dir`.
    pub fn save_sharded(&self, dir: &Path, sharding: &Sharding) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("manifest.bin"),
            self.manifest(sharding.k()).to_bytes(),
        )?;
        for shard in self.broker(sharding).shards {
            std::fs::write(
                dir.join(format!("shard-{:03}.bin", shard.id)),
                shard.to_bytes(),
            )?;
        }
        Ok(())
    }
}

/// Forward residual store and parameters of a sharded walk-sharing build.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub params: SharingParams,
    pub n: usize,
    pub k: usize,
    pub forward: Vec<ForwardEntry>,
    pub full_walk: Vec<bool>,
}

impl Manifest {
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut w = ByteWriter::with_header(MANIFEST_MAGIC, FORMAT_VERSION);
        for x in [p.alpha, p.delta, p.c1, p.c2, p.c3, p.r_reverse, p.r_forward] {
            w.put_f64(x);
        }
        for x in [p.d_max, p.shared_walks, p.full_walks, self.n, self.k] {
            w.put_usize(x);
        }
        for (entry, &full) in self.forward.iter().zip(&self.full_walk) {
            w.put_u8(full as u8);
            for part in [&entry.estimates, &entry.residuals] {
                let (ids, vals): (Vec<usize>, Vec<f64>) = part.sorted().into_iter().unzip();
                w.put_usizes(&ids);
                w.put_f64s(&vals);
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (mut r, version) = ByteReader::read_header(bytes, MANIFEST_MAGIC)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported manifest version {version}"
            )));
        }
        let mut f = [0.0; 7];
        for x in f.iter_mut() {
            *x = r.get_f64()?;
        }
        let mut u = [0usize; 5];
        for x in u.iter_mut() {
            *x = r.get_usize()?;
        }
        let [alpha, delta, c1, c2, c3, r_reverse, r_forward] = f;
        let [d_max, shared_walks, full_walks, n, k] = u;
        let params = SharingParams {
            alpha,
            delta,
            d_max,
            c1,
            c2,
            c3,
            r_reverse,
            r_forward,
            shared_walks,
            full_walks,
        };
        let mut forward = Vec::new();
        let mut full_walk = Vec::new();
        for _ in 0..n {
            full_walk.push(r.get_u8()? != 0);
            let mut parts = [SparseVec::new(), SparseVec::new()];
            for part in parts.iter_mut() {
                let ids = r.get_usizes()?;
                let vals = r.get_f64s()?;
                if ids.len() != vals.len() || ids.iter().any(|&v| v >= n) {
                    return Err(Error::Format("corrupt forward entry".into()));
                }
                *part = ids.into_iter().zip(vals).collect();
            }
            let [estimates, residuals] = parts;
            forward.push(ForwardEntry {
                estimates,
                residuals,
            });
        }
        r.finish()?;
        Ok(Manifest {
            params,
            n,
            k,
            forward,
            full_walk,
        })
    }
}

/// Loads a directory written by [`SharedWalkStore::save_sharded`].
pub fn load_sharded(dir: &Path) -> Result<(Manifest, Broker)> {
    let manifest = Manifest::from_bytes(&std::fs::read(dir.join("manifest.bin"))?)?;
    let mut shards = Vec::with_capacity(manifest.k);
    for i in 0..manifest.k {
        let shard = Shard::from_bytes(&std::fs::read(dir.join(format!("shard-{i:03}.bin")))?)?;
        if shard.id != i {
            return Err(Error::Format(format!(
                "shard file {i} holds shard {}",
                shard.id
            )));
        }
        shards.push(shard);
    }
    let broker = Broker {
        shards,
        known_forward: (0..manifest.n).collect(),
        known_reverse: (0..manifest.n).collect(),
        forward_store: Some(manifest.forward.iter().cloned().enumerate().collect()),
    };
    Ok((manifest, broker))
}

/// Storage model with walk, reverse-residual and forward-residual constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StorageModel {
    pub n: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta: f64,
}

impl StorageModel {
    /// `n c1 r_r / delta + n c2 / r_r`.
    pub fn unshared(&self, r_reverse: f64) -> f64 {
        self.n * self.c1 * r_reverse / self.delta + self.n * self.c2 / r_reverse
    }

    pub fn unshared_optimal_r(&self) -> f64 {
        (self.c2 * self.delta / self.c1).sqrt()
    }

    /// `2 n sqrt(c1 c2 / delta)`.
    pub fn unshared_optimum(&self) -> f64 {
        2.0 * self.n * (self.c1 * self.c2 / self.delta).sqrt()
    }

    /// `n c3 / r_f + n c1 r_r r_f / delta + n c2 / r_r`.
    pub fn shared(&self, r_reverse: f64, r_forward: f64) -> f64 {
        self.n * self.c3 / r_forward
            + self.n * self.c1 * r_reverse * r_forward / self.delta
            + self.n * self.c2 / r_reverse
    }

    /// `3 n (c1 c2 c3 / delta)^(1/3)`.
    pub fn shared_optimum(&self) -> f64 {
        3.0 * self.n * (self.c1 * self.c2 * self.c3 / self.delta).cbrt()
    }

    /// Full walks for `count` nodes above the degree cap.
    pub fn high_degree(&self, count: f64, r_reverse: f64) -> f64 {
        count * self.c1 * r_reverse / self.delta
    }
}

/// Least-squares fit of `size = c / r` through the origin.
pub fn fit_inverse(samples: &[(f64, f64)]) -> f64 {
    let num: f64 = samples.iter().map(|&(r, size)| size / r).sum();
    let den: f64 = samples.iter().map(|&(r, _)| 1.0 / (r * r)).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Mean residual sizes over `nodes` at each threshold, then fitted `c2`, `c3`.
pub fn fit_storage_constants(
    g: &Graph,
    alpha: f64,
    nodes: &[NodeId],
    reverse_thresholds: &[f64],
    forward_thresholds: &[f64],
    d_max: usize,
) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("no nodes to sample".into()));
    }
    let mean = |sizes: Vec<usize>| sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    let mut rev = Vec::new();
    for &r in reverse_thresholds {
        let sizes = nodes
            .par_iter()
            .map(|&t| reverse_push(g, t, r, alpha).map(|p| p.residuals.nnz()))
            .collect::<Result<Vec<_>>>()?;
        rev.push((r, mean(sizes)));
    }
    let mut fwd = Vec::new();
    for &r in forward_thresholds {
        let params =
            SharingParams::balanced(alpha, 1.0, d_max, 1.0, 1.0, 1.0)?.with_thresholds(1.0, r);
        let sizes: Vec<usize> = nodes
            .par_iter()
            .map(|&s| shared_forward_push(g, s, &params).residuals.nnz())
            .collect();
        fwd.push((r, mean(sizes)));
    }
    Ok((fit_inverse(&rev), fit_inverse(&fwd)))
}

#[derive(Debug, Clone, Serialize)]
pub struct StorageReport {
    pub measured_walks: usize,
    pub measured_walk_nnz: usize,
    pub measured_reverse: usize,
    pub measured_forward: usize,
    pub measured_total: usize,
    pub high_degree_nodes: usize,
    pub model_walks: f64,
    pub model_reverse: f64,
    pub model_forward: f64,
    pub model_total: f64,
}

/// Measured non-zeros of a build next to the model at the build's thresholds.
pub fn storage_report(store: &SharedWalkStore, model: &StorageModel) -> StorageReport {
    let p = &store.params;
    let high = store.full_walk.iter().filter(|&&f| f).count();
    let shared_nodes = store.n - high;
    let measured_walks = store
        .full_walk
        .iter()
        .map(|&f| if f { p.full_walks } else { p.shared_walks })
        .sum();
    let measured_walk_nnz = store
        .walk_vectors
        .iter()
        .map(|x| x.empirical_part().nnz())
        .sum();
    let measured_reverse = store.reverse.iter().map(|y| y.residuals().nnz()).sum();
    let measured_forward = store.forward.iter().map(|f| f.residuals.nnz()).sum();
    let model_walks = shared_nodes as f64 * model.c1 * p.r_reverse * p.r_forward / model.delta
        + model.high_degree(high as f64, p.r_reverse);
    let model_reverse = model.n * model.c2 / p.r_reverse;
    let model_forward = model.n * model.c3 / p.r_forward;
    StorageReport {
        measured_walks,
        measured_walk_nnz,
        measured_reverse,
        measured_forward,
        measured_total: measured_walks + measured_reverse + measured_forward,
        high_degree_nodes: high,
        model_walks,
        model_reverse,
        model_forward,
        model_total: model_walks + model_reverse + model_forward,
    }
}
