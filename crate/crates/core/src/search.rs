//! Personalized PageRank search over keyword-filtered target sets.
//!
//! A query source is summarized by a forward vector over `2n` coordinates
//! (source weights at `v`, walk-endpoint frequencies at `n + v`) and each
//! target by a reverse vector (push estimates at `v`, residuals at `n + v`).
//! The estimate of `pi_s[t]` is their dot product.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::bippr::empirical_distribution;
use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::localpush::reverse_push;
use crate::oracle::DenseDist;
use crate::sampling::{
    build_alias, check_alpha, walk_endpoints, walk_rng, AliasTable, Source, WalkConfig,
};
use crate::sparse::SparseVec;

pub const DEFAULT_SEARCH_C: f64 = 20.0;
pub const DEFAULT_BETA: f64 = 0.77;

const INDEX_MAGIC: &[u8; 4] = b"BPSI";
const INDEX_VERSION: u32 = 1;

/// `(e_s, empirical endpoint distribution)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardVector {
    n: usize,
    source: Vec<(NodeId, f64)>,
    empirical: SparseVec,
    walks: usize,
}

impl ForwardVector {
    pub fn from_parts(
        n: usize,
        source: Vec<(NodeId, f64)>,
        empirical: SparseVec,
        walks: usize,
    ) -> Self {
        let mut source = source;
        source.retain(|&(_, w)| w != 0.0);
        source.sort_by_key(|&(v, _)| v);
        ForwardVector {
            n,
            source,
            empirical,
            walks,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn walks(&self) -> usize {
        self.walks
    }

    pub fn source_part(&self) -> &[(NodeId, f64)] {
        &self.source
    }

    pub fn empirical_part(&self) -> &SparseVec {
        &self.empirical
    }

    /// Non-zero coordinates in ascending order.
    pub fn coords(&self) -> Vec<(usize, f64)> {
        let mut out = self.source.clone();
        out.extend(
            self.empirical
                .sorted()
                .into_iter()
                .map(|(v, x)| (self.n + v, x)),
        );
        out
    }
}

/// `(p^t, r^t)` from a reverse push at `r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseVector {
    pub target: NodeId,
    pub r_max: f64,
    n: usize,
    estimates: SparseVec,
    residuals: SparseVec,
}

impl ReverseVector {
    pub fn from_parts(
        n: usize,
        target: NodeId,
        r_max: f64,
        estimates: SparseVec,
        residuals: SparseVec,
    ) -> Self {
        ReverseVector {
            target,
            r_max,
            n,
            estimates,
            residuals,
        }
    }

    pub fn build(g: &Graph, target: NodeId, r_max: f64, alpha: f64) -> Result<Self> {
        let push = reverse_push(g, target, r_max, alpha)?;
        Ok(ReverseVector::from_parts(
            g.n(),
            target,
            r_max,
            push.estimates,
            push.residuals,
        ))
    }

    pub fn estimates(&self) -> &SparseVec {
        &self.estimates
    }

    pub fn residuals(&self) -> &SparseVec {
        &self.residuals
    }

    pub fn get(&self, coord: usize) -> f64 {
        if coord < self.n {
            self.estimates.get(coord)
        } else {
            self.residuals.get(coord - self.n)
        }
    }

    pub fn nnz(&self) -> usize {
        self.estimates.nnz() + self.residuals.nnz()
    }

    pub fn coords(&self) -> Vec<(usize, f64)> {
        let mut out = self.estimates.sorted();
        out.extend(
            self.residuals
                .sorted()
                .into_iter()
                .map(|(v, x)| (self.n + v, x)),
        );
        out
    }
}

/// `sum_v x[v] y[v]`, accumulated over the support of `x` in ascending order.
pub fn dot(x: &ForwardVector, y: &ReverseVector) -> f64 {
    let mut acc = 0.0;
    for (c, xv) in x.coords() {
        let yv = y.get(c);
        if yv != 0.0 {
            acc += xv * yv;
        }
    }
    acc
}

/// Samples `w` walks from `source` and forms the forward vector.
pub fn build_forward_vector(
    g: &Graph,
    source: &Source,
    w: usize,
    cfg: &WalkConfig,
) -> Result<ForwardVector> {
    if w == 0 {
        return Err(Error::InvalidParameter(
            "walk count must be at least 1".into(),
        ));
    }
    source.check(g)?;
    let endpoints = walk_endpoints(g, source, cfg, w);
    Ok(ForwardVector::from_parts(
        g.n(),
        source.entries(),
        empirical_distribution(&endpoints),
        w,
    ))
}

/// Sorts by descending score, ties by ascending node id.
pub fn rank<S: PartialOrd + Copy>(mut scored: Vec<(NodeId, S)>) -> Vec<(NodeId, S)> {
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    scored
}

pub fn score_targets_direct(x: &ForwardVector, vectors: &[ReverseVector]) -> Vec<(NodeId, f64)> {
    rank(vectors.iter().map(|y| (y.target, dot(x, y))).collect())
}

/// Builds every reverse vector on demand, then scores directly.
pub fn score_targets_basic(
    g: &Graph,
    source: &Source,
    targets: &[NodeId],
    r_max: f64,
    walks: usize,
    cfg: &WalkConfig,
) -> Result<Vec<(NodeId, f64)>> {
    let vectors = build_reverse_vectors(g, targets, r_max, cfg.alpha)?;
    let x = build_forward_vector(g, source, walks, cfg)?;
    Ok(score_targets_direct(&x, &vectors))
}

/// Reverse vectors for `targets`, built in parallel, returned in input order.
pub fn build_reverse_vectors(
    g: &Graph,
    targets: &[NodeId],
    r_max: f64,
    alpha: f64,
) -> Result<Vec<ReverseVector>> {
    check_alpha(alpha)?;
    targets
        .par_iter()
        .map(|&t| ReverseVector::build(g, t, r_max, alpha))
        .collect()
}

/// Transpose of a set of reverse vectors: coordinate to `(target slot, y^t[v])`.
#[derive(Debug, Clone)]
pub struct GroupedIndex {
    targets: Vec<NodeId>,
    columns: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl GroupedIndex {
    pub fn build(vectors: &[ReverseVector]) -> Self {
        let mut columns: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
        for (slot, y) in vectors.iter().enumerate() {
            for (c, v) in y.coords() {
                columns.entry(c).or_default().push((slot, v));
            }
        }
        GroupedIndex {
            targets: vectors.iter().map(|y| y.target).collect(),
            columns,
        }
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn column(&self, coord: usize) -> &[(usize, f64)] {
        self.columns.get(&coord).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn nnz(&self) -> usize {
        self.columns.values().map(Vec::len).sum()
    }
}

pub fn score_targets_grouped(x: &ForwardVector, z: &GroupedIndex) -> Vec<(NodeId, f64)> {
    let mut scores = vec![0.0; z.targets.len()];
    for (c, xv) in x.coords() {
        for &(slot, yv) in z.column(c) {
            scores[slot] += xv * yv;
        }
    }
    rank(z.targets.iter().copied().zip(scores).collect())
}

/// Aggregate `y^T` with a per-coordinate sampler over targets.
#[derive(Debug, Clone)]
pub struct TargetSamplerIndex {
    targets: Vec<NodeId>,
    columns: BTreeMap<usize, (f64, AliasTable<NodeId>)>,
}

impl TargetSamplerIndex {
    pub fn build(vectors: &[ReverseVector]) -> Result<Self> {
        let grouped = GroupedIndex::build(vectors);
        let mut columns = BTreeMap::new();
        for (&c, col) in &grouped.columns {
            let aggregate: f64 = col.iter().map(|&(_, v)| v).sum();
            let table = build_alias(
                col.iter()
                    .map(|&(slot, v)| (grouped.targets[slot], v))
                    .collect(),
            )?;
            columns.insert(c, (aggregate, table));
        }
        Ok(TargetSamplerIndex {
            targets: grouped.targets,
            columns,
        })
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    /// `y^T[coord]`.
    pub fn aggregate(&self, coord: usize) -> f64 {
        self.columns.get(&coord).map_or(0.0, |(a, _)| *a)
    }

    /// Second-stage probabilities `y^t[coord] / y^T[coord]`.
    pub fn stage_two(&self, coord: usize) -> Vec<(NodeId, f64)> {
        match self.columns.get(&coord) {
            None => Vec::new(),
            Some((_, table)) => table
                .payload()
                .iter()
                .copied()
                .zip(table.probabilities())
                .collect(),
        }
    }
}

/// Unnormalized first-stage weights `x[v] y^T[v]` over the support of `x`.
pub fn stage_one_weights(x: &ForwardVector, idx: &TargetSamplerIndex) -> Vec<(usize, f64)> {
    x.coords()
        .into_iter()
        .map(|(c, xv)| (c, xv * idx.aggregate(c)))
        .collect()
}

/// Exact sampling distribution `sum_v p'[v] p''_v[t]`, in target order.
pub fn target_probabilities(
    x: &ForwardVector,
    idx: &TargetSamplerIndex,
) -> Result<Vec<(NodeId, f64)>> {
    let weights = stage_one_weights(x, idx);
    let total: f64 = weights.iter().map(|&(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::NoReachableTarget);
    }
    let slot: BTreeMap<NodeId, usize> = idx
        .targets
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, i))
        .collect();
    let mut p = vec![0.0; idx.targets.len()];
    for (c, w) in weights {
        if w > 0.0 {
            for (t, q) in idx.stage_two(c) {
                p[slot[&t]] += w / total * q;
            }
        }
    }
    Ok(idx.targets.iter().copied().zip(p).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleOutcome {
    /// Targets by descending count, ties by node id; zero counts omitted.
    pub ranked: Vec<(NodeId, usize)>,
    pub samples: usize,
    pub total_weight: f64,
}

/// Draws `n_samples` targets, each with probability proportional to `<x, y^t>`.
pub fn sample_targets(
    x: &ForwardVector,
    idx: &TargetSamplerIndex,
    n_samples: usize,
    seed: u64,
) -> Result<SampleOutcome> {
    let weights: Vec<(usize, f64)> = stage_one_weights(x, idx)
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let total_weight: f64 = weights.iter().map(|&(_, w)| w).sum();
    if weights.is_empty() {
        return Err(Error::NoReachableTarget);
    }
    let stage_one = build_alias(weights)?;
    let mut rng = walk_rng(seed, 0);
    let mut counts: BTreeMap<NodeId, usize> = BTreeMap::new();
    for _ in 0..n_samples {
        let c = *stage_one.sample(&mut rng);
        let t = *idx.columns[&c].1.sample(&mut rng);
        *counts.entry(t).or_insert(0) += 1;
    }
    Ok(SampleOutcome {
        ranked: rank(counts.into_iter().collect()),
        samples: n_samples,
        total_weight,
    })
}

/// Rescores the top `k` sampled targets by direct dot products.
pub fn refine(
    x: &ForwardVector,
    vectors: &[ReverseVector],
    outcome: &SampleOutcome,
    k: usize,
) -> Vec<(NodeId, f64)> {
    let by_target: BTreeMap<NodeId, &ReverseVector> =
        vectors.iter().map(|y| (y.target, y)).collect();
    rank(
        outcome
            .ranked
            .iter()
            .take(k)
            .filter_map(|&(t, _)| by_target.get(&t).map(|y| (t, dot(x, y))))
            .collect(),
    )
}

/// `w pi[T] / (c2 |T|^(1 - beta))` with `c2 = k^beta c / (1 - beta)`.
pub fn adaptive_r_max(
    targets: &[NodeId],
    global_pr: &DenseDist,
    w: usize,
    k: usize,
    beta: f64,
    c: f64,
) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::InvalidParameter("target set is empty".into()));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let c2 = adaptive_c2(k, beta, c);
    Ok(w as f64 * global_pr.mass(targets) / (c2 * (targets.len() as f64).powf(1.0 - beta)))
}

pub fn adaptive_c2(k: usize, beta: f64, c: f64) -> f64 {
    (k as f64).powf(beta) * c / (1.0 - beta)
}

/// Keyword to sorted, deduplicated target list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeywordIndex {
    map: BTreeMap<String, Vec<NodeId>>,
}

impl KeywordIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, keyword: &str, target: NodeId) {
        let list = self.map.entry(keyword.to_string()).or_default();
        if let Err(pos) = list.binary_search(&target) {
            list.insert(pos, target);
        }
    }

    pub fn targets(&self, keyword: &str) -> Option<&[NodeId]> {
        self.map.get(keyword).map(Vec::as_slice)
    }

    pub fn keywords(&self) -> impl Iterator<Item = (&str, &[NodeId])> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Largest number of keywords attached to one node.
    pub fn gamma(&self) -> usize {
        let mut per_node: BTreeMap<NodeId, usize> = BTreeMap::new();
        for list in self.map.values() {
            for &t in list {
                *per_node.entry(t).or_insert(0) += 1;
            }
        }
        per_node.values().copied().max().unwrap_or(0)
    }

    /// Reads `keyword<TAB>node` lines; `#` comments and blank lines are skipped.
    pub fn parse<R: Read>(reader: R, g: &Graph) -> Result<Self> {
        let mut idx = KeywordIndex::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (keyword, node) = trimmed.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected keyword<TAB>node".into(),
            })?;
            let keyword = keyword.trim();
            if keyword.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "empty keyword".into(),
                });
            }
            idx.insert(keyword, g.resolve(node.trim())?);
        }
        Ok(idx)
    }

    pub fn load(path: &Path, g: &Graph) -> Result<Self> {
        Self::parse(std::fs::File::open(path)?, g)
    }
}

/// Reverse vectors for one keyword's targets.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordEntry {
    pub keyword: String,
    pub r_max: f64,
    pub vectors: Vec<ReverseVector>,
    pub pushes: usize,
    pub work_units: u64,
}

impl KeywordEntry {
    pub fn build(
        g: &Graph,
        keyword: &str,
        targets: &[NodeId],
        r_max: f64,
        alpha: f64,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let pushes: Vec<_> = targets
            .par_iter()
            .map(|&t| reverse_push(g, t, r_max, alpha).map(|p| (t, p)))
            .collect::<Result<_>>()?;
        let mut entry = KeywordEntry {
            keyword: keyword.to_string(),
            r_max,
            vectors: Vec::with_capacity(pushes.len()),
            pushes: 0,
            work_units: 0,
        };
        for (t, p) in pushes {
            entry.pushes += p.pushes;
            entry.work_units += p.work_units;
            entry.vectors.push(ReverseVector::from_parts(
                g.n(),
                t,
                r_max,
                p.estimates,
                p.residuals,
            ));
        }
        Ok(entry)
    }

    pub fn targets(&self) -> Vec<NodeId> {
        self.vectors.iter().map(|y| y.target).collect()
    }

    pub fn storage(&self) -> usize {
        self.vectors.iter().map(ReverseVector::nnz).sum()
    }

    pub fn grouped(&self) -> GroupedIndex {
        GroupedIndex::build(&self.vectors)
    }

    pub fn sampler(&self) -> Result<TargetSamplerIndex> {
        TargetSamplerIndex::build(&self.vectors)
    }
}

/// Precomputed reverse vectors for every keyword.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchIndex {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub gamma: usize,
    pub entries: Vec<KeywordEntry>,
}

impl SearchIndex {
    /// Builds every keyword with the `r_max` returned by `choose_r_max`.
    pub fn build<F>(
        g: &Graph,
        keywords: &KeywordIndex,
        alpha: f64,
        mut choose_r_max: F,
    ) -> Result<Self>
    where
        F: FnMut(&str, &[NodeId]) -> Result<f64>,
    {
        let mut entries = Vec::with_capacity(keywords.len());
        for (kw, targets) in keywords.keywords() {
            let r_max = choose_r_max(kw, targets)?;
            entries.push(KeywordEntry::build(g, kw, targets, r_max, alpha)?);
        }
        Ok(SearchIndex {
            n: g.n(),
            m: g.m(),
            alpha,
            gamma: keywords.gamma(),
            entries,
        })
    }

    pub fn entry(&self, keyword: &str) -> Result<&KeywordEntry> {
        self.entries
            .iter()
            .find(|e| e.keyword == keyword)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown keyword '{keyword}'")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::with_header(INDEX_MAGIC, INDEX_VERSION);
        w.put_usize(self.n);
        w.put_usize(self.m);
        w.put_f64(self.alpha);
        w.put_usize(self.gamma);
        w.put_usize(self.entries.len());
        for e in &self.entries {
            w.put_str(&e.keyword);
            w.put_f64(e.r_max);
            w.put_usize(e.pushes);
            w.put_u64(e.work_units);
            w.put_usize(e.vectors.len());
            for y in &e.vectors {
                w.put_usize(y.target);
                for part in [&y.estimates, &y.residuals] {
                    let (ids, vals): (Vec<usize>, Vec<f64>) = part.sorted().into_iter().unzip();
                    w.put_usizes(&ids);
                    w.put_f64s(&vals);
                }
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (mut r, version) = ByteReader::read_header(bytes, INDEX_MAGIC)?;
        if version != INDEX_VERSION {
            return Err(Error::Format(format!(
                "unsupported search index version {version}"
            )));
        }
        let n = r.get_usize()?;
        let m = r.get_usize()?;
        let alpha = r.get_f64()?;
        let gamma = r.get_usize()?;
        let count = r.get_usize()?;
        let mut entries = Vec::new();
        for _ in 0..count {
            let keyword = r.get_str()?;
            let r_max = r.get_f64()?;
            let pushes = r.get_usize()?;
            let work_units = r.get_u64()?;
            let len = r.get_usize()?;
            let mut vectors = Vec::new();
            for _ in 0..len {
                let target = r.get_usize()?;
                let mut parts = [SparseVec::new(), SparseVec::new()];
                for part in parts.iter_mut() {
                    let ids = r.get_usizes()?;
                    let vals = r.get_f64s()?;
                    if ids.len() != vals.len() || ids.iter().any(|&v| v >= n) {
                        return Err(Error::Format("corrupt reverse vector".into()));
                    }
                    *part = ids.into_iter().zip(vals).collect();
                }
                let [estimates, residuals] = parts;
                vectors.push(ReverseVector::from_parts(
                    n, target, r_max, estimates, residuals,
                ));
            }
            entries.push(KeywordEntry {
                keyword,
                r_max,
                vectors,
                pushes,
                work_units,
            });
        }
        r.finish()?;
        Ok(SearchIndex {
            n,
            m,
            alpha,
            gamma,
            entries,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StorageReport {
    pub per_keyword: Vec<(String, usize)>,
    pub total: usize,
    pub gamma: usize,
    /// `gamma m / (alpha r_max) + n` at the smallest `r_max` in the index.
    pub bound: f64,
    /// `gamma (m + n) / (alpha r_max) + n`, which also covers estimate entries.
    pub push_bound: f64,
    pub within_bound: bool,
}

/// Non-zeros stored per keyword against the storage bound.
pub fn storage_accounting(index: &SearchIndex) -> StorageReport {
    let per_keyword: Vec<(String, usize)> = index
        .entries
        .iter()
        .map(|e| (e.keyword.clone(), e.storage()))
        .collect();
    let total = per_keyword.iter().map(|(_, s)| s).sum();
    let r_max = index
        .entries
        .iter()
        .map(|e| e.r_max)
        .fold(f64::INFINITY, f64::min);
    let gamma = index.gamma as f64;
    let (bound, push_bound) = if index.entries.is_empty() {
        (0.0, 0.0)
    } else {
        let scale = gamma / (index.alpha * r_max);
        (
            scale * index.m as f64 + index.n as f64,
            scale * (index.m + index.n) as f64 + index.n as f64,
        )
    };
    StorageReport {
        per_keyword,
        total,
        gamma: index.gamma,
        bound,
        push_bound,
        within_bound: total as f64 <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bippr::{estimate_ppr, PprParams};
    use crate::graph::parse_edge_list_str;
    use crate::oracle::{exact_global_pagerank, exact_ppr_from};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, extra: usize, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(NodeId, NodeId, f64)> = (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect();
        for _ in 0..extra {
            edges.push((rng.random_range(0..n), rng.random_range(0..n), 1.0));
        }
        Graph::from_edges(n, &edges, false).unwrap()
    }

    fn cfg(seed: u64) -> WalkConfig {
        WalkConfig::new(0.2, seed).unwrap()
    }

    #[test]
    fn forward_vector_shapes() {
        let g = parse_edge_list_str("a a\n", false).unwrap();
        let x = build_forward_vector(&g, &Source::Node(0), 50, &cfg(1)).unwrap();
        assert_eq!(x.coords(), vec![(0, 1.0), (1, 1.0)]);
        let g = random_graph(10, 10, 2);
        let x = build_forward_vector(&g, &Source::Node(3), 1, &cfg(1)).unwrap();
        assert_eq!(x.empirical_part().nnz(), 1);
        assert_eq!(x.empirical_part().sum(), 1.0);
        assert!(build_forward_vector(&g, &Source::Node(3), 0, &cfg(1)).is_err());
    }

    #[test]
    fn large_rmax_reduces_to_monte_carlo() {
        let g = random_graph(12, 20, 3);
        let x = build_forward_vector(&g, &Source::Node(0), 500, &cfg(4)).unwrap();
        let y = ReverseVector::build(&g, 5, 1.0, 0.2).unwrap();
        assert_eq!(y.coords(), vec![(g.n() + 5, 1.0)]);
        assert_eq!(dot(&x, &y), x.empirical_part().get(5));
    }

    #[test]
    fn single_target_matches_estimator() {
        let g = random_graph(30, 60, 5);
        let r_max = 0.05;
        let params = PprParams::new(0.2, 0.01).with_r_max(r_max);
        let est = estimate_ppr(&g, &Source::Node(2), 9, &params, 11).unwrap();
        let x = build_forward_vector(&g, &Source::Node(2), est.walks_used, &cfg(11)).unwrap();
        let scores = score_targets_direct(&x, &[ReverseVector::build(&g, 9, r_max, 0.2).unwrap()]);
        assert!((scores[0].1 - est.value).abs() < 1e-12);
    }

    #[test]
    fn zero_scores_rank_by_id() {
        let x = ForwardVector::from_parts(10, vec![(0, 1.0)], SparseVec::unit(1), 1);
        let ys: Vec<_> = [7, 3, 5]
            .iter()
            .map(|&t| ReverseVector::from_parts(10, t, 0.1, SparseVec::new(), SparseVec::unit(t)))
            .collect();
        let direct = score_targets_direct(&x, &ys);
        assert_eq!(direct, vec![(3, 0.0), (5, 0.0), (7, 0.0)]);
        assert_eq!(score_targets_grouped(&x, &GroupedIndex::build(&ys)), direct);
    }

    #[test]
    fn shared_coordinate_scores() {
        let x = ForwardVector::from_parts(10, vec![(0, 1.0)], SparseVec::unit(4), 1);
        let ys: Vec<_> = [(1, 0.3), (2, 0.1)]
            .iter()
            .map(|&(t, r)| {
                ReverseVector::from_parts(
                    10,
                    t,
                    0.5,
                    SparseVec::new(),
                    [(4, r)].into_iter().collect(),
                )
            })
            .collect();
        let scores = score_targets_grouped(&x, &GroupedIndex::build(&ys));
        assert_eq!(scores, vec![(1, 0.3), (2, 0.1)]);
    }

    #[test]
    fn top_one_agrees_with_oracle() {
        let g = random_graph(20, 40, 8);
        let targets = [2, 6, 11, 15, 19];
        let s = 0;
        let pi = exact_ppr_from(&g, s, 0.2, 1e-13).unwrap();
        let best = rank(targets.iter().map(|&t| (t, pi[t])).collect())[0].0;
        let runs = 100;
        let hits = (0..runs)
            .filter(|&seed| {
                let r_max = 0.01;
                let delta = 0.01;
                let walks = (DEFAULT_SEARCH_C * r_max / delta).ceil() as usize * 50;
                score_targets_basic(&g, &Source::Node(s), &targets, r_max, walks, &cfg(seed))
                    .unwrap()[0]
                    .0
                    == best
            })
            .count();
        assert!(hits >= 95, "top-1 agreement {hits}/{runs}");
    }

    fn figure_example() -> (ForwardVector, Vec<ReverseVector>) {
        // nodes: s=0, a=1, b=2, c=3, t1=4, t2=5, t3=6
        let n = 7;
        let third = 1.0 / 3.0;
        let x = ForwardVector::from_parts(
            n,
            vec![(0, 1.0)],
            [(1, third), (2, third), (3, third)].into_iter().collect(),
            3,
        );
        let y = |t: NodeId, r: &[(NodeId, f64)]| {
            ReverseVector::from_parts(n, t, 0.5, SparseVec::new(), r.iter().copied().collect())
        };
        let ys = vec![
            y(4, &[(2, 0.64), (3, 0.4)]),
            y(5, &[(3, 0.16)]),
            y(6, &[(3, 0.16)]),
        ];
        (x, ys)
    }

    #[test]
    fn search_example_arithmetic() {
        let (x, ys) = figure_example();
        let idx = TargetSamplerIndex::build(&ys).unwrap();
        let n = x.n();
        assert_eq!(idx.aggregate(n + 1), 0.0);
        assert!((idx.aggregate(n + 2) - 0.64).abs() < 1e-15);
        assert!((idx.aggregate(n + 3) - 0.72).abs() < 1e-15);
        let w: BTreeMap<usize, f64> = stage_one_weights(&x, &idx).into_iter().collect();
        assert_eq!(w[&(n + 1)], 0.0);
        assert!((w[&(n + 2)] - 0.64 / 3.0).abs() < 1e-15);
        assert!((w[&(n + 3)] - 0.72 / 3.0).abs() < 1e-15);
        assert!((w[&(n + 2)] - 0.213).abs() < 5e-4);
        assert!((w[&(n + 3)] - 0.24).abs() < 1e-12);
        assert_eq!(idx.stage_two(n + 2), vec![(4, 1.0)]);
        let split = idx.stage_two(n + 3);
        for ((t, p), (et, ep)) in split
            .iter()
            .zip([(4, 5.0 / 9.0), (5, 2.0 / 9.0), (6, 2.0 / 9.0)])
        {
            assert_eq!(*t, et);
            assert!((p - ep).abs() < 1e-12);
        }
        let p = target_probabilities(&x, &idx).unwrap();
        let direct = score_targets_direct(&x, &ys);
        let total: f64 = direct.iter().map(|d| d.1).sum();
        for (t, pt) in p {
            let s = direct.iter().find(|d| d.0 == t).unwrap().1;
            assert!((pt - s / total).abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_single_target_and_zero_weight() {
        let (x, ys) = figure_example();
        let idx = TargetSamplerIndex::build(&ys[1..2]).unwrap();
        let out = sample_targets(&x, &idx, 1000, 1).unwrap();
        assert_eq!(out.ranked, vec![(5, 1000)]);
        let far = ForwardVector::from_parts(7, vec![(0, 1.0)], SparseVec::unit(1), 1);
        assert!(matches!(
            sample_targets(&far, &idx, 10, 1),
            Err(Error::NoReachableTarget)
        ));
    }

    #[test]
    fn sampler_three_to_one_ratio() {
        let n = 4;
        let x = ForwardVector::from_parts(
            n,
            vec![(0, 1.0)],
            [(1, 0.5), (2, 0.5)].into_iter().collect(),
            2,
        );
        let ys = vec![
            ReverseVector::from_parts(
                n,
                1,
                0.9,
                SparseVec::new(),
                [(1, 0.6), (2, 0.3)].into_iter().collect(),
            ),
            ReverseVector::from_parts(
                n,
                2,
                0.9,
                SparseVec::new(),
                [(2, 0.3)].into_iter().collect(),
            ),
        ];
        let idx = TargetSamplerIndex::build(&ys).unwrap();
        let out = sample_targets(&x, &idx, 1_000_000, 9).unwrap();
        let count = |t| out.ranked.iter().find(|r| r.0 == t).unwrap().1 as f64;
        let ratio = count(1) / count(2);
        assert!((ratio / 3.0 - 1.0).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn sampler_marginals_within_envelope() {
        let g = random_graph(40, 120, 13);
        let targets: Vec<NodeId> = (0..40).step_by(3).collect();
        let ys = build_reverse_vectors(&g, &targets, 0.02, 0.2).unwrap();
        let x = build_forward_vector(&g, &Source::Node(1), 2000, &cfg(2)).unwrap();
        let idx = TargetSamplerIndex::build(&ys).unwrap();
        let p = target_probabilities(&x, &idx).unwrap();
        let direct = score_targets_direct(&x, &ys);
        let total: f64 = direct.iter().map(|d| d.1).sum();
        let big_n = 1_000_000;
        let out = sample_targets(&x, &idx, big_n, 3).unwrap();
        let mut inside = 0;
        for &(t, pt) in &p {
            let exact = direct.iter().find(|d| d.0 == t).unwrap().1 / total;
            assert!((pt - exact).abs() < 1e-12);
            let freq =
                out.ranked.iter().find(|r| r.0 == t).map_or(0, |r| r.1) as f64 / big_n as f64;
            if (freq - pt).abs() <= 4.0 * (pt * (1.0 - pt) / big_n as f64).sqrt() {
                inside += 1;
            }
        }
        assert!(inside as f64 >= 0.99 * p.len() as f64);
    }

    #[test]
    fn refine_rescored_top_k() {
        let (x, ys) = figure_example();
        let idx = TargetSamplerIndex::build(&ys).unwrap();
        let out = sample_targets(&x, &idx, 10_000, 4).unwrap();
        let refined = refine(&x, &ys, &out, 2);
        assert_eq!(refined.len(), 2);
        assert_eq!(refined[0].0, 4);
        assert_eq!(refined[0].1, dot(&x, &ys[0]));
    }

    #[test]
    fn adaptive_r_max_arithmetic() {
        let n = 100;
        let mut pr = vec![0.0; 1000];
        for v in pr.iter_mut().take(n) {
            *v = 0.01 / n as f64;
        }
        let pr = DenseDist { values: pr };
        let targets: Vec<NodeId> = (0..n).collect();
        let c2 = adaptive_c2(3, 0.77, 20.0);
        assert!((c2 - 3f64.powf(0.77) * 20.0 / 0.23).abs() < 1e-9);
        assert!((c2 - 202.6).abs() < 0.1, "c2 {c2}");
        let r = adaptive_r_max(&targets, &pr, 10_000, 3, 0.77, 20.0).unwrap();
        assert!((r - 100.0 / (c2 * 100f64.powf(0.23))).abs() < 1e-12);
        assert!((r - 0.171).abs() < 2e-3, "r_max {r}");
        let r2 = adaptive_r_max(&targets, &pr, 20_000, 3, 0.77, 20.0).unwrap();
        assert!((r2 - 2.0 * r).abs() < 1e-12);
        let single = adaptive_r_max(&[0], &pr, 10_000, 1, 1e-12, 20.0).unwrap();
        assert!((single - 10_000.0 * pr[0] / 20.0).abs() < 1e-9);
        assert!(adaptive_r_max(&[], &pr, 10, 3, 0.77, 20.0).is_err());
        assert!(adaptive_r_max(&[0], &pr, 10, 3, 1.0, 20.0).is_err());
    }

    #[test]
    fn keyword_sidecar_parsing() {
        let g = parse_edge_list_str("a b\nb c\nc a\n", false).unwrap();
        let text = "# names\nann\tc\nann\ta\nbob\tb\n\nann\tc\n";
        let idx = KeywordIndex::parse(text.as_bytes(), &g).unwrap();
        assert_eq!(idx.targets("ann").unwrap(), &[0, 2]);
        assert_eq!(idx.targets("bob").unwrap(), &[1]);
        assert_eq!(idx.gamma(), 1);
        assert!(matches!(
            KeywordIndex::parse("ann c\n".as_bytes(), &g),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            KeywordIndex::parse("ann\tzz\n".as_bytes(), &g),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn storage_cases() {
        let g = random_graph(60, 150, 21);
        let mut kw = KeywordIndex::new();
        for t in [3, 8, 20, 41] {
            kw.insert("x", t);
        }
        let big = SearchIndex::build(&g, &kw, 0.2, |_, _| Ok(1.0)).unwrap();
        assert_eq!(storage_accounting(&big).total, 4);
        let one = SearchIndex::build(&g, &kw, 0.2, |_, _| Ok(0.01)).unwrap();
        let report = storage_accounting(&one);
        assert!(report.within_bound);
        for t in [3, 8, 20, 41] {
            kw.insert("y", t);
        }
        let two = SearchIndex::build(&g, &kw, 0.2, |_, _| Ok(0.01)).unwrap();
        let report2 = storage_accounting(&two);
        assert_eq!(report2.gamma, 2);
        assert_eq!(report2.total, 2 * report.total);
        assert!(report2.within_bound);
    }

    #[test]
    fn storage_bound_on_random_graphs() {
        for seed in 0..10 {
            let g = random_graph(80, 200, seed);
            let mut kw = KeywordIndex::new();
            for t in (0..80).filter(|t| (t + seed as usize).is_multiple_of(5)) {
                kw.insert("k", t);
            }
            for r_max in [0.3, 0.05, 0.005] {
                let idx = SearchIndex::build(&g, &kw, 0.2, |_, _| Ok(r_max)).unwrap();
                let rep = storage_accounting(&idx);
                assert!(
                    rep.within_bound,
                    "seed {seed} r_max {r_max}: {} > {}",
                    rep.total, rep.bound
                );
                assert!(rep.total as f64 <= rep.push_bound);
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let g = random_graph(25, 50, 4);
        let mut kw = KeywordIndex::new();
        kw.insert("a", 1);
        kw.insert("a", 7);
        kw.insert("b", 7);
        let pr = exact_global_pagerank(&g, 0.2).unwrap();
        let idx = SearchIndex::build(&g, &kw, 0.2, |_, t| {
            adaptive_r_max(t, &pr, 1000, 3, DEFAULT_BETA, 20.0)
        })
        .unwrap();
        let back = SearchIndex::from_bytes(&idx.to_bytes()).unwrap();
        assert_eq!(back, idx);
        let mut bytes = idx.to_bytes();
        bytes.push(0);
        assert!(SearchIndex::from_bytes(&bytes).is_err());
        assert!(SearchIndex::from_bytes(&bytes[..10]).is_err());
        assert!(idx.entry("zzz").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn grouped_equals_direct(n in 5usize..30, extra in 0usize..60, seed in 0u64..1000, k in 1usize..6, r_max in 0.005f64..0.5) {
            let g = random_graph(n, extra, seed);
            let targets: Vec<NodeId> = (0..n).filter(|v| (v * 7 + seed as usize) % n < k.min(n)).collect();
            let ys = build_reverse_vectors(&g, &targets, r_max, 0.2).unwrap();
            let x = build_forward_vector(&g, &Source::Node((seed as usize) % n), 200, &cfg(seed)).unwrap();
            let direct = score_targets_direct(&x, &ys);
            let grouped = score_targets_grouped(&x, &GroupedIndex::build(&ys));
            prop_assert_eq!(direct.len(), grouped.len());
            for (a, b) in direct.iter().zip(&grouped) {
                prop_assert_eq!(a.0, b.0);
                prop_assert_eq!(a.1.to_bits(), b.1.to_bits());
            }
        }

        #[test]
        fn residuals_bounded_and_ranking_stable(n in 5usize..30, extra in 0usize..60, seed in 0u64..1000, r_max in 0.005f64..0.5) {
            let g = random_graph(n, extra, seed);
            let targets: Vec<NodeId> = (0..n).step_by(2).collect();
            let ys = build_reverse_vectors(&g, &targets, r_max, 0.2).unwrap();
            for y in &ys {
                prop_assert!(y.residuals().iter().all(|(_, r)| r <= r_max));
            }
            let x1 = build_forward_vector(&g, &Source::Node(0), 100, &cfg(seed)).unwrap();
            let x2 = build_forward_vector(&g, &Source::Node(0), 100, &cfg(seed)).unwrap();
            prop_assert_eq!(score_targets_direct(&x1, &ys), score_targets_direct(&x2, &ys));
        }
    }
}
