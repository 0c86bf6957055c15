//! Weighted directed and undirected graphs in compressed sparse row form.
//!
//! Both adjacency directions are stored. Out-weights of every node with
//! outgoing edges are normalized to sum to one; the raw (pre-normalization)
//! out-weight total of each node is kept as its strength, which is the
//! degree `d_v` used by the undirected estimators.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use rand::Rng;

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

pub type NodeId = usize;

pub const SINK_LABEL: &str = "__sink__";

const SNAPSHOT_MAGIC: &[u8; 4] = b"BPGR";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    out_weights: Vec<f64>,
    out_cumulative: Vec<f64>,
    uniform_rows: Vec<bool>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    in_weights: Vec<f64>,
    strength: Vec<f64>,
    undirected: bool,
    labels: Vec<String>,
    label_index: HashMap<String, NodeId>,
    sink: Option<NodeId>,
}

impl Graph {
    /// Builds a graph from raw weighted edges over nodes `0..n`.
    ///
    /// Duplicate edges are merged by summing weights. With `undirected`, every
    /// edge is added in both directions before merging.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId, f64)], undirected: bool) -> Result<Self> {
        let labels = (0..n).map(|v| v.to_string()).collect();
        Self::from_labeled_edges(labels, edges, undirected)
    }

    pub fn from_labeled_edges(
        labels: Vec<String>,
        edges: &[(NodeId, NodeId, f64)],
        undirected: bool,
    ) -> Result<Self> {
        let n = labels.len();
        let mut raw: Vec<(NodeId, NodeId, f64)> =
            Vec::with_capacity(edges.len() * if undirected { 2 } else { 1 });
        for &(u, v, w) in edges {
            if u >= n {
                return Err(Error::NodeOutOfRange(u));
            }
            if v >= n {
                return Err(Error::NodeOutOfRange(v));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            raw.push((u, v, w));
            if undirected {
                raw.push((v, u, w));
            }
        }
        raw.sort_by_key(|&(u, v, _)| (u, v));

        let mut merged: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(raw.len());
        for (u, v, w) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => merged.push((u, v, w)),
            }
        }

        let mut strength = vec![0.0; n];
        for &(u, _, w) in &merged {
            strength[u] += w;
        }

        let m = merged.len();
        let mut out_offsets = vec![0usize; n + 1];
        for &(u, _, _) in &merged {
            out_offsets[u + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let mut out_targets = Vec::with_capacity(m);
        let mut out_weights = Vec::with_capacity(m);
        for &(u, v, w) in &merged {
            out_targets.push(v);
            out_weights.push(w / strength[u]);
        }

        let mut out_cumulative = Vec::with_capacity(m);
        let mut uniform_rows = vec![true; n];
        for u in 0..n {
            let row = out_offsets[u]..out_offsets[u + 1];
            let first = row.clone().next().map(|i| merged[i].2);
            let mut acc = 0.0;
            for i in row {
                acc += out_weights[i];
                out_cumulative.push(acc);
                if Some(merged[i].2) != first {
                    uniform_rows[u] = false;
                }
            }
        }

        let mut in_offsets = vec![0usize; n + 1];
        for &(_, v, _) in &merged {
            in_offsets[v + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut fill = in_offsets.clone();
        let mut in_sources = vec![0; m];
        let mut in_weights = vec![0.0; m];
        for (idx, &(u, v, _)) in merged.iter().enumerate() {
            let slot = fill[v];
            in_sources[slot] = u;
            in_weights[slot] = out_weights[idx];
            fill[v] += 1;
        }

        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        Ok(Graph {
            out_offsets,
            out_targets,
            out_weights,
            out_cumulative,
            uniform_rows,
            in_offsets,
            in_sources,
            in_weights,
            strength,
            undirected,
            labels,
            label_index,
            sink: None,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of directed edges after merging duplicates.
    #[inline]
    pub fn m(&self) -> usize {
        self.out_targets.len()
    }

    #[inline]
    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn sink(&self) -> Option<NodeId> {
        self.sink
    }

    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    #[inline]
    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// Out-neighbors of `u` with normalized weights.
    #[inline]
    pub fn out_neighbors(&self, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let row = self.out_offsets[u]..self.out_offsets[u + 1];
        self.out_targets[row.clone()]
            .iter()
            .copied()
            .zip(self.out_weights[row].iter().copied())
    }

    /// In-neighbors `u` of `v` with the normalized weight `w_{u,v}`.
    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let row = self.in_offsets[v]..self.in_offsets[v + 1];
        self.in_sources[row.clone()]
            .iter()
            .copied()
            .zip(self.in_weights[row].iter().copied())
    }

    /// Raw out-weight total of `u` before normalization.
    #[inline]
    pub fn strength(&self, u: NodeId) -> f64 {
        self.strength[u]
    }

    /// Degree used by the undirected estimators and forward push: the raw
    /// weight total, which is the neighbor count on unweighted graphs.
    #[inline]
    pub fn degree(&self, u: NodeId) -> f64 {
        self.strength[u]
    }

    pub fn total_degree(&self) -> f64 {
        self.strength.iter().sum()
    }

    /// Average out-degree m/n.
    pub fn average_degree(&self) -> f64 {
        self.m() as f64 / self.n() as f64
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.label_index.get(label).copied()
    }

    /// Resolves an external label, or reports it as unknown.
    pub fn resolve(&self, label: &str) -> Result<NodeId> {
        self.node_id(label)
            .ok_or_else(|| Error::UnknownNode(label.to_string()))
    }

    pub fn check_node(&self, v: NodeId) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange(v))
        }
    }

    /// Picks an out-neighbor of `u` with probability `w_{u,v}`, or `None` if
    /// `u` is dangling.
    #[inline]
    pub fn sample_out_neighbor<R: Rng + ?Sized>(&self, u: NodeId, rng: &mut R) -> Option<NodeId> {
        let lo = self.out_offsets[u];
        let hi = self.out_offsets[u + 1];
        if lo == hi {
            return None;
        }
        if self.uniform_rows[u] {
            return Some(self.out_targets[rng.random_range(lo..hi)]);
        }
        let row = &self.out_cumulative[lo..hi];
        let x = rng.random::<f64>() * row[row.len() - 1];
        let idx = row.partition_point(|&c| c <= x).min(row.len() - 1);
        Some(self.out_targets[lo + idx])
    }

    /// All edges as (u, v, raw weight), in CSR order.
    pub fn raw_edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out = Vec::with_capacity(self.m());
        for u in 0..self.n() {
            for (v, w) in self.out_neighbors(u) {
                out.push((u, v, w * self.strength[u]));
            }
        }
        out
    }

    /// Appends a sink with a self-loop and links every dangling node to it.
    /// Returns the graph unchanged when no node is dangling.
    ///
    /// On an undirected graph with isolated nodes the sink edges are one-way,
    /// so the result is flagged directed.
    pub fn apply_sink_convention(self) -> Graph {
        let n = self.n();
        let dangling: Vec<NodeId> = (0..n).filter(|&u| self.out_degree(u) == 0).collect();
        if dangling.is_empty() {
            return self;
        }
        let sink = n;
        let mut edges = self.raw_edges();
        for &u in &dangling {
            edges.push((u, sink, 1.0));
        }
        edges.push((sink, sink, 1.0));
        let mut labels = self.labels.clone();
        labels.push(SINK_LABEL.to_string());
        let mut g = Graph::from_labeled_edges(labels, &edges, false).expect("sink edges are valid");
        g.sink = Some(sink);
        g
    }

    /// Bipartite consumer/producer graph on 2n nodes: node `u` is the
    /// consumer copy `u'` and node `n + v` the producer copy `v''`. Each
    /// directed edge (u, v) becomes the undirected edge (u', v'').
    pub fn salsa_transform(&self) -> Graph {
        let n = self.n();
        let mut labels: Vec<String> = self.labels.iter().map(|l| format!("{l}'")).collect();
        labels.extend(self.labels.iter().map(|l| format!("{l}''")));
        let edges: Vec<_> = self
            .raw_edges()
            .into_iter()
            .map(|(u, v, w)| (u, n + v, w))
            .collect();
        Graph::from_labeled_edges(labels, &edges, true).expect("transformed edges are valid")
    }

    pub fn to_snapshot_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::with_header(SNAPSHOT_MAGIC, SNAPSHOT_VERSION);
        w.put_u8(self.undirected as u8);
        match self.sink {
            Some(s) => {
                w.put_u8(1);
                w.put_usize(s);
            }
            None => w.put_u8(0),
        }
        w.put_usize(self.labels.len());
        for l in &self.labels {
            w.put_str(l);
        }
        let edges = self.raw_edges();
        w.put_usize(edges.len());
        for (u, v, wt) in edges {
            w.put_usize(u);
            w.put_usize(v);
            w.put_f64(wt);
        }
        w.into_bytes()
    }

    /// Rebuilds a graph from snapshot bytes. The stored edges are already
    /// merged (and symmetrized when undirected), so they are reloaded as
    /// directed and the undirected flag restored afterwards.
    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Graph> {
        let (mut r, version) = ByteReader::read_header(bytes, SNAPSHOT_MAGIC)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!(
                "unsupported graph snapshot version {version}"
            )));
        }
        let undirected = r.get_u8()? != 0;
        let sink = match r.get_u8()? {
            0 => None,
            _ => Some(r.get_usize()?),
        };
        let n = r.get_usize()?;
        let labels = (0..n).map(|_| r.get_str()).collect::<Result<Vec<_>>>()?;
        let m = r.get_usize()?;
        let mut edges = Vec::with_capacity(m.min(bytes.len() / 24));
        for _ in 0..m {
            edges.push((r.get_usize()?, r.get_usize()?, r.get_f64()?));
        }
        r.finish()?;
        let mut g = Graph::from_labeled_edges(labels, &edges, false)
            .map_err(|e| Error::Format(e.to_string()))?;
        g.undirected = undirected;
        g.sink = sink;
        Ok(g)
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_snapshot_bytes())?;
        Ok(())
    }

    pub fn load_snapshot(path: &Path) -> Result<Graph> {
        Graph::from_snapshot_bytes(&fs::read(path)?)
    }

    /// Renders the graph as an edge list using external labels and raw weights.
    /// Undirected graphs emit each edge once.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v, w) in self.raw_edges() {
            if self.undirected && v < u {
                continue;
            }
            let w = if self.undirected && u == v {
                w / 2.0
            } else {
                w
            };
            if w == 1.0 {
                out.push_str(&format!("{} {}\n", self.labels[u], self.labels[v]));
            } else {
                out.push_str(&format!("{} {} {}\n", self.labels[u], self.labels[v], w));
            }
        }
        out
    }
}

/// Parses a whitespace-separated edge list, one `u v [w]` edge per line.
/// Blank lines and lines starting with `#` are skipped. External ids are
/// mapped to dense ids in order of first appearance.
pub fn parse_edge_list<R: Read>(reader: R, undirected: bool) -> Result<Graph> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str, labels: &mut Vec<String>| -> NodeId {
        if let Some(&id) = index.get(tok) {
            return id;
        }
        let id = labels.len();
        labels.push(tok.to_string());
        index.insert(tok.to_string(), id);
        id
    };

    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected \"u v [w]\", found {} fields", toks.len()),
            });
        }
        let weight = match toks.get(2) {
            Some(tok) => tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad weight {tok:?}"),
            })?,
            None => 1.0,
        };
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::NonPositiveWeight {
                line: line_no,
                weight,
            });
        }
        let u = intern(toks[0], &mut labels);
        let v = intern(toks[1], &mut labels);
        edges.push((u, v, weight));
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph::from_labeled_edges(labels, &edges, undirected)
}

pub fn parse_edge_list_str(text: &str, undirected: bool) -> Result<Graph> {
    parse_edge_list(text.as_bytes(), undirected)
}

pub fn load_edge_list(path: &Path, undirected: bool) -> Result<Graph> {
    parse_edge_list(fs::File::open(path)?, undirected)
}
