//! Deterministic synthetic graphs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Out-edges added per node by the power-law generator.
pub const POWER_LAW_OUT_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Cycle,
    Star,
    Grid,
    PowerLaw,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(SynthKind::Cycle),
            "star" => Ok(SynthKind::Star),
            "grid" => Ok(SynthKind::Grid),
            "power-law" => Ok(SynthKind::PowerLaw),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::Cycle => "cycle",
            SynthKind::Star => "star",
            SynthKind::Grid => "grid",
            SynthKind::PowerLaw => "power-law",
        })
    }
}

/// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
pub fn cycle_edges(n: usize) -> Vec<(NodeId, NodeId, f64)> {
    (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect()
}

/// Center `0` linked both ways to leaves `1..n`.
pub fn star_edges(n: usize) -> Vec<(NodeId, NodeId, f64)> {
    if n == 1 {
        return vec![(0, 0, 1.0)];
    }
    (1..n)
        .flat_map(|leaf| [(0, leaf, 1.0), (leaf, 0, 1.0)])
        .collect()
}

/// Row-major grid with `floor(sqrt(n))` columns, neighbors linked both ways.
pub fn grid_edges(n: usize) -> Vec<(NodeId, NodeId, f64)> {
    if n == 1 {
        return vec![(0, 0, 1.0)];
    }
    let cols = (n as f64).sqrt().floor() as usize;
    let mut edges = Vec::new();
    for v in 0..n {
        let right = v + 1;
        if right % cols != 0 && right < n {
            edges.push((v, right, 1.0));
            edges.push((right, v, 1.0));
        }
        let down = v + cols;
        if down < n {
            edges.push((v, down, 1.0));
            edges.push((down, v, 1.0));
        }
    }
    edges
}

/// Directed preferential attachment: each new node links to
/// `POWER_LAW_OUT_DEGREE` earlier nodes chosen in proportion to
/// `in-degree + 1`, starting from a complete seed graph.
pub fn power_law_edges(n: usize, seed: u64) -> Vec<(NodeId, NodeId, f64)> {
    let k = POWER_LAW_OUT_DEGREE;
    let core = n.min(k + 1);
    if core == 1 {
        return vec![(0, 0, 1.0)];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    // one entry per unit of attachment weight
    let mut urn: Vec<NodeId> = Vec::new();
    for u in 0..core {
        urn.push(u);
        for v in 0..core {
            if u != v {
                edges.push((u, v, 1.0));
                urn.push(v);
            }
        }
    }
    for u in core..n {
        let mut chosen: Vec<NodeId> = Vec::with_capacity(k);
        while chosen.len() < k {
            let v = urn[rng.random_range(0..urn.len())];
            if !chosen.contains(&v) {
                chosen.push(v);
            }
        }
        for &v in &chosen {
            edges.push((u, v, 1.0));
            urn.push(v);
        }
        urn.push(u);
    }
    edges
}

pub fn synthetic_edges(kind: SynthKind, n: usize, seed: u64) -> Result<Vec<(NodeId, NodeId, f64)>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(match kind {
        SynthKind::Cycle => cycle_edges(n),
        SynthKind::Star => star_edges(n),
        SynthKind::Grid => grid_edges(n),
        SynthKind::PowerLaw => power_law_edges(n, seed),
    })
}

pub fn generate_synthetic(kind: SynthKind, n: usize, seed: u64) -> Result<Graph> {
    Graph::from_edges(n, &synthetic_edges(kind, n, seed)?, false)
}

/// Edge-list text, one `u v` line per edge.
pub fn synthetic_edge_list(kind: SynthKind, n: usize, seed: u64) -> Result<String> {
    let mut out = String::new();
    for (u, v, _) in synthetic_edges(kind, n, seed)? {
        out.push_str(&format!("{u} {v}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list_str;

    #[test]
    fn small_shapes() {
        let g = generate_synthetic(SynthKind::Cycle, 2, 0).unwrap();
        assert_eq!(g.raw_edges(), vec![(0, 1, 1.0), (1, 0, 1.0)]);
        let star = generate_synthetic(SynthKind::Star, 5, 0).unwrap();
        assert_eq!(star.out_degree(0), 4);
        assert!((1..5).all(|l| star.out_degree(l) == 1));
        let grid = generate_synthetic(SynthKind::Grid, 9, 0).unwrap();
        assert_eq!(grid.m(), 24);
        assert_eq!(grid.out_degree(4), 4);
        for kind in [
            SynthKind::Cycle,
            SynthKind::Star,
            SynthKind::Grid,
            SynthKind::PowerLaw,
        ] {
            let g = generate_synthetic(kind, 1, 0).unwrap();
            assert_eq!(g.n(), 1);
            assert!(synthetic_edges(kind, 0, 0).is_err());
        }
    }

    #[test]
    fn parse_kind() {
        assert_eq!(
            "power-law".parse::<SynthKind>().unwrap(),
            SynthKind::PowerLaw
        );
        assert_eq!(SynthKind::Grid.to_string(), "grid");
        assert!(matches!(
            "tree".parse::<SynthKind>(),
            Err(Error::UnknownKind(_))
        ));
    }

    #[test]
    fn power_law_is_deterministic_and_skewed() {
        let a = synthetic_edge_list(SynthKind::PowerLaw, 1000, 42).unwrap();
        let b = synthetic_edge_list(SynthKind::PowerLaw, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a,
            synthetic_edge_list(SynthKind::PowerLaw, 1000, 43).unwrap()
        );
        let g = parse_edge_list_str(&a, false).unwrap();
        assert_eq!(g.n(), 1000);
        assert!((0..g.n()).all(|v| g.out_degree(v) >= 1));
        let max_in = (0..g.n()).map(|v| g.in_degree(v)).max().unwrap();
        assert!(max_in > 50, "max in-degree {max_in}");
    }

    #[test]
    fn edge_list_round_trip() {
        let text = synthetic_edge_list(SynthKind::Grid, 12, 0).unwrap();
        let g = parse_edge_list_str(&text, false).unwrap();
        assert_eq!(
            g.m(),
            generate_synthetic(SynthKind::Grid, 12, 0).unwrap().m()
        );
    }
}
