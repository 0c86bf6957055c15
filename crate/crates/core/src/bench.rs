//! Timing and accuracy comparison of the bidirectional estimator against
//! Monte Carlo on sampled (source, target) pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use rand::Rng;
use serde::Serialize;

use crate::bippr::{estimate_ppr, monte_carlo_ppr, PprParams, DEFAULT_C};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::oracle::{exact_global_pagerank, exact_ppr_from, DenseDist};
use crate::sampling::{build_alias, walk_rng, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    Uniform,
    PageRank,
}

impl FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(PairMode::Uniform),
            "pagerank" => Ok(PairMode::PageRank),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for PairMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairMode::Uniform => "uniform",
            PairMode::PageRank => "pagerank",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSpec {
    pub mode: PairMode,
    pub pairs: usize,
    pub alpha: f64,
    pub delta: f64,
    /// Walk constant of the bidirectional estimator.
    pub c: f64,
    /// Monte Carlo uses `ceil(mc_c / delta)` walks.
    pub mc_c: f64,
    pub seed: u64,
    /// Largest graph on which oracle accuracy is computed.
    pub oracle_max_n: usize,
}

impl BenchSpec {
    pub fn new(mode: PairMode, pairs: usize, alpha: f64, delta: f64) -> Self {
        BenchSpec {
            mode,
            pairs,
            alpha,
            delta,
            c: DEFAULT_C,
            mc_c: 30.0,
            seed: 0,
            oracle_max_n: 20_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub pairs: usize,
    pub mean_secs: f64,
    pub median_secs: f64,
    /// Mean of `|estimate - pi| / pi` over pairs with `pi >= delta`.
    pub mean_relative_error: Option<f64>,
    pub significant_pairs: usize,
    pub mean_walks: f64,
    pub mean_pushes: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub spec: BenchSpec,
    pub sampled_pairs: Vec<(NodeId, NodeId)>,
    pub rows: Vec<BenchRow>,
}

/// Sources uniform; targets uniform or drawn from the global PageRank.
pub fn sample_pairs(
    g: &Graph,
    mode: PairMode,
    count: usize,
    alpha: f64,
    seed: u64,
) -> Result<Vec<(NodeId, NodeId)>> {
    let mut rng = walk_rng(seed, u64::MAX);
    let n = g.n();
    let target_sampler = match mode {
        PairMode::Uniform => None,
        PairMode::PageRank => {
            let pr = exact_global_pagerank(g, alpha)?;
            Some(build_alias(
                pr.values.iter().copied().enumerate().collect(),
            )?)
        }
    };
    Ok((0..count)
        .map(|_| {
            let s = rng.random_range(0..n);
            let t = match &target_sampler {
                None => rng.random_range(0..n),
                Some(table) => *table.sample(&mut rng),
            };
            (s, t)
        })
        .collect())
}

struct Outcome {
    value: f64,
    secs: f64,
    walks: usize,
    pushes: usize,
}

fn summarize(name: &str, outcomes: &[Outcome], truths: Option<&[f64]>, delta: f64) -> BenchRow {
    let k = outcomes.len().max(1) as f64;
    let mut secs: Vec<f64> = outcomes.iter().map(|o| o.secs).collect();
    secs.sort_by(f64::total_cmp);
    let median_secs = if secs.is_empty() {
        0.0
    } else {
        secs[secs.len() / 2]
    };
    let (mre, significant) = match truths {
        None => (None, 0),
        Some(pi) => {
            let errs: Vec<f64> = outcomes
                .iter()
                .zip(pi)
                .filter(|(_, &p)| p >= delta)
                .map(|(o, &p)| (o.value - p).abs() / p)
                .collect();
            let mre = if errs.is_empty() {
                None
            } else {
                Some(errs.iter().sum::<f64>() / errs.len() as f64)
            };
            (mre, errs.len())
        }
    };
    BenchRow {
        algorithm: name.to_string(),
        pairs: outcomes.len(),
        mean_secs: secs.iter().sum::<f64>() / k,
        median_secs,
        mean_relative_error: mre,
        significant_pairs: significant,
        mean_walks: outcomes.iter().map(|o| o.walks as f64).sum::<f64>() / k,
        mean_pushes: outcomes.iter().map(|o| o.pushes as f64).sum::<f64>() / k,
    }
}

fn oracle_values(g: &Graph, pairs: &[(NodeId, NodeId)], alpha: f64) -> Result<Vec<f64>> {
    let mut cache: BTreeMap<NodeId, DenseDist> = BTreeMap::new();
    let mut out = Vec::with_capacity(pairs.len());
    for &(s, t) in pairs {
        let pi = match cache.entry(s) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(exact_ppr_from(g, s, alpha, 1e-12)?)
            }
        };
        out.push(pi[t]);
    }
    Ok(out)
}

pub fn run_benchmark(g: &Graph, spec: &BenchSpec) -> Result<BenchReport> {
    let pairs = sample_pairs(g, spec.mode, spec.pairs, spec.alpha, spec.seed)?;
    if pairs.is_empty() {
        return Ok(BenchReport {
            spec: spec.clone(),
            sampled_pairs: pairs,
            rows: Vec::new(),
        });
    }
    let truths = if g.n() <= spec.oracle_max_n {
        Some(oracle_values(g, &pairs, spec.alpha)?)
    } else {
        warn!(
            "n = {} exceeds the oracle limit {}; accuracy omitted",
            g.n(),
            spec.oracle_max_n
        );
        None
    };
    let params = PprParams::new(spec.alpha, spec.delta).with_c(spec.c);
    let mc_walks = ((spec.mc_c / spec.delta).ceil() as usize).max(1);
    let mut bidirectional = Vec::with_capacity(pairs.len());
    let mut monte_carlo = Vec::with_capacity(pairs.len());
    for (i, &(s, t)) in pairs.iter().enumerate() {
        let seed = spec.seed.wrapping_add(i as u64);
        let start = Instant::now();
        let est = estimate_ppr(g, &Source::Node(s), t, &params, seed)?;
        bidirectional.push(Outcome {
            value: est.value,
            secs: start.elapsed().as_secs_f64(),
            walks: est.walks_used,
            pushes: est.reverse_pushes,
        });
        let start = Instant::now();
        let mc = monte_carlo_ppr(g, &Source::Node(s), t, mc_walks, spec.alpha, seed)?;
        monte_carlo.push(Outcome {
            value: mc.value,
            secs: start.elapsed().as_secs_f64(),
            walks: mc.walks_used,
            pushes: 0,
        });
    }
    let truth_ref = truths.as_deref();
    Ok(BenchReport {
        spec: spec.clone(),
        sampled_pairs: pairs,
        rows: vec![
            summarize("bidirectional", &bidirectional, truth_ref, spec.delta),
            summarize("monte-carlo", &monte_carlo, truth_ref, spec.delta),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SynthKind};

    #[test]
    fn zero_pairs_gives_empty_table() {
        let g = generate_synthetic(SynthKind::Cycle, 5, 0).unwrap();
        let report = run_benchmark(&g, &BenchSpec::new(PairMode::Uniform, 0, 0.2, 0.1)).unwrap();
        assert!(report.rows.is_empty());
    }

    #[test]
    fn pair_sampling_modes() {
        let g = generate_synthetic(SynthKind::PowerLaw, 200, 1).unwrap();
        let a = sample_pairs(&g, PairMode::PageRank, 2000, 0.2, 3).unwrap();
        assert_eq!(
            a,
            sample_pairs(&g, PairMode::PageRank, 2000, 0.2, 3).unwrap()
        );
        let pr = exact_global_pagerank(&g, 0.2).unwrap();
        let top = (0..g.n()).max_by(|&x, &y| pr[x].total_cmp(&pr[y])).unwrap();
        let hits = a.iter().filter(|p| p.1 == top).count() as f64 / a.len() as f64;
        assert!((hits - pr[top]).abs() < 4.0 * (pr[top] / 2000.0).sqrt());
        assert_eq!("pagerank".parse::<PairMode>().unwrap(), PairMode::PageRank);
        assert!("zipf".parse::<PairMode>().is_err());
    }

    #[test]
    fn small_benchmark_is_deterministic() {
        let g = generate_synthetic(SynthKind::PowerLaw, 100, 2).unwrap();
        let mut spec = BenchSpec::new(PairMode::Uniform, 20, 0.2, 0.04);
        spec.seed = 9;
        let a = run_benchmark(&g, &spec).unwrap();
        let b = run_benchmark(&g, &spec).unwrap();
        assert_eq!(a.sampled_pairs, b.sampled_pairs);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.mean_relative_error, y.mean_relative_error);
            assert_eq!(x.mean_walks, y.mean_walks);
        }
        spec.oracle_max_n = 10;
        let c = run_benchmark(&g, &spec).unwrap();
        assert!(c.rows.iter().all(|r| r.mean_relative_error.is_none()));
    }
}
