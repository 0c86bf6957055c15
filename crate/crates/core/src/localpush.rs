//! Local push algorithms: reverse push towards a target, forward push from a
//! source, and a max-residual reverse push that stops on a work budget.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::sampling::check_alpha;
use crate::sparse::{SparseVec, StableHasher};

#[derive(Debug, Clone, Default, Serialize)]
pub struct PushResult {
    #[serde(skip)]
    pub estimates: SparseVec,
    #[serde(skip)]
    pub residuals: SparseVec,
    pub pushes: usize,
    /// Sum of (in-degree + 1) over reverse pushes, or (out-degree + 1) over
    /// forward pushes.
    pub work_units: u64,
    /// Sum of `d_u` over forward pushes.
    pub pushed_degree_sum: f64,
    /// Largest residual left at termination (degree-normalized for forward push).
    pub achieved_rmax: f64,
}

fn check_rmax(r_max: f64) -> Result<()> {
    if r_max > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "r_max must be positive, got {r_max}"
        )))
    }
}

/// Reverse push from target `t` until every residual is at most `r_max`.
pub fn reverse_push(g: &Graph, t: NodeId, r_max: f64, alpha: f64) -> Result<PushResult> {
    check_alpha(alpha)?;
    check_rmax(r_max)?;
    g.check_node(t)?;
    Ok(reverse_push_from(g, SparseVec::unit(t), r_max, alpha))
}

/// One reverse push at `v`: moves `alpha r[v]` into `p[v]` and spreads
/// `(1 - alpha) w_{u,v} r[v]` to each in-neighbor `u`, reporting each updated
/// residual. Returns the pushed residual.
pub fn reverse_push_step<F: FnMut(NodeId, f64)>(
    g: &Graph,
    p: &mut SparseVec,
    r: &mut SparseVec,
    v: NodeId,
    alpha: f64,
    mut updated: F,
) -> f64 {
    let rv = r.take(v);
    p.add(v, alpha * rv);
    for (u, w) in g.in_neighbors(v) {
        updated(u, r.add(u, (1.0 - alpha) * w * rv));
    }
    rv
}

/// One forward push at `u`, spreading to out-neighbors.
pub fn forward_push_step<F: FnMut(NodeId, f64)>(
    g: &Graph,
    p: &mut SparseVec,
    r: &mut SparseVec,
    u: NodeId,
    alpha: f64,
    mut updated: F,
) -> f64 {
    let ru = r.take(u);
    p.add(u, alpha * ru);
    for (v, w) in g.out_neighbors(u) {
        updated(v, r.add(v, (1.0 - alpha) * w * ru));
    }
    ru
}

/// Reverse push starting from an arbitrary residual vector.
pub fn reverse_push_from(g: &Graph, initial: SparseVec, r_max: f64, alpha: f64) -> PushResult {
    let mut p = SparseVec::new();
    let mut r = initial;
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    let mut queued: HashSet<NodeId, StableHasher> = HashSet::default();
    for (v, x) in r.sorted() {
        if x > r_max {
            queue.push_back(v);
            queued.insert(v);
        }
    }
    let mut pushes = 0;
    let mut work = 0u64;
    while let Some(v) = queue.pop_front() {
        queued.remove(&v);
        let rv = r.get(v);
        if rv <= r_max {
            continue;
        }
        reverse_push_step(g, &mut p, &mut r, v, alpha, |u, ru| {
            if ru > r_max && queued.insert(u) {
                queue.push_back(u);
            }
        });
        pushes += 1;
        work += g.in_degree(v) as u64 + 1;
    }
    let achieved_rmax = r.max_value();
    PushResult {
        estimates: p,
        residuals: r,
        pushes,
        work_units: work,
        pushed_degree_sum: 0.0,
        achieved_rmax,
    }
}

/// Rule deciding which residuals forward push may push.
#[derive(Debug, Clone, Copy)]
pub struct ForwardRule {
    pub threshold: f64,
    /// Compare `r[u] / d_u` against the threshold instead of `r[u]`.
    pub degree_normalized: bool,
    /// Never push from nodes whose out-degree exceeds this.
    pub max_degree: Option<usize>,
}

impl ForwardRule {
    #[inline]
    fn eligible(&self, g: &Graph, u: NodeId, ru: f64) -> bool {
        let d = g.degree(u);
        if d == 0.0 {
            return false;
        }
        if let Some(cap) = self.max_degree {
            if g.out_degree(u) > cap {
                return false;
            }
        }
        let x = if self.degree_normalized { ru / d } else { ru };
        x > self.threshold
    }
}

/// Forward push from `s` until `r[u] / d_u <= r_max` for every node.
pub fn forward_push(g: &Graph, s: NodeId, r_max: f64, alpha: f64) -> Result<PushResult> {
    check_alpha(alpha)?;
    check_rmax(r_max)?;
    g.check_node(s)?;
    let rule = ForwardRule {
        threshold: r_max,
        degree_normalized: true,
        max_degree: None,
    };
    Ok(forward_push_with(g, s, alpha, rule))
}

pub fn forward_push_with(g: &Graph, s: NodeId, alpha: f64, rule: ForwardRule) -> PushResult {
    let mut p = SparseVec::new();
    let mut r = SparseVec::unit(s);
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    let mut queued: HashSet<NodeId, StableHasher> = HashSet::default();
    if rule.eligible(g, s, 1.0) {
        queue.push_back(s);
        queued.insert(s);
    }
    let mut pushes = 0;
    let mut work = 0u64;
    let mut degree_sum = 0.0;
    while let Some(u) = queue.pop_front() {
        queued.remove(&u);
        let ru = r.get(u);
        if !rule.eligible(g, u, ru) {
            continue;
        }
        forward_push_step(g, &mut p, &mut r, u, alpha, |v, rv| {
            if rule.eligible(g, v, rv) && queued.insert(v) {
                queue.push_back(v);
            }
        });
        pushes += 1;
        work += g.out_degree(u) as u64 + 1;
        degree_sum += g.degree(u);
    }
    let achieved_rmax = r
        .iter()
        .map(|(u, x)| {
            let d = g.degree(u);
            if rule.degree_normalized && d > 0.0 {
                x / d
            } else {
                x
            }
        })
        .fold(0.0, f64::max);
    PushResult {
        estimates: p,
        residuals: r,
        pushes,
        work_units: work,
        pushed_degree_sum: degree_sum,
        achieved_rmax,
    }
}

/// How the balanced reverse push measures elapsed reverse work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalanceClock {
    /// Work units (in-degree + 1 per push) times `walk_time_constant`,
    /// compared with the predicted walk count `c * r_max / delta`.
    Logical { walk_time_constant: f64 },
    /// Elapsed seconds compared with `seconds_per_walk * c * r_max / delta`.
    WallClock { seconds_per_walk: f64 },
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    residual: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.residual
            .total_cmp(&other.residual)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reverse push that always pushes the largest residual, stopping once the
/// reverse work would exceed the predicted cost of the walks still needed at
/// the current maximum residual.
pub fn reverse_push_balanced(
    g: &Graph,
    t: NodeId,
    alpha: f64,
    delta: f64,
    c: f64,
    clock: BalanceClock,
) -> Result<PushResult> {
    check_alpha(alpha)?;
    g.check_node(t)?;
    for (name, x) in [("delta", delta), ("c", c)] {
        if !(x > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {x}"
            )));
        }
    }
    match clock {
        BalanceClock::Logical {
            walk_time_constant: k,
        }
        | BalanceClock::WallClock {
            seconds_per_walk: k,
        } => {
            if !(k > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "walk time constant must be positive, got {k}"
                )));
            }
        }
    }

    let started = Instant::now();
    let mut p = SparseVec::new();
    let mut r = SparseVec::unit(t);
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        residual: 1.0,
        node: t,
    });
    let mut pushes = 0;
    let mut work = 0u64;
    let mut achieved = 0.0;

    loop {
        while let Some(top) = heap.peek() {
            if r.get(top.node).to_bits() == top.residual.to_bits() {
                break;
            }
            heap.pop();
        }
        let Some(&top) = heap.peek() else {
            break;
        };
        let walk_budget = c * top.residual / delta;
        let over = match clock {
            BalanceClock::Logical { walk_time_constant } => {
                let next_cost = g.in_degree(top.node) as u64 + 1;
                (work + next_cost) as f64 * walk_time_constant >= walk_budget
            }
            BalanceClock::WallClock { seconds_per_walk } => {
                started.elapsed().as_secs_f64() >= seconds_per_walk * walk_budget
            }
        };
        if over {
            achieved = top.residual;
            break;
        }
        heap.pop();
        let v = top.node;
        reverse_push_step(g, &mut p, &mut r, v, alpha, |u, ru| {
            heap.push(HeapEntry {
                residual: ru,
                node: u,
            });
        });
        pushes += 1;
        work += g.in_degree(v) as u64 + 1;
    }

    Ok(PushResult {
        estimates: p,
        residuals: r,
        pushes,
        work_units: work,
        pushed_degree_sum: 0.0,
        achieved_rmax: achieved,
    })
}
