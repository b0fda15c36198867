use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::mandatory::count_paths;
use crate::instance::{Edge, Network, Node, TrainLine};

/// Longest distance from a start node, per node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeightMap {
    pub heights: BTreeMap<Node, u32>,
    /// Heights are contiguous, so this is also `max height + 1`.
    pub var_count: usize,
}

impl HeightMap {
    pub fn nodes_at(&self, h: u32) -> impl Iterator<Item = &Node> + '_ {
        self.heights
            .iter()
            .filter(move |(_, x)| **x == h)
            .map(|(v, _)| v)
    }
}

pub fn compute_heights(t: &TrainLine) -> HeightMap {
    let order = t
        .topological_order()
        .expect("train subgraphs are acyclic after validation");
    let mut heights: BTreeMap<Node, u32> = BTreeMap::new();
    for v in &order {
        let h = t
            .predecessors(v)
            .map(|e| heights[&e.from] + 1)
            .max()
            .unwrap_or(0);
        heights.insert(v.clone(), h);
    }
    let var_count = heights.values().max().map_or(0, |m| *m as usize + 1);
    HeightMap { heights, var_count }
}

/// Per-height time window plus the nodes whose own window is tighter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeightBounds {
    pub min_earliest: Vec<i64>,
    /// `None` if some node of the height has no latest arrival.
    pub max_latest: Vec<Option<i64>>,
    pub residual_earliest: BTreeMap<Node, i64>,
    pub residual_latest: BTreeMap<Node, i64>,
}

pub fn compute_height_bounds(t: &TrainLine, hm: &HeightMap) -> HeightBounds {
    let n = hm.var_count;
    let mut min_earliest = vec![i64::MAX; n];
    let mut max_latest = vec![Some(i64::MIN); n];
    for (v, &h) in &hm.heights {
        let h = h as usize;
        min_earliest[h] = min_earliest[h].min(t.earliest(v));
        max_latest[h] = match (max_latest[h], t.latest(v)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }
    let mut out = HeightBounds {
        min_earliest,
        max_latest,
        ..Default::default()
    };
    for (v, &h) in &hm.heights {
        let h = h as usize;
        if t.earliest(v) > out.min_earliest[h] {
            out.residual_earliest.insert(v.clone(), t.earliest(v));
        }
        if let Some(l) = t.latest(v) {
            if out.max_latest[h].is_none_or(|m| l < m) {
                out.residual_latest.insert(v.clone(), l);
            }
        }
    }
    out
}

/// Travel-time constraints between heights.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExclusiveTimes {
    /// `n → min_time(n, n+1)` for exclusively connected pairs.
    pub exclusive: BTreeMap<u32, i64>,
    /// Edges whose time must be enforced only when routed.
    pub conditional: BTreeMap<Edge, i64>,
}

/// Adjacent heights `(n, n+1)` are exclusively connected when every edge
/// leaving height `n` enters `n+1`, every edge entering `n+1` leaves `n`,
/// and every start-to-end path visits both heights.
pub fn compute_exclusive_times(t: &TrainLine, net: &Network, hm: &HeightMap) -> ExclusiveTimes {
    let h = |v: &Node| hm.heights[v];
    let time = |e: &Edge| net.travel_time(e) + t.wait_time(e);
    let paths = count_paths(t);
    let mut at_height = vec![BigUint::ZERO; hm.var_count];
    for (v, count) in &paths.through_node {
        at_height[h(v) as usize] += count;
    }
    let always = |n: u32| at_height[n as usize] == paths.total;

    let mut out = ExclusiveTimes::default();
    for n in 0..hm.var_count.saturating_sub(1) as u32 {
        let between: Vec<&Edge> = t
            .edges
            .iter()
            .filter(|e| h(&e.from) == n && h(&e.to) == n + 1)
            .collect();
        let stray = t
            .edges
            .iter()
            .any(|e| (h(&e.from) == n) != (h(&e.to) == n + 1));
        if between.is_empty() || stray || !always(n) || !always(n + 1) {
            continue;
        }
        let min = between.iter().map(|e| time(e)).min().expect("nonempty");
        out.exclusive.insert(n, min);
    }
    for e in &t.edges {
        let covered = h(&e.to) == h(&e.from) + 1
            && out.exclusive.get(&h(&e.from)).is_some_and(|m| *m >= time(e));
        if !covered {
            out.conditional.insert(e.clone(), time(e));
        }
    }
    out
}
