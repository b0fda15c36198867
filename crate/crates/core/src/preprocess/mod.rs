//! Instance reduction and the derived structures the encoder works on.

mod conflicts;
mod coverage;
mod heights;
mod mandatory;
mod subsume;

use std::collections::{BTreeMap, BTreeSet};

pub use conflicts::{
    compute_overlaps_and_decided, count_edge_conflicts, detect_conflicts, Conflict, Decided,
    FreeAreaPair, Overlap,
};
pub use coverage::{compute_coverage, is_resource_area, Reachability};
pub use heights::{
    compute_exclusive_times, compute_height_bounds, compute_heights, ExclusiveTimes, HeightBounds,
    HeightMap,
};
pub use mandatory::{compute_mandatory_edges, count_paths, PathCounts};
pub use subsume::subsume_resources;

use crate::error::PreprocessError;
use crate::instance::{Edge, Instance, Node, ResourceId};
use crate::term::Term;

pub type AreaIdx = usize;

/// A set of edges of one resource inside one train's subgraph that the
/// train cannot leave and re-enter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceArea {
    pub train: usize,
    pub resource: ResourceId,
    pub id: Term,
    pub edges: BTreeSet<Edge>,
    /// Earliest arrival over the area's source nodes.
    pub entry: i64,
    /// Latest arrival over the area's target nodes; `None` if unbounded.
    pub exit: Option<i64>,
}

impl ResourceArea {
    pub fn nodes(&self) -> BTreeSet<&Node> {
        self.edges.iter().flat_map(|e| [&e.from, &e.to]).collect()
    }

    /// Closed interval `[entry, exit + blocked]` used for conflict detection.
    pub fn extended_interval(&self, blocked: i64) -> (i64, Option<i64>) {
        (self.entry, self.exit.map(|x| x + blocked))
    }
}

/// Partition of every `a(r) ∩ L_t` into resource areas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceCoverage {
    pub areas: Vec<ResourceArea>,
    pub by_train_resource: BTreeMap<(usize, ResourceId), Vec<AreaIdx>>,
}

impl ResourceCoverage {
    pub fn of(&self, train: usize, resource: &ResourceId) -> &[AreaIdx] {
        self.by_train_resource
            .get(&(train, resource.clone()))
            .map_or(&[], |v| v.as_slice())
    }

    pub(crate) fn push(&mut self, area: ResourceArea) -> AreaIdx {
        let idx = self.areas.len();
        self.by_train_resource
            .entry((area.train, area.resource.clone()))
            .or_default()
            .push(idx);
        self.areas.push(area);
        idx
    }
}

/// Everything the encoder needs, computed once per instance.
#[derive(Clone, Debug)]
pub struct PreprocessedInstance {
    /// The instance with subsumed resources removed.
    pub instance: Instance,
    pub removed: BTreeSet<ResourceId>,
    pub coverage: ResourceCoverage,
    pub heights: Vec<HeightMap>,
    pub bounds: Vec<HeightBounds>,
    pub times: Vec<ExclusiveTimes>,
    pub mandatory: Vec<BTreeSet<Edge>>,
    pub paths: Vec<PathCounts>,
    pub conflicts: Vec<Conflict>,
    pub free_pairs: Vec<FreeAreaPair>,
    pub overlaps: Vec<Overlap>,
    pub decided: Vec<Decided>,
    pub edge_conflicts: usize,
}

/// Counters reported by `preprocess --stats`.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct PreprocessStats {
    /// #r: resources before subsumption
    pub resources: usize,
    /// #sr: subsumed resources
    pub subsumed: usize,
    /// #rtl: (train, resource, edge) incidences after subsumption
    pub incidences: usize,
    /// #ra: resource areas
    pub areas: usize,
    /// #ec: edge-level conflicts
    pub edge_conflicts: usize,
    /// #rac: area-level conflicts
    pub area_conflicts: usize,
    /// #vnn: node-named arrival variables
    pub node_vars: usize,
    /// #vhn: height-named arrival variables
    pub height_vars: usize,
    pub per_train_vars: BTreeMap<String, (usize, usize)>,
}

impl PreprocessedInstance {
    pub fn stats(&self, original_resources: usize) -> PreprocessStats {
        let inst = &self.instance;
        let incidences = inst
            .trains
            .iter()
            .map(|t| {
                inst.network
                    .resources
                    .values()
                    .map(|es| es.intersection(&t.edges).count())
                    .sum::<usize>()
            })
            .sum();
        let per_train_vars: BTreeMap<String, (usize, usize)> = inst
            .trains
            .iter()
            .zip(&self.heights)
            .map(|(t, h)| (t.id.to_string(), (t.nodes.len(), h.var_count)))
            .collect();
        PreprocessStats {
            resources: original_resources,
            subsumed: self.removed.len(),
            incidences,
            areas: self.coverage.areas.len(),
            edge_conflicts: self.edge_conflicts,
            area_conflicts: self.conflicts.len(),
            node_vars: per_train_vars.values().map(|v| v.0).sum(),
            height_vars: per_train_vars.values().map(|v| v.1).sum(),
            per_train_vars,
        }
    }

    /// Blocked time of the resource an area belongs to.
    pub fn blocked(&self, area: AreaIdx) -> i64 {
        self.instance
            .network
            .blocked_time(&self.coverage.areas[area].resource)
    }

    /// Height of `v` in train `t`.
    pub fn height(&self, train: usize, v: &Node) -> u32 {
        self.heights[train].heights[v]
    }
}

/// Runs the whole reduction pipeline.
pub fn preprocess(inst: &Instance) -> Result<PreprocessedInstance, PreprocessError> {
    for t in &inst.trains {
        if t.topological_order().is_none() {
            return Err(PreprocessError::Cyclic(t.id.to_string()));
        }
    }
    let (reduced, removed) = subsume_resources(inst);
    let mandatory = mandatory::resolve_mandatory(&reduced)?;
    let coverage = compute_coverage(&reduced)?;
    let heights: Vec<HeightMap> = reduced.trains.iter().map(compute_heights).collect();
    let bounds = reduced
        .trains
        .iter()
        .zip(&heights)
        .map(|(t, h)| compute_height_bounds(t, h))
        .collect();
    let times = reduced
        .trains
        .iter()
        .zip(&heights)
        .map(|(t, h)| compute_exclusive_times(t, &reduced.network, h))
        .collect();
    let paths = reduced.trains.iter().map(count_paths).collect();
    let (conflicts, free_pairs) = detect_conflicts(&reduced, &coverage, &mandatory);
    let (overlaps, decided) = compute_overlaps_and_decided(&reduced, &coverage, &mandatory);
    let edge_conflicts = count_edge_conflicts(&reduced);
    Ok(PreprocessedInstance {
        instance: reduced,
        removed,
        coverage,
        heights,
        bounds,
        times,
        mandatory,
        paths,
        conflicts,
        free_pairs,
        overlaps,
        decided,
        edge_conflicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    const FULL: &str = include_str!("../../../../fixtures/reference_full.lp");

    #[test]
    fn reference_statistics() {
        let inst = parse_instance(FULL).unwrap();
        let pre = preprocess(&inst).unwrap();
        let stats = pre.stats(inst.network.resources.len());
        assert_eq!(stats.resources, 15);
        assert_eq!(stats.subsumed, 5);
        assert_eq!(stats.area_conflicts, 5);
        assert_eq!(stats.edge_conflicts, 15);
        assert_eq!(stats.per_train_vars["t1"], (8, 6));
    }
}
