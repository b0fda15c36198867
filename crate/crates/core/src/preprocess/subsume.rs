use std::collections::{BTreeMap, BTreeSet};

use crate::instance::{Edge, Instance, ResourceId};

/// Removes every resource dominated by another one: its edge set is
/// contained in the other's, its blocked time is not larger, and no
/// collision-free point mentions the dominating resource. Among identical
/// resources the smallest id survives.
///
/// Collision-free points on removed resources are dropped together with them.
pub fn subsume_resources(inst: &Instance) -> (Instance, BTreeSet<ResourceId>) {
    let net = &inst.network;
    let with_free: BTreeSet<&ResourceId> = inst.free_points.iter().map(|p| &p.resource).collect();
    let dominates = |big: &ResourceId, small: &ResourceId| -> bool {
        if big == small || with_free.contains(big) {
            return false;
        }
        let (a_big, a_small) = (&net.resources[big], &net.resources[small]);
        let (b_big, b_small) = (net.blocked_time(big), net.blocked_time(small));
        if !a_small.is_subset(a_big) || b_small > b_big {
            return false;
        }
        // identical and mutually dominating: keep the smaller id
        let mutual = a_small == a_big && b_small == b_big && !with_free.contains(small);
        !mutual || big < small
    };

    let mut by_edge: BTreeMap<&Edge, Vec<&ResourceId>> = BTreeMap::new();
    for (r, es) in &net.resources {
        for e in es {
            by_edge.entry(e).or_default().push(r);
        }
    }
    let removed: BTreeSet<ResourceId> = net
        .resources
        .iter()
        .filter(|(r, es)| match es.first() {
            Some(e) => by_edge[e].iter().any(|big| dominates(big, r)),
            None => net.resources.keys().any(|big| dominates(big, r)),
        })
        .map(|(r, _)| r.clone())
        .collect();

    let mut reduced = inst.clone();
    for r in &removed {
        reduced.network.resources.remove(r);
        reduced.network.blocked.remove(r);
    }
    reduced.free_points.retain(|p| !removed.contains(&p.resource));
    if let Some(pre) = reduced.precomputed.as_mut() {
        pre.areas.retain(|(_, r, _), _| !removed.contains(r));
        pre.entry.retain(|(_, r, _), _| !removed.contains(r));
        pre.exit.retain(|(_, r, _), _| !removed.contains(r));
    }
    (reduced, removed)
}
