use std::collections::{BTreeMap, BTreeSet};

use super::{ResourceArea, ResourceCoverage};
use crate::error::PreprocessError;
use crate::instance::{Edge, Instance, Node, TrainLine};
use crate::term::Term;

/// Reflexive reachability between the nodes of one train's subgraph.
#[derive(Clone, Debug)]
pub struct Reachability {
    reach: BTreeMap<Node, BTreeSet<Node>>,
}

impl Reachability {
    pub fn new(t: &TrainLine) -> Self {
        let order = t.topological_order().unwrap_or_else(|| t.nodes.iter().cloned().collect());
        let mut reach: BTreeMap<Node, BTreeSet<Node>> = BTreeMap::new();
        for v in order.iter().rev() {
            let mut set = BTreeSet::from([v.clone()]);
            for e in t.successors(v) {
                if let Some(next) = reach.get(&e.to) {
                    set.extend(next.iter().cloned());
                }
            }
            reach.insert(v.clone(), set);
        }
        Reachability { reach }
    }

    pub fn reaches(&self, from: &Node, to: &Node) -> bool {
        self.reach.get(from).is_some_and(|s| s.contains(to))
    }
}

/// True iff no path of `t` leads from one edge of `edges` to another one
/// through an edge outside `resource_edges`.
pub fn is_resource_area(edges: &BTreeSet<Edge>, resource_edges: &BTreeSet<Edge>, t: &TrainLine) -> bool {
    is_area_with(edges, resource_edges, t, &Reachability::new(t))
}

fn is_area_with(
    edges: &BTreeSet<Edge>,
    resource_edges: &BTreeSet<Edge>,
    t: &TrainLine,
    reach: &Reachability,
) -> bool {
    t.edges.iter().filter(|e| !resource_edges.contains(e)).all(|outside| {
        let from_area = edges.iter().any(|x| reach.reaches(&x.to, &outside.from));
        let to_area = edges.iter().any(|y| reach.reaches(&outside.to, &y.from));
        !(from_area && to_area)
    })
}

/// `(e_ra, l_ra)` of an edge set: earliest arrival at a source node and
/// latest arrival at a target node.
pub(crate) fn area_bounds(t: &TrainLine, edges: &BTreeSet<Edge>) -> (i64, Option<i64>) {
    let entry = edges.iter().map(|e| t.earliest(&e.from)).min().unwrap_or(0);
    let exit = edges
        .iter()
        .map(|e| t.latest(&e.to))
        .try_fold(i64::MIN, |acc, l| l.map(|l| acc.max(l)));
    (entry, exit)
}

/// Partitions every `a(r) ∩ L_t` into maximal resource areas, greedily in
/// lexicographic edge order. Precomputed areas are checked and used instead.
pub fn compute_coverage(inst: &Instance) -> Result<ResourceCoverage, PreprocessError> {
    if let Some(pre) = inst.precomputed.as_ref().filter(|p| !p.areas.is_empty()) {
        return checked_precomputed(inst, pre);
    }
    let mut cov = ResourceCoverage::default();
    for (ti, t) in inst.trains.iter().enumerate() {
        let reach = Reachability::new(t);
        for (r, redges) in &inst.network.resources {
            let mut unused: BTreeSet<Edge> = redges.intersection(&t.edges).cloned().collect();
            let mut k = 0;
            while !unused.is_empty() {
                let mut area = BTreeSet::new();
                for e in unused.clone() {
                    area.insert(e.clone());
                    if is_area_with(&area, redges, t, &reach) {
                        unused.remove(&e);
                    } else {
                        area.remove(&e);
                    }
                }
                let (entry, exit) = area_bounds(t, &area);
                cov.push(ResourceArea {
                    train: ti,
                    resource: r.clone(),
                    id: Term::Int(k),
                    edges: area,
                    entry,
                    exit,
                });
                k += 1;
            }
        }
    }
    Ok(cov)
}

fn checked_precomputed(
    inst: &Instance,
    pre: &crate::instance::Precomputed,
) -> Result<ResourceCoverage, PreprocessError> {
    let mut cov = ResourceCoverage::default();
    for (ti, t) in inst.trains.iter().enumerate() {
        let reach = Reachability::new(t);
        for (r, redges) in &inst.network.resources {
            let bad = |property: String| PreprocessError::InvalidCoverage {
                train: t.id.to_string(),
                resource: r.to_string(),
                property,
            };
            let shared: BTreeSet<Edge> = redges.intersection(&t.edges).cloned().collect();
            let mut covered = BTreeSet::new();
            for ((tid, rid, aid), edges) in &pre.areas {
                if tid != &t.id || rid != r {
                    continue;
                }
                if !edges.is_subset(&shared) {
                    return Err(bad(format!("area {aid} has edges outside a(r) ∩ L_t")));
                }
                if !covered.is_disjoint(edges) {
                    return Err(bad(format!("area {aid} overlaps another area")));
                }
                if !is_area_with(edges, redges, t, &reach) {
                    return Err(bad(format!("area {aid} is not a resource area")));
                }
                covered.extend(edges.iter().cloned());
                let (entry, exit) = area_bounds(t, edges);
                let key = (tid.clone(), rid.clone(), aid.clone());
                if pre.entry.get(&key).is_some_and(|x| *x != entry) {
                    return Err(bad(format!("e_ra of area {aid} differs from the earliest entry {entry}")));
                }
                if pre.exit.get(&key).is_some_and(|x| *x != exit) {
                    return Err(bad(format!("l_ra of area {aid} differs from the latest exit")));
                }
                cov.push(ResourceArea {
                    train: ti,
                    resource: r.clone(),
                    id: aid.clone(),
                    edges: edges.clone(),
                    entry,
                    exit,
                });
            }
            if covered != shared {
                return Err(bad("areas do not cover a(r) ∩ L_t".into()));
            }
        }
    }
    let known: BTreeSet<(&Term, &Term)> = inst
        .trains
        .iter()
        .flat_map(|t| inst.network.resources.keys().map(move |r| (&t.id, r)))
        .collect();
    if let Some(((t, r, _), _)) = pre.areas.iter().find(|((t, r, _), _)| !known.contains(&(t, r))) {
        return Err(PreprocessError::InvalidCoverage {
            train: t.to_string(),
            resource: r.to_string(),
            property: "area for an unknown train or resource".into(),
        });
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::preprocess::subsume_resources;

    const REFERENCE: &str = include_str!("../../../../fixtures/reference.lp");
    const FULL: &str = include_str!("../../../../fixtures/reference_full.lp");

    fn set(edges: &[(i64, i64)]) -> BTreeSet<Edge> {
        edges.iter().map(|&(a, b)| Edge::new(a, b)).collect()
    }

    fn chain() -> TrainLine {
        let doc = "tl(t). edge(t,1,2). edge(t,2,3). edge(t,3,4).
            m((1,2),1). m((2,3),1). m((3,4),1).
            w(t,(1,2),0). w(t,(2,3),0). w(t,(3,4),0).
            e(t,1,0). l(t,1,9). e(t,2,0). l(t,2,9). e(t,3,0). l(t,3,9). e(t,4,0). l(t,4,9).
            start(t,1). end(t,4).";
        parse_instance(doc).unwrap().trains.remove(0)
    }

    #[test]
    fn gap_breaks_area() {
        let t = chain();
        let r = set(&[(1, 2), (3, 4)]);
        assert!(!is_resource_area(&r, &r, &t));
        assert!(is_resource_area(&set(&[(1, 2)]), &r, &t));
        assert!(is_resource_area(&set(&[(3, 4)]), &r, &t));
    }

    #[test]
    fn sw1_edges_of_t1_form_one_area() {
        let inst = parse_instance(REFERENCE).unwrap();
        let sw1 = &inst.network.resources[&Term::sym("sw1")];
        let t1_edges = set(&[(1, 3), (2, 3), (3, 5)]);
        assert!(is_resource_area(&t1_edges, sw1, &inst.trains[0]));
    }

    #[test]
    fn computed_coverage_of_full_instance() {
        let (reduced, _) = subsume_resources(&parse_instance(FULL).unwrap());
        let cov = compute_coverage(&reduced).unwrap();
        let sw2 = cov.of(0, &Term::sym("sw2"));
        assert_eq!(sw2.len(), 1);
        assert_eq!(cov.areas[sw2[0]].edges, set(&[(8, 10), (10, 11), (10, 12)]));
        let sw1 = &cov.areas[cov.of(0, &Term::sym("sw1"))[0]];
        assert_eq!((sw1.entry, sw1.exit), (240, Some(660)));
        assert_eq!(cov.areas.len(), 14);
    }

    #[test]
    fn precomputed_matches_computation() {
        let shipped = parse_instance(REFERENCE).unwrap();
        let from_facts = compute_coverage(&shipped).unwrap();
        let mut bare = shipped.clone();
        bare.precomputed = None;
        let computed = compute_coverage(&bare).unwrap();
        assert_eq!(from_facts, computed);
    }

    #[test]
    fn chain_coverage_splits_in_two() {
        let mut inst = Instance::default();
        inst.trains.push(chain());
        inst.network.resources.insert(Term::sym("r"), set(&[(1, 2), (3, 4)]));
        let cov = compute_coverage(&inst).unwrap();
        assert_eq!(cov.areas.len(), 2);
        assert_eq!(cov.areas[0].edges, set(&[(1, 2)]));
        assert_eq!(cov.areas[1].edges, set(&[(3, 4)]));
    }

    #[test]
    fn broken_precomputed_areas_are_rejected() {
        let text = REFERENCE.replace("ra(t1,sw2,0,(10,12)).", "");
        let err = compute_coverage(&parse_instance(&text).unwrap()).unwrap_err();
        assert!(matches!(err, PreprocessError::InvalidCoverage { ref property, .. } if property.contains("cover")));
        let text = REFERENCE.replace("e_ra(t1,sw1,0,240).", "e_ra(t1,sw1,0,0).");
        let err = compute_coverage(&parse_instance(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("e_ra"));
    }
}
