use std::collections::BTreeSet;

use super::{AreaIdx, ResourceCoverage};
use crate::instance::{Edge, Instance, TrainLine};

/// Two areas of different trains on the same resource whose extended
/// occupation intervals overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub first: AreaIdx,
    pub second: AreaIdx,
    /// Connections (by index) whose collision-free points cover the pair.
    /// While one of them is in effect the pair needs no ordering.
    pub waivers: Vec<usize>,
}

/// An area pair that never needs ordering: a connection listing it as
/// collision-free is in effect on every route.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeAreaPair {
    pub first: AreaIdx,
    pub second: AreaIdx,
    pub connections: Vec<usize>,
}

/// Two areas of the same train on different resources sharing edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub train: usize,
    pub first: AreaIdx,
    pub second: AreaIdx,
    pub shared: BTreeSet<Edge>,
}

/// `before` must be left before `after` is entered in every solution that
/// uses both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Decided {
    pub before: AreaIdx,
    pub after: AreaIdx,
}

fn strictly_overlap(a: (i64, Option<i64>), b: (i64, Option<i64>)) -> bool {
    a.1.is_none_or(|end| b.0 < end) && b.1.is_none_or(|end| a.0 < end)
}

/// Area pairs in conflict, and the pairs exempted outright by collision-free points.
pub fn detect_conflicts(
    inst: &Instance,
    cov: &ResourceCoverage,
    mandatory: &[BTreeSet<Edge>],
) -> (Vec<Conflict>, Vec<FreeAreaPair>) {
    let always_active = |ci: usize| {
        let c = &inst.connections[ci];
        let (Some(t), Some(t2)) = (inst.train_index(&c.train), inst.train_index(&c.other_train))
        else {
            return false;
        };
        mandatory[t].contains(&c.edge) && mandatory[t2].contains(&c.other_edge)
    };
    let mut conflicts = Vec::new();
    let mut free = Vec::new();
    for (i, a) in cov.areas.iter().enumerate() {
        for (j, b) in cov.areas.iter().enumerate().skip(i + 1) {
            if a.train == b.train || a.resource != b.resource {
                continue;
            }
            let blocked = inst.network.blocked_time(&a.resource);
            if !strictly_overlap(a.extended_interval(blocked), b.extended_interval(blocked)) {
                continue;
            }
            let (ta, tb) = (&inst.trains[a.train].id, &inst.trains[b.train].id);
            let waivers: BTreeSet<usize> = inst
                .free_points
                .iter()
                .filter(|p| {
                    p.resource == a.resource
                        && ((&p.train == ta
                            && &p.other_train == tb
                            && a.edges.contains(&p.edge)
                            && b.edges.contains(&p.other_edge))
                            || (&p.train == tb
                                && &p.other_train == ta
                                && b.edges.contains(&p.edge)
                                && a.edges.contains(&p.other_edge)))
                })
                .filter_map(|p| inst.connections.iter().position(|c| c.id == p.connection))
                .collect();
            let waivers: Vec<usize> = waivers.into_iter().collect();
            if waivers.iter().any(|&c| always_active(c)) {
                free.push(FreeAreaPair {
                    first: i,
                    second: j,
                    connections: waivers,
                });
            } else {
                conflicts.push(Conflict {
                    first: i,
                    second: j,
                    waivers,
                });
            }
        }
    }
    (conflicts, free)
}

/// Conflicts counted between single edges instead of areas.
pub fn count_edge_conflicts(inst: &Instance) -> usize {
    let mut count = 0;
    for (r, redges) in &inst.network.resources {
        let blocked = inst.network.blocked_time(r);
        let users: Vec<(&TrainLine, Vec<&Edge>)> = inst
            .trains
            .iter()
            .map(|t| (t, redges.intersection(&t.edges).collect::<Vec<_>>()))
            .filter(|(_, es)| !es.is_empty())
            .collect();
        for (i, (t, es)) in users.iter().enumerate() {
            for (t2, es2) in users.iter().skip(i + 1) {
                for &e in es {
                    for &e2 in es2 {
                        let free = inst.free_points.iter().any(|p| {
                            &p.resource == r
                                && ((p.train == t.id && p.other_train == t2.id && &p.edge == e && &p.other_edge == e2)
                                    || (p.train == t2.id
                                        && p.other_train == t.id
                                        && &p.edge == e2
                                        && &p.other_edge == e))
                        });
                        let ia = (t.earliest(&e.from), t.latest(&e.to).map(|l| l + blocked));
                        let ib = (t2.earliest(&e2.from), t2.latest(&e2.to).map(|l| l + blocked));
                        if !free && strictly_overlap(ia, ib) {
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    count
}

/// Area overlaps within each train, and statically ordered area pairs.
pub fn compute_overlaps_and_decided(
    inst: &Instance,
    cov: &ResourceCoverage,
    mandatory: &[BTreeSet<Edge>],
) -> (Vec<Overlap>, Vec<Decided>) {
    let mut overlaps = Vec::new();
    let mut decided = Vec::new();
    for (i, a) in cov.areas.iter().enumerate() {
        for (j, b) in cov.areas.iter().enumerate() {
            if i == j {
                continue;
            }
            if a.train == b.train {
                if i < j && a.resource != b.resource {
                    let shared: BTreeSet<Edge> = a.edges.intersection(&b.edges).cloned().collect();
                    if !shared.is_empty() {
                        overlaps.push(Overlap {
                            train: a.train,
                            first: i,
                            second: j,
                            shared,
                        });
                    }
                }
                continue;
            }
            if a.resource != b.resource {
                continue;
            }
            let (ta, tb) = (&inst.trains[a.train], &inst.trains[b.train]);
            let by_windows = a.exit.is_some_and(|x| x < b.entry);
            let by_mandatory = || {
                a.edges.intersection(&mandatory[a.train]).any(|ea| {
                    ta.latest(&ea.to).is_some_and(|l| {
                        b.edges
                            .intersection(&mandatory[b.train])
                            .any(|eb| l < tb.earliest(&eb.from))
                    })
                })
            };
            if by_windows || by_mandatory() {
                decided.push(Decided { before: i, after: j });
            }
        }
    }
    (overlaps, decided)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::preprocess::{compute_coverage, subsume_resources};
    use crate::term::Term;

    const REFERENCE: &str = include_str!("../../../../fixtures/reference.lp");
    const FULL: &str = include_str!("../../../../fixtures/reference_full.lp");

    fn describe(inst: &Instance, cov: &ResourceCoverage, i: AreaIdx) -> String {
        let a = &cov.areas[i];
        format!("{}/{}", inst.trains[a.train].id, a.resource)
    }

    #[test]
    fn reference_conflicts() {
        let inst = parse_instance(REFERENCE).unwrap();
        let cov = compute_coverage(&inst).unwrap();
        let mand: Vec<_> = inst.trains.iter().map(super::super::compute_mandatory_edges).collect();
        let (conflicts, free) = detect_conflicts(&inst, &cov, &mand);
        let names: BTreeSet<(String, String)> = conflicts
            .iter()
            .map(|c| (describe(&inst, &cov, c.first), describe(&inst, &cov, c.second)))
            .collect();
        let expected: BTreeSet<(String, String)> = [
            ("t1/sw1", "t2/sw1"),
            ("t1/sw1", "t3/sw1"),
            ("t1/sw2", "t2/sw2"),
            ("t1/sw2", "t3/sw2"),
            ("t2/sw2", "t3/sw2"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(names, expected);
        assert_eq!(free.len(), 1);
        assert_eq!(describe(&inst, &cov, free[0].first), "t2/sw1");
        assert_eq!(describe(&inst, &cov, free[0].second), "t3/sw1");
        assert_eq!(count_edge_conflicts(&inst), 15);
    }

    #[test]
    fn disjoint_windows_give_no_conflict() {
        let text = REFERENCE.replace("b(sw2,60).", "b(sw2,0).");
        let inst = parse_instance(&text).unwrap();
        let cov = compute_coverage(&inst).unwrap();
        let mand: Vec<_> = inst.trains.iter().map(super::super::compute_mandatory_edges).collect();
        let (conflicts, _) = detect_conflicts(&inst, &cov, &mand);
        let t2_sw2 = cov.of(1, &Term::sym("sw2"))[0];
        let t1_sw2 = cov.of(0, &Term::sym("sw2"))[0];
        // t2 leaves sw2 by 420 at the latest, t1 enters at 420 at the earliest
        assert!(!conflicts
            .iter()
            .any(|c| (c.first, c.second) == (t1_sw2.min(t2_sw2), t1_sw2.max(t2_sw2))));
    }

    #[test]
    fn decided_pairs_of_full_instance() {
        let (inst, _) = subsume_resources(&parse_instance(FULL).unwrap());
        let cov = compute_coverage(&inst).unwrap();
        let mand: Vec<_> = inst.trains.iter().map(super::super::compute_mandatory_edges).collect();
        let (overlaps, decided) = compute_overlaps_and_decided(&inst, &cov, &mand);
        let names: BTreeSet<(String, String)> = decided
            .iter()
            .map(|d| (describe(&inst, &cov, d.before), describe(&inst, &cov, d.after)))
            .collect();
        // t2 leaves sw2 by 420, t1 enters sw2 no earlier than 420 on (8,10)
        assert!(!names.contains(&("t2/sw2".into(), "t1/sw2".into())));
        // t2 reaches 7 by 420 on (10,7); t3 starts (9,10) no earlier than 300
        assert!(!names.contains(&("t2/sw2".into(), "t3/sw2".into())));
        assert!(decided.iter().all(|d| cov.areas[d.before].resource == cov.areas[d.after].resource));
        // each remaining singleton under sw1 overlaps the sw1 area of its train
        assert_eq!(overlaps.len(), 5);
        for o in &overlaps {
            assert_eq!(o.shared.len(), 1);
        }
    }

    #[test]
    fn mandatory_edges_decide_order() {
        let doc = "tl(ta). tl(tb).
            edge(ta,1,2). edge(ta,2,3). edge(tb,1,2). edge(tb,2,3).
            m((1,2),5). m((2,3),5).
            w(ta,(1,2),0). w(ta,(2,3),0). w(tb,(1,2),0). w(tb,(2,3),0).
            e(ta,1,0). l(ta,1,10). e(ta,2,5). l(ta,2,20). e(ta,3,10). l(ta,3,100).
            e(tb,1,50). l(tb,1,200). e(tb,2,55). l(tb,2,200). e(tb,3,60). l(tb,3,200).
            start(ta,1). end(ta,3). start(tb,1). end(tb,3).
            resource(r,(1,2)). resource(r,(2,3)). b(r,1).";
        let inst = parse_instance(doc).unwrap();
        let cov = compute_coverage(&inst).unwrap();
        let mand: Vec<_> = inst.trains.iter().map(super::super::compute_mandatory_edges).collect();
        let (conflicts, _) = detect_conflicts(&inst, &cov, &mand);
        assert_eq!(conflicts.len(), 1);
        let (_, decided) = compute_overlaps_and_decided(&inst, &cov, &mand);
        assert_eq!(decided, vec![Decided { before: 0, after: 1 }]);
    }
}
