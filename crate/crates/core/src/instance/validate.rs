use std::fmt;

use super::{CollisionFreePoint, Edge, Instance};

/// One falsified instance invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

fn v(invariant: &'static str, detail: String) -> Violation {
    Violation { invariant, detail }
}

/// Checks the structural invariants of an instance. Empty iff all hold.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let net = &inst.network;

    for e in &net.edges {
        if !net.nodes.contains(&e.from) || !net.nodes.contains(&e.to) {
            out.push(v("edge-endpoints", format!("edge {e} has an unknown endpoint")));
        }
    }
    for (r, edges) in &net.resources {
        for e in edges.difference(&net.edges) {
            out.push(v("resource-edges", format!("resource {r} covers unknown edge {e}")));
        }
    }
    for (e, m) in &net.travel {
        if *m < 0 {
            out.push(v("travel-time", format!("edge {e} has negative travel time {m}")));
        }
    }
    for (r, b) in &net.blocked {
        if *b < 0 {
            out.push(v("blocked-time", format!("resource {r} has negative blocked time {b}")));
        }
    }

    for t in &inst.trains {
        for e in t.edges.difference(&net.edges) {
            out.push(v("train-edges", format!("train {} uses unknown edge {e}", t.id)));
        }
        if t.topological_order().is_none() {
            out.push(v("acyclic", format!("train {} has a cycle in its subgraph", t.id)));
        }
        if t.starts.is_empty() || t.ends.is_empty() {
            out.push(v("starts-ends", format!("train {} lacks a start or end node", t.id)));
        }
        if t.starts != t.computed_starts() || t.ends != t.computed_ends() {
            out.push(v(
                "starts-ends",
                format!("train {} start/end nodes disagree with degrees", t.id),
            ));
        }
        for s in &t.nodes {
            if let Some(l) = t.latest(s) {
                if t.earliest(s) > l {
                    out.push(v(
                        "earliest-latest",
                        format!("train {} node {s}: e = {} > l = {l}", t.id, t.earliest(s)),
                    ));
                }
            }
        }
    }

    for c in &inst.connections {
        let (Some(t), Some(t2)) = (inst.train(&c.train), inst.train(&c.other_train)) else {
            out.push(v("connection-trains", format!("connection {} names an unknown train", c.id)));
            continue;
        };
        if c.train == c.other_train {
            out.push(v("connection-trains", format!("connection {} connects a train to itself", c.id)));
        }
        if !t.edges.contains(&c.edge) {
            out.push(v("connection-edges", format!("connection {}: {} not in {}", c.id, c.edge, t.id)));
        }
        if !t2.edges.contains(&c.other_edge) {
            out.push(v(
                "connection-edges",
                format!("connection {}: {} not in {}", c.id, c.other_edge, t2.id),
            ));
        }
        if c.node != c.edge.from && c.node != c.edge.to {
            out.push(v("connection-nodes", format!("connection {}: node {} not on {}", c.id, c.node, c.edge)));
        }
        if c.other_node != c.other_edge.from && c.other_node != c.other_edge.to {
            out.push(v(
                "connection-nodes",
                format!("connection {}: node {} not on {}", c.id, c.other_node, c.other_edge),
            ));
        }
        if let (Some(a), Some(w)) = (c.alpha, c.omega) {
            if a > w {
                out.push(v("connection-window", format!("connection {}: alpha {a} > omega {w}", c.id)));
            }
        }
    }

    for p in &inst.free_points {
        out.extend(check_free_point(inst, p));
    }

    for ((t, node), ths) in &inst.objective.thresholds {
        let Some(train) = inst.train(t) else {
            out.push(v("thresholds", format!("threshold for unknown train {t}")));
            continue;
        };
        for w in ths.windows(2) {
            if w[0].at >= w[1].at {
                out.push(v("thresholds", format!("{t} at {node}: thresholds not strictly increasing")));
            }
        }
        for th in ths {
            if th.weight < 1 {
                out.push(v("thresholds", format!("{t} at {node}: weight {} < 1", th.weight)));
            }
            if let Some(l) = train.latest(node) {
                if th.at > l {
                    out.push(v("thresholds", format!("{t} at {node}: threshold {} beyond latest {l}", th.at)));
                }
            }
        }
        if let Some(d) = inst.delay_start(t, node) {
            if d < train.earliest(node) {
                out.push(v(
                    "delay-start",
                    format!("{t} at {node}: derived delay start {d} before earliest arrival"),
                ));
            }
        }
    }
    for (e, p) in &inst.objective.route_penalty {
        if *p < 0 {
            out.push(v("route-penalty", format!("edge {e} has negative penalty")));
        }
    }
    out
}

/// Closure conditions: every edge adjacent to a free edge that carries the
/// same resource must itself form a free point with the partner edge.
fn check_free_point(inst: &Instance, p: &CollisionFreePoint) -> Vec<Violation> {
    let mut out = Vec::new();
    let (Some(t), Some(t2)) = (inst.train(&p.train), inst.train(&p.other_train)) else {
        out.push(v("free-point", format!("free point names an unknown train in {}", p.connection)));
        return out;
    };
    let Some(res_edges) = inst.network.resources.get(&p.resource) else {
        out.push(v("free-point", format!("free point on unknown resource {}", p.resource)));
        return out;
    };
    if !t.edges.contains(&p.edge) || !t2.edges.contains(&p.other_edge) {
        out.push(v("free-point", format!("free point of {} uses edges outside the trains", p.connection)));
    }
    if !res_edges.contains(&p.edge) || !res_edges.contains(&p.other_edge) {
        out.push(v(
            "free-point",
            format!("free point of {}: edges do not carry {}", p.connection, p.resource),
        ));
    }
    let has = |edge: &Edge, other: &Edge| {
        inst.free_points.iter().any(|q| {
            q.connection == p.connection
                && q.train == p.train
                && q.other_train == p.other_train
                && q.resource == p.resource
                && &q.edge == edge
                && &q.other_edge == other
        })
    };
    let adjacent_own = t
        .predecessors(&p.edge.from)
        .chain(t.successors(&p.edge.to))
        .filter(|e| res_edges.contains(e));
    for e in adjacent_own {
        if !has(e, &p.other_edge) {
            out.push(v(
                "free-closure",
                format!("connection {}: missing free point ({}, {}) on {}", p.connection, e, p.other_edge, p.resource),
            ));
        }
    }
    let adjacent_other = t2
        .predecessors(&p.other_edge.from)
        .chain(t2.successors(&p.other_edge.to))
        .filter(|e| res_edges.contains(e));
    for e in adjacent_other {
        if !has(&p.edge, e) {
            out.push(v(
                "free-closure",
                format!("connection {}: missing free point ({}, {}) on {}", p.connection, p.edge, e, p.resource),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    const REFERENCE: &str = include_str!("../../../../fixtures/reference.lp");

    #[test]
    fn reference_is_valid() {
        let inst = parse_instance(REFERENCE).unwrap();
        assert_eq!(validate_instance(&inst), vec![]);
    }

    #[test]
    fn two_cycle_is_reported() {
        let mut inst = parse_instance(REFERENCE).unwrap();
        let t2 = &mut inst.trains[1];
        t2.edges.insert(Edge::new(3, 4));
        inst.network.edges.insert(Edge::new(3, 4));
        let report = validate_instance(&inst);
        assert!(report.iter().any(|x| x.invariant == "acyclic"), "{report:?}");
    }

    #[test]
    fn removing_the_only_free_point_keeps_closure() {
        let text = REFERENCE.replace("free(1,t2,(4,3),t3,(3,6),sw1).", "");
        let inst = parse_instance(&text).unwrap();
        assert_eq!(validate_instance(&inst), vec![]);
    }

    #[test]
    fn missing_closure_point() {
        // t_a over (1,2); t_b over (2,3),(3,4); everything on resource r
        let doc = "tl(ta). tl(tb).
            edge(ta,1,2). edge(tb,2,3). edge(tb,3,4).
            m((1,2),6). m((2,3),6). m((3,4),6).
            w(ta,(1,2),0). w(tb,(2,3),0). w(tb,(3,4),0).
            e(ta,1,0). l(ta,1,100). e(ta,2,0). l(ta,2,100).
            e(tb,2,0). l(tb,2,100). e(tb,3,0). l(tb,3,100). e(tb,4,0). l(tb,4,100).
            start(ta,1). end(ta,2). start(tb,2). end(tb,4).
            resource(r,(1,2)). resource(r,(2,3)). resource(r,(3,4)). b(r,10).
            connection(c,ta,(1,2),tb,(2,3),0,0,2,2).
            free(c,ta,(1,2),tb,(2,3),r).";
        let inst = parse_instance(doc).unwrap();
        let report = validate_instance(&inst);
        assert_eq!(report.len(), 1, "{report:?}");
        assert_eq!(report[0].invariant, "free-closure");
        let fixed = format!("{doc} free(c,ta,(1,2),tb,(3,4),r).");
        assert_eq!(validate_instance(&parse_instance(&fixed).unwrap()), vec![]);
    }

    #[test]
    fn bad_connection_window() {
        let text = REFERENCE.replace(
            "connection(1,t2,(4,3),t3,(3,6),0,0,3,3).",
            "connection(1,t2,(4,3),t3,(3,6),10,0,4,3).",
        );
        let report = validate_instance(&parse_instance(&text).unwrap());
        assert!(report.iter().any(|x| x.invariant == "connection-window"));
        assert!(report.iter().all(|x| x.invariant != "connection-nodes"));
    }
}
