use std::collections::{BTreeMap, BTreeSet};

use super::{
    CollisionFreePoint, Connection, Edge, Instance, Node, Precomputed, Threshold, TrainId,
    TrainLine,
};
use crate::error::ParseError;
use crate::term::{parse_facts, Fact, Term};

const SCHEMA: &[(&str, usize)] = &[
    ("tl", 1),
    ("edge", 3),
    ("m", 2),
    ("w", 3),
    ("e", 3),
    ("l", 3),
    ("start", 2),
    ("end", 2),
    ("resource", 2),
    ("b", 2),
    ("connection", 9),
    ("free", 6),
    ("potlate", 4),
    ("penalty", 2),
    ("ra", 4),
    ("e_ra", 4),
    ("l_ra", 4),
    ("set", 2),
];

fn bad(f: &Fact, message: impl Into<String>) -> ParseError {
    ParseError::BadArgument {
        pred: f.pred.clone(),
        message: message.into(),
        line: f.line,
        col: f.col,
    }
}

fn dangling(f: &Fact, message: impl Into<String>) -> ParseError {
    ParseError::Dangling {
        message: message.into(),
        line: f.line,
        col: f.col,
    }
}

fn conflicting(f: &Fact, message: impl Into<String>) -> ParseError {
    ParseError::Conflicting {
        message: message.into(),
        line: f.line,
        col: f.col,
    }
}

fn edge_arg(f: &Fact, i: usize) -> Result<Edge, ParseError> {
    Edge::from_term(&f.args[i]).ok_or_else(|| bad(f, format!("argument {} is not an edge pair", i + 1)))
}

fn seconds(f: &Fact, i: usize) -> Result<i64, ParseError> {
    match &f.args[i] {
        Term::Int(v) if *v >= 0 => Ok(*v),
        other => Err(bad(f, format!("expected non-negative integer, found {other}"))),
    }
}

/// Finite value or `None` for `#inf`/`#sup`.
fn extended(f: &Fact, i: usize) -> Result<Option<i64>, ParseError> {
    match &f.args[i] {
        Term::Int(v) => Ok(Some(*v)),
        Term::Inf | Term::Sup => Ok(None),
        other => Err(bad(f, format!("expected integer or #inf/#sup, found {other}"))),
    }
}

fn insert_unique<K: Ord + Clone, V: PartialEq + Clone>(
    map: &mut BTreeMap<K, V>,
    key: K,
    value: V,
    f: &Fact,
    what: &str,
) -> Result<(), ParseError> {
    match map.get(&key) {
        Some(old) if *old != value => Err(conflicting(f, format!("two different values for {what}"))),
        _ => {
            map.insert(key, value);
            Ok(())
        }
    }
}

struct TrainBuilder {
    line: TrainLine,
    declared_starts: Vec<(Node, usize, usize)>,
    declared_ends: Vec<(Node, usize, usize)>,
}

/// Reads a fact document into an [`Instance`].
///
/// Identifier references are resolved here; semantic invariants are left to
/// [`validate_instance`](super::validate_instance).
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let facts = parse_facts(text)?;
    for f in &facts {
        match SCHEMA.iter().find(|(p, _)| *p == f.pred) {
            Some((_, arity)) if *arity == f.args.len() => {}
            _ => {
                return Err(ParseError::UnknownPredicate {
                    pred: f.pred.clone(),
                    arity: f.args.len(),
                    line: f.line,
                    col: f.col,
                })
            }
        }
    }
    let by_pred = |p: &'static str| facts.iter().filter(move |f| f.pred == p);

    let mut trains: BTreeMap<TrainId, TrainBuilder> = BTreeMap::new();
    for f in by_pred("tl") {
        trains.entry(f.args[0].clone()).or_insert_with(|| TrainBuilder {
            line: TrainLine::new(f.args[0].clone()),
            declared_starts: Vec::new(),
            declared_ends: Vec::new(),
        });
    }

    let mut inst = Instance::default();

    for f in by_pred("edge") {
        let tb = trains
            .get_mut(&f.args[0])
            .ok_or_else(|| dangling(f, format!("edge for unknown train {}", f.args[0])))?;
        let e = Edge {
            from: f.args[1].clone(),
            to: f.args[2].clone(),
        };
        tb.line.nodes.insert(e.from.clone());
        tb.line.nodes.insert(e.to.clone());
        tb.line.edges.insert(e.clone());
        inst.network.nodes.insert(e.from.clone());
        inst.network.nodes.insert(e.to.clone());
        inst.network.edges.insert(e);
    }

    // Node-level facts may introduce isolated nodes (single-node trains).
    for f in facts
        .iter()
        .filter(|f| matches!(f.pred.as_str(), "e" | "l" | "start" | "end"))
    {
        let tb = trains
            .get_mut(&f.args[0])
            .ok_or_else(|| dangling(f, format!("{} fact for unknown train {}", f.pred, f.args[0])))?;
        let v = f.args[1].clone();
        tb.line.nodes.insert(v.clone());
        inst.network.nodes.insert(v.clone());
        match f.pred.as_str() {
            "e" => {
                let x = seconds(f, 2)?;
                insert_unique(&mut tb.line.earliest, v, x, f, "earliest arrival")?;
            }
            "l" => {
                let x = match &f.args[2] {
                    Term::Inf | Term::Sup => None,
                    _ => Some(seconds(f, 2)?),
                };
                insert_unique(&mut tb.line.latest, v, x, f, "latest arrival")?;
            }
            "start" => tb.declared_starts.push((v, f.line, f.col)),
            _ => tb.declared_ends.push((v, f.line, f.col)),
        }
    }

    for f in by_pred("m") {
        let e = edge_arg(f, 0)?;
        if !inst.network.edges.contains(&e) {
            return Err(dangling(f, format!("travel time for unknown edge {e}")));
        }
        let x = seconds(f, 1)?;
        insert_unique(&mut inst.network.travel, e, x, f, "travel time")?;
    }

    for f in by_pred("w") {
        let e = edge_arg(f, 1)?;
        let tb = trains
            .get_mut(&f.args[0])
            .ok_or_else(|| dangling(f, format!("waiting time for unknown train {}", f.args[0])))?;
        if !tb.line.edges.contains(&e) {
            return Err(dangling(f, format!("waiting time for edge {e} not in train {}", f.args[0])));
        }
        let x = seconds(f, 2)?;
        insert_unique(&mut tb.line.wait, e, x, f, "waiting time")?;
    }

    for f in by_pred("resource") {
        let e = edge_arg(f, 1)?;
        if !inst.network.edges.contains(&e) {
            return Err(dangling(f, format!("resource {} on unknown edge {e}", f.args[0])));
        }
        inst.network
            .resources
            .entry(f.args[0].clone())
            .or_default()
            .insert(e);
    }
    for f in by_pred("b") {
        if !inst.network.resources.contains_key(&f.args[0]) {
            return Err(dangling(f, format!("blocked time for unknown resource {}", f.args[0])));
        }
        let x = seconds(f, 1)?;
        insert_unique(&mut inst.network.blocked, f.args[0].clone(), x, f, "blocked time")?;
    }

    let train_ref = |f: &Fact, i: usize| -> Result<TrainId, ParseError> {
        if trains.contains_key(&f.args[i]) {
            Ok(f.args[i].clone())
        } else {
            Err(dangling(f, format!("unknown train {}", f.args[i])))
        }
    };

    let mut connections = BTreeMap::new();
    for f in by_pred("connection") {
        let c = Connection {
            id: f.args[0].clone(),
            train: train_ref(f, 1)?,
            edge: edge_arg(f, 2)?,
            other_train: train_ref(f, 3)?,
            other_edge: edge_arg(f, 4)?,
            alpha: extended(f, 5)?,
            omega: extended(f, 6)?,
            node: f.args[7].clone(),
            other_node: f.args[8].clone(),
        };
        if connections.insert(c.id.clone(), c).is_some() {
            return Err(conflicting(f, format!("duplicate connection id {}", f.args[0])));
        }
    }
    inst.connections = connections.into_values().collect();

    let mut free = BTreeSet::new();
    for f in by_pred("free") {
        if !inst.connections.iter().any(|c| c.id == f.args[0]) {
            return Err(dangling(f, format!("free point for unknown connection {}", f.args[0])));
        }
        if !inst.network.resources.contains_key(&f.args[5]) {
            return Err(dangling(f, format!("free point on unknown resource {}", f.args[5])));
        }
        free.insert(CollisionFreePoint {
            connection: f.args[0].clone(),
            train: train_ref(f, 1)?,
            edge: edge_arg(f, 2)?,
            other_train: train_ref(f, 3)?,
            other_edge: edge_arg(f, 4)?,
            resource: f.args[5].clone(),
        });
    }
    inst.free_points = free.into_iter().collect();

    for f in by_pred("potlate") {
        let t = train_ref(f, 0)?;
        if !trains[&t].line.nodes.contains(&f.args[1]) {
            return Err(dangling(f, format!("potlate for node {} not in train {t}", f.args[1])));
        }
        let th = Threshold {
            at: seconds(f, 2)?,
            weight: seconds(f, 3)?,
        };
        let list = inst
            .objective
            .thresholds
            .entry((t, f.args[1].clone()))
            .or_default();
        if list.iter().any(|x| x.at == th.at) {
            return Err(conflicting(f, format!("repeated threshold {} for the same node", th.at)));
        }
        list.push(th);
        list.sort();
    }
    for f in by_pred("penalty") {
        let e = edge_arg(f, 0)?;
        if !inst.network.edges.contains(&e) {
            return Err(dangling(f, format!("route penalty for unknown edge {e}")));
        }
        let x = seconds(f, 1)?;
        insert_unique(&mut inst.objective.route_penalty, e, x, f, "route penalty")?;
    }

    let mut pre = Precomputed::default();
    for f in facts
        .iter()
        .filter(|f| matches!(f.pred.as_str(), "ra" | "e_ra" | "l_ra"))
    {
        let t = train_ref(f, 0)?;
        if !inst.network.resources.contains_key(&f.args[1]) {
            return Err(dangling(f, format!("{} for unknown resource {}", f.pred, f.args[1])));
        }
        let key = (t, f.args[1].clone(), f.args[2].clone());
        match f.pred.as_str() {
            "ra" => {
                let e = edge_arg(f, 3)?;
                pre.areas.entry(key).or_default().insert(e);
            }
            "e_ra" => {
                let x = seconds(f, 3)?;
                insert_unique(&mut pre.entry, key, x, f, "area entry time")?;
            }
            _ => {
                let x = match &f.args[3] {
                    Term::Inf | Term::Sup => None,
                    _ => Some(seconds(f, 3)?),
                };
                insert_unique(&mut pre.exit, key, x, f, "area exit time")?;
            }
        }
    }
    for f in by_pred("set") {
        let t = train_ref(f, 0)?;
        let e = edge_arg(f, 1)?;
        if !trains[&t].line.edges.contains(&e) {
            return Err(dangling(f, format!("mandatory edge {e} not in train {t}")));
        }
        pre.mandatory.entry(t).or_default().insert(e);
    }
    if !pre.is_empty() {
        inst.precomputed = Some(pre);
    }

    for (id, tb) in trains {
        let TrainBuilder {
            line,
            declared_starts,
            declared_ends,
        } = tb;
        if line.nodes.is_empty() {
            return Err(ParseError::EmptyTrain(id.to_string()));
        }
        for v in &line.nodes {
            if !line.earliest.contains_key(v) {
                return Err(ParseError::Missing(format!("e({id},{v},_)")));
            }
            if !line.latest.contains_key(v) {
                return Err(ParseError::Missing(format!("l({id},{v},_)")));
            }
        }
        for e in &line.edges {
            if !inst.network.travel.contains_key(e) {
                return Err(ParseError::Missing(format!("m({e},_)")));
            }
            if !line.wait.contains_key(e) {
                return Err(ParseError::Missing(format!("w({id},{e},_)")));
            }
        }
        let mut line = line;
        for (v, l, c) in declared_starts {
            if line.in_degree(&v) > 0 {
                return Err(ParseError::DegreeMismatch {
                    train: id.to_string(),
                    message: format!("{l}:{c}: start node {v} has incoming edges"),
                });
            }
            line.starts.insert(v);
        }
        for (v, l, c) in declared_ends {
            if line.out_degree(&v) > 0 {
                return Err(ParseError::DegreeMismatch {
                    train: id.to_string(),
                    message: format!("{l}:{c}: end node {v} has outgoing edges"),
                });
            }
            line.ends.insert(v);
        }
        if let Some(v) = line.computed_starts().difference(&line.starts).next() {
            return Err(ParseError::DegreeMismatch {
                train: id.to_string(),
                message: format!("node {v} has no incoming edges but is not declared a start"),
            });
        }
        if let Some(v) = line.computed_ends().difference(&line.ends).next() {
            return Err(ParseError::DegreeMismatch {
                train: id.to_string(),
                message: format!("node {v} has no outgoing edges but is not declared an end"),
            });
        }
        inst.trains.push(line);
    }

    for r in inst.network.resources.keys() {
        if !inst.network.blocked.contains_key(r) {
            return Err(ParseError::Missing(format!("b({r},_)")));
        }
    }

    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = include_str!("../../../../fixtures/reference.lp");

    #[test]
    fn parses_reference() {
        let inst = parse_instance(REFERENCE).unwrap();
        assert_eq!(inst.trains.len(), 3);
        assert_eq!(inst.network.resources.len(), 10);
        assert_eq!(inst.connections.len(), 3);
        assert_eq!(inst.free_points.len(), 1);
        let t1 = inst.train(&Term::sym("t1")).unwrap();
        assert_eq!(t1.starts.len(), 2);
        assert_eq!(t1.ends.len(), 2);
        assert_eq!(t1.nodes.len(), 8);
        let pre = inst.precomputed.as_ref().unwrap();
        assert_eq!(pre.mandatory[&Term::sym("t2")].len(), 3);
    }

    #[test]
    fn infinite_omega() {
        let inst = parse_instance(REFERENCE).unwrap();
        let c2 = inst.connection(&Term::Int(2)).unwrap();
        assert_eq!(c2.alpha, Some(60));
        assert_eq!(c2.omega, None);
        assert_eq!(c2.edge, Edge::new(10, 11));
        assert_eq!(c2.other_node, Term::Int(12));
    }

    #[test]
    fn lone_train_declaration_is_rejected() {
        assert_eq!(
            parse_instance("tl(t1).").unwrap_err(),
            ParseError::EmptyTrain("t1".into())
        );
    }

    #[test]
    fn unknown_predicate_rejected() {
        let err = parse_instance("tl(t1).\nfoo(1).").unwrap_err();
        assert!(matches!(err, ParseError::UnknownPredicate { line: 2, .. }));
        let err = parse_instance("edge(t1,1,2,3).").unwrap_err();
        assert!(matches!(err, ParseError::UnknownPredicate { .. }));
    }

    #[test]
    fn dangling_references() {
        let err = parse_instance("edge(t9,1,2).").unwrap_err();
        assert!(matches!(err, ParseError::Dangling { .. }), "{err}");
        let err = parse_instance("tl(t1). edge(t1,1,2). resource(r,(2,3)).").unwrap_err();
        assert!(matches!(err, ParseError::Dangling { .. }), "{err}");
    }

    #[test]
    fn degree_mismatch() {
        let doc = "tl(t). edge(t,1,2). m((1,2),1). w(t,(1,2),0).
                   e(t,1,0). l(t,1,9). e(t,2,0). l(t,2,9).
                   start(t,1). start(t,2). end(t,2).";
        let err = parse_instance(doc).unwrap_err();
        assert!(matches!(err, ParseError::DegreeMismatch { .. }), "{err}");
        let missing_end = "tl(t). edge(t,1,2). m((1,2),1). w(t,(1,2),0).
                   e(t,1,0). l(t,1,9). e(t,2,0). l(t,2,9). start(t,1).";
        assert!(matches!(
            parse_instance(missing_end).unwrap_err(),
            ParseError::DegreeMismatch { .. }
        ));
    }

    #[test]
    fn single_node_train() {
        let inst = parse_instance("tl(t). e(t,1,5). l(t,1,#sup). start(t,1). end(t,1).").unwrap();
        assert_eq!(inst.trains[0].nodes.len(), 1);
        assert_eq!(inst.trains[0].latest(&Term::Int(1)), None);
    }

    #[test]
    fn repeated_threshold_rejected() {
        let doc = "tl(t). e(t,1,5). l(t,1,50). start(t,1). end(t,1).
                   potlate(t,1,10,1). potlate(t,1,10,2).";
        assert!(matches!(
            parse_instance(doc).unwrap_err(),
            ParseError::Conflicting { .. }
        ));
    }
}
