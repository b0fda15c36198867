use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::One;

use crate::error::PreprocessError;
use crate::instance::{Edge, Instance, Node, TrainLine};

/// Exact start-to-end path counts of one train.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathCounts {
    pub total: BigUint,
    pub through_node: BTreeMap<Node, BigUint>,
    pub through_edge: BTreeMap<Edge, BigUint>,
}

impl PathCounts {
    pub fn node_on_every_path(&self, v: &Node) -> bool {
        self.through_node.get(v).is_some_and(|c| *c == self.total)
    }
}

pub fn count_paths(t: &TrainLine) -> PathCounts {
    let order = t
        .topological_order()
        .expect("train subgraphs are acyclic after validation");
    let mut forward: BTreeMap<&Node, BigUint> = BTreeMap::new();
    for v in &order {
        let mut c: BigUint = t.predecessors(v).map(|e| forward[&e.from].clone()).sum();
        if t.in_degree(v) == 0 {
            c = BigUint::one();
        }
        forward.insert(v, c);
    }
    let mut backward: BTreeMap<&Node, BigUint> = BTreeMap::new();
    for v in order.iter().rev() {
        let mut c: BigUint = t.successors(v).map(|e| backward[&e.to].clone()).sum();
        if t.out_degree(v) == 0 {
            c = BigUint::one();
        }
        backward.insert(v, c);
    }
    let total = order
        .iter()
        .filter(|v| t.in_degree(v) == 0)
        .map(|v| backward[v].clone())
        .sum();
    let through_node = order
        .iter()
        .map(|v| (v.clone(), &forward[v] * &backward[v]))
        .collect();
    let through_edge = t
        .edges
        .iter()
        .map(|e| (e.clone(), &forward[&e.from] * &backward[&e.to]))
        .collect();
    PathCounts {
        total,
        through_node,
        through_edge,
    }
}

/// Edges on every start-to-end path.
pub fn compute_mandatory_edges(t: &TrainLine) -> BTreeSet<Edge> {
    let counts = count_paths(t);
    counts
        .through_edge
        .into_iter()
        .filter(|(_, c)| *c == counts.total)
        .map(|(e, _)| e)
        .collect()
}

/// Mandatory edges per train; shipped `set` facts are checked and used
/// for the trains they mention.
pub(crate) fn resolve_mandatory(inst: &Instance) -> Result<Vec<BTreeSet<Edge>>, PreprocessError> {
    inst.trains
        .iter()
        .map(|t| {
            let computed = compute_mandatory_edges(t);
            let shipped = inst
                .precomputed
                .as_ref()
                .and_then(|p| p.mandatory.get(&t.id));
            match shipped {
                None => Ok(computed),
                Some(edges) => match edges.difference(&computed).next() {
                    Some(e) => Err(PreprocessError::InvalidMandatory {
                        train: t.id.to_string(),
                        edge: e.to_string(),
                    }),
                    None => Ok(edges.clone()),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;

    const REFERENCE: &str = include_str!("../../../../fixtures/reference.lp");

    fn set(edges: &[(i64, i64)]) -> BTreeSet<Edge> {
        edges.iter().map(|&(a, b)| Edge::new(a, b)).collect()
    }

    #[test]
    fn reference_mandatory_edges() {
        let inst = parse_instance(REFERENCE).unwrap();
        assert_eq!(compute_mandatory_edges(&inst.trains[0]), set(&[(3, 5), (5, 8), (8, 10)]));
        assert_eq!(compute_mandatory_edges(&inst.trains[1]), set(&[(10, 7), (7, 4), (4, 3)]));
        assert_eq!(
            compute_mandatory_edges(&inst.trains[2]),
            set(&[(3, 6), (6, 9), (9, 10), (10, 12)])
        );
        assert_eq!(count_paths(&inst.trains[0]).total, BigUint::from(4u32));
        assert_eq!(resolve_mandatory(&inst).unwrap()[0], set(&[(3, 5), (5, 8), (8, 10)]));
    }

    #[test]
    fn diamond_has_no_mandatory_edges() {
        let doc = "tl(t). edge(t,1,2). edge(t,1,3). edge(t,2,4). edge(t,3,4).
            m((1,2),1). m((1,3),1). m((2,4),1). m((3,4),1).
            w(t,(1,2),0). w(t,(1,3),0). w(t,(2,4),0). w(t,(3,4),0).
            e(t,1,0). l(t,1,9). e(t,2,0). l(t,2,9). e(t,3,0). l(t,3,9). e(t,4,0). l(t,4,9).
            start(t,1). end(t,4).";
        let t = parse_instance(doc).unwrap().trains.remove(0);
        assert!(compute_mandatory_edges(&t).is_empty());
        assert_eq!(t.all_paths().len(), 2);
    }

    #[test]
    fn wrong_set_fact_is_rejected() {
        let text = REFERENCE.replace("set(t1,(3,5)).", "set(t1,(3,5)). set(t1,(1,3)).");
        let err = resolve_mandatory(&parse_instance(&text).unwrap()).unwrap_err();
        assert_eq!(
            err,
            PreprocessError::InvalidMandatory {
                train: "t1".into(),
                edge: "(1,3)".into()
            }
        );
    }
}
