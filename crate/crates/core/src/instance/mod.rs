//! Train-scheduling instances: network, train lines, connections,
//! collision-free points and objective data.

mod parse;
mod serialize;
mod validate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

pub use parse::parse_instance;
pub use serialize::serialize_instance;
pub use validate::{validate_instance, Violation};

use crate::term::Term;

pub type Node = Term;
pub type TrainId = Term;
pub type ResourceId = Term;

/// A directed edge `(from, to)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: Node,
    pub to: Node,
}

impl Edge {
    pub fn new(from: impl Into<Node>, to: impl Into<Node>) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
        }
    }

    pub fn to_term(&self) -> Term {
        Term::Tuple(vec![self.from.clone(), self.to.clone()])
    }

    pub fn from_term(t: &Term) -> Option<Edge> {
        match t {
            Term::Tuple(args) if args.len() == 2 => Some(Edge {
                from: args[0].clone(),
                to: args[1].clone(),
            }),
            _ => None,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.from, self.to)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Network {
    pub nodes: BTreeSet<Node>,
    pub edges: BTreeSet<Edge>,
    /// Minimum travel time per edge.
    pub travel: BTreeMap<Edge, i64>,
    /// Edge set of every resource.
    pub resources: BTreeMap<ResourceId, BTreeSet<Edge>>,
    /// Time a resource stays blocked after a train left it.
    pub blocked: BTreeMap<ResourceId, i64>,
}

impl Network {
    pub fn travel_time(&self, e: &Edge) -> i64 {
        self.travel.get(e).copied().unwrap_or(0)
    }

    pub fn blocked_time(&self, r: &ResourceId) -> i64 {
        self.blocked.get(r).copied().unwrap_or(0)
    }

    /// Resources assigned to an edge.
    pub fn resources_of<'a>(&'a self, e: &'a Edge) -> impl Iterator<Item = &'a ResourceId> + 'a {
        self.resources
            .iter()
            .filter(move |(_, es)| es.contains(e))
            .map(|(r, _)| r)
    }
}

/// One train line with its routing subgraph and time windows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainLine {
    pub id: TrainId,
    pub nodes: BTreeSet<Node>,
    pub edges: BTreeSet<Edge>,
    pub earliest: BTreeMap<Node, i64>,
    /// `None` means the node has no latest arrival.
    pub latest: BTreeMap<Node, Option<i64>>,
    pub wait: BTreeMap<Edge, i64>,
    pub starts: BTreeSet<Node>,
    pub ends: BTreeSet<Node>,
}

impl TrainLine {
    pub fn new(id: impl Into<TrainId>) -> Self {
        TrainLine {
            id: id.into(),
            nodes: BTreeSet::new(),
            edges: BTreeSet::new(),
            earliest: BTreeMap::new(),
            latest: BTreeMap::new(),
            wait: BTreeMap::new(),
            starts: BTreeSet::new(),
            ends: BTreeSet::new(),
        }
    }

    pub fn earliest(&self, v: &Node) -> i64 {
        self.earliest.get(v).copied().unwrap_or(0)
    }

    pub fn latest(&self, v: &Node) -> Option<i64> {
        self.latest.get(v).copied().flatten()
    }

    pub fn wait_time(&self, e: &Edge) -> i64 {
        self.wait.get(e).copied().unwrap_or(0)
    }

    pub fn successors<'a>(&'a self, v: &'a Node) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| &e.from == v)
    }

    pub fn predecessors<'a>(&'a self, v: &'a Node) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| &e.to == v)
    }

    pub fn in_degree(&self, v: &Node) -> usize {
        self.predecessors(v).count()
    }

    pub fn out_degree(&self, v: &Node) -> usize {
        self.successors(v).count()
    }

    /// Nodes without incoming edges.
    pub fn computed_starts(&self) -> BTreeSet<Node> {
        let targets: BTreeSet<&Node> = self.edges.iter().map(|e| &e.to).collect();
        self.nodes
            .iter()
            .filter(|v| !targets.contains(v))
            .cloned()
            .collect()
    }

    /// Nodes without outgoing edges.
    pub fn computed_ends(&self) -> BTreeSet<Node> {
        let sources: BTreeSet<&Node> = self.edges.iter().map(|e| &e.from).collect();
        self.nodes
            .iter()
            .filter(|v| !sources.contains(v))
            .cloned()
            .collect()
    }

    /// Kahn's algorithm; `None` if `(S,L)` has a cycle.
    pub fn topological_order(&self) -> Option<Vec<Node>> {
        let mut indeg: BTreeMap<&Node, usize> = self.nodes.iter().map(|v| (v, 0)).collect();
        for e in &self.edges {
            *indeg.entry(&e.to).or_default() += 1;
        }
        let mut queue: VecDeque<&Node> = indeg
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(v, _)| *v)
            .collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(v) = queue.pop_front() {
            order.push(v.clone());
            for e in self.successors(v) {
                let d = indeg.get_mut(&e.to).expect("edge endpoint is a node");
                *d -= 1;
                if *d == 0 {
                    queue.push_back(&e.to);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Every start-to-end path as a node sequence. Exponential; for small graphs.
    pub fn all_paths(&self) -> Vec<Vec<Node>> {
        fn walk(t: &TrainLine, path: &mut Vec<Node>, out: &mut Vec<Vec<Node>>) {
            let last = path.last().expect("nonempty").clone();
            let mut any = false;
            for e in t.successors(&last) {
                any = true;
                path.push(e.to.clone());
                walk(t, path, out);
                path.pop();
            }
            if !any {
                out.push(path.clone());
            }
        }
        let mut out = Vec::new();
        for s in self.computed_starts() {
            let mut path = vec![s];
            walk(self, &mut path, &mut out);
        }
        out
    }
}

/// `α ≤ A(t',n') − A(t,n) ≤ ω` when both trigger edges are routed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    pub id: Term,
    pub train: TrainId,
    pub edge: Edge,
    pub other_train: TrainId,
    pub other_edge: Edge,
    /// `None` is an unbounded lower end.
    pub alpha: Option<i64>,
    /// `None` is an unbounded upper end.
    pub omega: Option<i64>,
    pub node: Node,
    pub other_node: Node,
}

/// Exempts the pair of edges from conflict resolution on `resource`
/// while connection `connection` is in effect.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CollisionFreePoint {
    pub connection: Term,
    pub train: TrainId,
    pub edge: Edge,
    pub other_train: TrainId,
    pub other_edge: Edge,
    pub resource: ResourceId,
}

/// A late threshold `u` with penalty weight `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Threshold {
    pub at: i64,
    pub weight: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObjectiveData {
    /// Sorted by `at` per (train, node).
    pub thresholds: BTreeMap<(TrainId, Node), Vec<Threshold>>,
    pub route_penalty: BTreeMap<Edge, i64>,
}

/// Facts computed by an earlier preprocessing run and shipped with the instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Precomputed {
    /// (train, resource, area id) → edges
    pub areas: BTreeMap<(TrainId, ResourceId, Term), BTreeSet<Edge>>,
    pub entry: BTreeMap<(TrainId, ResourceId, Term), i64>,
    pub exit: BTreeMap<(TrainId, ResourceId, Term), Option<i64>>,
    pub mandatory: BTreeMap<TrainId, BTreeSet<Edge>>,
}

impl Precomputed {
    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
            && self.entry.is_empty()
            && self.exit.is_empty()
            && self.mandatory.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Instance {
    pub network: Network,
    /// Sorted by id.
    pub trains: Vec<TrainLine>,
    /// Sorted by id.
    pub connections: Vec<Connection>,
    pub free_points: Vec<CollisionFreePoint>,
    pub objective: ObjectiveData,
    pub precomputed: Option<Precomputed>,
}

impl Instance {
    pub fn train_index(&self, id: &TrainId) -> Option<usize> {
        self.trains.iter().position(|t| &t.id == id)
    }

    pub fn train(&self, id: &TrainId) -> Option<&TrainLine> {
        self.trains.iter().find(|t| &t.id == id)
    }

    pub fn connection(&self, id: &Term) -> Option<&Connection> {
        self.connections.iter().find(|c| &c.id == id)
    }

    /// Time after which `train` counts as late at `node`. Taken from the
    /// smallest threshold as `u − p`; nodes without thresholds are never late.
    pub fn delay_start(&self, train: &TrainId, node: &Node) -> Option<i64> {
        self.objective
            .thresholds
            .get(&(train.clone(), node.clone()))
            .and_then(|ts| ts.first())
            .map(|th| th.at - th.weight)
    }
}
