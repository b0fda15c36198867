//! Independent feasibility checks, exact quality and a brute-force oracle.
//!
//! Everything here works on the unreduced instance and at edge granularity,
//! without resource areas.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{EncodeError, OracleError};
use crate::instance::{Edge, Instance, Node, TrainLine};
use crate::objective::{delay_start, penalty, threshold_set, ThresholdScheme, ThresholdSet};
use crate::solution::{ExactQuality, Solution};

pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// Feasibility conditions a solution is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    /// Unknown trains, missing or stray arrivals.
    Structure,
    /// Consecutive path nodes are joined by an edge of the train.
    Connected,
    /// No node is visited twice.
    Simple,
    /// The path runs from a start node to an end node.
    Endpoints,
    Earliest,
    Latest,
    Travel,
    Resource,
    Connection,
}

impl Condition {
    /// 1–8, or 0 for structural faults.
    pub fn number(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub condition: Condition,
    pub entities: Vec<String>,
    pub measured: Option<i64>,
    pub required: Option<i64>,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {:?} [{}]", self.condition.number(), self.condition, self.entities.join(", "))?;
        if let (Some(m), Some(r)) = (self.measured, self.required) {
            write!(f, ": measured {m}, required {r}")?;
        }
        Ok(())
    }
}

fn report(condition: Condition, entities: Vec<String>, measured: Option<i64>, required: Option<i64>) -> ViolationReport {
    ViolationReport {
        condition,
        entities,
        measured,
        required,
    }
}

fn path_edges(path: &[Node]) -> Vec<Edge> {
    path.windows(2).map(|w| Edge::new(w[0].clone(), w[1].clone())).collect()
}

/// Every violated condition. Empty iff the solution is feasible.
pub fn validate_solution(inst: &Instance, sol: &Solution) -> Vec<ViolationReport> {
    let mut out = Vec::new();
    for t in sol.paths.keys().chain(sol.arrivals.keys()) {
        if inst.train(t).is_none() {
            out.push(report(Condition::Structure, vec![format!("unknown train {t}")], None, None));
        }
    }
    let mut arrival: BTreeMap<(usize, Node), i64> = BTreeMap::new();
    let mut used: Vec<BTreeSet<Edge>> = vec![BTreeSet::new(); inst.trains.len()];
    for (ti, t) in inst.trains.iter().enumerate() {
        let Some(path) = sol.paths.get(&t.id).filter(|p| !p.is_empty()) else {
            out.push(report(Condition::Endpoints, vec![format!("train {} has no path", t.id)], None, None));
            continue;
        };
        check_path(t, path, &mut out);
        used[ti] = path_edges(path).into_iter().collect();
        let given = sol.arrivals.get(&t.id).cloned().unwrap_or_default();
        for v in path {
            match given.get(v) {
                Some(&a) => {
                    arrival.insert((ti, v.clone()), a);
                }
                None => out.push(report(
                    Condition::Structure,
                    vec![format!("no arrival for {} at {v}", t.id)],
                    None,
                    None,
                )),
            }
        }
        for v in given.keys().filter(|v| !path.contains(v)) {
            out.push(report(
                Condition::Structure,
                vec![format!("arrival for {} at {v} off its path", t.id)],
                None,
                None,
            ));
        }
        for v in path {
            let Some(&a) = arrival.get(&(ti, v.clone())) else { continue };
            let e = t.earliest(v);
            if a < e {
                out.push(report(Condition::Earliest, vec![t.id.to_string(), v.to_string()], Some(a), Some(e)));
            }
            if let Some(l) = t.latest(v) {
                if a > l {
                    out.push(report(Condition::Latest, vec![t.id.to_string(), v.to_string()], Some(a), Some(l)));
                }
            }
        }
        for e in path_edges(path) {
            let (Some(&a), Some(&b)) = (arrival.get(&(ti, e.from.clone())), arrival.get(&(ti, e.to.clone()))) else {
                continue;
            };
            let need = inst.network.travel_time(&e) + t.wait_time(&e);
            if b - a < need {
                out.push(report(Condition::Travel, vec![t.id.to_string(), e.to_string()], Some(b - a), Some(need)));
            }
        }
    }

    let active: BTreeSet<usize> = inst
        .connections
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let (ti, tj) = (inst.train_index(&c.train), inst.train_index(&c.other_train));
            matches!((ti, tj), (Some(i), Some(j)) if used[i].contains(&c.edge) && used[j].contains(&c.other_edge))
        })
        .map(|(i, _)| i)
        .collect();

    for (r, edges) in &inst.network.resources {
        let b = inst.network.blocked_time(r);
        for ti in 0..inst.trains.len() {
            for tj in ti + 1..inst.trains.len() {
                for e in used[ti].intersection(edges) {
                    for e2 in used[tj].intersection(edges) {
                        if exempt(inst, &active, r, ti, e, tj, e2) {
                            continue;
                        }
                        let get = |t: usize, v: &Node| arrival.get(&(t, v.clone())).copied();
                        let (Some(a_in), Some(a_out), Some(b_in), Some(b_out)) =
                            (get(ti, &e.from), get(ti, &e.to), get(tj, &e2.from), get(tj, &e2.to))
                        else {
                            continue;
                        };
                        if a_out + b > b_in && b_out + b > a_in {
                            let (t1, t2) = (&inst.trains[ti].id, &inst.trains[tj].id);
                            out.push(report(
                                Condition::Resource,
                                vec![r.to_string(), format!("{t1} {e}"), format!("{t2} {e2}")],
                                Some((b_in - a_out).max(a_in - b_out)),
                                Some(b),
                            ));
                        }
                    }
                }
            }
        }
    }

    for (ci, c) in inst.connections.iter().enumerate() {
        if !active.contains(&ci) {
            continue;
        }
        let (ti, tj) = (inst.train_index(&c.train).unwrap(), inst.train_index(&c.other_train).unwrap());
        let (Some(&a), Some(&a2)) = (arrival.get(&(ti, c.node.clone())), arrival.get(&(tj, c.other_node.clone())))
        else {
            out.push(report(Condition::Connection, vec![c.id.to_string(), "node not reached".into()], None, None));
            continue;
        };
        let gap = a2 - a;
        if let Some(alpha) = c.alpha.filter(|&al| gap < al) {
            out.push(report(Condition::Connection, vec![c.id.to_string()], Some(gap), Some(alpha)));
        }
        if let Some(omega) = c.omega.filter(|&om| gap > om) {
            out.push(report(Condition::Connection, vec![c.id.to_string()], Some(gap), Some(omega)));
        }
    }
    out
}

fn check_path(t: &TrainLine, path: &[Node], out: &mut Vec<ViolationReport>) {
    let id = t.id.to_string();
    if !t.computed_starts().contains(&path[0]) {
        out.push(report(Condition::Endpoints, vec![id.clone(), format!("start {}", path[0])], None, None));
    }
    let last = path.last().expect("nonempty");
    if !t.computed_ends().contains(last) {
        out.push(report(Condition::Endpoints, vec![id.clone(), format!("end {last}")], None, None));
    }
    for e in path_edges(path) {
        if !t.edges.contains(&e) {
            out.push(report(Condition::Connected, vec![id.clone(), e.to_string()], None, None));
        }
    }
    let distinct: BTreeSet<&Node> = path.iter().collect();
    if distinct.len() != path.len() {
        out.push(report(Condition::Simple, vec![id], None, None));
    }
}

/// A free point of an active connection covers this edge pair on `r`.
fn exempt(inst: &Instance, active: &BTreeSet<usize>, r: &crate::instance::ResourceId, ti: usize, e: &Edge, tj: usize, e2: &Edge) -> bool {
    let (a, b) = (&inst.trains[ti].id, &inst.trains[tj].id);
    inst.free_points.iter().any(|p| {
        &p.resource == r
            && inst.connections.iter().position(|c| c.id == p.connection).is_some_and(|ci| active.contains(&ci))
            && ((&p.train, &p.edge, &p.other_train, &p.other_edge) == (a, e, b, e2)
                || (&p.train, &p.edge, &p.other_train, &p.other_edge) == (b, e2, a, e))
    })
}

/// Delay in minutes past each node's delay start, and the route penalty.
pub fn exact_quality(inst: &Instance, sol: &Solution) -> ExactQuality {
    let mut seconds = 0;
    for (t, arr) in &sol.arrivals {
        for (v, &a) in arr {
            if let Some(d) = delay_start(inst, t, v) {
                seconds += (a - d).max(0);
            }
        }
    }
    (Rational64::new(seconds, 60), route_penalty(inst, sol))
}

pub fn route_penalty(inst: &Instance, sol: &Solution) -> i64 {
    sol.paths
        .values()
        .flat_map(|p| path_edges(p))
        .map(|e| inst.objective.route_penalty.get(&e).copied().unwrap_or(0))
        .sum()
}

/// Threshold penalty of the arrivals and the route penalty.
pub fn approx_quality(inst: &Instance, thresholds: &ThresholdSet, sol: &Solution) -> (i64, i64) {
    let delay = sol
        .arrivals
        .iter()
        .flat_map(|(t, arr)| arr.iter().map(move |(v, &a)| (t, v, a)))
        .map(|(t, v, a)| thresholds.get(&(t.clone(), v.clone())).map_or(0, |ths| penalty(ths, a)))
        .sum();
    (delay, route_penalty(inst, sol))
}

/// Occupation of one resource by consecutive path edges of one train.
#[derive(Clone, Debug)]
struct Run {
    train: usize,
    resource: usize,
    blocked: i64,
    entry: usize,
    exit: usize,
    edges: Vec<Edge>,
}

/// Approximate quality of the best schedule and the schedule itself.
pub type OracleOptimum = ((i64, i64), Solution);

type Prepared<'a> = (Vec<&'a Vec<Node>>, Vec<Run>, BTreeSet<usize>, Vec<(usize, usize)>);

/// Number of schedules [`brute_force_solve`] would enumerate.
pub fn oracle_cost(inst: &Instance, budget: u128) -> Result<u128, OracleError> {
    let paths: Vec<Vec<Vec<Node>>> = inst.trains.iter().map(TrainLine::all_paths).collect();
    prepare(inst, &paths, budget).map(|(_, n)| n)
}

fn prepare<'a>(inst: &Instance, paths: &'a [Vec<Vec<Node>>], budget: u128) -> Result<(Vec<Prepared<'a>>, u128), OracleError> {
    let resources: Vec<(&crate::instance::ResourceId, &BTreeSet<Edge>)> = inst.network.resources.iter().collect();

    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for p in paths {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                (0..p.len()).map(move |i| {
                    let mut c = c.clone();
                    c.push(i);
                    c
                })
            })
            .collect();
        if combos.len() as u128 > budget {
            return Err(OracleError::BudgetExceeded {
                needed: combos.len() as u128,
                budget,
            });
        }
    }
    let mut prepared = Vec::new();
    let mut needed: u128 = 0;
    for combo in combos {
        let chosen: Vec<&Vec<Node>> = combo.iter().enumerate().map(|(t, &i)| &paths[t][i]).collect();
        let runs = runs_of(inst, &resources, &chosen);
        let active = active_connections(inst, &chosen);
        let pairs = ordered_pairs(inst, &resources, &runs, &active);
        needed = needed.saturating_add(1u128.checked_shl(pairs.len() as u32).unwrap_or(u128::MAX));
        if needed > budget {
            return Err(OracleError::BudgetExceeded { needed, budget });
        }
        prepared.push((chosen, runs, active, pairs));
    }

    Ok((prepared, needed))
}

/// Lexicographic optimum over every path and run ordering, with an earliest
/// schedule as witness. `Ok(None)` when nothing is feasible.
pub fn brute_force_solve(
    inst: &Instance,
    scheme: ThresholdScheme,
    budget: u128,
) -> Result<Option<OracleOptimum>, OracleError> {
    let thresholds = threshold_set(inst, scheme).map_err(|e: EncodeError| OracleError::Unsupported(e.to_string()))?;
    let paths: Vec<Vec<Vec<Node>>> = inst.trains.iter().map(TrainLine::all_paths).collect();
    let (prepared, _) = prepare(inst, &paths, budget)?;

    let mut best: Option<((i64, i64), Solution)> = None;
    for (chosen, runs, active, pairs) in &prepared {
        for mask in 0u64..(1u64 << pairs.len()) {
            let Some(times) = earliest(inst, chosen, runs, active, pairs, mask) else { continue };
            let mut sol = Solution::default();
            for (ti, path) in chosen.iter().enumerate() {
                let id = &inst.trains[ti].id;
                sol.paths.insert(id.clone(), path.to_vec());
                for (k, v) in path.iter().enumerate() {
                    sol.set_arrival(id, v, times[ti][k]);
                }
            }
            let q = approx_quality(inst, &thresholds, &sol);
            if best.as_ref().is_none_or(|(b, _)| q < *b) {
                sol.approx_quality = Some(q);
                sol.exact_quality = Some(exact_quality(inst, &sol));
                best = Some((q, sol));
            }
        }
    }
    Ok(best)
}

fn runs_of(inst: &Instance, resources: &[(&crate::instance::ResourceId, &BTreeSet<Edge>)], chosen: &[&Vec<Node>]) -> Vec<Run> {
    let mut runs = Vec::new();
    for (ti, path) in chosen.iter().enumerate() {
        let edges = path_edges(path);
        for (ri, (r, set)) in resources.iter().enumerate() {
            let mut k = 0;
            while k < edges.len() {
                if !set.contains(&edges[k]) {
                    k += 1;
                    continue;
                }
                let start = k;
                while k < edges.len() && set.contains(&edges[k]) {
                    k += 1;
                }
                runs.push(Run {
                    train: ti,
                    resource: ri,
                    blocked: inst.network.blocked_time(r),
                    entry: start,
                    exit: k,
                    edges: edges[start..k].to_vec(),
                });
            }
        }
    }
    runs
}

fn active_connections(inst: &Instance, chosen: &[&Vec<Node>]) -> BTreeSet<usize> {
    let used: Vec<BTreeSet<Edge>> = chosen.iter().map(|p| path_edges(p).into_iter().collect()).collect();
    inst.connections
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let (ti, tj) = (inst.train_index(&c.train).unwrap(), inst.train_index(&c.other_train).unwrap());
            used[ti].contains(&c.edge) && used[tj].contains(&c.other_edge)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Run pairs of different trains on one resource that need an order.
fn ordered_pairs(
    inst: &Instance,
    resources: &[(&crate::instance::ResourceId, &BTreeSet<Edge>)],
    runs: &[Run],
    active: &BTreeSet<usize>,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, a) in runs.iter().enumerate() {
        for (j, b) in runs.iter().enumerate().skip(i + 1) {
            if a.resource != b.resource || a.train == b.train {
                continue;
            }
            let r = resources[a.resource].0;
            let all_exempt = a
                .edges
                .iter()
                .all(|e| b.edges.iter().all(|e2| exempt(inst, active, r, a.train, e, b.train, e2)));
            if !all_exempt {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Least schedule for fixed paths and orderings, by longest paths from zero.
fn earliest(
    inst: &Instance,
    chosen: &[&Vec<Node>],
    runs: &[Run],
    active: &BTreeSet<usize>,
    pairs: &[(usize, usize)],
    mask: u64,
) -> Option<Vec<Vec<i64>>> {
    let mut offset = vec![1usize];
    for p in chosen {
        offset.push(offset.last().unwrap() + p.len());
    }
    let n = *offset.last().unwrap();
    let var = |t: usize, k: usize| offset[t] + k;
    let pos = |t: usize, v: &Node| chosen[t].iter().position(|x| x == v);
    // x_to ≥ x_from + w
    let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
    for (ti, path) in chosen.iter().enumerate() {
        let t = &inst.trains[ti];
        for (k, v) in path.iter().enumerate() {
            arcs.push((0, var(ti, k), t.earliest(v)));
            if let Some(l) = t.latest(v) {
                arcs.push((var(ti, k), 0, -l));
            }
        }
        for (k, e) in path_edges(path).iter().enumerate() {
            let need = inst.network.travel_time(e) + t.wait_time(e);
            arcs.push((var(ti, k), var(ti, k + 1), need));
        }
    }
    for &ci in active {
        let c = &inst.connections[ci];
        let (ti, tj) = (inst.train_index(&c.train).unwrap(), inst.train_index(&c.other_train).unwrap());
        let (Some(a), Some(b)) = (pos(ti, &c.node), pos(tj, &c.other_node)) else {
            return None;
        };
        if let Some(alpha) = c.alpha {
            arcs.push((var(ti, a), var(tj, b), alpha));
        }
        if let Some(omega) = c.omega {
            arcs.push((var(tj, b), var(ti, a), -omega));
        }
    }
    for (bit, &(i, j)) in pairs.iter().enumerate() {
        let (first, second) = if mask >> bit & 1 == 0 { (&runs[i], &runs[j]) } else { (&runs[j], &runs[i]) };
        arcs.push((var(first.train, first.exit), var(second.train, second.entry), first.blocked));
    }
    let mut dist = vec![i64::MIN; n];
    dist[0] = 0;
    for round in 0..=n {
        let mut changed = false;
        for &(u, v, w) in &arcs {
            if dist[u] != i64::MIN && dist[u] + w > dist[v] {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if round == n || dist[0] > 0 {
            return None;
        }
    }
    Some(
        chosen
            .iter()
            .enumerate()
            .map(|(ti, p)| (0..p.len()).map(|k| dist[var(ti, k)]).collect())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::term::Term;

    fn reference_solution() -> Solution {
        let mut sol = Solution::default();
        let rows: [(&str, &[(i64, i64)]); 3] = [
            ("t1", &[(2, 300), (3, 360), (5, 420), (8, 480), (10, 540), (11, 600)]),
            ("t2", &[(10, 0), (7, 60), (4, 120), (3, 180)]),
            ("t3", &[(3, 180), (6, 240), (9, 660), (10, 720), (12, 780)]),
        ];
        for (t, nodes) in rows {
            let id = Term::sym(t);
            sol.paths.insert(id.clone(), nodes.iter().map(|(v, _)| Term::Int(*v)).collect());
            for (v, a) in nodes {
                sol.set_arrival(&id, &Term::Int(*v), *a);
            }
        }
        sol
    }

    fn full() -> Instance {
        parse_instance(include_str!("../../../fixtures/reference_full.lp")).unwrap()
    }

    #[test]
    fn reference_solution_is_feasible() {
        let inst = full();
        let sol = reference_solution();
        assert_eq!(validate_solution(&inst, &sol), vec![]);
        let reduced = parse_instance(include_str!("../../../fixtures/reference.lp")).unwrap();
        assert_eq!(validate_solution(&reduced, &sol), vec![]);
        assert_eq!(exact_quality(&reduced, &sol), (Rational64::from_integer(6), 0));
        let ths = threshold_set(&reduced, ThresholdScheme::Binary).unwrap();
        assert_eq!(approx_quality(&reduced, &ths, &sol), (3, 0));
    }

    #[test]
    fn early_arrival_is_reported() {
        let mut sol = reference_solution();
        sol.set_arrival(&Term::sym("t1"), &Term::Int(2), 200);
        let reports = validate_solution(&full(), &sol);
        assert!(reports
            .iter()
            .any(|r| r.condition == Condition::Earliest && r.measured == Some(200) && r.required == Some(240)));
    }

    #[test]
    fn blocked_time_on_sw2_is_enforced() {
        let mut sol = reference_solution();
        let t3 = Term::sym("t3");
        // t3 enters sw2 at node 9 before t1 has cleared it for 60 seconds
        sol.set_arrival(&t3, &Term::Int(9), 500);
        sol.set_arrival(&t3, &Term::Int(10), 560);
        sol.set_arrival(&t3, &Term::Int(12), 620);
        let reports = validate_solution(&full(), &sol);
        assert!(reports
            .iter()
            .any(|r| r.condition == Condition::Resource && r.entities[0] == "sw2"));
    }

    #[test]
    fn structural_faults() {
        let mut sol = reference_solution();
        sol.set_arrival(&Term::sym("t2"), &Term::Int(99), 5);
        sol.paths.get_mut(&Term::sym("t3")).unwrap().pop();
        let reports = validate_solution(&full(), &sol);
        let kinds: BTreeSet<Condition> = reports.iter().map(|r| r.condition).collect();
        assert!(kinds.contains(&Condition::Structure));
        assert!(kinds.contains(&Condition::Endpoints));
    }

    #[test]
    fn detour_costs_route_penalty() {
        let mut sol = reference_solution();
        let t1 = Term::sym("t1");
        sol.paths.get_mut(&t1).unwrap()[0] = Term::Int(1);
        let inst = full();
        assert_eq!(exact_quality(&inst, &sol).1, 1);
    }

    #[test]
    fn oracle_on_the_reference() {
        let inst = full();
        let (q, witness) = brute_force_solve(&inst, ThresholdScheme::Binary, DEFAULT_BUDGET).unwrap().unwrap();
        assert_eq!(q, (3, 0));
        assert_eq!(validate_solution(&inst, &witness), vec![]);
        assert_eq!(witness.exact_quality.unwrap().1, 0);
    }

    #[test]
    fn oracle_budget_is_enforced() {
        assert!(matches!(
            brute_force_solve(&full(), ThresholdScheme::Binary, 2),
            Err(OracleError::BudgetExceeded { budget: 2, .. })
        ));
    }
}
