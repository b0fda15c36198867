//! Incremental difference logic over integers.
//!
//! A constraint `u − v ≤ d` is kept as an edge `v → u` of weight `d`. The
//! system maintains an assignment satisfying every active constraint and
//! repairs it on each assertion with a Dijkstra pass over reduced costs.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::DiffError;

/// Largest accepted |d|. Keeps every path sum far from overflow.
pub const MAX_WEIGHT: i64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffVar(pub u32);

impl DiffVar {
    pub const ZERO: DiffVar = DiffVar(0);

    fn ix(self) -> usize {
        self.0 as usize
    }
}

/// `u − v ≤ d`, labelled with an external tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiffConstraint {
    pub u: DiffVar,
    pub v: DiffVar,
    pub d: i64,
    pub tag: u32,
}

impl DiffConstraint {
    pub fn new(u: DiffVar, v: DiffVar, d: i64, tag: u32) -> Self {
        DiffConstraint { u, v, d, tag }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Consistent,
    /// Tags of a negative cycle among the active constraints and the new one.
    Conflict(Vec<u32>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint(usize);

#[derive(Clone, Copy, Debug)]
struct Arc {
    from: u32,
    to: u32,
    weight: i64,
    tag: u32,
}

/// Pending state of one repair pass.
#[derive(Clone, Debug, Default)]
struct Scratch {
    gamma: Vec<i64>,
    pred: Vec<u32>,
    done: Vec<bool>,
    touched: Vec<u32>,
}

const NO_PRED: u32 = u32::MAX;
const NEW_ARC: u32 = u32::MAX - 1;

#[derive(Clone, Debug)]
pub struct DiffSystem<K: Ord + Clone> {
    keys: Vec<Option<K>>,
    index: BTreeMap<K, DiffVar>,
    value: Vec<i64>,
    arcs: Vec<Arc>,
    out: Vec<Vec<u32>>,
    marks: Vec<(usize, usize)>,
    next_mark: usize,
    failed: u64,
    scratch: Scratch,
}

impl<K: Ord + Clone> Default for DiffSystem<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Clone> DiffSystem<K> {
    pub fn new() -> Self {
        DiffSystem {
            keys: vec![None],
            index: BTreeMap::new(),
            value: vec![0],
            arcs: Vec::new(),
            out: vec![Vec::new()],
            marks: Vec::new(),
            next_mark: 0,
            failed: 0,
            scratch: Scratch::default(),
        }
    }

    pub fn zero(&self) -> DiffVar {
        DiffVar::ZERO
    }

    /// The variable named `key`, created on first use.
    pub fn var(&mut self, key: K) -> DiffVar {
        if let Some(v) = self.index.get(&key) {
            return *v;
        }
        let v = DiffVar(self.keys.len() as u32);
        self.keys.push(Some(key.clone()));
        self.index.insert(key, v);
        self.value.push(0);
        self.out.push(Vec::new());
        v
    }

    pub fn lookup(&self, key: &K) -> Option<DiffVar> {
        self.index.get(key).copied()
    }

    /// `None` for the zero variable.
    pub fn key(&self, v: DiffVar) -> Option<&K> {
        self.keys[v.ix()].as_ref()
    }

    pub fn num_vars(&self) -> usize {
        self.keys.len()
    }

    pub fn num_active(&self) -> usize {
        self.arcs.len()
    }

    /// Number of assertions rejected with a conflict so far.
    pub fn failed_assertions(&self) -> u64 {
        self.failed
    }

    pub fn active(&self) -> impl Iterator<Item = DiffConstraint> + '_ {
        self.arcs.iter().map(|a| DiffConstraint {
            u: DiffVar(a.to),
            v: DiffVar(a.from),
            d: a.weight,
            tag: a.tag,
        })
    }

    /// Current satisfying assignment shifted so that zero is 0.
    pub fn value(&self, v: DiffVar) -> i64 {
        self.value[v.ix()] - self.value[0]
    }

    pub fn assert_constraint(&mut self, c: DiffConstraint) -> Result<Outcome, DiffError> {
        if c.d.abs() > MAX_WEIGHT {
            return Err(DiffError::Overflow);
        }
        let (u, v) = (c.u.ix(), c.v.ix());
        let violation = self.value[v]
            .checked_add(c.d)
            .and_then(|x| x.checked_sub(self.value[u]))
            .ok_or(DiffError::Overflow)?;
        if violation >= 0 {
            self.push_arc(c);
            return Ok(Outcome::Consistent);
        }
        if u == v {
            self.failed += 1;
            return Ok(Outcome::Conflict(vec![c.tag]));
        }

        let n = self.keys.len();
        let mut s = std::mem::take(&mut self.scratch);
        s.gamma.resize(n, 0);
        s.pred.resize(n, NO_PRED);
        s.done.resize(n, false);
        s.gamma[u] = violation;
        s.pred[u] = NEW_ARC;
        s.touched.push(u as u32);
        let mut heap = BinaryHeap::from([(Reverse(violation), u as u32)]);
        let mut cycle_end = None;

        'search: while let Some((Reverse(g), x)) = heap.pop() {
            let xi = x as usize;
            if s.done[xi] || g != s.gamma[xi] {
                continue;
            }
            s.done[xi] = true;
            for &ai in &self.out[xi] {
                let a = self.arcs[ai as usize];
                let y = a.to as usize;
                let ng = g + (self.value[xi] + a.weight - self.value[y]);
                if ng < s.gamma[y] {
                    if y == v {
                        if s.gamma[y] == 0 {
                            s.touched.push(a.to);
                        }
                        s.pred[y] = ai;
                        cycle_end = Some(y);
                        break 'search;
                    }
                    if s.gamma[y] == 0 {
                        s.touched.push(a.to);
                    }
                    s.gamma[y] = ng;
                    s.pred[y] = ai;
                    heap.push((Reverse(ng), a.to));
                }
            }
        }

        let outcome = match cycle_end {
            Some(mut y) => {
                let mut tags = vec![c.tag];
                while s.pred[y] != NEW_ARC {
                    let a = self.arcs[s.pred[y] as usize];
                    tags.push(a.tag);
                    y = a.from as usize;
                }
                self.failed += 1;
                Outcome::Conflict(tags)
            }
            None => {
                let overflow = s.touched.iter().any(|&x| {
                    let x = x as usize;
                    s.done[x] && self.value[x].checked_add(s.gamma[x]).is_none()
                });
                if !overflow {
                    for &x in &s.touched {
                        if s.done[x as usize] {
                            self.value[x as usize] += s.gamma[x as usize];
                        }
                    }
                } else {
                    self.scratch_reset(&mut s);
                    self.scratch = s;
                    return Err(DiffError::Overflow);
                }
                Outcome::Consistent
            }
        };
        self.scratch_reset(&mut s);
        self.scratch = s;
        if outcome == Outcome::Consistent {
            self.push_arc(c);
        }
        Ok(outcome)
    }

    fn scratch_reset(&self, s: &mut Scratch) {
        for &x in &s.touched {
            let x = x as usize;
            s.gamma[x] = 0;
            s.pred[x] = NO_PRED;
            s.done[x] = false;
        }
        s.touched.clear();
    }

    fn push_arc(&mut self, c: DiffConstraint) {
        let idx = self.arcs.len() as u32;
        self.arcs.push(Arc {
            from: c.v.0,
            to: c.u.0,
            weight: c.d,
            tag: c.tag,
        });
        self.out[c.v.ix()].push(idx);
    }

    pub fn checkpoint(&mut self) -> Checkpoint {
        let id = self.next_mark;
        self.next_mark += 1;
        self.marks.push((id, self.arcs.len()));
        Checkpoint(id)
    }

    /// Drops every constraint asserted after `mark`, and every mark taken
    /// after it. The mark itself is consumed.
    pub fn retract_to(&mut self, mark: Checkpoint) -> Result<(), DiffError> {
        let pos = self
            .marks
            .iter()
            .rposition(|(id, _)| *id == mark.0)
            .ok_or(DiffError::StaleCheckpoint(mark.0))?;
        let len = self.marks[pos].1;
        self.marks.truncate(pos);
        while self.arcs.len() > len {
            let a = self.arcs.pop().expect("len checked");
            let popped = self.out[a.from as usize].pop();
            debug_assert_eq!(popped, Some(self.arcs.len() as u32));
        }
        Ok(())
    }

    /// Pointwise-minimal assignment with zero fixed to 0, indexed by `DiffVar`.
    pub fn minimal_model(&self) -> Result<Vec<i64>, DiffError> {
        let n = self.keys.len();
        // y = −x is the shortest distance from zero along arcs u → v of weight d
        let mut rev: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for a in &self.arcs {
            rev[a.to as usize].push((a.from as usize, a.weight));
        }
        let val = &self.value;
        let mut dist: Vec<Option<i64>> = vec![None; n];
        dist[0] = Some(0);
        let mut heap = BinaryHeap::from([(Reverse(0i64), 0usize)]);
        let mut done = vec![false; n];
        while let Some((Reverse(rd), x)) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            for &(y, d) in &rev[x] {
                let reduced = d - val[x] + val[y];
                if reduced < 0 {
                    return Err(DiffError::Inconsistent);
                }
                let nd = rd + reduced;
                if dist[y].is_none_or(|old| nd < old) {
                    dist[y] = Some(nd);
                    heap.push((Reverse(nd), y));
                }
            }
        }
        dist.iter()
            .enumerate()
            .map(|(w, rd)| {
                let rd = rd.ok_or(DiffError::Unbounded)?;
                Ok(val[w] - val[0] - rd)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// From-scratch feasibility: Bellman-Ford from a virtual source.
    fn oracle_consistent(n: usize, cs: &[(usize, usize, i64)]) -> bool {
        let mut dist = vec![0i64; n];
        for _ in 0..=n {
            let mut changed = false;
            for &(u, v, d) in cs {
                if dist[v] + d < dist[u] {
                    dist[u] = dist[v] + d;
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
        false
    }

    /// Least x with x(0) = 0, by longest-path relaxation from zero.
    fn oracle_minimum(n: usize, cs: &[(usize, usize, i64)]) -> Vec<Option<i64>> {
        let mut low: Vec<Option<i64>> = vec![None; n];
        low[0] = Some(0);
        for _ in 0..n {
            for &(u, v, d) in cs {
                if let Some(xu) = low[u] {
                    if low[v].is_none_or(|xv| xu - d > xv) {
                        low[v] = Some(xu - d);
                    }
                }
            }
        }
        low
    }

    fn sys(n: usize) -> (DiffSystem<usize>, Vec<DiffVar>) {
        let mut s = DiffSystem::new();
        let mut vars = vec![DiffVar::ZERO];
        vars.extend((1..n).map(|i| s.var(i)));
        (s, vars)
    }

    #[test]
    fn two_cycle_conflict() {
        let (mut s, x) = sys(3);
        let c1 = DiffConstraint::new(x[1], x[2], -1, 7);
        let c2 = DiffConstraint::new(x[2], x[1], 0, 8);
        assert_eq!(s.assert_constraint(c1).unwrap(), Outcome::Consistent);
        match s.assert_constraint(c2).unwrap() {
            Outcome::Conflict(mut tags) => {
                tags.sort();
                assert_eq!(tags, vec![7, 8]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(s.num_active(), 1);
        assert_eq!(s.failed_assertions(), 1);
    }

    #[test]
    fn zero_weight_cycle_is_consistent() {
        let (mut s, x) = sys(3);
        for c in [DiffConstraint::new(x[1], x[2], 5, 0), DiffConstraint::new(x[2], x[1], -5, 1)] {
            assert_eq!(s.assert_constraint(c).unwrap(), Outcome::Consistent);
        }
    }

    #[test]
    fn minimal_model_chain() {
        let (mut s, x) = sys(3);
        s.assert_constraint(DiffConstraint::new(x[0], x[1], -3, 0)).unwrap();
        s.assert_constraint(DiffConstraint::new(x[1], x[2], -2, 1)).unwrap();
        assert_eq!(s.minimal_model().unwrap(), vec![0, 3, 5]);
    }

    #[test]
    fn unbounded_variable() {
        let (mut s, x) = sys(3);
        s.assert_constraint(DiffConstraint::new(x[0], x[1], -3, 0)).unwrap();
        assert_eq!(s.minimal_model(), Err(DiffError::Unbounded));
    }

    #[test]
    fn checkpoints_nest() {
        let (mut s, x) = sys(3);
        let outer = s.checkpoint();
        s.assert_constraint(DiffConstraint::new(x[1], x[2], -1, 0)).unwrap();
        let inner = s.checkpoint();
        s.assert_constraint(DiffConstraint::new(x[2], x[0], -1, 1)).unwrap();
        s.retract_to(inner).unwrap();
        assert_eq!(s.num_active(), 1);
        assert_eq!(s.retract_to(inner), Err(DiffError::StaleCheckpoint(1)));
        s.retract_to(outer).unwrap();
        assert_eq!(s.num_active(), 0);
        assert_eq!(s.retract_to(outer), Err(DiffError::StaleCheckpoint(0)));
    }

    #[test]
    fn retracting_outer_mark_drops_inner_marks() {
        let (mut s, x) = sys(2);
        let outer = s.checkpoint();
        let inner = s.checkpoint();
        s.assert_constraint(DiffConstraint::new(x[1], x[0], 4, 0)).unwrap();
        s.retract_to(outer).unwrap();
        assert!(s.retract_to(inner).is_err());
        assert_eq!(s.num_active(), 0);
    }

    #[test]
    fn oversized_weight_is_rejected() {
        let (mut s, x) = sys(2);
        let c = DiffConstraint::new(x[1], x[0], MAX_WEIGHT + 1, 0);
        assert_eq!(s.assert_constraint(c), Err(DiffError::Overflow));
    }

    #[derive(Clone, Debug)]
    enum Op {
        Assert(usize, usize, i64),
        Checkpoint,
        Retract,
    }

    fn op(n: usize) -> impl Strategy<Value = Op> {
        prop_oneof![
            6 => (0..n, 0..n, -20i64..20).prop_map(|(u, v, d)| Op::Assert(u, v, d)),
            1 => Just(Op::Checkpoint),
            1 => Just(Op::Retract),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_from_scratch_oracle(ops in prop::collection::vec(op(6), 1..1000)) {
            let n = 6;
            let (mut s, x) = sys(n);
            let mut active: Vec<(usize, usize, i64)> = Vec::new();
            let mut marks: Vec<(Checkpoint, usize)> = Vec::new();
            for (i, o) in ops.iter().enumerate() {
                match *o {
                    Op::Assert(u, v, d) => {
                        let mut trial = active.clone();
                        trial.push((u, v, d));
                        let expect = oracle_consistent(n, &trial);
                        match s.assert_constraint(DiffConstraint::new(x[u], x[v], d, i as u32)).unwrap() {
                            Outcome::Consistent => {
                                prop_assert!(expect);
                                active.push((u, v, d));
                            }
                            Outcome::Conflict(tags) => {
                                prop_assert!(!expect);
                                let cycle: Vec<(usize, usize, i64)> = tags
                                    .iter()
                                    .map(|t| match ops[*t as usize] { Op::Assert(a, b, c) => (a, b, c), _ => unreachable!() })
                                    .collect();
                                prop_assert!(!oracle_consistent(n, &cycle));
                                prop_assert_eq!(cycle.iter().map(|c| c.2).sum::<i64>() < 0, true);
                            }
                        }
                        for &(u, v, d) in &active {
                            prop_assert!(s.value(x[u]) - s.value(x[v]) <= d);
                        }
                    }
                    Op::Checkpoint => marks.push((s.checkpoint(), active.len())),
                    Op::Retract => {
                        if let Some((m, len)) = marks.pop() {
                            s.retract_to(m).unwrap();
                            active.truncate(len);
                        }
                    }
                }
                prop_assert_eq!(s.num_active(), active.len());
            }
            let mut with_bounds = active.clone();
            for v in 1..n {
                with_bounds.push((0, v, 100));
            }
            let mut s2 = DiffSystem::<usize>::new();
            let y: Vec<DiffVar> = std::iter::once(DiffVar::ZERO).chain((1..n).map(|i| s2.var(i))).collect();
            for (i, &(u, v, d)) in with_bounds.iter().enumerate() {
                s2.assert_constraint(DiffConstraint::new(y[u], y[v], d, i as u32)).unwrap();
            }
            let model = s2.minimal_model().unwrap();
            let expect = oracle_minimum(n, &with_bounds);
            for v in 0..n {
                prop_assert_eq!(Some(model[v]), expect[v]);
            }
        }
    }
}
