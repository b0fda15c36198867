//! Translation of a preprocessed instance into a [`ConstraintModel`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::dl::{DiffConstraint, DiffVar, MAX_WEIGHT};
use crate::error::EncodeError;
use crate::instance::{Edge, Node};
use crate::model::{ConstraintModel, Lit, Var, VarTag};
use crate::objective::{threshold_set, ThresholdScheme};
use crate::preprocess::{AreaIdx, PreprocessedInstance};

/// Optional constraint groups, the sequence heuristic and the threshold scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    pub hs: bool,
    pub ol1: bool,
    pub ol2: bool,
    pub ac: bool,
    pub scheme: ThresholdScheme,
}

impl EncodeOptions {
    pub fn all() -> Self {
        EncodeOptions {
            hs: true,
            ol1: true,
            ol2: true,
            ac: true,
            scheme: ThresholdScheme::Binary,
        }
    }

    /// All 16 on/off combinations of the four groups.
    pub fn combinations() -> impl Iterator<Item = EncodeOptions> {
        (0u8..16).map(|bits| EncodeOptions {
            hs: bits & 1 != 0,
            ol1: bits & 2 != 0,
            ol2: bits & 4 != 0,
            ac: bits & 8 != 0,
            scheme: ThresholdScheme::Binary,
        })
    }
}

impl FromStr for EncodeOptions {
    type Err = String;

    /// Comma-separated subset of `hs,ol1,ol2,ac`; empty enables nothing.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut o = EncodeOptions::default();
        for g in s.split(',').map(str::trim).filter(|g| !g.is_empty()) {
            match g {
                "hs" => o.hs = true,
                "ol1" => o.ol1 = true,
                "ol2" => o.ol2 = true,
                "ac" => o.ac = true,
                other => return Err(format!("unknown group {other:?}; expected hs, ol1, ol2 or ac")),
            }
        }
        Ok(o)
    }
}

impl fmt::Display for EncodeOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.hs, "hs"), (self.ol1, "ol1"), (self.ol2, "ol2"), (self.ac, "ac")]
            .into_iter()
            .filter(|(on, _)| *on)
            .map(|(_, n)| n)
            .collect();
        write!(f, "{}", names.join(","))
    }
}

/// `s = e' − e − (l − l')`; positive means the first interval should go first.
pub fn sequence_score(e: i64, l: i64, e2: i64, l2: i64) -> i64 {
    e2 - e - (l - l2)
}

/// Score of ordering `first` before `second`. Intervals are taken over the
/// nodes both areas touch, or over the whole areas if they share no node.
/// `None` when a needed latest arrival is unbounded.
pub fn sequence_hint(pre: &PreprocessedInstance, first: AreaIdx, second: AreaIdx) -> Option<i64> {
    let (a, b) = (&pre.coverage.areas[first], &pre.coverage.areas[second]);
    let (ta, tb) = (&pre.instance.trains[a.train], &pre.instance.trains[b.train]);
    let shared: Vec<&Node> = a.nodes().intersection(&b.nodes()).copied().collect();
    let window = |t: &crate::instance::TrainLine| -> Option<(i64, i64)> {
        let e = shared.iter().map(|v| t.earliest(v)).min()?;
        let l = shared
            .iter()
            .map(|v| t.latest(v))
            .try_fold(i64::MIN, |acc, l| l.map(|l| acc.max(l)))?;
        Some((e, l))
    };
    let ((e, l), (e2, l2)) = if shared.is_empty() {
        ((a.entry, a.exit?), (b.entry, b.exit?))
    } else {
        (window(ta)?, window(tb)?)
    };
    Some(sequence_score(e, l, e2, l2))
}

struct Builder<'a> {
    pre: &'a PreprocessedInstance,
    m: ConstraintModel,
    used: BTreeMap<AreaIdx, Lit>,
    enter: BTreeMap<AreaIdx, Vec<(Node, Lit)>>,
    leave: BTreeMap<AreaIdx, Vec<(Node, Lit)>>,
    connection: Vec<Lit>,
    /// Conflict index per ordered area pair.
    conflict: BTreeMap<(AreaIdx, AreaIdx), usize>,
}

pub fn encode(pre: &PreprocessedInstance, opts: &EncodeOptions) -> Result<ConstraintModel, EncodeError> {
    let mut b = Builder {
        pre,
        m: ConstraintModel::default(),
        used: BTreeMap::new(),
        enter: BTreeMap::new(),
        leave: BTreeMap::new(),
        connection: Vec::new(),
        conflict: BTreeMap::new(),
    };
    for (i, c) in pre.conflicts.iter().enumerate() {
        b.conflict.insert((c.first, c.second), i);
        b.conflict.insert((c.second, c.first), i);
    }
    b.routing();
    b.schedule()?;
    b.connections()?;
    b.conflicts();
    b.objective(opts.scheme)?;
    if opts.ol1 {
        b.overlap_one();
    }
    if opts.ol2 {
        b.overlap_two();
    }
    if opts.ac {
        b.acyclicity();
    }
    if opts.hs {
        b.heuristic();
    }
    Ok(b.m)
}

impl Builder<'_> {
    fn var(&mut self, tag: VarTag) -> Lit {
        Lit::pos(self.m.new_var(tag))
    }

    fn clause(&mut self, mut lits: Vec<Lit>) {
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        self.m.clauses.push(lits);
    }

    fn at_most_one(&mut self, lits: &[Lit]) {
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                self.clause(vec![!a, !b]);
            }
        }
    }

    /// `y ↔ a₁ ∨ … ∨ aₙ`, reusing `a₁` when `n = 1`.
    fn define_or(&mut self, tag: VarTag, lits: &[Lit]) -> Lit {
        if let [single] = lits {
            return *single;
        }
        let y = self.var(tag);
        let mut long = vec![!y];
        long.extend_from_slice(lits);
        self.clause(long);
        for &a in lits {
            self.clause(vec![!a, y]);
        }
        y
    }

    fn visit(&self, t: usize, v: &Node) -> Lit {
        Lit::pos(self.m.visit[&(t, v.clone())])
    }

    fn route(&self, t: usize, e: &Edge) -> Lit {
        Lit::pos(self.m.route[&(t, e.clone())])
    }

    fn x(&self, t: usize, v: &Node) -> DiffVar {
        self.xh(t, self.pre.height(t, v))
    }

    fn xh(&self, t: usize, h: u32) -> DiffVar {
        self.m.diff_var(t, h).expect("difference variables exist for every height")
    }

    fn always(&mut self, u: DiffVar, v: DiffVar, d: i64) -> Result<(), EncodeError> {
        check_weight(d)?;
        self.m.unconditional.push(DiffConstraint::new(u, v, d, 0));
        Ok(())
    }

    fn attach(&mut self, lit: Lit, u: DiffVar, v: DiffVar, d: i64) -> Result<(), EncodeError> {
        check_weight(d)?;
        self.m.attached.push((lit, DiffConstraint::new(u, v, d, 0)));
        Ok(())
    }

    fn routing(&mut self) {
        let inst = &self.pre.instance;
        for (ti, t) in inst.trains.iter().enumerate() {
            for v in &t.nodes {
                let var = self.m.new_var(VarTag::Visit {
                    train: ti,
                    node: v.clone(),
                });
                self.m.visit.insert((ti, v.clone()), var);
            }
            for e in &t.edges {
                let var = self.m.new_var(VarTag::Route {
                    train: ti,
                    edge: e.clone(),
                });
                self.m.route.insert((ti, e.clone()), var);
            }
            let starts: Vec<Lit> = t.computed_starts().iter().map(|s| self.visit(ti, s)).collect();
            self.clause(starts.clone());
            self.at_most_one(&starts);
            for v in &t.nodes {
                let visit = self.visit(ti, v);
                let outs: Vec<Lit> = t.successors(v).map(|e| self.route(ti, e)).collect();
                let ins: Vec<Lit> = t.predecessors(v).map(|e| self.route(ti, e)).collect();
                if !outs.is_empty() {
                    self.clause([vec![!visit], outs.clone()].concat());
                    self.at_most_one(&outs);
                }
                if !ins.is_empty() {
                    self.clause([vec![!visit], ins].concat());
                }
            }
            for e in &t.edges {
                let r = self.route(ti, e);
                let (a, b) = (self.visit(ti, &e.from), self.visit(ti, &e.to));
                self.clause(vec![!r, a]);
                self.clause(vec![!r, b]);
            }
        }
    }

    fn schedule(&mut self) -> Result<(), EncodeError> {
        let pre = self.pre;
        for (ti, hm) in pre.heights.iter().enumerate() {
            for h in 0..hm.var_count as u32 {
                self.m.diff_keys.push((ti, h));
            }
        }
        let zero = DiffVar::ZERO;
        for (ti, t) in pre.instance.trains.iter().enumerate() {
            let bounds = &pre.bounds[ti];
            for h in 0..pre.heights[ti].var_count {
                let x = self.xh(ti, h as u32);
                self.always(zero, x, -bounds.min_earliest[h])?;
                if let Some(l) = bounds.max_latest[h] {
                    self.always(x, zero, l)?;
                }
            }
            for (v, e) in &bounds.residual_earliest {
                let lit = self.visit(ti, v);
                let x = self.x(ti, v);
                self.attach(lit, zero, x, -e)?;
            }
            for (v, l) in &bounds.residual_latest {
                let lit = self.visit(ti, v);
                let x = self.x(ti, v);
                self.attach(lit, x, zero, *l)?;
            }
            for (&n, &time) in &pre.times[ti].exclusive {
                let (a, b) = (self.xh(ti, n), self.xh(ti, n + 1));
                self.always(a, b, -time)?;
            }
            for (e, &time) in &pre.times[ti].conditional {
                let lit = self.route(ti, e);
                let (a, b) = (self.x(ti, &e.from), self.x(ti, &e.to));
                self.attach(lit, a, b, -time)?;
            }
            let _ = t;
        }
        Ok(())
    }

    fn connections(&mut self) -> Result<(), EncodeError> {
        let inst = &self.pre.instance;
        for (ci, c) in inst.connections.iter().enumerate() {
            let unvisitable = || EncodeError::UnvisitableConnection(c.id.to_string());
            let ti = inst.train_index(&c.train).ok_or_else(unvisitable)?;
            let tj = inst.train_index(&c.other_train).ok_or_else(unvisitable)?;
            let (t, t2) = (&inst.trains[ti], &inst.trains[tj]);
            if !t.edges.contains(&c.edge)
                || !t2.edges.contains(&c.other_edge)
                || !t.nodes.contains(&c.node)
                || !t2.nodes.contains(&c.other_node)
            {
                return Err(unvisitable());
            }
            let (r1, r2) = (self.route(ti, &c.edge), self.route(tj, &c.other_edge));
            let act = self.var(VarTag::Connection { index: ci });
            self.clause(vec![!act, r1]);
            self.clause(vec![!act, r2]);
            self.clause(vec![!r1, !r2, act]);
            self.connection.push(act);
            let (xa, xb) = (self.x(ti, &c.node), self.x(tj, &c.other_node));
            if let Some(alpha) = c.alpha {
                self.attach(act, xa, xb, -alpha)?;
            }
            if let Some(omega) = c.omega {
                self.attach(act, xb, xa, omega)?;
            }
        }
        Ok(())
    }

    fn used(&mut self, area: AreaIdx) -> Lit {
        if let Some(l) = self.used.get(&area) {
            return *l;
        }
        let a = &self.pre.coverage.areas[area];
        let routes: Vec<Lit> = a.edges.iter().map(|e| self.route(a.train, e)).collect();
        let y = self.define_or(VarTag::Used { area }, &routes);
        self.used.insert(area, y);
        y
    }

    /// Entry (`entering = true`) or exit nodes of an area with their literals.
    fn boundary(&mut self, area: AreaIdx, entering: bool) -> Vec<(Node, Lit)> {
        let cache = if entering { &self.enter } else { &self.leave };
        if let Some(v) = cache.get(&area) {
            return v.clone();
        }
        let a = &self.pre.coverage.areas[area];
        let mut out = Vec::new();
        for u in a.nodes() {
            let from_u: Vec<Lit> = a.edges.iter().filter(|e| &e.from == u).map(|e| self.route(a.train, e)).collect();
            let into_u: Vec<Lit> = a.edges.iter().filter(|e| &e.to == u).map(|e| self.route(a.train, e)).collect();
            let (inside, outside) = if entering { (from_u, into_u) } else { (into_u, from_u) };
            if inside.is_empty() {
                continue;
            }
            let tag = if entering {
                VarTag::Enter { area, node: u.clone() }
            } else {
                VarTag::Leave { area, node: u.clone() }
            };
            let y = self.var(tag);
            self.clause([vec![!y], inside.clone()].concat());
            for &o in &outside {
                self.clause(vec![!y, !o]);
            }
            for &i in &inside {
                self.clause([vec![!i, y], outside.clone()].concat());
            }
            out.push((u.clone(), y));
        }
        if entering {
            self.enter.insert(area, out.clone());
        } else {
            self.leave.insert(area, out.clone());
        }
        out
    }

    fn waivers(&self, first: AreaIdx, second: AreaIdx) -> Vec<Lit> {
        self.conflict
            .get(&(first, second))
            .map(|&ci| self.pre.conflicts[ci].waivers.iter().map(|&c| self.connection[c]).collect())
            .unwrap_or_default()
    }

    fn seq(&self, before: AreaIdx, after: AreaIdx) -> Lit {
        Lit::pos(self.m.seq[&(before, after)])
    }

    fn conflicts(&mut self) {
        for c in &self.pre.conflicts {
            let (a, b) = (c.first, c.second);
            let ab = self.var(VarTag::Seq { before: a, after: b });
            let ba = self.var(VarTag::Seq { before: b, after: a });
            self.m.seq.insert((a, b), ab.var());
            self.m.seq.insert((b, a), ba.var());
            let (ua, ub) = (self.used(a), self.used(b));
            for s in [ab, ba] {
                self.clause(vec![!s, ua]);
                self.clause(vec![!s, ub]);
            }
            self.clause(vec![!ab, !ba]);
            let mut choice = vec![!ua, !ub, ab, ba];
            choice.extend(self.waivers(a, b));
            self.clause(choice);
            self.link_sequence(ab, a, b);
            self.link_sequence(ba, b, a);
        }
    }

    /// Exit of `before` plus blocked time precedes entry of `after`.
    fn link_sequence(&mut self, seq: Lit, before: AreaIdx, after: AreaIdx) {
        let pre = self.pre;
        let (ta, tb) = (pre.coverage.areas[before].train, pre.coverage.areas[after].train);
        let blocked = pre.blocked(before);
        let exits = self.boundary(before, false);
        let entries = self.boundary(after, true);
        let exit_heights: BTreeSet<u32> = exits.iter().map(|(v, _)| pre.height(ta, v)).collect();
        let entry_heights: BTreeSet<u32> = entries.iter().map(|(u, _)| pre.height(tb, u)).collect();
        if exit_heights.len() == 1 && entry_heights.len() == 1 {
            let (hx, hy) = (*exit_heights.first().unwrap(), *entry_heights.first().unwrap());
            let (x, y) = (self.xh(ta, hx), self.xh(tb, hy));
            self.m.attached.push((seq, DiffConstraint::new(x, y, -blocked, 0)));
            return;
        }
        let mut aux: BTreeMap<(u32, u32), Lit> = BTreeMap::new();
        for (v, leave) in &exits {
            for (u, enter) in &entries {
                let key = (pre.height(ta, v), pre.height(tb, u));
                let link = match aux.get(&key) {
                    Some(l) => *l,
                    None => {
                        let l = self.var(VarTag::SeqTimes {
                            before,
                            after,
                            exit_height: key.0,
                            entry_height: key.1,
                        });
                        let (x, y) = (self.xh(ta, key.0), self.xh(tb, key.1));
                        self.m.attached.push((l, DiffConstraint::new(x, y, -blocked, 0)));
                        aux.insert(key, l);
                        l
                    }
                };
                self.clause(vec![!seq, !*leave, !*enter, link]);
            }
        }
    }

    fn objective(&mut self, scheme: ThresholdScheme) -> Result<(), EncodeError> {
        let pre = self.pre;
        let inst = &pre.instance;
        let thresholds = threshold_set(inst, scheme)?;
        type Key = (usize, u32, i64, i64);
        let mut carriers: BTreeMap<Key, Vec<Node>> = BTreeMap::new();
        let mut per_node: Vec<(usize, Node, Vec<Key>)> = Vec::new();
        for ((tid, v), list) in &thresholds {
            let Some(ti) = inst.train_index(tid) else { continue };
            if !inst.trains[ti].nodes.contains(v) {
                continue;
            }
            let h = pre.height(ti, v);
            let keys: Vec<Key> = list.iter().map(|th| (ti, h, th.at, th.weight)).collect();
            for k in &keys {
                carriers.entry(*k).or_default().push(v.clone());
            }
            per_node.push((ti, v.clone(), keys));
        }

        let zero = DiffVar::ZERO;
        let mut late: BTreeMap<Key, Lit> = BTreeMap::new();
        let mut delay_layer = Vec::new();
        for (&key, nodes) in &carriers {
            let (ti, h, at, weight) = key;
            let l = self.var(VarTag::Late { train: ti, height: h, at, weight });
            late.insert(key, l);
            delay_layer.push((l, weight));
            let x = self.xh(ti, h);
            self.attach(l, zero, x, -at)?;
            let counts = &pre.paths[ti];
            let through: BigUint = nodes.iter().map(|v| counts.through_node[v].clone()).sum();
            let visits: Vec<Lit> = nodes.iter().map(|v| self.visit(ti, v)).collect();
            if through == counts.total {
                self.attach(!l, x, zero, at - 1)?;
            } else {
                self.clause([vec![!l], visits.clone()].concat());
                let early = self.var(VarTag::Early { train: ti, height: h, at, weight });
                self.clause(vec![!early, !l]);
                self.clause([vec![!early], visits.clone()].concat());
                for &vis in &visits {
                    self.clause(vec![!vis, l, early]);
                }
                self.attach(early, x, zero, at - 1)?;
            }
        }
        for (ti, v, keys) in &per_node {
            for w in keys.windows(2) {
                let (lower, upper) = (late[&w[0]], late[&w[1]]);
                let covers = carriers[&w[1]].iter().all(|n| carriers[&w[0]].contains(n));
                if covers {
                    self.clause(vec![!upper, lower]);
                } else {
                    let vis = self.visit(*ti, v);
                    self.clause(vec![!vis, !upper, lower]);
                }
            }
        }

        let mut route_layer = Vec::new();
        for (ti, t) in inst.trains.iter().enumerate() {
            for e in &t.edges {
                let p = inst.objective.route_penalty.get(e).copied().unwrap_or(0);
                if p > 0 {
                    route_layer.push((self.route(ti, e), p));
                }
            }
        }
        self.m.layers = vec![delay_layer, route_layer];
        Ok(())
    }

    fn overlap_use(&mut self, o: usize, cache: &mut BTreeMap<usize, Lit>) -> Lit {
        if let Some(l) = cache.get(&o) {
            return *l;
        }
        let ov = &self.pre.overlaps[o];
        let routes: Vec<Lit> = ov.shared.iter().map(|e| self.route(ov.train, e)).collect();
        let l = self.define_or(VarTag::OverlapUse { overlap: o }, &routes);
        cache.insert(o, l);
        l
    }

    fn overlap_one(&mut self) {
        let pre = self.pre;
        let res = |a: AreaIdx| &pre.coverage.areas[a].resource;
        let mut cache = BTreeMap::new();
        for (i, o1) in pre.overlaps.iter().enumerate() {
            for (j, o2) in pre.overlaps.iter().enumerate().skip(i + 1) {
                if o1.train == o2.train {
                    continue;
                }
                let (a, a2) = (o1.first, o1.second);
                let (b, b2) = if res(o2.first) == res(a) && res(o2.second) == res(a2) {
                    (o2.first, o2.second)
                } else if res(o2.second) == res(a) && res(o2.first) == res(a2) {
                    (o2.second, o2.first)
                } else {
                    continue;
                };
                if !self.conflict.contains_key(&(a, b)) || !self.conflict.contains_key(&(a2, b2)) {
                    continue;
                }
                let (ua, ub) = (self.overlap_use(i, &mut cache), self.overlap_use(j, &mut cache));
                for (x, y, x2, y2) in [(a, b, a2, b2), (b, a, b2, a2), (a2, b2, a, b), (b2, a2, b, a)] {
                    let mut c = vec![!self.seq(x, y), !ua, !ub, self.seq(x2, y2)];
                    c.extend(self.waivers(x2, y2));
                    self.clause(c);
                }
            }
        }
    }

    fn overlap_two(&mut self) {
        for d in &self.pre.decided {
            if !self.conflict.contains_key(&(d.before, d.after)) {
                continue;
            }
            let (ua, ub) = (self.used(d.before), self.used(d.after));
            let mut c = vec![!ua, !ub, self.seq(d.before, d.after)];
            c.extend(self.waivers(d.before, d.after));
            self.clause(c);
        }
    }

    fn acyclicity(&mut self) {
        let pre = self.pre;
        let train = |a: AreaIdx| pre.coverage.areas[a].train;
        let mut partners: BTreeMap<AreaIdx, BTreeSet<AreaIdx>> = BTreeMap::new();
        for &(x, y) in self.conflict.keys() {
            partners.entry(x).or_default().insert(y);
        }
        for (&x, ys) in &partners {
            for &y in ys {
                for &z in &partners[&y] {
                    if z == x || train(z) == train(x) || !ys.contains(&z) {
                        continue;
                    }
                    let c = vec![!self.seq(x, y), !self.seq(y, z), self.seq(x, z)];
                    self.clause(c);
                }
            }
        }
    }

    fn heuristic(&mut self) {
        for c in &self.pre.conflicts {
            let Some(s) = sequence_hint(self.pre, c.first, c.second) else { continue };
            if s == 0 {
                continue;
            }
            let (ab, ba): (Var, Var) = (self.m.seq[&(c.first, c.second)], self.m.seq[&(c.second, c.first)]);
            self.m.hints.push((ab, s > 0));
            self.m.hints.push((ba, s < 0));
        }
    }
}

fn check_weight(d: i64) -> Result<(), EncodeError> {
    if d.abs() > MAX_WEIGHT {
        return Err(EncodeError::WeightOutOfRange(d));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::preprocess::preprocess;
    use crate::term::Term;

    const REFERENCE: &str = include_str!("../../../fixtures/reference.lp");

    fn reference() -> PreprocessedInstance {
        preprocess(&parse_instance(REFERENCE).unwrap()).unwrap()
    }

    fn area(pre: &PreprocessedInstance, train: &str, res: &str) -> AreaIdx {
        let ti = pre.instance.train_index(&Term::sym(train)).unwrap();
        pre.coverage.of(ti, &Term::sym(res))[0]
    }

    #[test]
    fn reference_sequence_score() {
        let pre = reference();
        let (t1, t2) = (area(&pre, "t1", "sw1"), area(&pre, "t2", "sw1"));
        assert_eq!(sequence_hint(&pre, t1, t2), Some(-180));
        assert_eq!(sequence_hint(&pre, t2, t1), Some(180));
        assert_eq!(sequence_score(0, 10, 100, 110), 200);
        assert_eq!(sequence_score(5, 9, 5, 9), 0);
    }

    #[test]
    fn hints_prefer_t2_before_t1() {
        let pre = reference();
        let m = encode(&pre, &"hs".parse().unwrap()).unwrap();
        let (t1, t2) = (area(&pre, "t1", "sw1"), area(&pre, "t2", "sw1"));
        let t2_first = m.seq[&(t2, t1)];
        let t1_first = m.seq[&(t1, t2)];
        assert!(m.hints.contains(&(t2_first, true)));
        assert!(m.hints.contains(&(t1_first, false)));
    }

    #[test]
    fn five_sequence_pairs() {
        let pre = reference();
        let m = encode(&pre, &EncodeOptions::default()).unwrap();
        assert_eq!(m.stats().seq_pairs, 5);
        let (t2, t3) = (area(&pre, "t2", "sw1"), area(&pre, "t3", "sw1"));
        assert!(!m.seq.contains_key(&(t2, t3)));
    }

    #[test]
    fn merged_late_variables() {
        let pre = reference();
        let m = encode(&pre, &EncodeOptions::default()).unwrap();
        let t1_height5: Vec<_> = m
            .vars
            .iter()
            .filter(|v| matches!(v, VarTag::Late { train: 0, height: 5, .. }))
            .collect();
        assert_eq!(t1_height5.len(), 1);
        // 17 potlate facts, nodes 1/2 and 11/12 of t1 share their thresholds
        assert_eq!(m.stats().late_vars, 15);
    }

    #[test]
    fn exclusive_travel_is_unconditional() {
        let pre = reference();
        let m = encode(&pre, &EncodeOptions::default()).unwrap();
        let (x0, x1) = (m.diff_var(0, 0).unwrap(), m.diff_var(0, 1).unwrap());
        assert!(m.unconditional.contains(&DiffConstraint::new(x0, x1, -60, 0)));
    }

    #[test]
    fn connection_one_equalizes_arrivals() {
        let pre = reference();
        let m = encode(&pre, &EncodeOptions::default()).unwrap();
        let t2_at3 = m.diff_var(1, pre.height(1, &Term::Int(3))).unwrap();
        let t3_at3 = m.diff_var(2, pre.height(2, &Term::Int(3))).unwrap();
        let found: Vec<i64> = m
            .attached
            .iter()
            .filter(|(_, c)| (c.u, c.v) == (t2_at3, t3_at3) || (c.u, c.v) == (t3_at3, t2_at3))
            .map(|(_, c)| c.d)
            .collect();
        assert_eq!(found, vec![0, 0]);
    }

    #[test]
    fn group_names() {
        let o: EncodeOptions = "hs, ac".parse().unwrap();
        assert!(o.hs && o.ac && !o.ol1 && !o.ol2);
        assert_eq!(o.to_string(), "hs,ac");
        assert!("ol3".parse::<EncodeOptions>().is_err());
        assert_eq!("".parse::<EncodeOptions>().unwrap(), EncodeOptions::default());
        assert_eq!(EncodeOptions::combinations().count(), 16);
    }

    #[test]
    fn every_diff_constraint_uses_known_variables() {
        let pre = reference();
        let m = encode(&pre, &EncodeOptions::all()).unwrap();
        let n = m.diff_keys.len() as u32;
        let all = m.unconditional.iter().chain(m.attached.iter().map(|(_, c)| c));
        for c in all {
            assert!(c.u.0 <= n && c.v.0 <= n && c.u != c.v);
        }
        for clause in &m.clauses {
            for l in clause {
                assert!((l.var().0 as usize) < m.num_vars());
            }
        }
    }
}
