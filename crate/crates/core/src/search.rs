//! Conflict-driven clause learning over a [`ConstraintModel`], with eager
//! difference-logic checking and lexicographic model-guided optimization.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dl::{Checkpoint, DiffConstraint, DiffSystem, Outcome};
use crate::encode::{encode, EncodeOptions};
use crate::error::EncodeError;
use crate::instance::Instance;
use crate::model::{ConstraintModel, Lit, Var};
use crate::preprocess::{preprocess, PreprocessedInstance};
use crate::solution::{Solution, SolveReport, SolveStats, SolveStatus};
use crate::validator::exact_quality;

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_BASE: u64 = 100;
const POLL_INTERVAL: u64 = 128;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub seed: u64,
    /// Follow the model's sign hints when choosing polarities.
    pub hints: bool,
    pub restarts: bool,
    pub time_limit: Option<Duration>,
    pub stop: Option<Arc<AtomicBool>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            hints: true,
            restarts: true,
            time_limit: None,
            stop: None,
        }
    }
}

/// Result of [`solve`]: the best assignment found and its earliest schedule.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub status: SolveStatus,
    pub assignment: Option<Vec<bool>>,
    /// Minimal model indexed by difference variable; entry 0 is the zero variable.
    pub schedule: Option<Vec<i64>>,
    /// Layer values of the best assignment.
    pub objective: Vec<i64>,
    pub stats: SolveStats,
}

impl SearchOutcome {
    pub fn value(&self, v: Var) -> Option<bool> {
        self.assignment.as_ref().map(|a| a[v.0 as usize])
    }
}

/// Minimizes the model's layers lexicographically.
pub fn solve(model: &ConstraintModel, cfg: &SolverConfig) -> SearchOutcome {
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|d| start + d);
    let mut bounds: Vec<Option<i64>> = vec![None; model.layers.len()];
    let mut engine = Engine::new(model, cfg, deadline, &bounds);
    let mut best: Option<(Vec<bool>, Vec<i64>, Vec<i64>)> = None;

    let finish = |status, best: Option<(Vec<bool>, Vec<i64>, Vec<i64>)>, stats: SolveStats| {
        let mut stats = stats;
        stats.total_time = start.elapsed().as_secs_f64();
        let (assignment, schedule, objective) = match best {
            Some((a, s, o)) => (Some(a), Some(s), o),
            None => (None, None, Vec::new()),
        };
        SearchOutcome {
            status,
            assignment,
            schedule,
            objective,
            stats,
        }
    };

    for layer in 0..model.layers.len().max(1) {
        let mut relaxed = false;
        loop {
            match engine.search() {
                Found::Model(assign, sched) => {
                    engine.stats.models += 1;
                    let values: Vec<i64> = (0..model.layers.len())
                        .map(|i| model.layer_value(i, |v| assign[v.0 as usize]))
                        .collect();
                    debug!("model {} with objective {:?}", engine.stats.models, values);
                    best = Some((assign, sched, values.clone()));
                    if model.layers.is_empty() || values[layer] == 0 {
                        break;
                    }
                    engine.tighten(layer, values[layer] - 1);
                }
                Found::Unsat => {
                    if best.is_none() {
                        return finish(SolveStatus::Infeasible, None, engine.stats);
                    }
                    relaxed = true;
                    break;
                }
                Found::Interrupted => {
                    let status = if best.is_some() {
                        SolveStatus::SatBound
                    } else {
                        SolveStatus::Unknown
                    };
                    return finish(status, best, engine.stats);
                }
            }
        }
        if layer >= model.layers.len() {
            break;
        }
        let optimum = best.as_ref().expect("a model exists").2[layer];
        info!("layer {layer} optimum {optimum}");
        bounds[layer] = Some(optimum);
        if relaxed {
            let mut next = Engine::new(model, cfg, deadline, &bounds);
            next.inherit(&engine);
            engine = next;
        } else {
            engine.tighten(layer, optimum);
        }
    }
    finish(SolveStatus::Optimal, best, engine.stats)
}

/// Paths and earliest arrivals of the best assignment.
pub fn extract_solution(pre: &PreprocessedInstance, model: &ConstraintModel, out: &SearchOutcome) -> Option<Solution> {
    let (assign, sched) = (out.assignment.as_ref()?, out.schedule.as_ref()?);
    let holds = |v: Var| assign[v.0 as usize];
    let mut sol = Solution::default();
    for (ti, t) in pre.instance.trains.iter().enumerate() {
        let mut v = t
            .computed_starts()
            .into_iter()
            .find(|s| holds(model.visit[&(ti, s.clone())]))
            .expect("exactly one start is visited");
        let mut path = Vec::new();
        loop {
            let dv = model.diff_var(ti, pre.height(ti, &v)).expect("every height has a variable");
            sol.set_arrival(&t.id, &v, sched[dv.0 as usize]);
            path.push(v.clone());
            let next = t.successors(&v).find(|e| holds(model.route[&(ti, (*e).clone())]));
            match next.map(|e| e.to.clone()) {
                Some(w) => v = w,
                None => break,
            }
        }
        sol.paths.insert(t.id.clone(), path);
    }
    let layer = |i: usize| out.objective.get(i).copied().unwrap_or(0);
    sol.approx_quality = Some((layer(0), layer(1)));
    sol.exact_quality = Some(exact_quality(&pre.instance, &sol));
    Some(sol)
}

/// Preprocesses, encodes, solves and extracts in one call.
pub fn solve_instance(inst: &Instance, opts: &EncodeOptions, cfg: &SolverConfig) -> Result<SolveReport, EncodeError> {
    let start = Instant::now();
    let pre = preprocess(inst)?;
    let model = encode(&pre, opts)?;
    let ground_time = start.elapsed();
    let cfg = SolverConfig {
        time_limit: cfg.time_limit.map(|t| t.saturating_sub(ground_time)),
        ..cfg.clone()
    };
    let out = solve(&model, &cfg);
    let mut stats = out.stats.clone();
    stats.ground_time = ground_time.as_secs_f64();
    stats.total_time = start.elapsed().as_secs_f64();
    Ok(SolveReport {
        status: out.status,
        solution: extract_solution(&pre, &model, &out),
        stats,
    })
}

enum Found {
    Model(Vec<bool>, Vec<i64>),
    Unsat,
    Interrupted,
}

#[derive(Clone, Debug)]
enum Reason {
    Decision,
    Clause(u32),
    /// Explanation clause containing the implied literal.
    Lits(Box<[Lit]>),
}

#[derive(Clone, Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// `Σ w·[l] ≤ bound` over the literals of one objective layer.
#[derive(Clone, Debug)]
struct Bound {
    lits: Vec<(Lit, i64)>,
    bound: i64,
    sum: i64,
    max_weight: i64,
}

const UNDEF: i8 = -1;

struct Engine {
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail: Vec<Lit>,
    limits: Vec<usize>,
    qhead: usize,
    thead: usize,
    dl: DiffSystem<usize>,
    marks: Vec<Checkpoint>,
    attached: Vec<Vec<DiffConstraint>>,
    bounds: Vec<Bound>,
    /// `(bound, weight)` per literal code.
    occurs: Vec<Vec<(u32, i64)>>,
    heap: VarHeap,
    var_inc: f64,
    clause_inc: f64,
    phase: Vec<bool>,
    hint: Vec<Option<bool>>,
    seen: Vec<bool>,
    learnt_count: usize,
    max_learnts: f64,
    unsat: bool,
    deadline: Option<Instant>,
    stop: Option<Arc<AtomicBool>>,
    restarts: bool,
    luby_index: u32,
    conflicts_since_restart: u64,
    stats: SolveStats,
}

impl Engine {
    fn new(model: &ConstraintModel, cfg: &SolverConfig, deadline: Option<Instant>, bounds: &[Option<i64>]) -> Self {
        let n = model.num_vars();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let activity: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 1e-5).collect();
        let mut hint = vec![None; n];
        if cfg.hints {
            for &(v, sign) in &model.hints {
                hint[v.0 as usize] = Some(sign);
            }
        }
        let mut dl = DiffSystem::new();
        for i in 0..model.diff_keys.len() {
            dl.var(i);
        }
        let mut attached = vec![Vec::new(); 2 * n];
        for &(lit, c) in &model.attached {
            attached[lit.code()].push(DiffConstraint { tag: lit.code() as u32 + 1, ..c });
        }
        let mut e = Engine {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            value: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![Reason::Decision; n],
            trail: Vec::with_capacity(n),
            limits: Vec::new(),
            qhead: 0,
            thead: 0,
            dl,
            marks: Vec::new(),
            attached,
            bounds: Vec::new(),
            occurs: vec![Vec::new(); 2 * n],
            heap: VarHeap::new(activity),
            var_inc: 1.0,
            clause_inc: 1.0,
            phase: vec![false; n],
            hint,
            seen: vec![false; n],
            learnt_count: 0,
            max_learnts: (model.clauses.len() as f64 / 3.0).max(2000.0),
            unsat: false,
            deadline,
            stop: cfg.stop.clone(),
            restarts: cfg.restarts,
            luby_index: 0,
            conflicts_since_restart: 0,
            stats: SolveStats::default(),
        };
        for (i, layer) in model.layers.iter().enumerate() {
            let lits: Vec<(Lit, i64)> = layer.iter().copied().filter(|(_, w)| *w > 0).collect();
            for &(l, w) in &lits {
                e.occurs[l.code()].push((i as u32, w));
            }
            let max_weight = lits.iter().map(|(_, w)| *w).max().unwrap_or(0);
            e.bounds.push(Bound {
                lits,
                bound: bounds.get(i).copied().flatten().unwrap_or(i64::MAX),
                sum: 0,
                max_weight,
            });
        }
        for c in &model.unconditional {
            if !matches!(e.dl.assert_constraint(*c), Ok(Outcome::Consistent)) {
                e.unsat = true;
            }
        }
        for c in &model.clauses {
            if !e.add_input(c.clone()) {
                e.unsat = true;
            }
        }
        e
    }

    /// Keeps activities, phases and counters of an earlier engine.
    fn inherit(&mut self, old: &Engine) {
        self.heap.activity.clone_from(&old.heap.activity);
        self.heap.rebuild();
        self.var_inc = old.var_inc;
        self.phase.clone_from(&old.phase);
        self.stats = old.stats.clone();
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.var().0 as usize];
        if v == UNDEF {
            UNDEF
        } else if l.is_positive() {
            v
        } else {
            1 - v
        }
    }

    fn decision_level(&self) -> u32 {
        self.limits.len() as u32
    }

    /// Adds an input clause at the root. False when it is violated there.
    fn add_input(&mut self, mut lits: Vec<Lit>) -> bool {
        lits.retain(|&l| self.lit_value(l) != 0);
        if lits.iter().any(|&l| self.lit_value(l) == 1) {
            return true;
        }
        match lits.len() {
            0 => false,
            1 => {
                self.assign(lits[0], Reason::Decision);
                true
            }
            _ => {
                self.attach_clause(lits, false);
                true
            }
        }
    }

    fn attach_clause(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(cref);
        self.watches[lits[1].code()].push(cref);
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.learnt_count += 1;
            self.stats.learned += 1;
        }
        cref
    }

    fn assign(&mut self, l: Lit, reason: Reason) {
        let v = l.var().0 as usize;
        debug_assert_eq!(self.value[v], UNDEF);
        self.value[v] = i8::from(l.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
        for &(b, w) in &self.occurs[l.code()] {
            self.bounds[b as usize].sum += w;
        }
    }

    fn new_level(&mut self) {
        self.limits.push(self.trail.len());
        self.marks.push(self.dl.checkpoint());
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.limits[level as usize];
        while self.trail.len() > keep {
            let l = self.trail.pop().expect("trail is longer than keep");
            let v = l.var().0 as usize;
            for &(b, w) in &self.occurs[l.code()] {
                self.bounds[b as usize].sum -= w;
            }
            self.value[v] = UNDEF;
            self.phase[v] = l.is_positive();
            self.heap.insert(v);
        }
        let mark = self.marks[level as usize];
        self.dl.retract_to(mark).expect("checkpoints are taken per level");
        self.marks.truncate(level as usize);
        self.limits.truncate(level as usize);
        self.qhead = self.qhead.min(keep);
        self.thead = self.thead.min(keep);
    }

    /// Unit propagation, theory checks and bound checks to a fixpoint.
    /// Returns a clause of false literals on conflict.
    fn propagate(&mut self) -> Option<Vec<Lit>> {
        loop {
            if let Some(c) = self.propagate_clauses() {
                return Some(c);
            }
            while self.thead < self.trail.len() {
                let l = self.trail[self.thead];
                self.thead += 1;
                for i in 0..self.attached[l.code()].len() {
                    let c = self.attached[l.code()][i];
                    match self.dl.assert_constraint(c) {
                        Ok(Outcome::Consistent) => {}
                        Ok(Outcome::Conflict(tags)) => {
                            self.stats.theory_conflicts += 1;
                            let mut lits: Vec<Lit> = tags
                                .into_iter()
                                .filter(|&t| t != 0)
                                .map(|t| !Lit::from_code(t as usize - 1))
                                .collect();
                            lits.sort();
                            lits.dedup();
                            return Some(lits);
                        }
                        Err(e) => panic!("difference constraint out of range: {e}"),
                    }
                }
            }
            if let Some(c) = self.propagate_bounds() {
                return Some(c);
            }
            if self.qhead == self.trail.len() && self.thead == self.trail.len() {
                return None;
            }
        }
    }

    fn propagate_clauses(&mut self) -> Option<Vec<Lit>> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                let c = &mut self.clauses[cref as usize];
                if c.deleted {
                    continue;
                }
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                let first = c.lits[0];
                if self.value_of(first) == 1 {
                    ws[j] = cref;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[cref as usize].lits.len() {
                    let cand = self.clauses[cref as usize].lits[k];
                    if self.value_of(cand) != 0 {
                        let c = &mut self.clauses[cref as usize];
                        c.lits.swap(1, k);
                        self.watches[cand.code()].push(cref);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cref;
                j += 1;
                if self.value_of(first) == 0 {
                    conflict = Some(self.clauses[cref as usize].lits.clone());
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    break;
                }
                self.assign(first, Reason::Clause(cref));
            }
            ws.truncate(j);
            let slot = &mut self.watches[false_lit.code()];
            ws.append(slot);
            *slot = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn value_of(&self, l: Lit) -> i8 {
        self.lit_value(l)
    }

    fn propagate_bounds(&mut self) -> Option<Vec<Lit>> {
        for bi in 0..self.bounds.len() {
            let b = &self.bounds[bi];
            let slack = b.bound.saturating_sub(b.sum);
            if slack >= b.max_weight {
                continue;
            }
            let trues: Vec<Lit> = b.lits.iter().filter(|(l, _)| self.lit_value(*l) == 1).map(|(l, _)| !*l).collect();
            if slack < 0 {
                return Some(trues);
            }
            let forced: Vec<Lit> = b
                .lits
                .iter()
                .filter(|(l, w)| *w > slack && self.lit_value(*l) == UNDEF)
                .map(|(l, _)| !*l)
                .collect();
            for l in forced {
                let mut why = Vec::with_capacity(trues.len() + 1);
                why.push(l);
                why.extend_from_slice(&trues);
                self.assign(l, Reason::Lits(why.into_boxed_slice()));
            }
        }
        None
    }

    fn reason_lits(&mut self, v: usize) -> Vec<Lit> {
        match &self.reason[v] {
            Reason::Decision => Vec::new(),
            Reason::Clause(cref) => {
                let cref = *cref as usize;
                if self.clauses[cref].learnt {
                    self.bump_clause(cref);
                }
                self.clauses[cref].lits.clone()
            }
            Reason::Lits(lits) => lits.to_vec(),
        }
    }

    /// First-UIP learning. Returns the learnt clause, asserting literal first,
    /// and the level to jump back to.
    fn analyze(&mut self, conflict: Vec<Lit>) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        let mut learnt = vec![Lit::from_code(0)];
        let mut counter = 0;
        let mut lits = conflict;
        let mut idx = self.trail.len();
        let mut skip: Option<Var> = None;
        let p = loop {
            for &q in &lits {
                let v = q.var().0 as usize;
                if Some(q.var()) == skip || self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                self.bump_var(v);
                if self.level[v] == current {
                    counter += 1;
                } else {
                    learnt.push(q);
                }
            }
            let p = loop {
                idx -= 1;
                let l = self.trail[idx];
                if self.seen[l.var().0 as usize] {
                    break l;
                }
            };
            self.seen[p.var().0 as usize] = false;
            counter -= 1;
            if counter == 0 {
                break p;
            }
            skip = Some(p.var());
            lits = self.reason_lits(p.var().0 as usize);
        };
        learnt[0] = !p;

        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            if !self.redundant(q) {
                kept.push(q);
            }
        }
        for &q in &learnt[1..] {
            self.seen[q.var().0 as usize] = false;
        }
        let mut back = 0;
        if kept.len() > 1 {
            let (mut at, mut best) = (1, 0);
            for (i, q) in kept.iter().enumerate().skip(1) {
                let lv = self.level[q.var().0 as usize];
                if lv > best {
                    best = lv;
                    at = i;
                }
            }
            kept.swap(1, at);
            back = best;
        }
        (kept, back)
    }

    /// Every other literal of the reason is already in the learnt clause.
    fn redundant(&self, q: Lit) -> bool {
        let v = q.var().0 as usize;
        let lits: &[Lit] = match &self.reason[v] {
            Reason::Decision => return false,
            Reason::Clause(cref) => &self.clauses[*cref as usize].lits,
            Reason::Lits(l) => l,
        };
        lits.iter().all(|r| {
            let rv = r.var().0 as usize;
            rv == v || self.seen[rv] || self.level[rv] == 0
        })
    }

    fn bump_var(&mut self, v: usize) {
        self.heap.activity[v] += self.var_inc;
        if self.heap.activity[v] > 1e100 {
            for a in &mut self.heap.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v);
    }

    fn bump_clause(&mut self, cref: usize) {
        self.clauses[cref].activity += self.clause_inc;
        if self.clauses[cref].activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    fn locked(&self, cref: usize) -> bool {
        let first = self.clauses[cref].lits[0];
        let v = first.var().0 as usize;
        self.lit_value(first) == 1 && matches!(self.reason[v], Reason::Clause(r) if r as usize == cref)
    }

    fn reduce_learnts(&mut self) {
        let mut cand: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lits.len() > 2
            })
            .filter(|&i| !self.locked(i))
            .collect();
        cand.sort_by(|&a, &b| self.clauses[a].activity.total_cmp(&self.clauses[b].activity));
        for &i in &cand[..cand.len() / 2] {
            let c = &mut self.clauses[i];
            c.deleted = true;
            c.lits = Vec::new();
            self.learnt_count -= 1;
        }
        self.max_learnts *= 1.1;
    }

    fn interrupted(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
            || self.stop.as_ref().is_some_and(|s| s.load(Ordering::Relaxed))
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop() {
            if self.value[v] == UNDEF {
                let sign = self.hint[v].unwrap_or(self.phase[v]);
                return Some(Lit::new(Var(v as u32), sign));
            }
        }
        None
    }

    /// Restricts layer `layer` to at most `bound` and returns to the root.
    fn tighten(&mut self, layer: usize, bound: i64) {
        self.backtrack(0);
        self.bounds[layer].bound = bound;
    }

    fn search(&mut self) -> Found {
        if self.unsat {
            return Found::Unsat;
        }
        let mut polls = 0u64;
        let mut restart_limit = luby(self.luby_index) * RESTART_BASE;
        loop {
            polls += 1;
            if polls.is_multiple_of(POLL_INTERVAL) && self.interrupted() {
                self.backtrack(0);
                return Found::Interrupted;
            }
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                self.conflicts_since_restart += 1;
                let top = conflict.iter().map(|l| self.level[l.var().0 as usize]).max().unwrap_or(0);
                if top == 0 {
                    self.unsat = true;
                    return Found::Unsat;
                }
                self.backtrack(top);
                let (learnt, back) = self.analyze(conflict);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.assign(learnt[0], Reason::Decision);
                } else {
                    let first = learnt[0];
                    let cref = self.attach_clause(learnt, true);
                    self.bump_clause(cref as usize);
                    self.assign(first, Reason::Clause(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY;
                continue;
            }
            if self.restarts && self.conflicts_since_restart >= restart_limit {
                self.conflicts_since_restart = 0;
                self.luby_index += 1;
                restart_limit = luby(self.luby_index) * RESTART_BASE;
                self.stats.restarts += 1;
                self.backtrack(0);
                continue;
            }
            if self.learnt_count as f64 - self.trail.len() as f64 >= self.max_learnts {
                self.reduce_learnts();
            }
            match self.pick_branch() {
                Some(l) => {
                    self.stats.choices += 1;
                    self.new_level();
                    self.assign(l, Reason::Decision);
                }
                None => {
                    let assign: Vec<bool> = self.value.iter().map(|&v| v == 1).collect();
                    let sched = self.dl.minimal_model().expect("every height has a lower bound");
                    self.backtrack(0);
                    return Found::Model(assign, sched);
                }
            }
        }
    }
}

/// `1,1,2,1,1,2,4,…`
fn luby(i: u32) -> u64 {
    let mut x = i as u64 + 1;
    loop {
        let k = 64 - x.leading_zeros() as u64;
        if x == (1 << k) - 1 {
            return 1 << (k - 1);
        }
        x -= (1 << (k - 1)) - 1;
    }
}

/// Max-heap of variables ordered by activity.
struct VarHeap {
    activity: Vec<f64>,
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(activity: Vec<f64>) -> Self {
        let n = activity.len();
        let mut h = VarHeap {
            activity,
            heap: Vec::with_capacity(n),
            pos: vec![None; n],
        };
        h.rebuild();
        h
    }

    fn rebuild(&mut self) {
        self.heap.clear();
        self.pos.iter_mut().for_each(|p| *p = None);
        for v in 0..self.activity.len() {
            self.insert(v);
        }
    }

    fn better(&self, a: usize, b: usize) -> bool {
        let (x, y) = (self.activity[a], self.activity[b]);
        x > y || (x == y && a < b)
    }

    fn insert(&mut self, v: usize) {
        if self.pos[v].is_some() {
            return;
        }
        self.heap.push(v);
        self.pos[v] = Some(self.heap.len() - 1);
        self.up(self.heap.len() - 1);
    }

    fn increased(&mut self, v: usize) {
        if let Some(i) = self.pos[v] {
            self.up(i);
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("heap is not empty");
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.down(0);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.better(v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn down(&mut self, mut i: usize) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && self.better(self.heap[r], self.heap[l]) { r } else { l };
            if !self.better(self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}
