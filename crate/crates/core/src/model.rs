//! Boolean variables, literals and the constraint model handed to the solver.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Not;

use crate::dl::{DiffConstraint, DiffVar};
use crate::instance::{Edge, Node};
use crate::preprocess::AreaIdx;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

/// A variable with a polarity, packed as `2·var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(v: Var, positive: bool) -> Lit {
        Lit(v.0 << 1 | u32::from(!positive))
    }

    pub fn pos(v: Var) -> Lit {
        Lit::new(v, true)
    }

    pub fn neg(v: Var) -> Lit {
        Lit::new(v, false)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_positive() { "" } else { "-" };
        write!(f, "{sign}x{}", self.var().0)
    }
}

/// What a Boolean variable stands for.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarTag {
    Visit { train: usize, node: Node },
    Route { train: usize, edge: Edge },
    Used { area: AreaIdx },
    Enter { area: AreaIdx, node: Node },
    Leave { area: AreaIdx, node: Node },
    /// `before` is left before `after` is entered.
    Seq { before: AreaIdx, after: AreaIdx },
    /// Blocked-time link for one exit height of `before` and entry height of `after`.
    SeqTimes {
        before: AreaIdx,
        after: AreaIdx,
        exit_height: u32,
        entry_height: u32,
    },
    /// Both trigger edges of a connection are routed.
    Connection { index: usize },
    /// Some edge of an overlap's shared set is routed.
    OverlapUse { overlap: usize },
    Late { train: usize, height: u32, at: i64, weight: i64 },
    /// Reached but not late.
    Early { train: usize, height: u32, at: i64, weight: i64 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ModelStats {
    pub vars: usize,
    pub clauses: usize,
    pub unconditional: usize,
    pub attached: usize,
    pub seq_pairs: usize,
    pub late_vars: usize,
    pub diff_vars: usize,
}

/// Clauses over tagged variables plus difference constraints that hold
/// whenever their literal is true.
#[derive(Clone, Debug, Default)]
pub struct ConstraintModel {
    pub vars: Vec<VarTag>,
    pub clauses: Vec<Vec<Lit>>,
    pub unconditional: Vec<DiffConstraint>,
    pub attached: Vec<(Lit, DiffConstraint)>,
    /// Weighted literals per objective layer, most important first.
    pub layers: Vec<Vec<(Lit, i64)>>,
    /// Preferred truth value per literal's variable.
    pub hints: Vec<(Var, bool)>,
    /// `(train, height)` of every difference variable; entry `i` is `DiffVar(i + 1)`.
    pub diff_keys: Vec<(usize, u32)>,
    pub visit: BTreeMap<(usize, Node), Var>,
    pub route: BTreeMap<(usize, Edge), Var>,
    pub seq: BTreeMap<(AreaIdx, AreaIdx), Var>,
}

impl ConstraintModel {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn new_var(&mut self, tag: VarTag) -> Var {
        let v = Var(self.vars.len() as u32);
        self.vars.push(tag);
        v
    }

    pub fn diff_var(&self, train: usize, height: u32) -> Option<DiffVar> {
        self.diff_keys
            .binary_search(&(train, height))
            .ok()
            .map(|i| DiffVar(i as u32 + 1))
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            vars: self.vars.len(),
            clauses: self.clauses.len(),
            unconditional: self.unconditional.len(),
            attached: self.attached.len(),
            seq_pairs: self.seq.len() / 2,
            late_vars: self
                .vars
                .iter()
                .filter(|t| matches!(t, VarTag::Late { .. }))
                .count(),
            diff_vars: self.diff_keys.len(),
        }
    }

    /// Evaluates one objective layer under a full assignment.
    pub fn layer_value(&self, layer: usize, value: impl Fn(Var) -> bool) -> i64 {
        self.layers[layer]
            .iter()
            .filter(|(l, _)| value(l.var()) == l.is_positive())
            .map(|(_, w)| *w)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_packing() {
        let v = Var(7);
        assert_eq!(Lit::pos(v).var(), v);
        assert!(Lit::pos(v).is_positive());
        assert!(!Lit::neg(v).is_positive());
        assert_eq!(!Lit::pos(v), Lit::neg(v));
        assert_eq!(Lit::from_code(Lit::neg(v).code()), Lit::neg(v));
        assert_eq!(Lit::neg(v).to_string(), "-x7");
    }
}
