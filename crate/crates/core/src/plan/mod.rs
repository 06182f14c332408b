//! Plan classes and their exact space/time-exponent calculus.
//!
//! Six kinds of plans evaluate a query: a generic-join variable order, a
//! pseudo-tree, a pseudo-tree with caches, with resettable caches, a
//! recursive pseudo-tree, and a tree decomposition with one inner plan per
//! bag. Each kind carries an exact `(s, t)` exponent pair meaning auxiliary
//! space `O(|D|^s)` and time `O(|D|^t)`.

mod exponents;
mod json;
mod rpt;
mod td;
mod tree;
mod validate;

pub use exponents::{exponents, ExponentError};
pub use json::{plan_from_json, plan_to_json, PlanJsonError};
pub use rpt::{elaborate_rpt, RptLevel};
pub use td::{td_subqueries, BagAtomRole, BagQuery, TdProfiles};
pub use tree::{derive_sets, NodeSets, Tree, TreeError};
pub use validate::{validate, Violation};

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;

use crate::cover::Rat;
use crate::query::{VarId, VarSet};

/// Exact space/time exponent pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exp {
    pub s: Rat,
    pub t: Rat,
}

impl Exp {
    pub fn new(s: Rat, t: Rat) -> Exp {
        Exp { s, t }
    }

    pub fn zero() -> Exp {
        Exp { s: Rat::zero(), t: Rat::zero() }
    }

    /// Componentwise max, the combinator for "max over nodes" formulas.
    pub fn join(&self, other: &Exp) -> Exp {
        Exp {
            s: self.s.clone().max(other.s.clone()),
            t: self.t.clone().max(other.t.clone()),
        }
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.s, self.t)
    }
}

/// Outcome of comparing two exponent pairs under the domination preorder.
///
/// `Strict`: the first pair strictly dominates the second (componentwise <=
/// and not equal). `Weak`: the reverse, the second strictly dominates the
/// first. With exact componentwise comparison these four cases are total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domination {
    Equal,
    Strict,
    Weak,
    Incomparable,
}

pub fn dominates(e1: &Exp, e2: &Exp) -> Domination {
    let le = e1.s <= e2.s && e1.t <= e2.t;
    let ge = e1.s >= e2.s && e1.t >= e2.t;
    match (le, ge) {
        (true, true) => Domination::Equal,
        (true, false) => Domination::Strict,
        (false, true) => Domination::Weak,
        (false, false) => Domination::Incomparable,
    }
}

/// Generic-join plan: a total order on the query variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GjPlan {
    pub order: Vec<VarId>,
}

/// Pseudo-tree plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtPlan {
    pub tree: Tree,
}

/// Pseudo-tree with caching; the root is always cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtcPlan {
    pub tree: Tree,
    pub caches: VarSet,
}

/// Pseudo-tree with caching and resets: per-node stored-context size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtcrPlan {
    pub tree: Tree,
    /// Indexed by variable id; entries for absent variables are ignored.
    pub cache_size: Vec<u32>,
}

impl PtcrPlan {
    pub fn cache(&self, v: VarId) -> u32 {
        self.cache_size.get(v.index()).copied().unwrap_or(0)
    }
}

/// Recursive pseudo-tree. The tree covers the input chain plus this level's
/// variables; a replaced anchor appears as a leaf whose subtree lives in the
/// corresponding sub-plan (the sub-plan's non-input variables determine the
/// replaced set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RptPlan {
    /// Input chain, root end first; empty at the top level.
    pub inputs: Vec<VarId>,
    pub tree: Tree,
    pub cache_size: Vec<u32>,
    pub replacements: Vec<(VarId, RptPlan)>,
}

impl RptPlan {
    pub fn cache(&self, v: VarId) -> u32 {
        self.cache_size.get(v.index()).copied().unwrap_or(0)
    }

    pub fn input_set(&self) -> VarSet {
        VarSet::from_iter(self.inputs.iter().copied())
    }

    pub fn replacement_for(&self, v: VarId) -> Option<&RptPlan> {
        self.replacements.iter().find(|(a, _)| *a == v).map(|(_, p)| p)
    }
}

/// Tree decomposition: rooted tree of bags plus the atom covering map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDec {
    pub bags: Vec<VarSet>,
    pub parent: Vec<Option<usize>>,
    pub root: usize,
    /// For each query atom, the bag that covers it.
    pub covering: Vec<usize>,
}

impl TreeDec {
    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.bags.len()).filter(|&w| self.parent[w] == Some(v)).collect()
    }

    /// Z^v: intersection with the parent bag (the query head at the root).
    pub fn separator(&self, v: usize, head: VarSet) -> VarSet {
        match self.parent[v] {
            Some(p) => self.bags[v].intersect(self.bags[p]),
            None => head,
        }
    }

    /// Bottom-up node order (children before parents).
    pub fn postorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.bags.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children(v));
        }
        order.reverse();
        order
    }
}

/// Tree-decomposition plan: one inner plan per bag, evaluating Q^v.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TdPlan {
    pub td: TreeDec,
    pub inner: Vec<Plan>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    Gj(GjPlan),
    Pt(PtPlan),
    Ptc(PtcPlan),
    Ptcr(PtcrPlan),
    Rpt(RptPlan),
    Td(TdPlan),
}

impl Plan {
    pub fn kind(&self) -> &'static str {
        match self {
            Plan::Gj(_) => "gj",
            Plan::Pt(_) => "pt",
            Plan::Ptc(_) => "ptc",
            Plan::Ptcr(_) => "ptcr",
            Plan::Rpt(_) => "rpt",
            Plan::Td(_) => "td",
        }
    }
}

/// Total order used to keep frontier witnesses deterministic under any
/// enumeration or merge order: compare canonical serializations.
pub fn canonical_plan_cmp(q: &crate::query::Query, a: &Plan, b: &Plan) -> Ordering {
    plan_to_json(q, a).to_string().cmp(&plan_to_json(q, b).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::rat;

    #[test]
    fn domination_classification() {
        let e = |s, t| Exp::new(rat(s, 1), rat(t, 1));
        assert_eq!(dominates(&e(0, 1), &e(1, 1)), Domination::Strict);
        assert_eq!(dominates(&e(1, 1), &e(0, 1)), Domination::Weak);
        assert_eq!(dominates(&e(1, 2), &e(1, 2)), Domination::Equal);
        let a = Exp::new(rat(3, 2), rat(2, 1));
        let b = Exp::new(rat(1, 1), rat(5, 2));
        assert_eq!(dominates(&a, &b), Domination::Incomparable);
    }

    #[test]
    fn domination_is_a_preorder() {
        use proptest::prelude::*;
        let any_exp = || {
            (0i64..6, 1i64..4, 0i64..6, 1i64..4)
                .prop_map(|(a, b, c, d)| Exp::new(rat(a, b), rat(c, d)))
        };
        proptest!(|(a in any_exp(), b in any_exp(), c in any_exp())| {
            // Reflexive.
            prop_assert_eq!(dominates(&a, &a), Domination::Equal);
            // Transitive over the <=-both relation.
            let le = |x: &Exp, y: &Exp| matches!(dominates(x, y), Domination::Equal | Domination::Strict);
            if le(&a, &b) && le(&b, &c) {
                prop_assert!(le(&a, &c));
            }
        });
    }
}
