//! Structural validation for every plan kind.

use std::fmt;

use crate::query::{Query, VarSet};

use super::rpt::elaborate_rpt;
use super::td::td_subqueries;
use super::{Plan, TreeDec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotAPermutation,
    NodeSetMismatch { missing: String, extra: String },
    BranchCondition { atom: String },
    RootNotCached,
    CacheOnMissingVar { var: String },
    TdHeadNotInRoot { missing: String },
    TdDisconnected { var: String },
    TdAtomNotCovered { atom: String },
    TdBadCoveringIndex { atom: String },
    TdMalformedTree,
    TdInner { bag: usize, inner: Box<Violation> },
    RptInputMismatch { expected: String, got: String },
    RptInputsNotChain,
    RptAnchorMissing { var: String },
    RptAnchorNotLeaf { var: String },
    RptAnchorsAncestral { a: String, b: String },
    RptRootRia { expected: String, got: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAPermutation => write!(f, "order is not a permutation of var(Q)"),
            Violation::NodeSetMismatch { missing, extra } => write!(
                f,
                "tree nodes do not match the required variables (missing: [{missing}], extra: [{extra}])"
            ),
            Violation::BranchCondition { atom } => {
                write!(f, "atom `{atom}` is not contained in a branch")
            }
            Violation::RootNotCached => write!(f, "the pseudo-tree root carries no cache"),
            Violation::CacheOnMissingVar { var } => {
                write!(f, "cache assigned to `{var}`, which is not a tree node")
            }
            Violation::TdHeadNotInRoot { missing } => {
                write!(f, "head variables [{missing}] are not in the root bag")
            }
            Violation::TdDisconnected { var } => {
                write!(f, "bags containing `{var}` are not connected")
            }
            Violation::TdAtomNotCovered { atom } => {
                write!(f, "atom `{atom}` is not contained in its covering bag")
            }
            Violation::TdBadCoveringIndex { atom } => {
                write!(f, "atom `{atom}` has an out-of-range covering bag")
            }
            Violation::TdMalformedTree => write!(f, "bag tree is not a rooted tree"),
            Violation::TdInner { bag, inner } => write!(f, "inner plan of bag {bag}: {inner}"),
            Violation::RptInputMismatch { expected, got } => write!(
                f,
                "sub-plan inputs [{got}] do not match the anchor's relevant instantiated ancestors [{expected}]"
            ),
            Violation::RptInputsNotChain => {
                write!(f, "input variables do not form a chain above the real root")
            }
            Violation::RptAnchorMissing { var } => {
                write!(f, "replacement anchor `{var}` is not a non-input tree node")
            }
            Violation::RptAnchorNotLeaf { var } => write!(
                f,
                "replacement anchor `{var}` still has children in this level's tree"
            ),
            Violation::RptAnchorsAncestral { a, b } => {
                write!(f, "replacement anchors `{a}` and `{b}` lie on one branch")
            }
            Violation::RptRootRia { expected, got } => write!(
                f,
                "real root's relevant instantiated ancestors [{got}] differ from the inputs [{expected}]"
            ),
        }
    }
}

/// Checks all structural invariants of `plan` against `q`.
pub fn validate(q: &Query, plan: &Plan) -> Vec<Violation> {
    match plan {
        Plan::Gj(gj) => {
            let order_set = VarSet::from_iter(gj.order.iter().copied());
            if order_set != q.all_vars() || gj.order.len() != q.all_vars().len() {
                vec![Violation::NotAPermutation]
            } else {
                Vec::new()
            }
        }
        Plan::Pt(pt) => validate_pt(q, &pt.tree),
        Plan::Ptc(ptc) => {
            let mut v = validate_pt(q, &ptc.tree);
            if !ptc.caches.contains(ptc.tree.root()) {
                v.push(Violation::RootNotCached);
            }
            for c in ptc.caches.minus(ptc.tree.nodes()).iter() {
                v.push(Violation::CacheOnMissingVar { var: q.var_name(c).to_string() });
            }
            v
        }
        Plan::Ptcr(ptcr) => validate_pt(q, &ptcr.tree),
        Plan::Rpt(rpt) => match elaborate_rpt(q, rpt) {
            Ok(_) => Vec::new(),
            Err(v) => v,
        },
        Plan::Td(td) => validate_td(q, td),
    }
}

fn validate_pt(q: &Query, tree: &super::Tree) -> Vec<Violation> {
    let mut violations = Vec::new();
    if tree.nodes() != q.all_vars() {
        violations.push(Violation::NodeSetMismatch {
            missing: q.set_names(q.all_vars().minus(tree.nodes())),
            extra: q.set_names(tree.nodes().minus(q.all_vars())),
        });
    }
    for atom in q.atoms() {
        if !tree.on_branch(atom.var_set().intersect(tree.nodes()))
            || !atom.var_set().is_subset(tree.nodes())
        {
            violations.push(Violation::BranchCondition { atom: atom.name.clone() });
        }
    }
    violations
}

fn validate_td(q: &Query, plan: &super::TdPlan) -> Vec<Violation> {
    let mut violations = validate_td_structure(q, &plan.td);
    if !violations.is_empty() {
        return violations;
    }
    if plan.inner.len() != plan.td.bags.len() {
        violations.push(Violation::TdMalformedTree);
        return violations;
    }
    for bag in td_subqueries(q, &plan.td) {
        for v in validate(&bag.query, &plan.inner[bag.node]) {
            violations.push(Violation::TdInner { bag: bag.node, inner: Box::new(v) });
        }
    }
    violations
}

pub(super) fn validate_td_structure(q: &Query, td: &TreeDec) -> Vec<Violation> {
    let mut violations = Vec::new();
    let n = td.bags.len();
    if n == 0
        || td.parent.len() != n
        || td.root >= n
        || td.parent[td.root].is_some()
        || td.postorder().len() != n
    {
        violations.push(Violation::TdMalformedTree);
        return violations;
    }
    if !q.head().is_subset(td.bags[td.root]) {
        violations.push(Violation::TdHeadNotInRoot {
            missing: q.set_names(q.head().minus(td.bags[td.root])),
        });
    }
    //  Connectedness: for each variable, the bags containing it form a
    //  connected subtree.
    for var in q.all_vars().iter() {
        let holding: Vec<usize> =
            (0..n).filter(|&v| td.bags[v].contains(var)).collect();
        if holding.is_empty() {
            violations.push(Violation::TdDisconnected { var: q.var_name(var).to_string() });
            continue;
        }
        // The highest holding bag must be reachable from every other holding
        // bag through holding bags.
        let top = *holding
            .iter()
            .min_by_key(|&&v| bag_depth(td, v))
            .unwrap();
        for &v in &holding {
            let mut cur = v;
            let mut ok = true;
            while cur != top {
                match td.parent[cur] {
                    Some(p) if td.bags[p].contains(var) => cur = p,
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                violations.push(Violation::TdDisconnected { var: q.var_name(var).to_string() });
                break;
            }
        }
    }
    if td.covering.len() != q.atoms().len() {
        violations.push(Violation::TdMalformedTree);
        return violations;
    }
    for (i, atom) in q.atoms().iter().enumerate() {
        let bag = td.covering[i];
        if bag >= n {
            violations.push(Violation::TdBadCoveringIndex { atom: atom.name.clone() });
        } else if !atom.var_set().is_subset(td.bags[bag]) {
            violations.push(Violation::TdAtomNotCovered { atom: atom.name.clone() });
        }
    }
    violations
}

fn bag_depth(td: &TreeDec, mut v: usize) -> usize {
    let mut d = 0;
    while let Some(p) = td.parent[v] {
        v = p;
        d += 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, vars};
    use crate::plan::{GjPlan, PtPlan, TdPlan, Tree};

    fn star(q: &Query, center: &str) -> Tree {
        let c = q.var_by_name(center).unwrap();
        Tree::from_edges(q, q.all_vars(), |v| (v != c).then_some(c)).unwrap()
    }

    #[test]
    fn three_path_star_at_b_is_valid() {
        let q = fixtures::three_path();
        assert!(validate(&q, &Plan::Pt(PtPlan { tree: star(&q, "B") })).is_empty());
    }

    #[test]
    fn three_path_star_at_a_names_offending_atom() {
        let q = fixtures::three_path();
        let v = validate(&q, &Plan::Pt(PtPlan { tree: star(&q, "A") }));
        assert_eq!(v, vec![Violation::BranchCondition { atom: "R2".into() }]);
    }

    #[test]
    fn four_cycle_two_bag_td_is_valid() {
        let q = fixtures::four_cycle();
        let bags = vec![vars(&q, &["A1", "A2", "A3"]), vars(&q, &["A3", "A4", "A1"])];
        let covering = q
            .atoms()
            .iter()
            .map(|a| usize::from(!a.var_set().is_subset(bags[0])))
            .collect();
        let td = TreeDec { bags, parent: vec![None, Some(0)], root: 0, covering };
        let inner = crate::plan::td_subqueries(&q, &td)
            .iter()
            .map(|b| {
                Plan::Gj(GjPlan { order: b.query.all_vars().iter().collect() })
            })
            .collect();
        let v = validate(&q, &Plan::Td(TdPlan { td, inner }));
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn disconnected_variable_is_reported() {
        let q = fixtures::three_path();
        // Bags {A,B}, {B,C} but pretend A also lives in the second bag's
        // child without the middle: craft  {A,B} <- {C} <- {A,C}.
        let bags = vec![
            vars(&q, &["A", "B"]),
            vars(&q, &["B", "C"]),
            vars(&q, &["A", "C"]),
        ];
        let td = TreeDec {
            bags,
            parent: vec![None, Some(0), Some(1)],
            root: 0,
            covering: vec![0, 1],
        };
        let v = validate_td_structure(&q, &td);
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::TdDisconnected { var } if var == "A")));
    }

    #[test]
    fn gj_order_must_be_permutation() {
        let q = fixtures::three_path();
        let order = vec![q.var_by_name("A").unwrap(), q.var_by_name("B").unwrap()];
        let v = validate(&q, &Plan::Gj(GjPlan { order }));
        assert_eq!(v, vec![Violation::NotAPermutation]);
    }
}
