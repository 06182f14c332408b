//! Exact space/time exponents for every plan class.

use thiserror::Error;

use crate::cover::{CardinalityProfile, CoverError, CoverSolver, Rat};
use crate::query::{Query, VarSet};

use super::rpt::{elaborate_rpt, RptLevel};
use super::td::{td_profiles, td_subqueries};
use super::tree::{derive_sets, Tree};
use super::{validate, Exp, Plan, PtcPlan, PtcrPlan, TdPlan};

#[derive(Debug, Error)]
pub enum ExponentError {
    #[error("invalid plan: {0}")]
    Invalid(String),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// Computes the exact space/time exponents of a valid plan.
pub fn exponents(
    q: &Query,
    plan: &Plan,
    profile: &CardinalityProfile,
) -> Result<Exp, ExponentError> {
    let violations = validate(q, plan);
    if let Some(v) = violations.first() {
        return Err(ExponentError::Invalid(v.to_string()));
    }
    exponents_unchecked(q, plan, profile)
}

pub(crate) fn exponents_unchecked(
    q: &Query,
    plan: &Plan,
    profile: &CardinalityProfile,
) -> Result<Exp, ExponentError> {
    let solver = CoverSolver::new(q, profile.clone());
    match plan {
        Plan::Gj(_) => {
            Ok(Exp::new(solver.rho(q.head())?, solver.rho(q.all_vars())?))
        }
        Plan::Pt(pt) => pt_exponents(q, &solver, &pt.tree),
        Plan::Ptc(ptc) => ptc_exponents(q, &solver, ptc),
        Plan::Ptcr(ptcr) => {
            let sets = derive_sets(
                q,
                q.atoms(),
                q.head(),
                &ptcr.tree,
                &|v| ptcr.tree.descc(v),
                &|v| ptcr.cache(v),
            );
            let mut e = Exp::zero();
            for v in ptcr.tree.nodes().iter() {
                let s = &sets[v.index()];
                e = e.join(&Exp::new(
                    solver.rho(s.scon.union(s.outt))?,
                    solver.rho(s.ra.union(s.out))?,
                ));
            }
            Ok(e)
        }
        Plan::Rpt(rpt) => {
            let level = elaborate_rpt(q, rpt)
                .map_err(|v| ExponentError::Invalid(v[0].to_string()))?;
            rpt_exponents(q, profile, &level)
        }
        Plan::Td(td) => td_exponents(q, profile, td),
    }
}

fn pt_exponents(q: &Query, solver: &CoverSolver, tree: &Tree) -> Result<Exp, ExponentError> {
    let head = q.head();
    let mut e = Exp::zero();
    for v in tree.nodes().iter() {
        let outt = tree.descc(v).intersect(head);
        let out = outt.minus(VarSet::single(v));
        e = e.join(&Exp::new(
            solver.rho(outt)?,
            solver.rho(tree.ancc(v).union(out))?,
        ));
    }
    Ok(e)
}

fn ptc_exponents(q: &Query, solver: &CoverSolver, ptc: &PtcPlan) -> Result<Exp, ExponentError> {
    let tree = &ptc.tree;
    let head = q.head();
    let sets = derive_sets(q, q.atoms(), head, tree, &|v| tree.descc(v), &|_| 0);
    let mut e = Exp::zero();
    for v in tree.nodes().iter() {
        let outt = sets[v.index()].outt;
        let out = sets[v.index()].out;
        if ptc.caches.contains(v) {
            e.s = e.s.max(solver.rho(sets[v.index()].con.union(outt))?);
        }
        // Lowest cached ancestor-or-self bounds the loop at v.
        let cached_above = ptc.caches.intersect(tree.ancc(v));
        let b = tree.branch_min(cached_above).expect("root is cached");
        let span = sets[b.index()].con.union(tree.segment(v, b)).union(out);
        e.t = e.t.max(solver.rho(span)?);
    }
    Ok(e)
}

/// Max over all non-input, non-replaced nodes of every level, recursively.
/// Each level's covers are taken against its own restricted query.
fn rpt_exponents(
    top: &Query,
    profile: &CardinalityProfile,
    level: &RptLevel<'_>,
) -> Result<Exp, ExponentError> {
    let level_profile = CardinalityProfile::raw(
        level.atom_ids.iter().map(|&i| profile.get(i).clone()).collect(),
    );
    let solver = CoverSolver::new(&level.query, level_profile);
    let anchors = VarSet::from_iter(level.subs.iter().map(|(a, _)| *a));
    let mut e = Exp::zero();
    for v in level.own_vars().minus(anchors).iter() {
        let s = level.sets(v);
        e = e.join(&Exp::new(
            solver.rho(s.scon.union(s.outt))?,
            solver.rho(s.ra.union(s.out))?,
        ));
    }
    for (_, sub) in &level.subs {
        e = e.join(&rpt_exponents(top, profile, sub)?);
    }
    Ok(e)
}

fn td_exponents(
    q: &Query,
    profile: &CardinalityProfile,
    plan: &TdPlan,
) -> Result<Exp, ExponentError> {
    let bags = td_subqueries(q, &plan.td);
    let profiles = td_profiles(q, &plan.td, &bags, profile)?;
    let mut e = Exp::zero();
    for bag in &bags {
        let inner = exponents_unchecked(&bag.query, &plan.inner[bag.node], &profiles.per_bag[bag.node])?;
        e = e.join(&inner);
    }
    Ok(Exp::new(e.s * &profiles.scale, e.t * &profiles.scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::rat;
    use crate::fixtures::{self, vars};
    use crate::plan::{dominates, Domination, GjPlan, PtPlan, TreeDec};
    use crate::query::VarId;

    fn uniform(q: &Query) -> CardinalityProfile {
        CardinalityProfile::uniform(q.atoms().len())
    }

    fn tree_of(q: &Query, edges: &[(&str, &str)]) -> Tree {
        let parent: std::collections::HashMap<VarId, VarId> = edges
            .iter()
            .map(|(c, p)| (q.var_by_name(c).unwrap(), q.var_by_name(p).unwrap()))
            .collect();
        Tree::from_edges(q, q.all_vars(), |v| parent.get(&v).copied()).unwrap()
    }

    /// The pseudo-tree with root B, children A, E, C, and E's children D, F.
    fn diamond_pt(q: &Query) -> Tree {
        tree_of(q, &[("A", "B"), ("E", "B"), ("C", "B"), ("D", "E"), ("F", "E")])
    }

    #[test]
    fn diamond_pendants_pt_is_zero_three_halves() {
        let q = fixtures::diamond_pendants();
        let e = exponents(&q, &Plan::Pt(PtPlan { tree: diamond_pt(&q) }), &uniform(&q)).unwrap();
        assert_eq!(e, Exp::new(rat(0, 1), rat(3, 2)));
    }

    #[test]
    fn diamond_pendants_head_df_pt_is_two_two() {
        let q0 = fixtures::diamond_pendants();
        let q = q0.with_head(vars(&q0, &["D", "F"]));
        let e = exponents(&q, &Plan::Pt(PtPlan { tree: diamond_pt(&q) }), &uniform(&q)).unwrap();
        assert_eq!(e, Exp::new(rat(2, 1), rat(2, 1)));
    }

    #[test]
    fn diamond_pendants_head_bcf_pt_is_two_two() {
        // Head {B,C,F} on the same tree; dropping to head {B,F} gives (1, 3/2).
        let q0 = fixtures::diamond_pendants();
        let q = q0.with_head(vars(&q0, &["B", "C", "F"]));
        let e = exponents(&q, &Plan::Pt(PtPlan { tree: diamond_pt(&q) }), &uniform(&q)).unwrap();
        assert_eq!(e, Exp::new(rat(2, 1), rat(2, 1)));
        let q2 = q0.with_head(vars(&q0, &["B", "F"]));
        let e2 = exponents(&q2, &Plan::Pt(PtPlan { tree: diamond_pt(&q2) }), &uniform(&q2)).unwrap();
        assert_eq!(e2, Exp::new(rat(1, 1), rat(3, 2)));
    }

    #[test]
    fn gj_exponents_are_head_and_full_covers() {
        let q = fixtures::diamond_pendants();
        let order: Vec<VarId> = q.all_vars().iter().collect();
        let e = exponents(&q, &Plan::Gj(GjPlan { order }), &uniform(&q)).unwrap();
        assert_eq!(e, Exp::new(rat(0, 1), rat(4, 1)));
    }

    fn path_tree(q: &Query, names: &[&str]) -> Tree {
        let order: Vec<VarId> = names.iter().map(|n| q.var_by_name(n).unwrap()).collect();
        Tree::chain(q, &order)
    }

    #[test]
    fn double_fan_ptc_at_e_f_is_three_halves_two() {
        let q = fixtures::double_fan();
        let tree = path_tree(&q, &["A", "B", "C", "D", "E", "F"]);
        let caches = vars(&q, &["A", "E", "F"]);
        let e =
            exponents(&q, &Plan::Ptc(super::super::PtcPlan { tree, caches }), &uniform(&q))
                .unwrap();
        assert_eq!(e, Exp::new(rat(3, 2), rat(2, 1)));
    }

    fn ptcr_with(q: &Query, tree: Tree, sizes: &[(&str, u32)]) -> PtcrPlan {
        let mut cache_size = vec![0; q.num_vars()];
        for (name, k) in sizes {
            cache_size[q.var_by_name(name).unwrap().index()] = *k;
        }
        PtcrPlan { tree, cache_size }
    }

    #[test]
    fn double_fan_ptcr_is_one_two() {
        let q = fixtures::double_fan();
        let tree = path_tree(&q, &["A", "B", "C", "D", "E", "F"]);
        let plan = ptcr_with(&q, tree, &[("E", 1), ("F", 1)]);
        let e = exponents(&q, &Plan::Ptcr(plan), &uniform(&q)).unwrap();
        assert_eq!(e, Exp::new(rat(1, 1), rat(2, 1)));
    }

    #[test]
    fn fan_ptcr_is_one_three_halves() {
        let q = fixtures::fan_5();
        let tree = path_tree(&q, &["A", "B", "C", "D", "E"]);
        let plan = ptcr_with(&q, tree, &[("D", 2), ("E", 1)]);
        let e = exponents(&q, &Plan::Ptcr(plan), &uniform(&q)).unwrap();
        assert_eq!(e, Exp::new(rat(1, 1), rat(3, 2)));
    }

    #[test]
    fn scalar_pt_space_is_zero() {
        let q = fixtures::double_fan();
        let tree = path_tree(&q, &["A", "B", "C", "D", "E", "F"]);
        let e = exponents(&q, &Plan::Pt(PtPlan { tree }), &uniform(&q)).unwrap();
        assert_eq!(e.s, rat(0, 1));
    }

    fn two_bag_four_cycle_td(q: &Query) -> TreeDec {
        let bags = vec![vars(q, &["A1", "A2", "A3"]), vars(q, &["A3", "A4", "A1"])];
        let covering = q
            .atoms()
            .iter()
            .map(|a| usize::from(!a.var_set().is_subset(bags[0])))
            .collect();
        TreeDec { bags, parent: vec![None, Some(0)], root: 0, covering }
    }

    fn td_gj(q: &Query, td: TreeDec) -> Plan {
        let inner = td_subqueries(q, &td)
            .iter()
            .map(|b| Plan::Gj(GjPlan { order: b.query.all_vars().iter().collect() }))
            .collect();
        Plan::Td(TdPlan { td, inner })
    }

    #[test]
    fn four_cycle_two_bag_td_gj_is_two_two() {
        let q = fixtures::four_cycle();
        let plan = td_gj(&q, two_bag_four_cycle_td(&q));
        let e = exponents(&q, &plan, &uniform(&q)).unwrap();
        assert_eq!(e, Exp::new(rat(2, 1), rat(2, 1)));
    }

    #[test]
    fn single_bag_td_equals_inner_plan() {
        let q = fixtures::diamond_pendants();
        let td = TreeDec {
            bags: vec![q.all_vars()],
            parent: vec![None],
            root: 0,
            covering: vec![0; q.atoms().len()],
        };
        let inner_tree = diamond_pt(&q);
        let inner = Plan::Pt(PtPlan { tree: inner_tree.clone() });
        let as_td = Plan::Td(TdPlan { td, inner: vec![inner.clone()] });
        let e_td = exponents(&q, &as_td, &uniform(&q)).unwrap();
        let e_inner = exponents(&q, &inner, &uniform(&q)).unwrap();
        assert_eq!(e_td, e_inner);
    }

    #[test]
    fn double_fan_gap_td_variants() {
        // Two bags {A,B,C,D,E} (root) and {A,B,F}: TD[GJ] gives (1, 5/2),
        // TD[PT] with inner trees A-B-D-{E,C} and B-A-F gives (1, 2), and the
        // single-bag PT (add F under B) gives (0, 2).
        let q = fixtures::double_fan_gap();
        let b0 = vars(&q, &["A", "B", "C", "D", "E"]);
        let b1 = vars(&q, &["A", "B", "F"]);
        let covering = q
            .atoms()
            .iter()
            .map(|a| usize::from(!a.var_set().is_subset(b0)))
            .collect();
        let td = TreeDec { bags: vec![b0, b1], parent: vec![None, Some(0)], root: 0, covering };

        let e_gj = exponents(&q, &td_gj(&q, td.clone()), &uniform(&q)).unwrap();
        assert_eq!(e_gj, Exp::new(rat(1, 1), rat(5, 2)));

        let bags = td_subqueries(&q, &td);
        let t0 = {
            let bq = &bags[0].query;
            let parent: std::collections::HashMap<VarId, VarId> =
                [("B", "A"), ("D", "B"), ("E", "D"), ("C", "D")]
                    .iter()
                    .map(|(c, p)| {
                        (bq.var_by_name(c).unwrap(), bq.var_by_name(p).unwrap())
                    })
                    .collect();
            Tree::from_edges(bq, bq.all_vars(), |v| parent.get(&v).copied()).unwrap()
        };
        let t1 = {
            let bq = &bags[1].query;
            let parent: std::collections::HashMap<VarId, VarId> = [("A", "B"), ("F", "A")]
                .iter()
                .map(|(c, p)| (bq.var_by_name(c).unwrap(), bq.var_by_name(p).unwrap()))
                .collect();
            Tree::from_edges(bq, bq.all_vars(), |v| parent.get(&v).copied()).unwrap()
        };
        let plan = Plan::Td(TdPlan {
            td,
            inner: vec![Plan::Pt(PtPlan { tree: t0 }), Plan::Pt(PtPlan { tree: t1 })],
        });
        let e_pt = exponents(&q, &plan, &uniform(&q)).unwrap();
        assert_eq!(e_pt, Exp::new(rat(1, 1), rat(2, 1)));

        let single = tree_of(
            &q,
            &[("B", "A"), ("D", "B"), ("F", "B"), ("E", "D"), ("C", "D")],
        );
        let e_single =
            exponents(&q, &Plan::Pt(PtPlan { tree: single }), &uniform(&q)).unwrap();
        assert_eq!(e_single, Exp::new(rat(0, 1), rat(2, 1)));
    }

    #[test]
    fn chain_pt_matches_gj_exponents() {
        for q in [
            fixtures::three_path(),
            fixtures::four_cycle(),
            fixtures::diamond_pendants().with_head(VarSet::single(VarId(0))),
        ] {
            let order: Vec<VarId> = q.all_vars().iter().collect();
            let chain = Tree::chain(&q, &order);
            let profile = uniform(&q);
            let e_pt = exponents(&q, &Plan::Pt(PtPlan { tree: chain }), &profile).unwrap();
            let e_gj = exponents(&q, &Plan::Gj(GjPlan { order }), &profile).unwrap();
            assert_eq!(dominates(&e_pt, &e_gj), Domination::Equal);
        }
    }
}
