//! Elaboration of recursive pseudo-trees into per-level structures.
//!
//! Each level is a pseudo-tree with caches and resets over a restriction of
//! the enclosing query. A replaced anchor stays in its level's tree as a
//! leaf; the variables of the replacing sub-plan stand in for the anchor's
//! subtree when contexts are derived. Annotations are partitioned across
//! levels: a sub-plan multiplies only the values of relations that touch the
//! replaced variables, everything else it sees support-only.

use crate::query::{Atom, Query, VarId, VarSet};

use super::tree::{derive_sets, NodeSets};
use super::validate::Violation;
use super::RptPlan;

/// One level of an elaborated recursive pseudo-tree.
#[derive(Debug)]
pub struct RptLevel<'p> {
    pub plan: &'p RptPlan,
    /// Restriction of the top query this level runs against.
    pub query: Query,
    /// Indices of this level's atoms in the top query.
    pub atom_ids: Vec<usize>,
    /// Whether the level consumes the atom's annotations (parallel to
    /// `atom_ids`).
    pub annotated: Vec<bool>,
    pub head: VarSet,
    pub inputs: VarSet,
    /// Derived sets per variable of this level's tree.
    pub sets: Vec<NodeSets>,
    /// Non-input variables whose subtree was replaced, with their sub-level.
    pub subs: Vec<(VarId, RptLevel<'p>)>,
}

impl<'p> RptLevel<'p> {
    /// Variables the level actually loops over (tree nodes minus inputs).
    pub fn own_vars(&self) -> VarSet {
        self.plan.tree.nodes().minus(self.inputs)
    }

    pub fn sub_for(&self, anchor: VarId) -> Option<&RptLevel<'p>> {
        self.subs.iter().find(|(a, _)| *a == anchor).map(|(_, l)| l)
    }

    pub fn sets(&self, v: VarId) -> &NodeSets {
        &self.sets[v.index()]
    }

    /// Effective closed descendants: an anchor leaf stands for the whole
    /// replaced subtree.
    pub fn eff_descc(&self, v: VarId) -> VarSet {
        let mut d = self.plan.tree.descc(v);
        for (anchor, sub) in &self.subs {
            if d.contains(*anchor) {
                d = d.union(sub.own_vars().minus(self.sets[anchor.index()].scon));
            }
        }
        d
    }
}

/// Builds the level structure, collecting structural violations.
pub fn elaborate_rpt<'p>(
    q: &Query,
    plan: &'p RptPlan,
) -> Result<RptLevel<'p>, Vec<Violation>> {
    let atom_ids: Vec<usize> = (0..q.atoms().len()).collect();
    let annotated = vec![true; atom_ids.len()];
    elaborate_level(q, q, &atom_ids, &annotated, q.head(), VarSet::EMPTY, plan)
}

fn elaborate_level<'p>(
    top: &Query,
    level_query: &Query,
    atom_ids: &[usize],
    annotated: &[bool],
    head: VarSet,
    inputs: VarSet,
    plan: &'p RptPlan,
) -> Result<RptLevel<'p>, Vec<Violation>> {
    let mut violations = Vec::new();
    let tree = &plan.tree;
    let declared_inputs = plan.input_set();
    if declared_inputs != inputs {
        violations.push(Violation::RptInputMismatch {
            expected: top.set_names(inputs),
            got: top.set_names(declared_inputs),
        });
    }

    // Inputs must form a chain sitting above all other variables: each input
    // has exactly one child, the next input (or the real root).
    if !plan.inputs.is_empty() {
        let mut chain_ok = plan.inputs.first() == Some(&tree.root());
        for w in plan.inputs.windows(2) {
            chain_ok &= tree.children(w[0]) == [w[1]];
        }
        if let Some(&last) = plan.inputs.last() {
            chain_ok &= tree.contains(last) && tree.children(last).len() == 1;
        }
        if !chain_ok {
            violations.push(Violation::RptInputsNotChain);
        }
    }

    // Node set: inputs plus the variables of this level's atoms. Anchors must
    // be non-input leaves of the tree; recurse to find each replaced set.
    let mut subs = Vec::new();
    // First pass: anchors must be pairwise non-ancestral leaves.
    for (i, (a, _)) in plan.replacements.iter().enumerate() {
        if !tree.contains(*a) || declared_inputs.contains(*a) {
            violations.push(Violation::RptAnchorMissing { var: top.var_name(*a).to_string() });
            continue;
        }
        if !tree.children(*a).is_empty() {
            violations.push(Violation::RptAnchorNotLeaf { var: top.var_name(*a).to_string() });
        }
        for (b, _) in &plan.replacements[..i] {
            if tree.contains(*b)
                && (tree.ancc(*a).contains(*b) || tree.ancc(*b).contains(*a))
            {
                violations.push(Violation::RptAnchorsAncestral {
                    a: top.var_name(*a).to_string(),
                    b: top.var_name(*b).to_string(),
                });
            }
        }
    }

    // Derived sets need every anchor's replaced variable set, which lives in
    // the sub-plan: non-input sub-tree variables minus the anchor's stored
    // context. Stored context in turn depends on the replaced set (through
    // con), so resolve per anchor from the sub-plan's own node inventory.
    let mut anchor_extra: Vec<(VarId, VarSet)> = Vec::new();
    for (a, sub) in &plan.replacements {
        if !tree.contains(*a) {
            continue;
        }
        let sub_nodes = sub.tree.nodes().minus(sub.input_set());
        // desc(anchor) = sub-plan variables that are not outer ancestors.
        let extra = sub_nodes.minus(tree.ancc(*a));
        anchor_extra.push((*a, extra.minus(VarSet::single(*a))));
    }
    let eff = |v: VarId| -> VarSet {
        let mut d = tree.descc(v);
        for (a, extra) in &anchor_extra {
            if d.contains(*a) {
                d = d.union(*extra);
            }
        }
        d
    };
    let cache = |v: VarId| if declared_inputs.contains(v) { 0 } else { plan.cache(v) };
    let level_atoms: Vec<Atom> =
        atom_ids.iter().map(|&i| top.atoms()[i].clone()).collect();
    let sets = derive_sets(level_query, &level_atoms, head, tree, &eff, &cache);

    // Node-set check: the tree holds the inputs plus every level-atom
    // variable, except that each anchor's replaced variables live in its
    // sub-plan and only the anchor itself remains.
    let mut expected = inputs;
    for atom in &level_atoms {
        expected = expected.union(atom.var_set());
    }
    for (a, extra) in &anchor_extra {
        expected = expected.minus(*extra).union(VarSet::single(*a));
    }
    if tree.nodes() != expected {
        violations.push(Violation::NodeSetMismatch {
            missing: top.set_names(expected.minus(tree.nodes())),
            extra: top.set_names(tree.nodes().minus(expected)),
        });
    }

    // Branch condition against effective descendant sets: every atom must lie
    // within one effective branch.
    for atom in &level_atoms {
        if !on_effective_branch(tree, &anchor_extra, atom.var_set()) {
            violations.push(Violation::BranchCondition { atom: atom.name.clone() });
        }
    }

    // ria(real root) must equal the input set.
    if let Some(real_root) = real_root(plan) {
        if sets[real_root.index()].ria != inputs {
            violations.push(Violation::RptRootRia {
                expected: top.set_names(inputs),
                got: top.set_names(sets[real_root.index()].ria),
            });
        }
    }

    // Recurse into replacements.
    for (a, sub) in &plan.replacements {
        if !tree.contains(*a) {
            continue;
        }
        let s = &sets[a.index()];
        let descc_eff = eff(*a);
        debug_assert!(descc_eff.contains(*a));
        let level_vars = descc_eff.union(s.raexc);
        let sub_head = s.scon.union(descc_eff.intersect(head));
        let sub_inputs = s.ria;
        let mut sub_atom_ids = Vec::new();
        let mut sub_annotated = Vec::new();
        for (pos, &i) in atom_ids.iter().enumerate() {
            let vs = top.atoms()[i].var_set();
            if vs.is_subset(level_vars) {
                sub_atom_ids.push(i);
                sub_annotated
                    .push(annotated[pos] && !vs.intersect(descc_eff).is_empty());
            }
        }
        let sub_query_atoms: Vec<Atom> =
            sub_atom_ids.iter().map(|&i| top.atoms()[i].clone()).collect();
        let sub_query = top.with_atoms(sub_head, sub_query_atoms);
        match elaborate_level(
            top,
            &sub_query,
            &sub_atom_ids,
            &sub_annotated,
            sub_head,
            sub_inputs,
            sub,
        ) {
            Ok(level) => subs.push((*a, level)),
            Err(mut v) => violations.append(&mut v),
        }
    }

    if violations.is_empty() {
        Ok(RptLevel {
            plan,
            query: level_query.clone(),
            atom_ids: atom_ids.to_vec(),
            annotated: annotated.to_vec(),
            head,
            inputs,
            sets,
            subs,
        })
    } else {
        Err(violations)
    }
}

/// The first non-input node on the chain (the level's real root).
pub fn real_root(plan: &RptPlan) -> Option<VarId> {
    let mut v = plan.tree.root();
    let inputs = plan.input_set();
    while inputs.contains(v) {
        v = *plan.tree.children(v).first()?;
    }
    Some(v)
}

/// Branch check where an anchor leaf admits any replaced variable below it.
fn on_effective_branch(
    tree: &super::Tree,
    anchor_extra: &[(VarId, VarSet)],
    atom_vars: VarSet,
) -> bool {
    // Variables outside the tree must all hang below a single anchor.
    let in_tree = atom_vars.intersect(tree.nodes());
    let outside = atom_vars.minus(tree.nodes());
    if outside.is_empty() {
        return tree.on_branch(in_tree);
    }
    for (a, extra) in anchor_extra {
        if outside.is_subset(*extra) {
            return tree.on_branch(in_tree.union(VarSet::single(*a)));
        }
    }
    false
}
