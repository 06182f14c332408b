//! Rooted trees over query variables, with the derived variable sets used by
//! the cached plan classes: contexts, their instantiated/stored split, and
//! relevant (instantiated) ancestors.

use crate::query::{Query, VarId, VarSet};

/// A rooted tree over a subset of the variable universe. Children are kept in
/// canonical order (by variable name) so plan serialization is stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    root: VarId,
    present: VarSet,
    parent: Vec<Option<VarId>>,
    children: Vec<Vec<VarId>>,
    depth: Vec<u32>,
    anc: Vec<VarSet>,
    descc: Vec<VarSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    NoRoot,
    Cycle,
    MultipleRoots(VarId, VarId),
}

impl Tree {
    /// Builds from `(child, parent)` edges; exactly one node must be
    /// parentless. `universe` is the query's variable-id count.
    pub fn from_edges(
        q: &Query,
        nodes: VarSet,
        parent_of: impl Fn(VarId) -> Option<VarId>,
    ) -> Result<Tree, TreeError> {
        let universe = q.num_vars();
        let mut parent = vec![None; universe];
        let mut children: Vec<Vec<VarId>> = vec![Vec::new(); universe];
        let mut root = None;
        for v in nodes.iter() {
            match parent_of(v) {
                Some(p) if nodes.contains(p) => {
                    parent[v.index()] = Some(p);
                    children[p.index()].push(v);
                }
                _ => match root {
                    None => root = Some(v),
                    Some(r) => return Err(TreeError::MultipleRoots(r, v)),
                },
            }
        }
        let root = root.ok_or(TreeError::NoRoot)?;
        for kids in &mut children {
            kids.sort_by(|a, b| q.var_name(*a).cmp(q.var_name(*b)));
        }
        let mut t = Tree {
            root,
            present: nodes,
            parent,
            children,
            depth: vec![0; universe],
            anc: vec![VarSet::EMPTY; universe],
            descc: vec![VarSet::EMPTY; universe],
        };
        // Walk down for depth/anc; detect unreachable nodes (cycles).
        let mut seen = VarSet::single(root);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &c in &t.children[v.index()] {
                t.depth[c.index()] = t.depth[v.index()] + 1;
                t.anc[c.index()] = t.anc[v.index()].union(VarSet::single(v));
                seen.insert(c);
                stack.push(c);
            }
        }
        if seen != nodes {
            return Err(TreeError::Cycle);
        }
        for v in t.postorder() {
            let mut d = VarSet::single(v);
            for &c in &t.children[v.index()] {
                d = d.union(t.descc[c.index()]);
            }
            t.descc[v.index()] = d;
        }
        Ok(t)
    }

    /// Chain tree for a variable order (the linear pseudo-tree of a GJ plan).
    pub fn chain(q: &Query, order: &[VarId]) -> Tree {
        let nodes = VarSet::from_iter(order.iter().copied());
        let parent: std::collections::HashMap<VarId, VarId> = order
            .windows(2)
            .map(|w| (w[1], w[0]))
            .collect();
        Tree::from_edges(q, nodes, |v| parent.get(&v).copied()).expect("chain is a tree")
    }

    pub fn root(&self) -> VarId {
        self.root
    }

    pub fn nodes(&self) -> VarSet {
        self.present
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.present.contains(v)
    }

    pub fn parent(&self, v: VarId) -> Option<VarId> {
        self.parent[v.index()]
    }

    pub fn children(&self, v: VarId) -> &[VarId] {
        &self.children[v.index()]
    }

    pub fn depth(&self, v: VarId) -> u32 {
        self.depth[v.index()]
    }

    /// Strict ancestors.
    pub fn anc(&self, v: VarId) -> VarSet {
        self.anc[v.index()]
    }

    /// Ancestors including `v`.
    pub fn ancc(&self, v: VarId) -> VarSet {
        self.anc[v.index()].union(VarSet::single(v))
    }

    /// Descendants including `v`.
    pub fn descc(&self, v: VarId) -> VarSet {
        self.descc[v.index()]
    }

    pub fn preorder(&self) -> Vec<VarId> {
        let mut out = Vec::with_capacity(self.present.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            for &c in self.children[v.index()].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn postorder(&self) -> Vec<VarId> {
        let mut order = self.preorder();
        order.reverse();
        order
    }

    /// The deepest element of a set lying on one branch (`min` in the
    /// branch order: S ⊆ ancc(min(S))).
    pub fn branch_min(&self, s: VarSet) -> Option<VarId> {
        s.iter().max_by_key(|v| self.depth[v.index()])
    }

    /// Nodes of `ancc(a)` between `a` and `b` inclusive, `b` an ancestor.
    pub fn segment(&self, a: VarId, b: VarId) -> VarSet {
        VarSet::from_iter(
            self.ancc(a).iter().filter(|v| self.depth[v.index()] >= self.depth[b.index()]),
        )
    }

    /// Checks the pseudo-tree branch condition for one atom: its variables
    /// are contained in some root-to-leaf branch, i.e. totally ordered by
    /// the ancestor relation.
    pub fn on_branch(&self, atom_vars: VarSet) -> bool {
        match self.branch_min(atom_vars) {
            None => true,
            Some(deepest) => atom_vars.is_subset(self.ancc(deepest)),
        }
    }
}

/// Per-node derived sets for a pseudo-tree with caches and resets.
#[derive(Debug, Clone, Default)]
pub struct NodeSets {
    pub con: VarSet,
    pub icon: VarSet,
    pub scon: VarSet,
    pub ria: VarSet,
    /// raexc = ria ∪ scon.
    pub raexc: VarSet,
    /// ra = raexc ∪ {A}.
    pub ra: VarSet,
    /// Stored context in branch order, root end first.
    pub scon_order: Vec<VarId>,
    /// desc(A) ∩ head.
    pub out: VarSet,
    /// descc(A) ∩ head.
    pub outt: VarSet,
}

/// Computes con/icon/scon/ria/ra and out/outt for every tree node.
///
/// `eff_descc(v)` is the effective closed descendant set — for recursive
/// plans an anchor's replaced variables count as descendants even though the
/// stored tree keeps the anchor as a leaf. `cache_size(v)` is the per-node
/// cache size; nodes with `cache_size = 0` get an empty stored context.
pub fn derive_sets(
    q: &Query,
    atoms: &[crate::query::Atom],
    head: VarSet,
    tree: &Tree,
    eff_descc: &dyn Fn(VarId) -> VarSet,
    cache_size: &dyn Fn(VarId) -> u32,
) -> Vec<NodeSets> {
    let universe = q.num_vars();
    let mut sets = vec![NodeSets::default(); universe];
    for v in tree.preorder() {
        let descc = eff_descc(v);
        let anc = tree.anc(v);
        let mut con = VarSet::EMPTY;
        for atom in atoms {
            let vs = atom.var_set();
            if !vs.intersect(descc).is_empty() {
                con = con.union(vs.intersect(anc));
            }
        }
        // Stored context: the k deepest context variables.
        let mut by_depth: Vec<VarId> = con.iter().collect();
        by_depth.sort_by_key(|u| tree.depth(*u));
        let k = (cache_size(v) as usize).min(by_depth.len());
        let scon_order: Vec<VarId> = by_depth[by_depth.len() - k..].to_vec();
        let scon = VarSet::from_iter(scon_order.iter().copied());
        let icon = con.minus(scon);
        let ria = if icon.is_empty() {
            VarSet::EMPTY
        } else {
            let top = tree.branch_min(icon).unwrap();
            let parent_ra = tree
                .parent(v)
                .map(|p| sets[p.index()].ra)
                .unwrap_or(VarSet::EMPTY);
            parent_ra.intersect(tree.ancc(top))
        };
        let raexc = ria.union(scon);
        let ra = raexc.union(VarSet::single(v));
        let s = &mut sets[v.index()];
        s.con = con;
        s.icon = icon;
        s.scon = scon;
        s.ria = ria;
        s.raexc = raexc;
        s.ra = ra;
        s.scon_order = scon_order;
        s.out = descc.minus(VarSet::single(v)).intersect(head);
        s.outt = descc.intersect(head);
    }
    sets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, vars};

    fn path_tree(q: &Query, names: &[&str]) -> Tree {
        let order: Vec<VarId> = names.iter().map(|n| q.var_by_name(n).unwrap()).collect();
        Tree::chain(q, &order)
    }

    #[test]
    fn branch_condition_detects_violations() {
        let q = fixtures::three_path();
        let b = q.var_by_name("B").unwrap();
        let star_b = Tree::from_edges(&q, q.all_vars(), |v| (v != b).then_some(b)).unwrap();
        assert!(q.atoms().iter().all(|a| star_b.on_branch(a.var_set())));

        let a = q.var_by_name("A").unwrap();
        let star_a = Tree::from_edges(&q, q.all_vars(), |v| (v != a).then_some(a)).unwrap();
        let r2 = q.atom_by_name("R2").unwrap().1;
        assert!(!star_a.on_branch(r2.var_set()));
    }

    #[test]
    fn context_of_double_fan_path() {
        // Path A-B-C-D-E-F on the double fan: con(E) = {A,B,D}.
        let q = fixtures::double_fan();
        let t = path_tree(&q, &["A", "B", "C", "D", "E", "F"]);
        let sets = derive_sets(&q, q.atoms(), VarSet::EMPTY, &t, &|v| t.descc(v), &|_| 0);
        let e = q.var_by_name("E").unwrap();
        assert_eq!(sets[e.index()].con, vars(&q, &["A", "B", "D"]));
        let f = q.var_by_name("F").unwrap();
        assert_eq!(sets[f.index()].con, vars(&q, &["A", "B", "E"]));
        let a = q.var_by_name("A").unwrap();
        assert_eq!(sets[a.index()].con, VarSet::EMPTY);
    }

    #[test]
    fn fan_path_context_and_split() {
        // Fan with apex B, path PT A-B-C-D-E: con(D) = {B,C}, con(E) = {B,D}.
        let q = fixtures::fan_5();
        let t = path_tree(&q, &["A", "B", "C", "D", "E"]);
        let d = q.var_by_name("D").unwrap();
        let e = q.var_by_name("E").unwrap();
        let caches = move |v: VarId| {
            if v == d {
                2
            } else if v == e {
                1
            } else {
                0
            }
        };
        let sets = derive_sets(&q, q.atoms(), VarSet::EMPTY, &t, &|v| t.descc(v), &caches);
        assert_eq!(sets[d.index()].con, vars(&q, &["B", "C"]));
        assert_eq!(sets[d.index()].icon, VarSet::EMPTY);
        assert_eq!(sets[d.index()].scon, vars(&q, &["B", "C"]));
        assert_eq!(sets[d.index()].ria, VarSet::EMPTY);
        assert_eq!(sets[e.index()].icon, vars(&q, &["B"]));
        assert_eq!(sets[e.index()].scon, vars(&q, &["D"]));
        // ria(E) = ra(D) ∩ ancc(B) = {B}.
        assert_eq!(sets[e.index()].ria, vars(&q, &["B"]));
        assert_eq!(sets[e.index()].ra, vars(&q, &["B", "D", "E"]));
    }

    #[test]
    fn zero_cache_size_keeps_whole_context_instantiated() {
        let q = fixtures::fan_5();
        let t = path_tree(&q, &["A", "B", "C", "D", "E"]);
        let sets = derive_sets(&q, q.atoms(), VarSet::EMPTY, &t, &|v| t.descc(v), &|_| 0);
        let d = q.var_by_name("D").unwrap();
        assert_eq!(sets[d.index()].icon, sets[d.index()].con);
        assert!(sets[d.index()].scon.is_empty());
    }

    #[test]
    fn containment_invariants_hold() {
        let q = fixtures::double_fan();
        let t = path_tree(&q, &["A", "B", "C", "D", "E", "F"]);
        let sets = derive_sets(&q, q.atoms(), VarSet::EMPTY, &t, &|v| t.descc(v), &|_| 1);
        for v in q.all_vars().iter() {
            let s = &sets[v.index()];
            assert!(s.con.is_subset(s.raexc));
            assert!(s.raexc.is_subset(t.anc(v)));
            if !s.icon.is_empty() {
                assert!(s.icon.is_subset(s.ria));
                let top = t.branch_min(s.icon).unwrap();
                assert!(s.ria.is_subset(t.ancc(top)));
            } else {
                assert!(s.ria.is_empty());
            }
            if let Some(p) = t.parent(v) {
                assert!(s.raexc.is_subset(sets[p.index()].ra));
            }
        }
    }
}
