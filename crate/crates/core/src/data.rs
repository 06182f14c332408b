//! K-relations, databases, and sorted trie indexes.
//!
//! Domain values are dictionary-encoded to dense `u32` ids at load time;
//! all plan-internal orderings are over the encoded ids. Relations store
//! support only: no entry ever maps to the semiring zero.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::query::{Query, VarId};
use crate::semiring::Semiring;

/// Encoded domain value.
pub type Val = u32;
/// Row of encoded values.
pub type Tuple = Vec<Val>;

/// Projects `tuple` (over `schema`) onto the positions of `keep`, in schema
/// order.
pub fn project(schema: &[VarId], tuple: &[Val], keep: crate::query::VarSet) -> Tuple {
    schema
        .iter()
        .zip(tuple)
        .filter(|(v, _)| keep.contains(**v))
        .map(|(_, x)| *x)
        .collect()
}

/// Finite-support map from tuples to nonzero semiring values.
#[derive(Debug, Clone)]
pub struct KRelation<S: Semiring> {
    schema: Vec<VarId>,
    entries: BTreeMap<Tuple, S::Val>,
}

impl<S: Semiring> KRelation<S> {
    pub fn new(schema: Vec<VarId>) -> KRelation<S> {
        KRelation { schema, entries: BTreeMap::new() }
    }

    pub fn schema(&self) -> &[VarId] {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &S::Val)> {
        self.entries.iter()
    }

    pub fn get(&self, t: &[Val]) -> Option<&S::Val> {
        self.entries.get(t)
    }

    /// ⊕-merges `value` into the entry for `tuple`, dropping zeros.
    pub fn add(&mut self, tuple: Tuple, value: S::Val) {
        debug_assert_eq!(tuple.len(), self.schema.len());
        if S::is_zero(&value) {
            return;
        }
        match self.entries.entry(tuple) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = S::plus(e.get(), &value);
                if S::is_zero(&merged) {
                    e.remove();
                } else {
                    *e.get_mut() = merged;
                }
            }
        }
    }

    /// The scalar value of a nullary relation (zero when empty).
    pub fn scalar(&self) -> S::Val {
        assert!(self.schema.is_empty());
        self.entries.get(&Vec::new()).cloned().unwrap_or_else(S::zero)
    }

    pub fn from_scalar(v: S::Val) -> KRelation<S> {
        let mut r = KRelation::new(Vec::new());
        r.add(Vec::new(), v);
        r
    }

    /// Natural join; disjoint schemas degenerate to a Cartesian product.
    pub fn kjoin(&self, other: &KRelation<S>) -> KRelation<S> {
        let mut schema = self.schema.clone();
        for v in &other.schema {
            if !schema.contains(v) {
                schema.push(*v);
            }
        }
        let shared: Vec<(usize, usize)> = self
            .schema
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                other.schema.iter().position(|w| w == v).map(|j| (i, j))
            })
            .collect();
        let extra: Vec<usize> = (0..other.schema.len())
            .filter(|j| !shared.iter().any(|(_, sj)| sj == j))
            .collect();
        let mut out = KRelation::new(schema);
        // Hash the smaller side on the shared attributes.
        let mut index: HashMap<Tuple, Vec<(&Tuple, &S::Val)>> = HashMap::new();
        for (t, v) in other.iter() {
            let key: Tuple = shared.iter().map(|&(_, j)| t[j]).collect();
            index.entry(key).or_default().push((t, v));
        }
        for (t, v) in self.iter() {
            let key: Tuple = shared.iter().map(|&(i, _)| t[i]).collect();
            if let Some(matches) = index.get(&key) {
                for (u, w) in matches {
                    let mut row = t.clone();
                    row.extend(extra.iter().map(|&j| u[j]));
                    out.add(row, S::times(v, w));
                }
            }
        }
        out
    }

    /// Groups by the projection onto `keep` and ⊕-sums the values.
    pub fn marginalize(&self, keep: crate::query::VarSet) -> KRelation<S> {
        let schema: Vec<VarId> =
            self.schema.iter().copied().filter(|v| keep.contains(*v)).collect();
        let mut out = KRelation::new(schema);
        for (t, v) in self.iter() {
            out.add(project(&self.schema, t, keep), v.clone());
        }
        out
    }

    /// Support projection: distinct tuples over `keep` with value 1.
    pub fn support_projection(&self, keep: crate::query::VarSet) -> KRelation<S> {
        let schema: Vec<VarId> =
            self.schema.iter().copied().filter(|v| keep.contains(*v)).collect();
        let mut out = KRelation::new(schema);
        for (t, _) in self.iter() {
            let key = project(&self.schema, t, keep);
            if out.get(&key).is_none() {
                out.add(key, S::one());
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("relation `{0}` not found for atom of the query")]
    MissingRelation(String),
    #[error("relation `{name}` has arity {got}, atom expects {want}")]
    ArityMismatch { name: String, got: usize, want: usize },
    #[error("line {line}: {msg}")]
    Tsv { line: usize, msg: String },
}

/// Dictionary encoder from external tokens to dense ids (first-seen order).
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    tokens: Vec<String>,
    index: HashMap<String, Val>,
}

impl Dictionary {
    pub fn encode(&mut self, token: &str) -> Val {
        if let Some(&v) = self.index.get(token) {
            return v;
        }
        let v = self.tokens.len() as Val;
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), v);
        v
    }

    pub fn decode(&self, v: Val) -> &str {
        &self.tokens[v as usize]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A database: one K-relation per relation name plus the shared dictionary.
#[derive(Debug, Clone, Default)]
pub struct Database<S: Semiring> {
    relations: BTreeMap<String, Arc<KRelation<S>>>,
    pub dict: Dictionary,
}

impl<S: Semiring> Database<S> {
    pub fn new() -> Database<S> {
        Database { relations: BTreeMap::new(), dict: Dictionary::default() }
    }

    pub fn insert(&mut self, name: &str, rel: KRelation<S>) {
        self.relations.insert(name.to_string(), Arc::new(rel));
    }

    pub fn get(&self, name: &str) -> Option<&Arc<KRelation<S>>> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&String, &Arc<KRelation<S>>)> {
        self.relations.iter()
    }

    /// |D| = total support size.
    pub fn size(&self) -> usize {
        self.relations.values().map(|r| r.len()).sum()
    }

    /// Checks every atom resolves to a relation of matching arity.
    pub fn check_schema(&self, q: &Query) -> Result<(), DataError> {
        for atom in q.atoms() {
            let rel = self
                .get(&atom.name)
                .ok_or_else(|| DataError::MissingRelation(atom.name.clone()))?;
            if rel.schema().len() != atom.vars.len() {
                return Err(DataError::ArityMismatch {
                    name: atom.name.clone(),
                    got: rel.schema().len(),
                    want: atom.vars.len(),
                });
            }
        }
        Ok(())
    }

    /// Parses one relation from TSV text. Columns follow the atom's attribute
    /// order; an optional header whose last field is `#value` marks a final
    /// value column (absent value = semiring one). Duplicate tuples ⊕-merge.
    pub fn load_tsv(&mut self, q: &Query, atom_name: &str, text: &str) -> Result<(), DataError> {
        let (_, atom) = q
            .atom_by_name(atom_name)
            .ok_or_else(|| DataError::MissingRelation(atom_name.to_string()))?;
        let arity = atom.vars.len();
        let mut rel = KRelation::new(atom.vars.clone());
        let mut lines = text.lines().enumerate().peekable();
        let mut has_value = false;
        if let Some((_, first)) = lines.peek() {
            let fields: Vec<&str> = first.split('\t').collect();
            if fields.last() == Some(&"#value") {
                has_value = true;
                lines.next();
            }
        }
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let want = arity + usize::from(has_value);
            if fields.len() != want {
                return Err(DataError::Tsv {
                    line: i + 1,
                    msg: format!("expected {want} fields, found {}", fields.len()),
                });
            }
            let tuple: Tuple = fields[..arity].iter().map(|t| self.dict.encode(t)).collect();
            let value = if has_value {
                S::parse(fields[arity])
                    .map_err(|msg| DataError::Tsv { line: i + 1, msg })?
            } else {
                S::one()
            };
            rel.add(tuple, value);
        }
        self.insert(atom_name, rel);
        Ok(())
    }

    /// Serializes a relation as TSV with decoded tokens, head names as
    /// columns, and a final `#value` column.
    pub fn to_tsv(&self, q: &Query, rel: &KRelation<S>) -> String {
        let mut out = String::new();
        for v in rel.schema() {
            out.push_str(q.var_name(*v));
            out.push('\t');
        }
        out.push_str("#value\n");
        for (t, v) in rel.iter() {
            for x in t {
                out.push_str(self.dict.decode(*x));
                out.push('\t');
            }
            out.push_str(&S::format(v));
            out.push('\n');
        }
        out
    }
}

/// Sorted trie over a relation reordered by `perm`; depth-first traversal
/// yields the permuted tuples in strict lexicographic order with the semiring
/// value at the leaf.
#[derive(Debug)]
pub struct TrieIndex<S: Semiring> {
    perm: Vec<VarId>,
    root: TrieNode<S>,
    cells: usize,
}

#[derive(Debug)]
pub enum TrieNode<S: Semiring> {
    Inner(Vec<(Val, TrieNode<S>)>),
    Leaf(S::Val),
}

impl<S: Semiring> TrieIndex<S> {
    /// Builds the index; `perm` must be a permutation of the relation schema.
    pub fn build(rel: &KRelation<S>, perm: Vec<VarId>) -> Result<TrieIndex<S>, DataError> {
        let bad = || DataError::Tsv {
            line: 0,
            msg: "permutation is not a permutation of the schema".into(),
        };
        let mut positions = Vec::with_capacity(perm.len());
        for v in &perm {
            let p = rel.schema().iter().position(|w| w == v).ok_or_else(bad)?;
            if positions.contains(&p) {
                return Err(bad());
            }
            positions.push(p);
        }
        if perm.len() != rel.schema().len() {
            return Err(bad());
        }
        let mut rows: Vec<(Tuple, S::Val)> = rel
            .iter()
            .map(|(t, v)| (positions.iter().map(|&p| t[p]).collect(), v.clone()))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut cells = 0;
        let root = Self::build_node(&rows, 0, perm.len(), &mut cells);
        Ok(TrieIndex { perm, root, cells })
    }

    fn build_node(
        rows: &[(Tuple, S::Val)],
        depth: usize,
        arity: usize,
        cells: &mut usize,
    ) -> TrieNode<S> {
        if depth == arity {
            // Duplicates were ⊕-merged by the relation on load.
            debug_assert_eq!(rows.len(), 1);
            *cells += 1;
            return TrieNode::Leaf(rows[0].1.clone());
        }
        let mut children = Vec::new();
        let mut i = 0;
        while i < rows.len() {
            let key = rows[i].0[depth];
            let mut j = i;
            while j < rows.len() && rows[j].0[depth] == key {
                j += 1;
            }
            *cells += 1;
            children.push((key, Self::build_node(&rows[i..j], depth + 1, arity, cells)));
            i = j;
        }
        TrieNode::Inner(children)
    }

    pub fn perm(&self) -> &[VarId] {
        &self.perm
    }

    /// Index memory in cells (one per node), reported separately from
    /// evaluation space.
    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Descends by a bound prefix; `None` when the prefix is absent.
    pub fn descend(&self, prefix: &[Val]) -> Option<&TrieNode<S>> {
        let mut node = &self.root;
        for v in prefix {
            match node {
                TrieNode::Inner(children) => {
                    let i = children.binary_search_by_key(v, |(k, _)| *k).ok()?;
                    node = &children[i].1;
                }
                TrieNode::Leaf(_) => return None,
            }
        }
        Some(node)
    }

    /// `supp(R[next | prefix])` in increasing order, with sub-nodes.
    /// The prefix instantiates a leading segment of the permutation; the empty
    /// iterator is returned when the prefix is absent.
    pub fn restricted_support<'a>(
        &'a self,
        prefix: &[Val],
    ) -> &'a [(Val, TrieNode<S>)] {
        match self.descend(prefix) {
            Some(TrieNode::Inner(children)) => children,
            _ => &[],
        }
    }

    /// Walks the whole trie, yielding permuted tuples in lexicographic order.
    pub fn enumerate(&self) -> Vec<(Tuple, S::Val)> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        Self::walk(&self.root, &mut prefix, &mut out);
        out
    }

    fn walk(node: &TrieNode<S>, prefix: &mut Tuple, out: &mut Vec<(Tuple, S::Val)>) {
        match node {
            TrieNode::Leaf(v) => out.push((prefix.clone(), v.clone())),
            TrieNode::Inner(children) => {
                for (key, child) in children {
                    prefix.push(*key);
                    Self::walk(child, prefix, out);
                    prefix.pop();
                }
            }
        }
    }
}

impl<S: Semiring> TrieNode<S> {
    pub fn children(&self) -> &[(Val, TrieNode<S>)] {
        match self {
            TrieNode::Inner(c) => c,
            TrieNode::Leaf(_) => &[],
        }
    }

    pub fn lookup(&self, v: Val) -> Option<&TrieNode<S>> {
        match self {
            TrieNode::Inner(c) => {
                c.binary_search_by_key(&v, |(k, _)| *k).ok().map(|i| &c[i].1)
            }
            TrieNode::Leaf(_) => None,
        }
    }

    pub fn leaf_value(&self) -> Option<&S::Val> {
        match self {
            TrieNode::Leaf(v) => Some(v),
            TrieNode::Inner(_) => None,
        }
    }

    /// Support size at this level.
    pub fn width(&self) -> usize {
        self.children().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::query::VarSet;
    use crate::semiring::{MinPlusSemiring, NatSemiring, Weight};

    fn rel(schema: &[u16], rows: &[(&[Val], u64)]) -> KRelation<NatSemiring> {
        let mut r = KRelation::new(schema.iter().map(|&i| VarId(i)).collect());
        for (t, v) in rows {
            r.add(t.to_vec(), *v);
        }
        r
    }

    #[test]
    fn trie_reorders_and_sorts() {
        let r = rel(&[0, 1], &[(&[1, 2], 5), (&[1, 3], 7)]);
        let idx = TrieIndex::build(&r, vec![VarId(1), VarId(0)]).unwrap();
        assert_eq!(
            idx.enumerate(),
            vec![(vec![2, 1], 5), (vec![3, 1], 7)]
        );
    }

    #[test]
    fn trie_rejects_non_permutation() {
        let r = rel(&[0, 1], &[(&[1, 2], 5)]);
        assert!(TrieIndex::build(&r, vec![VarId(0)]).is_err());
        assert!(TrieIndex::build(&r, vec![VarId(0), VarId(2)]).is_err());
    }

    #[test]
    fn empty_relation_has_empty_traversal() {
        let r = rel(&[0, 1], &[]);
        let idx = TrieIndex::build(&r, vec![VarId(1), VarId(0)]).unwrap();
        assert!(idx.enumerate().is_empty());
        assert!(idx.restricted_support(&[]).is_empty());
    }

    #[test]
    fn restricted_support_matches_filter() {
        let r = rel(&[0, 1], &[(&[1, 2], 1), (&[1, 3], 1), (&[2, 9], 1)]);
        let idx = TrieIndex::build(&r, vec![VarId(0), VarId(1)]).unwrap();
        let vals: Vec<Val> =
            idx.restricted_support(&[1]).iter().map(|(v, _)| *v).collect();
        assert_eq!(vals, vec![2, 3]);
        assert!(idx.restricted_support(&[7]).is_empty());
    }

    #[test]
    fn kjoin_scalar_and_unary() {
        let a = KRelation::<NatSemiring>::from_scalar(2);
        let b = rel(&[2], &[(&[4], 3)]);
        let j = a.kjoin(&b);
        assert_eq!(j.iter().collect::<Vec<_>>(), vec![(&vec![4], &3)]);
    }

    #[test]
    fn kjoin_with_empty_is_empty() {
        let a = rel(&[0, 1], &[(&[1, 2], 5)]);
        let b = rel(&[1, 2], &[]);
        assert!(a.kjoin(&b).is_empty());
    }

    #[test]
    fn marginalize_sums_groups() {
        let r = rel(&[0, 1], &[(&[7, 1], 2), (&[7, 2], 3)]);
        let m = r.marginalize(VarSet::single(VarId(0)));
        assert_eq!(m.get(&[7]), Some(&5));
    }

    #[test]
    fn marginalize_minplus_takes_min() {
        let mut r = KRelation::<MinPlusSemiring>::new(vec![VarId(0), VarId(1)]);
        r.add(vec![7, 1], Weight::Fin(2));
        r.add(vec![7, 2], Weight::Fin(3));
        let m = r.marginalize(VarSet::single(VarId(0)));
        assert_eq!(m.get(&[7]), Some(&Weight::Fin(2)));
    }

    #[test]
    fn tsv_round_trip_with_merge() {
        let q = fixtures::three_path();
        let mut db = Database::<NatSemiring>::new();
        db.load_tsv(&q, "R1", "A\tB\t#value\nx\ty\t2\nx\ty\t3\nz\ty\t1\n").unwrap();
        let r1 = db.get("R1").unwrap().clone();
        assert_eq!(r1.len(), 2);
        let xy = vec![db.dict.encode("x"), db.dict.encode("y")];
        assert_eq!(r1.get(&xy), Some(&5));
        let text = db.to_tsv(&q, &r1);
        let mut db2 = Database::<NatSemiring>::new();
        db2.load_tsv(&q, "R1", &text).unwrap();
        assert_eq!(db2.get("R1").unwrap().len(), 2);
    }

    #[test]
    fn tsv_without_value_column_defaults_to_one() {
        let q = fixtures::three_path();
        let mut db = Database::<NatSemiring>::new();
        db.load_tsv(&q, "R2", "p\tq\np\tq\n").unwrap();
        let r = db.get("R2").unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.iter().next().unwrap().1, &2);
    }

    #[test]
    fn schema_check_reports_mismatch() {
        let q = fixtures::three_path();
        let mut db = Database::<NatSemiring>::new();
        db.load_tsv(&q, "R1", "a\tb\n").unwrap();
        assert!(matches!(db.check_schema(&q), Err(DataError::MissingRelation(n)) if n == "R2"));
    }

    #[test]
    fn support_projection_dedups() {
        let r = rel(&[0, 1], &[(&[1, 2], 5), (&[1, 3], 7)]);
        let s = r.support_projection(VarSet::single(VarId(0)));
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&[1]), Some(&1));
    }
}
