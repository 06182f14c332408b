//! Queries as hypergraphs: interned variables, atoms, and the query grammar.
//!
//! A query is a single rule `Head(V1, ..., Vk) <- R1(A, B), R2(...), ... .`
//! Variables are interned to small ids at construction; every set of
//! variables in the crate is a [`VarSet`] bitset, which caps queries at 64
//! variables.

use std::fmt;

use thiserror::Error;

/// Hard cap on the number of variables: sets are 64-bit bitsets.
pub const MAX_VARS: usize = 64;

/// Interned variable id, dense in `0..query.num_vars()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u16);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set of variables as a bitset over interned ids.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VarSet(pub u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn single(v: VarId) -> VarSet {
        VarSet(1u64 << v.0)
    }

    pub fn from_iter<I: IntoIterator<Item = VarId>>(it: I) -> VarSet {
        let mut s = VarSet::EMPTY;
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: VarId) {
        self.0 |= 1u64 << v.0;
    }

    pub fn remove(&mut self, v: VarId) {
        self.0 &= !(1u64 << v.0);
    }

    pub fn contains(self, v: VarId) -> bool {
        self.0 >> v.0 & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersect(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn minus(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = VarId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                Some(VarId(i as u16))
            }
        })
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VarSet{{{:?}}}", self.iter().collect::<Vec<_>>())
    }
}

/// One atom `R(A, B, ...)` of the query body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    /// Schema in written order; no repeats.
    pub vars: Vec<VarId>,
}

impl Atom {
    pub fn var_set(&self) -> VarSet {
        VarSet::from_iter(self.vars.iter().copied())
    }
}

/// A sum-product query: head variables plus a list of uniquely named atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    var_names: Vec<String>,
    head: VarSet,
    atoms: Vec<Atom>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate relation name `{0}`")]
    DuplicateRelation(String),
    #[error("variable `{0}` repeats within atom `{1}`")]
    RepeatedVariable(String, String),
    #[error("atom `{0}` has no variables")]
    EmptyAtom(String),
    #[error("head variable `{0}` does not occur in the body")]
    HeadNotInBody(String),
    #[error("query has no atoms")]
    NoAtoms,
    #[error("query exceeds the {MAX_VARS}-variable cap")]
    TooManyVars,
}

impl Query {
    /// Builds a query from variable names, checking all structural invariants.
    pub fn new(head: &[&str], atoms: &[(&str, &[&str])]) -> Result<Query, QueryError> {
        let mut b = QueryBuilder::default();
        for (name, vars) in atoms {
            b.atom(name, vars)?;
        }
        b.finish(head)
    }

    /// Re-targets the head of an existing query (used for head variants).
    pub fn with_head(&self, head: VarSet) -> Query {
        assert!(head.is_subset(self.all_vars()));
        Query { var_names: self.var_names.clone(), head, atoms: self.atoms.clone() }
    }

    /// Sub-query over the same variable universe keeping only `atoms`.
    pub(crate) fn with_atoms(&self, head: VarSet, atoms: Vec<Atom>) -> Query {
        Query { var_names: self.var_names.clone(), head, atoms }
    }

    pub fn head(&self) -> VarSet {
        self.head
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, idx: usize) -> &Atom {
        &self.atoms[idx]
    }

    pub fn atom_by_name(&self, name: &str) -> Option<(usize, &Atom)> {
        self.atoms.iter().enumerate().find(|(_, a)| a.name == name)
    }

    /// var(Q): union of all atom variables.
    pub fn all_vars(&self) -> VarSet {
        self.atoms.iter().fold(VarSet::EMPTY, |s, a| s.union(a.var_set()))
    }

    /// Number of interned variable ids (the universe may exceed `all_vars`
    /// for derived sub-queries).
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.index()]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.iter().position(|n| n == name).map(|i| VarId(i as u16))
    }

    pub fn is_scalar(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.head == self.all_vars()
    }

    pub fn set_names(&self, s: VarSet) -> String {
        let mut names: Vec<&str> = s.iter().map(|v| self.var_name(v)).collect();
        names.sort_unstable();
        names.join(",")
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<&str> = self.head.iter().map(|v| self.var_name(v)).collect();
        write!(f, "Q({}) <- ", head.join(","))?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let vs: Vec<&str> = a.vars.iter().map(|&v| self.var_name(v)).collect();
            write!(f, "{}({})", a.name, vs.join(","))?;
        }
        write!(f, ".")
    }
}

/// Incremental construction with interning; used by the parser and fixtures.
#[derive(Default)]
pub struct QueryBuilder {
    var_names: Vec<String>,
    atoms: Vec<Atom>,
}

impl QueryBuilder {
    pub fn intern(&mut self, name: &str) -> Result<VarId, QueryError> {
        if let Some(i) = self.var_names.iter().position(|n| n == name) {
            return Ok(VarId(i as u16));
        }
        if self.var_names.len() >= MAX_VARS {
            return Err(QueryError::TooManyVars);
        }
        self.var_names.push(name.to_string());
        Ok(VarId((self.var_names.len() - 1) as u16))
    }

    pub fn atom(&mut self, name: &str, vars: &[&str]) -> Result<(), QueryError> {
        if vars.is_empty() {
            return Err(QueryError::EmptyAtom(name.to_string()));
        }
        if self.atoms.iter().any(|a| a.name == name) {
            return Err(QueryError::DuplicateRelation(name.to_string()));
        }
        let mut ids = Vec::with_capacity(vars.len());
        for v in vars {
            let id = self.intern(v)?;
            if ids.contains(&id) {
                return Err(QueryError::RepeatedVariable(v.to_string(), name.to_string()));
            }
            ids.push(id);
        }
        self.atoms.push(Atom { name: name.to_string(), vars: ids });
        Ok(())
    }

    pub fn finish(mut self, head: &[&str]) -> Result<Query, QueryError> {
        if self.atoms.is_empty() {
            return Err(QueryError::NoAtoms);
        }
        let body_vars: VarSet =
            self.atoms.iter().fold(VarSet::EMPTY, |s, a| s.union(a.var_set()));
        let mut head_set = VarSet::EMPTY;
        for h in head {
            let id = self.intern(h)?;
            if !body_vars.contains(id) {
                return Err(QueryError::HeadNotInBody(h.to_string()));
            }
            head_set.insert(id);
        }
        Ok(Query { var_names: self.var_names, head: head_set, atoms: self.atoms })
    }
}

/// Parses the single-rule query grammar.
///
/// `Head(V1, ..., Vk) <- Name1(A, B, ...), Name2(...), ... .` with `#` line
/// comments. The head list may be empty (`Head()` is a scalar query).
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    Parser::new(text).parse()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Parser<'a> {
        Parser { src: text.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax { line: self.line, col: self.col, msg: msg.into() })
    }

    fn bump(&mut self) -> Option<u8> {
        let c = *self.src.get(self.pos)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn ident(&mut self) -> Result<String, QueryError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
            _ => return self.err("expected identifier"),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn expect(&mut self, tok: &str) -> Result<(), QueryError> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            for _ in 0..tok.len() {
                self.bump();
            }
            Ok(())
        } else {
            self.err(format!("expected `{tok}`"))
        }
    }

    fn var_list(&mut self) -> Result<Vec<String>, QueryError> {
        self.expect("(")?;
        let mut vars = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b')') {
            self.bump();
            return Ok(vars);
        }
        loop {
            vars.push(self.ident()?);
            self.skip_ws();
            match self.bump() {
                Some(b',') => continue,
                Some(b')') => return Ok(vars),
                _ => return self.err("expected `,` or `)` in variable list"),
            }
        }
    }

    fn parse(mut self) -> Result<Query, QueryError> {
        let _head_name = self.ident()?;
        let head = self.var_list()?;
        self.expect("<-")?;
        let mut builder = QueryBuilder::default();
        loop {
            let name = self.ident()?;
            let vars = self.var_list()?;
            if vars.is_empty() {
                return Err(QueryError::EmptyAtom(name));
            }
            let refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
            // Report duplicate-variable and duplicate-relation errors through
            // the builder so they carry the offending names.
            builder.atom(&name, &refs)?;
            self.skip_ws();
            match self.bump() {
                Some(b',') => continue,
                Some(b'.') => break,
                _ => return self.err("expected `,` or `.` after atom"),
            }
        }
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("trailing input after `.`");
        }
        let refs: Vec<&str> = head.iter().map(|s| s.as_str()).collect();
        builder.finish(&refs)
    }
}
