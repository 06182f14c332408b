//! Sub-queries at tree-decomposition bags and the derived cardinality
//! profiles that make inner-plan exponents composable.

use num_traits::{One, Zero};

use crate::cover::{CardinalityProfile, CoverError, CoverSolver, Rat};
use crate::query::{Atom, Query, VarSet};

use super::TreeDec;

/// Role of one atom inside a bag's sub-query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BagAtomRole {
    /// The bag covers this atom; its annotations are consumed here.
    Annotated { atom: usize },
    /// Support-only projection of the atom onto the bag.
    Support { atom: usize },
    /// Materialized child message Q^w(Z^w).
    Message { child: usize },
}

/// The sub-query Q^v at one bag, with per-atom roles. Atoms whose projection
/// onto the bag is empty are dropped (they only matter through the global
/// empty-relation check); nullary child messages are listed separately since
/// atoms carry at least one variable.
#[derive(Debug, Clone)]
pub struct BagQuery {
    pub node: usize,
    pub query: Query,
    pub roles: Vec<BagAtomRole>,
    pub scalar_messages: Vec<usize>,
}

/// Name of the message relation sent from bag `child` to its parent.
pub fn message_name(child: usize) -> String {
    format!("@msg{child}")
}

/// Builds the sub-query at every bag: head Z^v, body atoms restricted to
/// the bag (annotated where covered, support-projection otherwise) plus one
/// message atom per child.
pub fn td_subqueries(q: &Query, td: &TreeDec) -> Vec<BagQuery> {
    (0..td.bags.len())
        .map(|v| {
            let bag = td.bags[v];
            let mut atoms = Vec::new();
            let mut roles = Vec::new();
            let mut scalar_messages = Vec::new();
            for (i, atom) in q.atoms().iter().enumerate() {
                let vars: Vec<_> =
                    atom.vars.iter().copied().filter(|x| bag.contains(*x)).collect();
                if vars.is_empty() {
                    continue;
                }
                let role = if td.covering[i] == v {
                    BagAtomRole::Annotated { atom: i }
                } else {
                    BagAtomRole::Support { atom: i }
                };
                atoms.push(Atom { name: atom.name.clone(), vars });
                roles.push(role);
            }
            for w in td.children(v) {
                let sep = td.separator(w, q.head());
                if sep.is_empty() {
                    scalar_messages.push(w);
                    continue;
                }
                atoms.push(Atom { name: message_name(w), vars: sep.iter().collect() });
                roles.push(BagAtomRole::Message { child: w });
            }
            let head = td.separator(v, q.head());
            BagQuery { node: v, query: q.with_atoms(head, atoms), roles, scalar_messages }
        })
        .collect()
}

/// Derived cardinality profiles for the bags of a tree decomposition.
///
/// Every message Q^w(Z^w) is bounded by |D|^{rho*(Z^w)} computed against the
/// original query and profile; the global normalizer `m` is the maximum of
/// all atom constraints and message bounds, bag plans are analyzed under the
/// normalized constraints, and bag exponents scale back by `m` so reported
/// exponents stay in units of log |D| of the original database.
pub struct TdProfiles {
    pub scale: Rat,
    pub per_bag: Vec<CardinalityProfile>,
}

pub fn td_profiles(
    q: &Query,
    td: &TreeDec,
    bags: &[BagQuery],
    profile: &CardinalityProfile,
) -> Result<TdProfiles, CoverError> {
    let solver = CoverSolver::new(q, profile.clone());
    let mut message_bound = vec![Rat::zero(); td.bags.len()];
    let mut m = Rat::zero();
    for i in 0..profile.len() {
        m = m.max(profile.get(i).clone());
    }
    for v in 0..td.bags.len() {
        if v != td.root {
            let bound = solver.rho(td.separator(v, q.head()))?;
            m = m.max(bound.clone());
            message_bound[v] = bound;
        }
    }
    debug_assert!(m >= Rat::one());
    let per_bag = bags
        .iter()
        .map(|bq| {
            let cc = bq
                .roles
                .iter()
                .map(|role| match role {
                    BagAtomRole::Annotated { atom } | BagAtomRole::Support { atom } => {
                        profile.get(*atom) / &m
                    }
                    BagAtomRole::Message { child } => &message_bound[*child] / &m,
                })
                .collect();
            CardinalityProfile::raw(cc)
        })
        .collect();
    Ok(TdProfiles { scale: m, per_bag })
}
