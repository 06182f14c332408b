//! Fractional edge cover numbers by exact rational linear programming.
//!
//! `rho_star(Q, Y, cc)` minimizes `sum_i w_i * cc_i` subject to
//! `sum_{i: A in X_i} w_i >= 1` for every `A in Y` and `w >= 0`. We solve the
//! dual packing LP (maximize `sum_{A in Y} y_A` s.t. per-atom capacity `cc_i`)
//! with a dense rational simplex using Bland's anti-cycling rule; the primal
//! weights come out of the slack reduced costs and are verified as a
//! certificate. Query LPs have at most one variable per atom and one
//! constraint per query variable, so exactness matters more than speed.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::query::{Query, VarId, VarSet};

/// Exact rational; arithmetic on exponents never touches floating point.
pub type Rat = BigRational;

/// `rat(3, 2)` is 3/2.
pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `p/q` or a plain integer.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                None
            } else {
                Some(rat(p, q))
            }
        }
        None => text.parse::<i64>().ok().map(|p| rat(p, 1)),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("variable `{0}` is not covered by any atom")]
    Uncovered(String),
    #[error("cardinality profile has {got} entries for {want} atoms")]
    ProfileArity { got: usize, want: usize },
}

/// Log-scaled cardinality constraints, one weight per atom, each in [0, 1].
///
/// The all-ones default recovers the plain `|D|^{rho*}` bounds. Derived
/// profiles for tree-decomposition bags are normalized so the maximum is 1;
/// message atoms may carry 0 when their separator is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityProfile {
    cc: Vec<Rat>,
}

impl CardinalityProfile {
    pub fn uniform(num_atoms: usize) -> CardinalityProfile {
        CardinalityProfile { cc: vec![Rat::one(); num_atoms] }
    }

    pub fn new(cc: Vec<Rat>) -> CardinalityProfile {
        assert!(!cc.is_empty());
        assert!(cc.iter().all(|c| !c.is_negative() && *c <= Rat::one()));
        assert!(cc.iter().max() == Some(&Rat::one()), "profile must be normalized to max 1");
        CardinalityProfile { cc }
    }

    /// Unnormalized internal profiles (bag computations rescale afterwards).
    pub(crate) fn raw(cc: Vec<Rat>) -> CardinalityProfile {
        CardinalityProfile { cc }
    }

    pub fn is_uniform(&self) -> bool {
        self.cc.iter().all(|c| c.is_one())
    }

    pub fn get(&self, atom: usize) -> &Rat {
        &self.cc[atom]
    }

    pub fn len(&self) -> usize {
        self.cc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cc.is_empty()
    }
}

/// An optimal (or candidate) fractional edge cover: per-atom weights plus the
/// weighted objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalEdgeCover {
    pub weights: Vec<Rat>,
    pub objective: Rat,
}

/// Minimum cardinality-weighted fractional edge cover of `target`.
pub fn rho_star(
    q: &Query,
    target: VarSet,
    profile: &CardinalityProfile,
) -> Result<FractionalEdgeCover, CoverError> {
    if profile.len() != q.atoms().len() {
        return Err(CoverError::ProfileArity { got: profile.len(), want: q.atoms().len() });
    }
    let zero = || FractionalEdgeCover {
        weights: vec![Rat::zero(); q.atoms().len()],
        objective: Rat::zero(),
    };
    if target.is_empty() {
        return Ok(zero());
    }
    for v in target.iter() {
        if !q.atoms().iter().any(|a| a.var_set().contains(v)) {
            return Err(CoverError::Uncovered(q.var_name(v).to_string()));
        }
    }
    // Dual packing LP: maximize sum y_A subject to, per atom i,
    // sum_{A in X_i ∩ target} y_A <= cc_i, y >= 0. The slack basis is feasible.
    let vars: Vec<VarId> = target.iter().collect();
    let rows: Vec<&crate::query::Atom> = q.atoms().iter().collect();
    let n = vars.len();
    let m = rows.len();

    // Tableau columns: n decision vars then m slacks; `basis[r]` is the column
    // basic in row r. Objective row holds reduced costs (maximization).
    let mut tab: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    for (i, atom) in rows.iter().enumerate() {
        let mut row = vec![Rat::zero(); n + m];
        for (j, v) in vars.iter().enumerate() {
            if atom.var_set().contains(*v) {
                row[j] = Rat::one();
            }
        }
        row[n + i] = Rat::one();
        tab.push(row);
        rhs.push(profile.get(i).clone());
    }
    let mut obj: Vec<Rat> = vec![Rat::zero(); n + m];
    for j in 0..n {
        obj[j] = Rat::one();
    }
    let mut obj_val = Rat::zero();
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: entering column = smallest index with positive reduced cost.
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_positive()) else {
            break;
        };
        // Ratio test; ties by smallest basic-variable index (Bland).
        let mut leave: Option<usize> = None;
        let mut best: Option<Rat> = None;
        for r in 0..m {
            if tab[r][enter].is_positive() {
                let ratio = &rhs[r] / &tab[r][enter];
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < *b || (ratio == *b && basis[r] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(r);
                }
            }
        }
        let Some(leave) = leave else {
            // Unbounded dual would mean an uncoverable variable, which was
            // rejected above.
            unreachable!("packing LP is bounded once every target var is covered");
        };
        // Pivot.
        let piv = tab[leave][enter].clone();
        for x in tab[leave].iter_mut() {
            *x /= &piv;
        }
        rhs[leave] /= &piv;
        for r in 0..m {
            if r != leave && !tab[r][enter].is_zero() {
                let f = tab[r][enter].clone();
                for c in 0..n + m {
                    let d = &tab[leave][c] * &f;
                    tab[r][c] -= d;
                }
                let d = &rhs[leave] * &f;
                rhs[r] -= d;
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for c in 0..n + m {
                let d = &tab[leave][c] * &f;
                obj[c] -= d;
            }
            let d = &rhs[leave] * &f;
            obj_val += d;
        }
        basis[leave] = enter;
    }

    // Primal optimum: negated reduced costs of the slack columns.
    let weights: Vec<Rat> = (0..m).map(|i| -obj[n + i].clone()).collect();
    let cover = FractionalEdgeCover { weights, objective: obj_val };
    debug_assert!(verify_cover(q, target, &cover, profile));
    Ok(cover)
}

/// Certificate check: feasibility of all coverage constraints plus the
/// objective matching the weighted sum.
pub fn verify_cover(
    q: &Query,
    target: VarSet,
    cover: &FractionalEdgeCover,
    profile: &CardinalityProfile,
) -> bool {
    if cover.weights.len() != q.atoms().len() || profile.len() != q.atoms().len() {
        return false;
    }
    if cover.weights.iter().any(|w| w.is_negative()) {
        return false;
    }
    for v in target.iter() {
        let total: Rat = q
            .atoms()
            .iter()
            .zip(&cover.weights)
            .filter(|(a, _)| a.var_set().contains(v))
            .map(|(_, w)| w.clone())
            .sum();
        if total < Rat::one() {
            return false;
        }
    }
    let objective: Rat =
        cover.weights.iter().zip(0..).map(|(w, i)| w * profile.get(i)).sum();
    objective == cover.objective
}

/// Memoizing front end for the many `rho*` objectives a plan search needs.
///
/// Pure per (query, profile); not shared across threads — each search worker
/// owns one.
pub struct CoverSolver<'q> {
    query: &'q Query,
    profile: CardinalityProfile,
    memo: RefCell<HashMap<u64, Rat>>,
}

impl<'q> CoverSolver<'q> {
    pub fn new(query: &'q Query, profile: CardinalityProfile) -> CoverSolver<'q> {
        assert_eq!(profile.len(), query.atoms().len());
        CoverSolver { query, profile, memo: RefCell::new(HashMap::new()) }
    }

    pub fn uniform(query: &'q Query) -> CoverSolver<'q> {
        CoverSolver::new(query, CardinalityProfile::uniform(query.atoms().len()))
    }

    pub fn query(&self) -> &'q Query {
        self.query
    }

    pub fn profile(&self) -> &CardinalityProfile {
        &self.profile
    }

    /// Objective only; errors on variables no atom covers.
    pub fn rho(&self, target: VarSet) -> Result<Rat, CoverError> {
        if let Some(v) = self.memo.borrow().get(&target.0) {
            return Ok(v.clone());
        }
        let r = rho_star(self.query, target, &self.profile)?.objective;
        self.memo.borrow_mut().insert(target.0, r.clone());
        Ok(r)
    }
}
