//! The four built-in commutative semirings.
//!
//! Evaluators are generic over [`Semiring`]; the CLI dispatches once on
//! [`SemiringId`]. Zero values are never stored in K-relations, so `is_zero`
//! doubles as the support predicate. Min-plus keeps its zero (+∞) as a
//! distinguished sentinel, never a large finite weight.

use std::fmt::Debug;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemiringId {
    Bool,
    Nat,
    Real,
    MinPlus,
}

impl SemiringId {
    pub fn parse(name: &str) -> Option<SemiringId> {
        Some(match name {
            "bool" => SemiringId::Bool,
            "nat" => SemiringId::Nat,
            "real" => SemiringId::Real,
            "minplus" => SemiringId::MinPlus,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SemiringId::Bool => "bool",
            SemiringId::Nat => "nat",
            SemiringId::Real => "real",
            SemiringId::MinPlus => "minplus",
        }
    }
}

pub trait Semiring: Clone + 'static {
    type Val: Clone + PartialEq + Debug + Send + Sync;

    const ID: SemiringId;

    fn zero() -> Self::Val;
    fn one() -> Self::Val;
    fn plus(a: &Self::Val, b: &Self::Val) -> Self::Val;
    fn times(a: &Self::Val, b: &Self::Val) -> Self::Val;

    fn is_zero(v: &Self::Val) -> bool {
        *v == Self::zero()
    }

    /// Parses a `#value` column entry.
    fn parse(text: &str) -> Result<Self::Val, String>;
    fn format(v: &Self::Val) -> String;

    /// Maps a small generator nonce (1..=9) to a nonzero value; used by the
    /// deterministic instance generator.
    fn from_nonce(n: u8) -> Self::Val;
}

/// Booleans with ∨ / ∧.
#[derive(Clone)]
pub struct BoolSemiring;

impl Semiring for BoolSemiring {
    type Val = bool;
    const ID: SemiringId = SemiringId::Bool;

    fn zero() -> bool {
        false
    }
    fn one() -> bool {
        true
    }
    fn plus(a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn times(a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn parse(text: &str) -> Result<bool, String> {
        match text {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            other => Err(format!("bad bool value `{other}`")),
        }
    }
    fn format(v: &bool) -> String {
        if *v { "1".into() } else { "0".into() }
    }
    fn from_nonce(_: u8) -> bool {
        true
    }
}

/// Natural numbers with + / ×. Counts can reach |D|^k; u64 keeps the slope
/// suite exact and debug builds trap overflow.
#[derive(Clone)]
pub struct NatSemiring;

impl Semiring for NatSemiring {
    type Val = u64;
    const ID: SemiringId = SemiringId::Nat;

    fn zero() -> u64 {
        0
    }
    fn one() -> u64 {
        1
    }
    fn plus(a: &u64, b: &u64) -> u64 {
        a + b
    }
    fn times(a: &u64, b: &u64) -> u64 {
        a * b
    }
    fn parse(text: &str) -> Result<u64, String> {
        text.parse().map_err(|e| format!("bad nat value `{text}`: {e}"))
    }
    fn format(v: &u64) -> String {
        v.to_string()
    }
    fn from_nonce(n: u8) -> u64 {
        n as u64
    }
}

/// Reals (f64) with + / ×. Equality in tests uses relative tolerance; storage
/// drops exact 0.0 only.
#[derive(Clone)]
pub struct RealSemiring;

impl Semiring for RealSemiring {
    type Val = f64;
    const ID: SemiringId = SemiringId::Real;

    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn plus(a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn times(a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn parse(text: &str) -> Result<f64, String> {
        text.parse().map_err(|e| format!("bad real value `{text}`: {e}"))
    }
    fn format(v: &f64) -> String {
        // Round-trippable float formatting.
        format!("{v:?}")
    }
    fn from_nonce(n: u8) -> f64 {
        n as f64
    }
}

/// Min-plus (tropical) weight; `Inf` is the semiring zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Inf,
    Fin(i64),
}

#[derive(Clone)]
pub struct MinPlusSemiring;

impl Semiring for MinPlusSemiring {
    type Val = Weight;
    const ID: SemiringId = SemiringId::MinPlus;

    fn zero() -> Weight {
        Weight::Inf
    }
    fn one() -> Weight {
        Weight::Fin(0)
    }
    fn plus(a: &Weight, b: &Weight) -> Weight {
        match (a, b) {
            (Weight::Inf, w) | (w, Weight::Inf) => *w,
            (Weight::Fin(x), Weight::Fin(y)) => Weight::Fin(*x.min(y)),
        }
    }
    fn times(a: &Weight, b: &Weight) -> Weight {
        match (a, b) {
            (Weight::Inf, _) | (_, Weight::Inf) => Weight::Inf,
            (Weight::Fin(x), Weight::Fin(y)) => Weight::Fin(x + y),
        }
    }
    fn parse(text: &str) -> Result<Weight, String> {
        if text == "inf" {
            return Ok(Weight::Inf);
        }
        text.parse()
            .map(Weight::Fin)
            .map_err(|e| format!("bad minplus value `{text}`: {e}"))
    }
    fn format(v: &Weight) -> String {
        match v {
            Weight::Inf => "inf".into(),
            Weight::Fin(x) => x.to_string(),
        }
    }
    fn from_nonce(n: u8) -> Weight {
        Weight::Fin(n as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx_eq(a: f64, b: f64) -> bool {
        let scale = a.abs().max(b.abs()).max(1.0);
        (a - b).abs() <= 1e-12 * scale
    }

    macro_rules! law_suite {
        ($name:ident, $S:ty, $gen:expr, $eq:expr) => {
            proptest! {
                #[test]
                fn $name(a in $gen, b in $gen, c in $gen) {
                    type S = $S;
                    let eq = $eq;
                    prop_assert!(eq(S::plus(&a, &b), S::plus(&b, &a)));
                    prop_assert!(eq(S::times(&a, &b), S::times(&b, &a)));
                    prop_assert!(eq(
                        S::plus(&S::plus(&a, &b), &c),
                        S::plus(&a, &S::plus(&b, &c))
                    ));
                    prop_assert!(eq(
                        S::times(&S::times(&a, &b), &c),
                        S::times(&a, &S::times(&b, &c))
                    ));
                    prop_assert!(eq(
                        S::times(&a, &S::plus(&b, &c)),
                        S::plus(&S::times(&a, &b), &S::times(&a, &c))
                    ));
                    prop_assert!(eq(S::plus(&a, &S::zero()), a.clone()));
                    prop_assert!(eq(S::times(&a, &S::one()), a.clone()));
                    prop_assert!(eq(S::times(&a, &S::zero()), S::zero()));
                }
            }
        };
    }

    law_suite!(bool_laws, BoolSemiring, any::<bool>(), |x: bool, y: bool| x == y);
    law_suite!(nat_laws, NatSemiring, 0u64..1000, |x: u64, y: u64| x == y);
    law_suite!(real_laws, RealSemiring, -100.0f64..100.0, approx_eq);
    law_suite!(
        minplus_laws,
        MinPlusSemiring,
        prop_oneof![Just(Weight::Inf), (-1000i64..1000).prop_map(Weight::Fin)],
        |x: Weight, y: Weight| x == y
    );

    #[test]
    fn minplus_zero_is_annihilating_sentinel() {
        let w = Weight::Fin(5);
        assert_eq!(MinPlusSemiring::times(&w, &Weight::Inf), Weight::Inf);
        assert_eq!(MinPlusSemiring::plus(&w, &Weight::Inf), w);
        assert!(MinPlusSemiring::is_zero(&Weight::Inf));
    }

    #[test]
    fn value_round_trip() {
        assert_eq!(MinPlusSemiring::parse("inf").unwrap(), Weight::Inf);
        assert_eq!(MinPlusSemiring::parse("-3").unwrap(), Weight::Fin(-3));
        assert_eq!(NatSemiring::parse(&NatSemiring::format(&42)).unwrap(), 42);
        let x = 0.1f64 + 0.2;
        assert_eq!(RealSemiring::parse(&RealSemiring::format(&x)).unwrap(), x);
    }
}
