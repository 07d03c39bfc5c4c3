//! Ordered abelian groups that back truncations: exact arithmetic over the
//! integers, the rationals, and two lexicographic products. All arithmetic is
//! arbitrary precision; rationals are kept in lowest terms with positive
//! denominator (num-rational maintains that invariant for us).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;

/// Default half-width of the window random element generators draw from.
pub const DEFAULT_SAMPLE_BOUND: u64 = 100;

/// The bundled ordered abelian groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupInstance {
    /// (Z, +, <=).
    Integers,
    /// (Q, +, <=), densely ordered.
    Rationals,
    /// Z x Z ordered lexicographically, first coordinate dominant.
    LexZZ,
    /// Q x Z ordered lexicographically, rational coordinate dominant.
    LexQZ,
}

impl fmt::Display for GroupInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GroupInstance::Integers => "Z",
            GroupInstance::Rationals => "Q",
            GroupInstance::LexZZ => "ZxZ",
            GroupInstance::LexQZ => "QxZ",
        };
        f.write_str(name)
    }
}

/// An element of one of the bundled groups. The variant identifies which
/// group the element lives in; operations on mismatched variants are errors,
/// never coercions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupElement {
    Int(BigInt),
    Rat(BigRational),
    LexZZ(BigInt, BigInt),
    LexQZ(BigRational, BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("element {element} does not belong to {instance}")]
    WrongInstance {
        instance: GroupInstance,
        element: String,
    },
    #[error("divisor must be positive, got {0}")]
    NonPositiveDivisor(i64),
    #[error("dividend must be non-negative, got {0}")]
    NegativeDividend(String),
    #[error("cannot parse {input:?} as an element of {instance}: {reason}")]
    Parse {
        instance: GroupInstance,
        input: String,
        reason: String,
    },
}

impl GroupElement {
    pub fn int(n: impl Into<BigInt>) -> Self {
        GroupElement::Int(n.into())
    }

    /// A rational n/d. Panics if d = 0.
    pub fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> Self {
        GroupElement::Rat(BigRational::new(n.into(), d.into()))
    }

    pub fn lex_zz(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        GroupElement::LexZZ(a.into(), b.into())
    }

    /// The pair (n/d, b) in Q x Z. Panics if d = 0.
    pub fn lex_qz(n: impl Into<BigInt>, d: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        GroupElement::LexQZ(BigRational::new(n.into(), d.into()), b.into())
    }

    pub fn instance(&self) -> GroupInstance {
        match self {
            GroupElement::Int(_) => GroupInstance::Integers,
            GroupElement::Rat(_) => GroupInstance::Rationals,
            GroupElement::LexZZ(..) => GroupInstance::LexZZ,
            GroupElement::LexQZ(..) => GroupInstance::LexQZ,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GroupElement::Int(a) => a.is_zero(),
            GroupElement::Rat(a) => a.is_zero(),
            GroupElement::LexZZ(a, b) => a.is_zero() && b.is_zero(),
            GroupElement::LexQZ(a, b) => a.is_zero() && b.is_zero(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn is_negative(&self) -> bool {
        match self {
            GroupElement::Int(a) => a.is_negative(),
            GroupElement::Rat(a) => a.is_negative(),
            GroupElement::LexZZ(a, b) => a.is_negative() || (a.is_zero() && b.is_negative()),
            GroupElement::LexQZ(a, b) => a.is_negative() || (a.is_zero() && b.is_negative()),
        }
    }
}

impl PartialOrd for GroupElement {
    /// Same-instance elements compare by the group order; mixed instances
    /// are incomparable (`None`).
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (GroupElement::Int(a), GroupElement::Int(b)) => Some(a.cmp(b)),
            (GroupElement::Rat(a), GroupElement::Rat(b)) => Some(a.cmp(b)),
            (GroupElement::LexZZ(a1, a2), GroupElement::LexZZ(b1, b2)) => {
                Some(a1.cmp(b1).then_with(|| a2.cmp(b2)))
            }
            (GroupElement::LexQZ(a1, a2), GroupElement::LexQZ(b1, b2)) => {
                Some(a1.cmp(b1).then_with(|| a2.cmp(b2)))
            }
            _ => None,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(a) => write!(f, "{a}"),
            GroupElement::Rat(a) => write!(f, "{a}"),
            GroupElement::LexZZ(a, b) => write!(f, "({a},{b})"),
            GroupElement::LexQZ(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl GroupInstance {
    pub fn zero(&self) -> GroupElement {
        match self {
            GroupInstance::Integers => GroupElement::Int(BigInt::zero()),
            GroupInstance::Rationals => GroupElement::Rat(BigRational::zero()),
            GroupInstance::LexZZ => GroupElement::LexZZ(BigInt::zero(), BigInt::zero()),
            GroupInstance::LexQZ => GroupElement::LexQZ(BigRational::zero(), BigInt::zero()),
        }
    }

    /// The least positive element, when one exists. The rationals are dense
    /// and have none.
    pub fn least_positive(&self) -> Option<GroupElement> {
        match self {
            GroupInstance::Integers => Some(GroupElement::int(1)),
            GroupInstance::Rationals => None,
            GroupInstance::LexZZ => Some(GroupElement::lex_zz(0, 1)),
            GroupInstance::LexQZ => Some(GroupElement::lex_qz(0, 1, 1)),
        }
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        a.instance() == *self
    }

    fn expect_member<'a>(&self, a: &'a GroupElement) -> Result<&'a GroupElement, GroupError> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(GroupError::WrongInstance {
                instance: *self,
                element: a.to_string(),
            })
        }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.expect_member(a)?;
        self.expect_member(b)?;
        Ok(add_unchecked(a, b))
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.expect_member(a)?;
        self.expect_member(b)?;
        Ok(add_unchecked(a, &neg_unchecked(b)))
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.expect_member(a)?;
        Ok(neg_unchecked(a))
    }

    pub fn cmp(&self, a: &GroupElement, b: &GroupElement) -> Result<Ordering, GroupError> {
        self.expect_member(a)?;
        self.expect_member(b)?;
        Ok(a.partial_cmp(b).expect("same instance"))
    }

    /// n * a for an integer scalar n.
    pub fn scalar_mul(&self, n: &BigInt, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.expect_member(a)?;
        Ok(scalar_mul_unchecked(n, a))
    }

    /// Euclidean-style division by a positive integer: a = n*q + r with an
    /// integer remainder 0 <= r < n, where r counts copies of the least
    /// positive element (so r = 0 is the only admissible remainder in a group
    /// without one). Returns the solution with smallest r, or `None` when no
    /// exact representation exists (e.g. odd first coordinate in Z x Z).
    pub fn divide_with_remainder(
        &self,
        a: &GroupElement,
        n: i64,
    ) -> Result<Option<(GroupElement, u64)>, GroupError> {
        if n <= 0 {
            return Err(GroupError::NonPositiveDivisor(n));
        }
        self.expect_member(a)?;
        if a.is_negative() {
            return Err(GroupError::NegativeDividend(a.to_string()));
        }
        let big_n = BigInt::from(n);
        Ok(match a {
            GroupElement::Int(v) => {
                let (q, r) = v.div_mod_floor(&big_n);
                Some((GroupElement::Int(q), small_u64(&r)))
            }
            GroupElement::Rat(v) => {
                // Q is divisible, and with no least positive element the only
                // meaningful remainder is 0.
                Some((GroupElement::Rat(v / BigRational::from(big_n)), 0))
            }
            GroupElement::LexZZ(v1, v2) => {
                if !(v1 % &big_n).is_zero() {
                    None
                } else {
                    let q1 = v1 / &big_n;
                    let (q2, r) = v2.div_mod_floor(&big_n);
                    Some((GroupElement::LexZZ(q1, q2), small_u64(&r)))
                }
            }
            GroupElement::LexQZ(v1, v2) => {
                let q1 = v1 / BigRational::from(big_n.clone());
                let (q2, r) = v2.div_mod_floor(&big_n);
                Some((GroupElement::LexQZ(q1, q2), small_u64(&r)))
            }
        })
    }

    /// The exact solution y of n*y = a, when the instance admits one.
    pub fn exact_divide(
        &self,
        a: &GroupElement,
        n: i64,
    ) -> Result<Option<GroupElement>, GroupError> {
        if n <= 0 {
            return Err(GroupError::NonPositiveDivisor(n));
        }
        self.expect_member(a)?;
        let big_n = BigInt::from(n);
        Ok(match a {
            GroupElement::Int(v) => {
                if (v % &big_n).is_zero() {
                    Some(GroupElement::Int(v / &big_n))
                } else {
                    None
                }
            }
            GroupElement::Rat(v) => Some(GroupElement::Rat(v / BigRational::from(big_n))),
            GroupElement::LexZZ(v1, v2) => {
                if (v1 % &big_n).is_zero() && (v2 % &big_n).is_zero() {
                    Some(GroupElement::LexZZ(v1 / &big_n, v2 / &big_n))
                } else {
                    None
                }
            }
            GroupElement::LexQZ(v1, v2) => {
                if (v2 % &big_n).is_zero() {
                    Some(GroupElement::LexQZ(
                        v1 / BigRational::from(big_n.clone()),
                        v2 / &big_n,
                    ))
                } else {
                    None
                }
            }
        })
    }

    /// A random element with coordinates drawn from [-bound, bound]
    /// (denominators from [1, bound]).
    pub fn sample<R: Rng>(&self, rng: &mut R, bound: u64) -> GroupElement {
        let b = BigInt::from(bound);
        let lo = -b.clone();
        let hi = &b + 1;
        match self {
            GroupInstance::Integers => GroupElement::Int(rng.gen_bigint_range(&lo, &hi)),
            GroupInstance::Rationals => GroupElement::Rat(sample_rational(rng, bound)),
            GroupInstance::LexZZ => GroupElement::LexZZ(
                rng.gen_bigint_range(&lo, &hi),
                rng.gen_bigint_range(&lo, &hi),
            ),
            GroupInstance::LexQZ => GroupElement::LexQZ(
                sample_rational(rng, bound),
                rng.gen_bigint_range(&lo, &hi),
            ),
        }
    }

    /// Parse an element in the same notation `Display` produces: `7`, `-3/4`,
    /// `(1,-2)`, `(1/2,3)`.
    pub fn parse_element(&self, input: &str) -> Result<GroupElement, GroupError> {
        let fail = |reason: &str| GroupError::Parse {
            instance: *self,
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let s = input.trim();
        match self {
            GroupInstance::Integers => Ok(GroupElement::Int(
                s.parse().map_err(|_| fail("expected an integer"))?,
            )),
            GroupInstance::Rationals => Ok(GroupElement::Rat(
                parse_rational(s).ok_or_else(|| fail("expected an integer or p/q"))?,
            )),
            GroupInstance::LexZZ => {
                let (first, second) = split_pair(s).ok_or_else(|| fail("expected (a,b)"))?;
                Ok(GroupElement::LexZZ(
                    first
                        .parse()
                        .map_err(|_| fail("first coordinate must be an integer"))?,
                    second
                        .parse()
                        .map_err(|_| fail("second coordinate must be an integer"))?,
                ))
            }
            GroupInstance::LexQZ => {
                let (first, second) = split_pair(s).ok_or_else(|| fail("expected (q,b)"))?;
                Ok(GroupElement::LexQZ(
                    parse_rational(first)
                        .ok_or_else(|| fail("first coordinate must be an integer or p/q"))?,
                    second
                        .parse()
                        .map_err(|_| fail("second coordinate must be an integer"))?,
                ))
            }
        }
    }
}

pub(crate) fn add_unchecked(a: &GroupElement, b: &GroupElement) -> GroupElement {
    match (a, b) {
        (GroupElement::Int(x), GroupElement::Int(y)) => GroupElement::Int(x + y),
        (GroupElement::Rat(x), GroupElement::Rat(y)) => GroupElement::Rat(x + y),
        (GroupElement::LexZZ(x1, x2), GroupElement::LexZZ(y1, y2)) => {
            GroupElement::LexZZ(x1 + y1, x2 + y2)
        }
        (GroupElement::LexQZ(x1, x2), GroupElement::LexQZ(y1, y2)) => {
            GroupElement::LexQZ(x1 + y1, x2 + y2)
        }
        _ => panic!("mixed-instance group arithmetic"),
    }
}

pub(crate) fn sub_unchecked(a: &GroupElement, b: &GroupElement) -> GroupElement {
    add_unchecked(a, &neg_unchecked(b))
}

pub(crate) fn neg_unchecked(a: &GroupElement) -> GroupElement {
    match a {
        GroupElement::Int(x) => GroupElement::Int(-x),
        GroupElement::Rat(x) => GroupElement::Rat(-x),
        GroupElement::LexZZ(x1, x2) => GroupElement::LexZZ(-x1, -x2),
        GroupElement::LexQZ(x1, x2) => GroupElement::LexQZ(-x1, -x2),
    }
}

pub(crate) fn scalar_mul_unchecked(n: &BigInt, a: &GroupElement) -> GroupElement {
    match a {
        GroupElement::Int(x) => GroupElement::Int(n * x),
        GroupElement::Rat(x) => GroupElement::Rat(BigRational::from(n.clone()) * x),
        GroupElement::LexZZ(x1, x2) => GroupElement::LexZZ(n * x1, n * x2),
        GroupElement::LexQZ(x1, x2) => {
            GroupElement::LexQZ(BigRational::from(n.clone()) * x1, n * x2)
        }
    }
}

fn sample_rational<R: Rng>(rng: &mut R, bound: u64) -> BigRational {
    let num = rng.gen_range(-(bound as i64)..=bound as i64);
    let den = rng.gen_range(1..=bound.max(1) as i64);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn small_u64(r: &BigInt) -> u64 {
    u64::try_from(r).expect("remainder bounded by the divisor")
}

pub(crate) fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from(s.parse::<BigInt>().ok()?)),
    }
}

fn split_pair(s: &str) -> Option<(&str, &str)> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    inner.split_once(',')
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn addition_on_each_instance() {
        let cases = [
            (
                GroupInstance::Integers,
                GroupElement::int(3),
                GroupElement::int(4),
                GroupElement::int(7),
            ),
            (
                GroupInstance::Rationals,
                GroupElement::rat(1, 2),
                GroupElement::rat(1, 3),
                GroupElement::rat(5, 6),
            ),
            (
                GroupInstance::LexZZ,
                GroupElement::lex_zz(1, -2),
                GroupElement::lex_zz(0, 5),
                GroupElement::lex_zz(1, 3),
            ),
            (
                GroupInstance::LexQZ,
                GroupElement::lex_qz(1, 2, 3),
                GroupElement::lex_qz(1, 2, -3),
                GroupElement::lex_qz(1, 1, 0),
            ),
        ];
        for (g, a, b, want) in cases {
            assert_eq!(g.add(&a, &b).unwrap(), want);
        }
    }

    #[test]
    fn lexicographic_order_dominant_first_coordinate() {
        let g = GroupInstance::LexZZ;
        let small = GroupElement::lex_zz(0, 1_000_000);
        let big = GroupElement::lex_zz(1, -1_000_000);
        assert_eq!(g.cmp(&small, &big).unwrap(), Ordering::Less);

        let g = GroupInstance::LexQZ;
        let small = GroupElement::lex_qz(1, 3, 999);
        let big = GroupElement::lex_qz(1, 2, -999);
        assert_eq!(g.cmp(&small, &big).unwrap(), Ordering::Less);
    }

    #[test]
    fn mixed_instance_is_an_error() {
        let err = GroupInstance::Integers
            .add(&GroupElement::int(1), &GroupElement::rat(1, 2))
            .unwrap_err();
        assert!(matches!(err, GroupError::WrongInstance { .. }));
        assert!(GroupElement::int(1).partial_cmp(&GroupElement::rat(1, 1)).is_none());
    }

    #[test]
    fn divide_with_remainder_on_lex_qz() {
        // 3 * (1/3, -1) + 2 * (0, 1) = (1, -1).
        let g = GroupInstance::LexQZ;
        let a = GroupElement::lex_qz(1, 1, -1);
        let (q, r) = g.divide_with_remainder(&a, 3).unwrap().unwrap();
        assert_eq!(q, GroupElement::lex_qz(1, 3, -1));
        assert_eq!(r, 2);
        // Re-check the defining identity.
        let nq = g.scalar_mul(&BigInt::from(3), &q).unwrap();
        let r_elem = g
            .scalar_mul(&BigInt::from(r), &g.least_positive().unwrap())
            .unwrap();
        assert_eq!(g.add(&nq, &r_elem).unwrap(), a);
    }

    #[test]
    fn divide_with_remainder_absent_on_lex_zz() {
        // No q solves 2q + r = (1, 0): the first coordinate is odd.
        let g = GroupInstance::LexZZ;
        let a = GroupElement::lex_zz(1, 0);
        assert_eq!(g.divide_with_remainder(&a, 2).unwrap(), None);
    }

    #[test]
    fn divide_with_remainder_matches_euclid_on_integers() {
        let g = GroupInstance::Integers;
        for a in 0..=1000i64 {
            for n in 1..=12i64 {
                let (q, r) = g
                    .divide_with_remainder(&GroupElement::int(a), n)
                    .unwrap()
                    .unwrap();
                assert_eq!(q, GroupElement::int(a.div_euclid(n)));
                assert_eq!(r, a.rem_euclid(n) as u64);
            }
        }
    }

    #[test]
    fn divide_rejects_bad_arguments() {
        let g = GroupInstance::Integers;
        assert!(matches!(
            g.divide_with_remainder(&GroupElement::int(4), 0),
            Err(GroupError::NonPositiveDivisor(0))
        ));
        assert!(matches!(
            g.divide_with_remainder(&GroupElement::int(-1), 3),
            Err(GroupError::NegativeDividend(_))
        ));
    }

    #[test]
    fn divide_never_absent_on_lex_qz() {
        let g = GroupInstance::LexQZ;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let mut a = g.sample(&mut rng, DEFAULT_SAMPLE_BOUND);
            if a.is_negative() {
                a = neg_unchecked(&a);
            }
            let n = rng.gen_range(1..=12);
            let (q, r) = g.divide_with_remainder(&a, n).unwrap().unwrap();
            let back = add_unchecked(
                &scalar_mul_unchecked(&BigInt::from(n), &q),
                &scalar_mul_unchecked(&BigInt::from(r), &g.least_positive().unwrap()),
            );
            assert_eq!(back, a);
        }
    }

    #[test]
    fn group_laws_hold_on_sampled_triples() {
        let instances = [
            GroupInstance::Integers,
            GroupInstance::Rationals,
            GroupInstance::LexZZ,
            GroupInstance::LexQZ,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for g in instances {
            for _ in 0..10_000 {
                let a = g.sample(&mut rng, DEFAULT_SAMPLE_BOUND);
                let b = g.sample(&mut rng, DEFAULT_SAMPLE_BOUND);
                let c = g.sample(&mut rng, DEFAULT_SAMPLE_BOUND);
                assert_eq!(g.add(&a, &b).unwrap(), g.add(&b, &a).unwrap());
                assert_eq!(
                    g.add(&g.add(&a, &b).unwrap(), &c).unwrap(),
                    g.add(&a, &g.add(&b, &c).unwrap()).unwrap()
                );
                assert_eq!(g.add(&a, &g.zero()).unwrap(), a);
                assert_eq!(g.add(&g.sub(&a, &b).unwrap(), &b).unwrap(), a);
                // Order translation-invariance.
                let ord = g.cmp(&a, &b).unwrap();
                assert_eq!(
                    g.cmp(&g.add(&a, &c).unwrap(), &g.add(&b, &c).unwrap()).unwrap(),
                    ord
                );
            }
        }
    }

    #[test]
    fn parse_round_trips_display() {
        let elems = [
            GroupElement::int(-17),
            GroupElement::rat(22, -8),
            GroupElement::lex_zz(4, -9),
            GroupElement::lex_qz(-1, 6, 12),
        ];
        for e in elems {
            let parsed = e.instance().parse_element(&e.to_string()).unwrap();
            assert_eq!(parsed, e);
        }
    }

    proptest! {
        #[test]
        fn prop_sub_inverts_add(a in -500i64..500, b in -500i64..500, c in -500i64..500, d in -500i64..500) {
            let g = GroupInstance::LexZZ;
            let x = GroupElement::lex_zz(a, b);
            let y = GroupElement::lex_zz(c, d);
            let sum = g.add(&x, &y).unwrap();
            prop_assert_eq!(g.sub(&sum, &y).unwrap(), x);
        }

        #[test]
        fn prop_rationals_stay_reduced(n in -300i64..300, d in 1i64..300) {
            let e = GroupElement::rat(n, d);
            if let GroupElement::Rat(r) = &e {
                let parsed = GroupInstance::Rationals.parse_element(&e.to_string()).unwrap();
                prop_assert_eq!(&parsed, &e);
                prop_assert!(r.denom() > &BigInt::from(0));
            }
        }
    }
}
