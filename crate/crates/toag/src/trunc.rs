//! Truncated structures: the interval [0, tau] of an ordered abelian group
//! under saturating addition x + y = min(x ⊕ y, tau), plus finite structures
//! given directly by an addition table in the TOAG1 text format.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::group::{add_unchecked, sub_unchecked, GroupElement, GroupError, GroupInstance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToagError {
    #[error("tau must be strictly positive, got {0}")]
    NonPositiveTau(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("dotminus y ∸ x needs x <= y < tau, got y={y}, x={x}")]
    DotminusDomain { y: String, x: String },
    #[error("no z solves x + z = y for x={x}, y={y}")]
    DotminusUndefined { x: String, y: String },
    #[error("addition case split applies below tau only, got y={y}, z={z}")]
    CaseAtTau { y: String, z: String },
    #[error("TOAG1 parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("table violates axiom {axiom} at {witness}")]
    InvalidTable { axiom: u8, witness: String },
    #[error("structure spec {0:?} is not builtin syntax or a readable TOAG1 file: {1}")]
    BadSpec(String, String),
}

/// Saturating addition either overflows the interval or it does not. A sum
/// hitting tau is a `Carry`: in the extension monoid it increments the
/// omega coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdditionCase {
    /// y + z < tau: the group sum is the truncated sum.
    Direct,
    /// y + z = tau: the group sum reached or passed tau.
    Carry,
}

/// An element of a truncated structure: a group element for truncation
/// backings, a table index for finite tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruncElement {
    Group(GroupElement),
    Index(usize),
}

impl fmt::Display for TruncElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncElement::Group(e) => write!(f, "{e}"),
            TruncElement::Index(i) => write!(f, "{i}"),
        }
    }
}

/// A finite saturating-addition candidate given by its full table on
/// {0, ..., n}. Commutativity, the identity row, tau-absorption and
/// monotonicity (axioms 1-4) are validated on construction; the remaining
/// axioms are the axiom checker's business.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTable {
    n: usize,
    entries: Vec<usize>,
}

impl FiniteTable {
    pub fn new(n: usize, entries: Vec<usize>) -> Result<Self, ToagError> {
        assert_eq!(entries.len(), (n + 1) * (n + 1), "table must be (n+1)^2");
        let t = FiniteTable { n, entries };
        for i in 0..=n {
            for j in 0..=n {
                let v = t.get(i, j);
                if v > n {
                    return Err(ToagError::Parse {
                        line: 0,
                        message: format!("entry {i}+{j}={v} exceeds tau={n}"),
                    });
                }
                if v != t.get(j, i) {
                    return Err(ToagError::InvalidTable {
                        axiom: 1,
                        witness: format!("({i},{j}): {v} vs {}", t.get(j, i)),
                    });
                }
            }
        }
        for x in 0..=n {
            if t.get(x, 0) != x {
                return Err(ToagError::InvalidTable {
                    axiom: 2,
                    witness: format!("({x},0): {}", t.get(x, 0)),
                });
            }
            if t.get(x, n) != n {
                return Err(ToagError::InvalidTable {
                    axiom: 3,
                    witness: format!("({x},{n}): {}", t.get(x, n)),
                });
            }
        }
        for i in 0..=n {
            for j in 0..n {
                if t.get(i, j) > t.get(i, j + 1) {
                    return Err(ToagError::InvalidTable {
                        axiom: 4,
                        witness: format!(
                            "({i},{j})={} > ({i},{})={}",
                            t.get(i, j),
                            j + 1,
                            t.get(i, j + 1)
                        ),
                    });
                }
            }
        }
        Ok(t)
    }

    /// The saturating table min(i + j, n) — the truncation of Z at n.
    pub fn saturating(n: usize) -> Self {
        let mut entries = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                entries.push((i + j).min(n));
            }
        }
        FiniteTable { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * (self.n + 1) + j]
    }

    /// Render in the TOAG1 text format.
    pub fn to_toag1(&self) -> String {
        let mut out = String::from("TOAG1\n");
        out.push_str(&format!("n {}\n", self.n));
        for i in 0..=self.n {
            let row: Vec<String> = (0..=self.n).map(|j| self.get(i, j).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Backing {
    Truncation { group: GroupInstance, tau: GroupElement },
    Table(FiniteTable),
}

/// A truncated ordered structure [0, tau].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncStructure {
    backing: Backing,
}

impl TruncStructure {
    /// The interval [0, tau] of `group` under saturating addition. tau must
    /// be strictly positive.
    pub fn truncation(group: GroupInstance, tau: GroupElement) -> Result<Self, ToagError> {
        if !group.contains(&tau) {
            return Err(GroupError::WrongInstance {
                instance: group,
                element: tau.to_string(),
            }
            .into());
        }
        if !tau.is_positive() {
            return Err(ToagError::NonPositiveTau(tau.to_string()));
        }
        Ok(TruncStructure {
            backing: Backing::Truncation { group, tau },
        })
    }

    pub fn from_table(table: FiniteTable) -> Self {
        TruncStructure {
            backing: Backing::Table(table),
        }
    }

    /// Parse the TOAG1 text format:
    ///
    /// ```text
    /// TOAG1
    /// n <N>
    /// <row 0>
    /// ...
    /// <row N>
    /// ```
    ///
    /// `#` starts a comment; blank lines are ignored. The table is validated
    /// against axioms 1-4 on load.
    pub fn parse_toag1(text: &str) -> Result<Self, ToagError> {
        let mut lines = text.lines().enumerate().filter_map(|(idx, raw)| {
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let body = body.trim();
            if body.is_empty() {
                None
            } else {
                Some((idx + 1, body))
            }
        });
        let err = |line: usize, message: String| ToagError::Parse { line, message };

        let (line, magic) = lines
            .next()
            .ok_or_else(|| err(0, "empty input".to_string()))?;
        if magic != "TOAG1" {
            return Err(err(line, format!("expected header TOAG1, got {magic:?}")));
        }
        let (line, size) = lines
            .next()
            .ok_or_else(|| err(0, "missing size line".to_string()))?;
        let n: usize = match size.strip_prefix("n ").or_else(|| size.strip_prefix("n\t")) {
            Some(rest) => rest
                .trim()
                .parse()
                .map_err(|_| err(line, format!("bad size in {size:?}")))?,
            None => return Err(err(line, format!("expected `n <N>`, got {size:?}"))),
        };
        if n < 1 {
            return Err(err(line, "n must be at least 1".to_string()));
        }

        let mut entries = Vec::with_capacity((n + 1) * (n + 1));
        for want_row in 0..=n {
            let (line, row) = lines
                .next()
                .ok_or_else(|| err(0, format!("missing row {want_row}")))?;
            let values: Result<Vec<usize>, _> =
                row.split_whitespace().map(|tok| tok.parse()).collect();
            let values = values.map_err(|_| err(line, format!("bad entry in row {want_row}")))?;
            if values.len() != n + 1 {
                return Err(err(
                    line,
                    format!("row {want_row} has {} entries, expected {}", values.len(), n + 1),
                ));
            }
            if let Some(&v) = values.iter().find(|&&v| v > n) {
                return Err(err(line, format!("entry {v} in row {want_row} exceeds tau={n}")));
            }
            entries.extend(values);
        }
        if let Some((line, extra)) = lines.next() {
            return Err(err(line, format!("unexpected trailing content {extra:?}")));
        }
        Ok(TruncStructure::from_table(FiniteTable::new(n, entries)?))
    }

    /// Parse a structure spec: builtin syntax (`Z:tau=7`, `Q:tau=3/2`,
    /// `ZZ:tau=(1,0)`, `QZ:tau=(1,0)`) or a path to a TOAG1 file.
    pub fn parse_spec(spec: &str) -> Result<Self, ToagError> {
        let builtin = |instance: GroupInstance, rest: &str| -> Result<Self, ToagError> {
            let value = rest.strip_prefix("tau=").ok_or_else(|| {
                ToagError::BadSpec(spec.to_string(), "expected tau=<value>".to_string())
            })?;
            let tau = instance.parse_element(value)?;
            TruncStructure::truncation(instance, tau)
        };
        if let Some((prefix, rest)) = spec.split_once(':') {
            match prefix {
                "Z" => return builtin(GroupInstance::Integers, rest),
                "Q" => return builtin(GroupInstance::Rationals, rest),
                "ZZ" => return builtin(GroupInstance::LexZZ, rest),
                "QZ" => return builtin(GroupInstance::LexQZ, rest),
                _ => {}
            }
        }
        match std::fs::read_to_string(spec) {
            Ok(text) => TruncStructure::parse_toag1(&text),
            Err(io) => Err(ToagError::BadSpec(spec.to_string(), io.to_string())),
        }
    }

    /// A short, re-parseable description of the structure.
    pub fn spec_string(&self) -> String {
        match &self.backing {
            Backing::Truncation { group, tau } => {
                let prefix = match group {
                    GroupInstance::Integers => "Z",
                    GroupInstance::Rationals => "Q",
                    GroupInstance::LexZZ => "ZZ",
                    GroupInstance::LexQZ => "QZ",
                };
                format!("{prefix}:tau={tau}")
            }
            Backing::Table(t) => format!("table(n={})", t.n()),
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self.backing, Backing::Table(_))
    }

    pub fn table(&self) -> Option<&FiniteTable> {
        match &self.backing {
            Backing::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn group_backing(&self) -> Option<(GroupInstance, &GroupElement)> {
        match &self.backing {
            Backing::Truncation { group, tau } => Some((*group, tau)),
            _ => None,
        }
    }

    pub fn zero(&self) -> TruncElement {
        match &self.backing {
            Backing::Truncation { group, .. } => TruncElement::Group(group.zero()),
            Backing::Table(_) => TruncElement::Index(0),
        }
    }

    pub fn tau(&self) -> TruncElement {
        match &self.backing {
            Backing::Truncation { tau, .. } => TruncElement::Group(tau.clone()),
            Backing::Table(t) => TruncElement::Index(t.n()),
        }
    }

    /// The least positive element, when one exists.
    pub fn least_positive(&self) -> Option<TruncElement> {
        match &self.backing {
            // tau > 0 guarantees the group's least positive element (when it
            // has one) is at most tau, hence in the interval.
            Backing::Truncation { group, .. } => group.least_positive().map(TruncElement::Group),
            Backing::Table(_) => Some(TruncElement::Index(1)),
        }
    }

    /// The predecessor of tau (the y with y + 1 = tau), when a least
    /// positive element exists.
    pub fn tau_pred(&self) -> Option<TruncElement> {
        match &self.backing {
            Backing::Truncation { group, tau } => {
                let one = group.least_positive()?;
                Some(TruncElement::Group(sub_unchecked(tau, &one)))
            }
            Backing::Table(t) => Some(TruncElement::Index(t.n() - 1)),
        }
    }

    pub fn contains(&self, x: &TruncElement) -> bool {
        match (&self.backing, x) {
            (Backing::Truncation { group, tau }, TruncElement::Group(e)) => {
                group.contains(e) && !e.is_negative() && e.partial_cmp(tau) != Some(Ordering::Greater)
            }
            (Backing::Table(t), TruncElement::Index(i)) => *i <= t.n(),
            _ => false,
        }
    }

    fn assert_member(&self, x: &TruncElement) {
        assert!(
            self.contains(x),
            "element {x} does not belong to {}",
            self.spec_string()
        );
    }

    pub fn cmp_elems(&self, a: &TruncElement, b: &TruncElement) -> Ordering {
        self.assert_member(a);
        self.assert_member(b);
        match (a, b) {
            (TruncElement::Group(x), TruncElement::Group(y)) => {
                x.partial_cmp(y).expect("same instance")
            }
            (TruncElement::Index(x), TruncElement::Index(y)) => x.cmp(y),
            _ => unreachable!("membership checked"),
        }
    }

    pub fn le(&self, a: &TruncElement, b: &TruncElement) -> bool {
        self.cmp_elems(a, b) != Ordering::Greater
    }

    pub fn lt(&self, a: &TruncElement, b: &TruncElement) -> bool {
        self.cmp_elems(a, b) == Ordering::Less
    }

    pub fn is_tau(&self, x: &TruncElement) -> bool {
        *x == self.tau()
    }

    /// Saturating addition: min(x ⊕ y, tau) for truncations, the table entry
    /// for tables.
    pub fn add(&self, x: &TruncElement, y: &TruncElement) -> TruncElement {
        self.assert_member(x);
        self.assert_member(y);
        match (&self.backing, x, y) {
            (Backing::Truncation { tau, .. }, TruncElement::Group(a), TruncElement::Group(b)) => {
                let sum = add_unchecked(a, b);
                if sum.partial_cmp(tau) == Some(Ordering::Greater) {
                    TruncElement::Group(tau.clone())
                } else {
                    TruncElement::Group(sum)
                }
            }
            (Backing::Table(t), TruncElement::Index(i), TruncElement::Index(j)) => {
                TruncElement::Index(t.get(*i, *j))
            }
            _ => unreachable!("membership checked"),
        }
    }

    /// Truncated subtraction y ∸ x: the unique z with x + z = y, defined for
    /// x <= y < tau. On a table that fails the uniqueness axioms this returns
    /// the least solution, or `DotminusUndefined` when none exists.
    pub fn dotminus(&self, y: &TruncElement, x: &TruncElement) -> Result<TruncElement, ToagError> {
        self.assert_member(x);
        self.assert_member(y);
        let tau = self.tau();
        if !(self.le(x, y) && self.lt(y, &tau)) {
            return Err(ToagError::DotminusDomain {
                y: y.to_string(),
                x: x.to_string(),
            });
        }
        match (&self.backing, y, x) {
            (Backing::Truncation { .. }, TruncElement::Group(b), TruncElement::Group(a)) => {
                Ok(TruncElement::Group(sub_unchecked(b, a)))
            }
            (Backing::Table(t), TruncElement::Index(j), TruncElement::Index(i)) => (0..=t.n())
                .find(|&z| t.get(*i, z) == *j)
                .map(TruncElement::Index)
                .ok_or_else(|| ToagError::DotminusUndefined {
                    x: x.to_string(),
                    y: y.to_string(),
                }),
            _ => unreachable!("membership checked"),
        }
    }

    /// tau ∸ x: the least z with x + z = tau. Total, with tau ∸ tau = 0.
    pub fn tau_dotminus(&self, x: &TruncElement) -> TruncElement {
        self.assert_member(x);
        match (&self.backing, x) {
            (Backing::Truncation { tau, .. }, TruncElement::Group(a)) => {
                TruncElement::Group(sub_unchecked(tau, a))
            }
            (Backing::Table(t), TruncElement::Index(i)) => {
                // Ascending scan; z = n always works, so this terminates.
                let z = (0..=t.n())
                    .find(|&z| t.get(*i, z) == t.n())
                    .expect("row ends at tau");
                TruncElement::Index(z)
            }
            _ => unreachable!("membership checked"),
        }
    }

    /// Which side of the case split a sum lands on. Defined for y, z < tau.
    pub fn addition_case(
        &self,
        y: &TruncElement,
        z: &TruncElement,
    ) -> Result<AdditionCase, ToagError> {
        let tau = self.tau();
        self.assert_member(y);
        self.assert_member(z);
        if self.is_tau(y) || self.is_tau(z) {
            return Err(ToagError::CaseAtTau {
                y: y.to_string(),
                z: z.to_string(),
            });
        }
        if self.lt(&self.add(y, z), &tau) {
            Ok(AdditionCase::Direct)
        } else {
            Ok(AdditionCase::Carry)
        }
    }

    /// Number of elements when the domain is finite and small enough to
    /// enumerate; `None` for infinite (or astronomically large) domains.
    pub fn domain_size(&self) -> Option<u64> {
        match &self.backing {
            Backing::Table(t) => Some(t.n() as u64 + 1),
            Backing::Truncation {
                group: GroupInstance::Integers,
                tau: GroupElement::Int(t),
            } => t.to_u64().and_then(|t| t.checked_add(1)),
            _ => None,
        }
    }

    /// The i-th element in order, for enumerable domains (see `domain_size`).
    pub fn element_at(&self, i: u64) -> TruncElement {
        match &self.backing {
            Backing::Table(_) => TruncElement::Index(i as usize),
            Backing::Truncation {
                group: GroupInstance::Integers,
                ..
            } => TruncElement::Group(GroupElement::Int(BigInt::from(i))),
            _ => panic!("element_at on a non-enumerable domain"),
        }
    }

    /// A random element of [0, tau]. Both endpoints come up with a small
    /// fixed probability so boundary behaviour is always exercised;
    /// otherwise coordinates are drawn from a window of half-width
    /// `DEFAULT_SAMPLE_BOUND` clipped to the interval.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> TruncElement {
        let roll = rng.gen_range(0u32..50);
        if roll == 0 {
            return self.zero();
        }
        if roll == 1 {
            return self.tau();
        }
        let bound = crate::group::DEFAULT_SAMPLE_BOUND;
        match &self.backing {
            Backing::Table(t) => TruncElement::Index(rng.gen_range(0..=t.n())),
            Backing::Truncation { group, tau } => {
                let e = match (group, tau) {
                    (GroupInstance::Integers, GroupElement::Int(t)) => {
                        GroupElement::Int(rng.gen_bigint_range(&BigInt::zero(), &(t + 1)))
                    }
                    (GroupInstance::Rationals, GroupElement::Rat(t)) => {
                        GroupElement::Rat(sample_rational_in(rng, t, bound))
                    }
                    (GroupInstance::LexZZ, GroupElement::LexZZ(a, b)) => {
                        let first = rng.gen_bigint_range(&BigInt::zero(), &(a + 1));
                        let second = sample_second_int(rng, &first, a, b, bound);
                        GroupElement::LexZZ(first, second)
                    }
                    (GroupInstance::LexQZ, GroupElement::LexQZ(q, b)) => {
                        let first = sample_rational_in(rng, q, bound);
                        let at_zero = first.is_zero() && q.is_zero();
                        let second = if at_zero {
                            rng.gen_bigint_range(&BigInt::zero(), &(b + 1))
                        } else if first.is_zero() {
                            rng.gen_bigint_range(&BigInt::zero(), &BigInt::from(bound + 1))
                        } else if &first == q {
                            rng.gen_bigint_range(&(b - BigInt::from(bound)), &(b + 1))
                        } else {
                            rng.gen_bigint_range(
                                &-BigInt::from(bound),
                                &BigInt::from(bound + 1),
                            )
                        };
                        GroupElement::LexQZ(first, second)
                    }
                    _ => unreachable!("tau matches its instance"),
                };
                TruncElement::Group(e)
            }
        }
    }
}

/// A rational drawn from [0, limit]: denominator d in [1, bound], numerator
/// uniform in [0, floor(limit * d)].
fn sample_rational_in<R: Rng>(rng: &mut R, limit: &BigRational, bound: u64) -> BigRational {
    if limit.is_zero() {
        return BigRational::zero();
    }
    let d = BigInt::from(rng.gen_range(1..=bound.max(1)));
    let hi = (limit.numer() * &d).div_floor(limit.denom());
    let num = rng.gen_bigint_range(&BigInt::zero(), &(hi + 1));
    BigRational::new(num, d)
}

/// Second coordinate for a lex pair whose first coordinate is already fixed:
/// clipped so the pair stays in [0, (a, b)].
fn sample_second_int<R: Rng>(
    rng: &mut R,
    first: &BigInt,
    a: &BigInt,
    b: &BigInt,
    bound: u64,
) -> BigInt {
    let w = BigInt::from(bound);
    if first.is_zero() && a.is_zero() {
        rng.gen_bigint_range(&BigInt::zero(), &(b + 1))
    } else if first.is_zero() {
        rng.gen_bigint_range(&BigInt::zero(), &(&w + 1))
    } else if first == a {
        rng.gen_bigint_range(&(b - &w), &(b + 1))
    } else {
        rng.gen_bigint_range(&-&w, &(&w + 1))
    }
}

impl TruncStructure {
    /// Parse an element in display notation (table elements are indices).
    pub fn parse_element(&self, s: &str) -> Result<TruncElement, ToagError> {
        let parsed = match &self.backing {
            Backing::Truncation { group, .. } => TruncElement::Group(group.parse_element(s)?),
            Backing::Table(_) => {
                let i: usize = s.trim().parse().map_err(|_| ToagError::Parse {
                    line: 0,
                    message: format!("expected a table index, got {s:?}"),
                })?;
                TruncElement::Index(i)
            }
        };
        if !self.contains(&parsed) {
            return Err(ToagError::Parse {
                line: 0,
                message: format!("{parsed} is outside [0, tau] of {}", self.spec_string()),
            });
        }
        Ok(parsed)
    }
}

/// The truncation of Z at tau — the workhorse example.
pub fn int_truncation(tau: i64) -> TruncStructure {
    TruncStructure::truncation(GroupInstance::Integers, GroupElement::int(tau))
        .expect("positive tau")
}
