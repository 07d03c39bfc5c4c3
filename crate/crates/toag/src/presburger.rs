//! Which truncated structures satisfy Presburger arithmetic, and how the
//! resulting models classify up to elementary equivalence. The decision
//! rests on two conditions — discreteness with successors, and Euclidean
//! division by every count — and the classification on the congruence data
//! of the penultimate element.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::extension::{embed, p_add, PElement};
use crate::group::{GroupElement, GroupInstance};
use crate::trunc::{ToagError, TruncElement, TruncStructure};

/// Default modulus ceiling for residue classification.
pub const DEFAULT_NMAX: u64 = 30;

/// Tuple budget used when a precondition has to be re-checked internally.
const GATE_BUDGET: u64 = 4_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PresburgerError {
    #[error("division count must be a positive machine integer, got {0}")]
    BadDivisor(u64),
    #[error("element {0} does not live in this structure")]
    ForeignElement(String),
    #[error("structure is not Presburger: {0}")]
    NotPresburger(String),
    #[error("signature is incoherent: {0}")]
    IncoherentSignature(String),
    #[error("no bundled instance realizes this signature: {0}")]
    Unrealizable(String),
    #[error(transparent)]
    Toag(#[from] ToagError),
}

/// Outcome of the discreteness-and-successors condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteReport {
    pub pass: bool,
    /// On failure: the offending elements — a positive non-successor, or a
    /// candidate least-positive element together with a smaller positive one.
    pub witness: Option<Vec<TruncElement>>,
    pub checks: u64,
    pub exhaustive: bool,
    /// Short machine-readable explanation of how the verdict was reached.
    pub note: String,
}

impl fmt::Display for DiscreteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DISCRETE {}", if self.pass { "PASS" } else { "FAIL" })?;
        if let Some(w) = &self.witness {
            let parts: Vec<String> = w.iter().map(|e| e.to_string()).collect();
            write!(f, " witness=({})", parts.join(","))?;
        }
        write!(f, " checks={} note={}", self.checks, self.note)
    }
}

/// Outcome of the division condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionReport {
    pub pass: bool,
    /// On failure: a dividend and count with no representation.
    pub witness: Option<(TruncElement, u64)>,
    pub checks: u64,
    pub exhaustive: bool,
}

impl fmt::Display for DivisionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DIVISION {}", if self.pass { "PASS" } else { "FAIL" })?;
        if let Some((x, n)) = &self.witness {
            write!(f, " witness=({x},n={n})")?;
        }
        write!(f, " checks={}", self.checks)
    }
}

/// Combined verdict of the two conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresburgerReport {
    pub pass: bool,
    /// True when the backing is infinite, so a passing verdict holds only up
    /// to the sampling budget.
    pub qualified: bool,
    pub discrete: DiscreteReport,
    pub division: DivisionReport,
    pub seed: u64,
}

impl fmt::Display for PresburgerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PRESBURGER {}", if self.pass { "PASS" } else { "FAIL" })?;
        if self.qualified {
            write!(f, " up-to-budget")?;
        }
        Ok(())
    }
}

fn one_element(t: &TruncStructure) -> Option<TruncElement> {
    t.least_positive()
}

/// Condition 1 of the Presburger characterisation: the order is discrete —
/// a least positive element 1 exists — and every positive x is y + 1 for
/// some y below it. Finite domains are swept exhaustively; infinite ones
/// get `budget` sampled spot checks on top of the structural facts.
pub fn is_discrete_with_successors(
    t: &TruncStructure,
    budget: u64,
    seed: u64,
) -> DiscreteReport {
    let one = match one_element(t) {
        Some(one) => one,
        None => {
            // Dense order: whatever candidate least-positive element one
            // offers, half of it is positive and smaller.
            let (group, tau) = t.group_backing().expect("tables always have a 1");
            let half = group
                .exact_divide(tau, 2)
                .expect("tau is a member")
                .expect("no least positive element means a divisible group");
            return DiscreteReport {
                pass: false,
                witness: Some(vec![t.tau(), TruncElement::Group(half)]),
                checks: 1,
                exhaustive: false,
                note: "no-least-positive-element".into(),
            };
        }
    };
    let successor_of = |x: &TruncElement| -> Option<TruncElement> {
        let y = if t.is_tau(x) {
            t.tau_pred()?
        } else {
            t.dotminus(x, &one).ok()?
        };
        (t.lt(&y, x) && t.add(&y, &one) == *x).then_some(y)
    };
    match t.domain_size() {
        Some(size) => {
            let bad = (1..size).find_map(|i| {
                let x = t.element_at(i);
                if successor_of(&x).is_none() {
                    Some(x)
                } else {
                    None
                }
            });
            DiscreteReport {
                pass: bad.is_none(),
                witness: bad.map(|x| vec![x]),
                checks: size - 1,
                exhaustive: true,
                note: "exhaustive".into(),
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd15c_0001);
            let mut bad = None;
            let mut checks = 0;
            'outer: for _ in 0..budget {
                let x = t.sample(&mut rng);
                if x == t.zero() {
                    continue;
                }
                checks += 1;
                if successor_of(&x).is_none() {
                    bad = Some(x);
                    break 'outer;
                }
            }
            DiscreteReport {
                pass: bad.is_none(),
                witness: bad.map(|x| vec![x]),
                checks,
                exhaustive: false,
                note: "structural-discrete-sampled".into(),
            }
        }
    }
}

/// Write x as n·y + m with m < n copies of the least positive element,
/// preferring representations where the sum never saturates, and among
/// those the smallest m, then the smallest y. When x = τ admits no exact
/// representation, the saturated pair (τ, 0) still solves the equation and
/// is returned; below τ saturation cannot help and the result is None.
pub fn euclidean_division(
    t: &TruncStructure,
    x: &TruncElement,
    n: u64,
) -> Result<Option<(TruncElement, u64)>, PresburgerError> {
    let n_i64: i64 = match n {
        0 => return Err(PresburgerError::BadDivisor(0)),
        _ => n
            .to_i64()
            .ok_or(PresburgerError::BadDivisor(n))?,
    };
    if !t.contains(x) {
        return Err(PresburgerError::ForeignElement(x.to_string()));
    }
    if let Some((group, _tau)) = t.group_backing() {
        let xg = match x {
            TruncElement::Group(g) => g.clone(),
            TruncElement::Index(_) => unreachable!("membership checked"),
        };
        match group.least_positive() {
            None => {
                // Divisible group: no copies of 1 to hand out, so m = 0 and
                // y = x/n exactly.
                let y = group
                    .exact_divide(&xg, n_i64)
                    .expect("membership checked")
                    .expect("divisible instance");
                return Ok(Some((TruncElement::Group(y), 0)));
            }
            Some(one) => {
                for m in 0..n {
                    let rest = group
                        .scalar_mul(&BigInt::from(m), &one)
                        .and_then(|mm| group.sub(&xg, &mm))
                        .expect("membership checked");
                    if rest.is_negative() {
                        break;
                    }
                    if let Some(y) = group
                        .exact_divide(&rest, n_i64)
                        .expect("membership checked")
                    {
                        return Ok(Some((TruncElement::Group(y), m)));
                    }
                }
            }
        }
    } else {
        // Table: decide exactness through the extension P, where saturation
        // is visible as an ω-coordinate carry.
        let one = t.least_positive().expect("tables have an element 1");
        let one_p = embed(t, &one).expect("member");
        let target = embed(t, x).expect("member");
        let size = t.domain_size().expect("table");
        let mut m_part: Option<PElement> = None;
        for m in 0..n {
            if m > 0 {
                let prev = m_part.take().expect("set on previous iteration");
                m_part = match p_add(t, &prev, &one_p) {
                    Ok(s) => Some(s),
                    Err(_) => break,
                };
            } else {
                m_part = Some(crate::extension::p_zero(t));
            }
            let base = m_part.clone().expect("just set");
            'next_y: for i in 0..size {
                let y = t.element_at(i);
                let y_p = match embed(t, &y) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                let mut total = base.clone();
                for _ in 0..n {
                    total = match p_add(t, &total, &y_p) {
                        Ok(s) => s,
                        Err(_) => continue 'next_y,
                    };
                }
                if total == target {
                    return Ok(Some((y, m)));
                }
            }
        }
    }
    if t.is_tau(x) {
        // n·τ + 0 = τ under saturation, always.
        return Ok(Some((t.tau(), 0)));
    }
    Ok(None)
}

/// Condition 2: euclidean_division succeeds everywhere. Exhaustive over
/// finite domains (all x, all n ≤ n_max); sampled x with cycling n
/// otherwise.
pub fn check_division(
    t: &TruncStructure,
    n_max: u64,
    budget: u64,
    seed: u64,
) -> DivisionReport {
    let n_max = n_max.max(1);
    match t.domain_size() {
        Some(size) => {
            let bad = (0..size * n_max)
                .into_par_iter()
                .find_map_first(|i| {
                    let x = t.element_at(i / n_max);
                    let n = i % n_max + 1;
                    match euclidean_division(t, &x, n) {
                        Ok(Some(_)) => None,
                        _ => Some((x, n)),
                    }
                });
            DivisionReport {
                pass: bad.is_none(),
                witness: bad,
                checks: size * n_max,
                exhaustive: true,
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1b1_0002);
            let samples: Vec<(TruncElement, u64)> = (0..budget)
                .map(|i| (t.sample(&mut rng), i % n_max + 1))
                .collect();
            let bad = samples
                .par_iter()
                .find_map_first(|(x, n)| match euclidean_division(t, x, *n) {
                    Ok(Some(_)) => None,
                    _ => Some((x.clone(), *n)),
                });
            DivisionReport {
                pass: bad.is_none(),
                witness: bad,
                checks: budget,
                exhaustive: false,
            }
        }
    }
}

/// The Presburger decision: both conditions together. Infinite backings get
/// a verdict qualified as holding up to the budget.
pub fn is_presburger_toag(
    t: &TruncStructure,
    n_max: u64,
    budget: u64,
    seed: u64,
) -> PresburgerReport {
    let discrete = is_discrete_with_successors(t, budget, seed);
    let division = if discrete.pass {
        check_division(t, n_max, budget, seed)
    } else {
        // Condition 2 is about counting copies of 1; without condition 1 it
        // is not even well-posed, so it is reported unchecked.
        DivisionReport {
            pass: false,
            witness: None,
            checks: 0,
            exhaustive: false,
        }
    };
    PresburgerReport {
        pass: discrete.pass && division.pass,
        qualified: t.domain_size().is_none(),
        discrete,
        division,
        seed,
    }
}

/// The elementary invariants of a Presburger truncation: whether τ−1 is a
/// standard natural number, which one if so, and its residue modulo every
/// n up to n_max.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSignature {
    pub standard: bool,
    /// τ−1 as a natural number; present exactly when standard.
    pub finite_value: Option<BigUint>,
    /// n ↦ (τ−1) mod n for 2 ≤ n ≤ n_max.
    pub residues: BTreeMap<u64, u64>,
    pub n_max: u64,
}

impl TypeSignature {
    /// Internal consistency: residues in range, divisor-compatible, and
    /// matching the finite value when standard.
    pub fn validate(&self) -> Result<(), PresburgerError> {
        if self.standard != self.finite_value.is_some() {
            return Err(PresburgerError::IncoherentSignature(
                "finite value must be present exactly when standard".into(),
            ));
        }
        for (&n, &r) in &self.residues {
            if n < 2 || n > self.n_max {
                return Err(PresburgerError::IncoherentSignature(format!(
                    "modulus {n} outside 2..={}",
                    self.n_max
                )));
            }
            if r >= n {
                return Err(PresburgerError::IncoherentSignature(format!(
                    "residue {r} not reduced modulo {n}"
                )));
            }
            if let Some(v) = &self.finite_value {
                if (v % n).to_u64() != Some(r) {
                    return Err(PresburgerError::IncoherentSignature(format!(
                        "residue {r} disagrees with value modulo {n}"
                    )));
                }
            }
        }
        for (&n, &rn) in &self.residues {
            for (&m, &rm) in &self.residues {
                if m > n && m % n == 0 && rm % n != rn {
                    return Err(PresburgerError::IncoherentSignature(format!(
                        "residues modulo {n} and {m} are incompatible"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for TypeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "standard={}", self.standard)?;
        match &self.finite_value {
            Some(v) => write!(f, " value={v}")?,
            None => write!(f, " value=-")?,
        }
        write!(f, " residues={{")?;
        for (i, (n, r)) in self.residues.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}:{r}")?;
        }
        write!(f, "}}")
    }
}

/// Standardness is structural: finite domains are standard outright, and a
/// lexicographic τ is standard exactly when its dominant coordinate
/// vanishes.
fn standardness(t: &TruncStructure) -> (bool, Option<BigUint>) {
    if let Some(table) = t.table() {
        return (true, Some(BigUint::from(table.n() as u64 - 1)));
    }
    let (_, tau) = t.group_backing().expect("not a table");
    match tau {
        GroupElement::Int(v) => {
            let v1: BigInt = v - 1;
            (true, Some(v1.to_biguint().expect("tau >= 1")))
        }
        GroupElement::LexZZ(a, b) => {
            if a.is_zero() {
                let v: BigInt = b - 1;
                (true, Some(v.to_biguint().expect("tau >= 1")))
            } else {
                (false, None)
            }
        }
        GroupElement::LexQZ(q, b) => {
            if q.is_zero() {
                let v: BigInt = b - 1;
                (true, Some(v.to_biguint().expect("tau >= 1")))
            } else {
                (false, None)
            }
        }
        GroupElement::Rat(_) => (false, None),
    }
}

/// Compute the invariants of a Presburger structure. The precondition is
/// re-checked with an internal fixed budget; a structure that fails it is
/// rejected rather than classified.
pub fn type_signature(t: &TruncStructure, n_max: u64) -> Result<TypeSignature, PresburgerError> {
    let gate = is_presburger_toag(t, n_max, GATE_BUDGET, 0);
    if !gate.pass {
        let reason = if !gate.discrete.pass {
            format!("{}", gate.discrete)
        } else {
            format!("{}", gate.division)
        };
        return Err(PresburgerError::NotPresburger(reason));
    }
    let pred = t.tau_pred().expect("discrete structure has tau - 1");
    let residues: BTreeMap<u64, u64> = (2..=n_max)
        .into_par_iter()
        .map(|n| {
            let (_, m) = euclidean_division(t, &pred, n)?
                .ok_or_else(|| {
                    PresburgerError::NotPresburger(format!(
                        "tau-1 admits no division by {n}"
                    ))
                })?;
            Ok((n, m))
        })
        .collect::<Result<_, PresburgerError>>()?;
    let (standard, finite_value) = standardness(t);
    let sig = TypeSignature {
        standard,
        finite_value,
        residues,
        n_max,
    };
    sig.validate()?;
    Ok(sig)
}

/// Outcome of comparing two structures' invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// True when either side is nonstandard, so residue agreement is only
    /// tested up to n_max.
    pub qualified: bool,
    pub left: TypeSignature,
    pub right: TypeSignature,
    pub mismatch: Option<String>,
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.equivalent {
            write!(f, "EQUIVALENT")?;
            if self.qualified {
                write!(f, " up-to-nmax={}", self.left.n_max)?;
            }
            Ok(())
        } else {
            write!(
                f,
                "NOT EQUIVALENT ({})",
                self.mismatch.as_deref().unwrap_or("mismatch")
            )
        }
    }
}

/// Two Presburger truncations are elementarily equivalent iff the
/// standardness flags agree, the finite values agree when standard, and
/// every residue up to n_max agrees.
pub fn elementarily_equivalent(
    t1: &TruncStructure,
    t2: &TruncStructure,
    n_max: u64,
) -> Result<EquivalenceReport, PresburgerError> {
    let left = type_signature(t1, n_max)?;
    let right = type_signature(t2, n_max)?;
    let mismatch = if left.standard != right.standard {
        Some("standard vs nonstandard".to_string())
    } else if left.finite_value != right.finite_value {
        Some(format!(
            "values {} vs {}",
            left.finite_value.as_ref().expect("standard"),
            right.finite_value.as_ref().expect("standard"),
        ))
    } else {
        left.residues.iter().find_map(|(n, r)| {
            let other = right.residues.get(n).copied();
            (other != Some(*r)).then(|| {
                format!(
                    "residue mod {n}: {r} vs {}",
                    other.map_or("absent".into(), |o| o.to_string())
                )
            })
        })
    };
    Ok(EquivalenceReport {
        equivalent: mismatch.is_none(),
        qualified: !left.standard || !right.standard,
        left,
        right,
        mismatch,
    })
}

/// Chinese-remainder combination of x ≡ r1 (mod m1) and x ≡ r2 (mod m2)
/// over arbitrary (not necessarily coprime) moduli.
fn crt_combine(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> Option<(BigInt, BigInt)> {
    let e = m1.extended_gcd(m2);
    let diff = r2 - r1;
    if !diff.is_multiple_of(&e.gcd) {
        return None;
    }
    let lcm = m1 / &e.gcd * m2;
    let step = (&diff / &e.gcd * &e.x).mod_floor(&(m2 / &e.gcd));
    let x = (r1 + m1 * step).mod_floor(&lcm);
    Some((x, lcm))
}

/// Build a structure with the given invariants. Standard signatures become
/// integer truncations [0, value+1]. Nonstandard ones need the residues to
/// come from an integer shift s — (τ−1) ≡ s−1 (mod n) throughout — and then
/// τ = (1, s) over the rationals-by-integers product realizes them; residue
/// families with no such s have no model among the bundled instances.
pub fn realize_signature(sig: &TypeSignature) -> Result<TruncStructure, PresburgerError> {
    sig.validate()?;
    if let Some(v) = &sig.finite_value {
        let tau: BigInt = BigInt::from(v.clone()) + 1;
        return Ok(TruncStructure::truncation(
            GroupInstance::Integers,
            GroupElement::Int(tau),
        )?);
    }
    // Solve s - 1 ≡ r (mod n) across the residue family.
    let mut acc = (BigInt::zero(), BigInt::one());
    for (&n, &r) in &sig.residues {
        let (x, m) = crt_combine(
            &acc.0,
            &acc.1,
            &BigInt::from(r),
            &BigInt::from(n),
        )
        .ok_or_else(|| {
            PresburgerError::Unrealizable(format!(
                "residues are not of integer-shift form (conflict at modulus {n})"
            ))
        })?;
        acc = (x, m);
    }
    let s: BigInt = (acc.0 + BigInt::one()).mod_floor(&acc.1);
    Ok(TruncStructure::truncation(
        GroupInstance::LexQZ,
        GroupElement::lex_qz(1, 1, s),
    )?)
}
