//! Extending a truncated structure back to an ordered abelian group. The
//! non-negative cone is P = ω × [0,τ) under lexicographic order, with a
//! carrying addition whose correctness is exactly what the conditional
//! subtraction axioms buy; the group itself is the usual formal-difference
//! completion of P.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::trunc::{AdditionCase, ToagError, TruncElement, TruncStructure};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtensionError {
    #[error("element {0} does not live in this structure")]
    ForeignElement(String),
    #[error("second coordinate must lie strictly below tau, got {0}")]
    CoordinateAtTau(String),
    #[error("cancellation requires the first element to sit at or below the second")]
    NotBelow,
    #[error("{law} failed at {detail}")]
    LawViolation { law: &'static str, detail: String },
    #[error(transparent)]
    Toag(#[from] ToagError),
}

/// An element ⟨k,x⟩ of the cone P: k counts whole copies of [0,τ) already
/// consumed, x is the remainder, strictly below τ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PElement {
    pub k: BigUint,
    pub x: TruncElement,
}

impl PElement {
    /// Build ⟨k,x⟩, insisting that x is a member strictly below τ.
    pub fn new(
        t: &TruncStructure,
        k: impl Into<BigUint>,
        x: TruncElement,
    ) -> Result<PElement, ExtensionError> {
        if !t.contains(&x) {
            return Err(ExtensionError::ForeignElement(x.to_string()));
        }
        if t.is_tau(&x) {
            return Err(ExtensionError::CoordinateAtTau(x.to_string()));
        }
        Ok(PElement { k: k.into(), x })
    }
}

impl fmt::Display for PElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.k, self.x)
    }
}

/// ⟨0,0⟩, the neutral element of P.
pub fn p_zero(t: &TruncStructure) -> PElement {
    PElement {
        k: BigUint::zero(),
        x: t.zero(),
    }
}

/// τ_P = ⟨1,0⟩, the image of the truncation point.
pub fn p_tau(t: &TruncStructure) -> PElement {
    PElement {
        k: BigUint::one(),
        x: t.zero(),
    }
}

fn guard_member(t: &TruncStructure, a: &PElement) -> Result<(), ExtensionError> {
    if !t.contains(&a.x) || t.is_tau(&a.x) {
        return Err(ExtensionError::ForeignElement(a.to_string()));
    }
    Ok(())
}

/// ⟨k,y⟩ ⊕ ⟨l,z⟩: add the remainders; when they overrun τ, carry one into
/// the ω coordinate and keep y ∸ (τ∸z) as the new remainder.
pub fn p_add(t: &TruncStructure, a: &PElement, b: &PElement) -> Result<PElement, ExtensionError> {
    guard_member(t, a)?;
    guard_member(t, b)?;
    match t.addition_case(&a.x, &b.x)? {
        AdditionCase::Direct => Ok(PElement {
            k: &a.k + &b.k,
            x: t.add(&a.x, &b.x),
        }),
        AdditionCase::Carry => {
            let rem = t.dotminus(&a.x, &t.tau_dotminus(&b.x))?;
            Ok(PElement {
                k: &a.k + &b.k + 1u32,
                x: rem,
            })
        }
    }
}

/// Lexicographic comparison on (k, x).
pub fn p_cmp(
    t: &TruncStructure,
    a: &PElement,
    b: &PElement,
) -> Result<Ordering, ExtensionError> {
    guard_member(t, a)?;
    guard_member(t, b)?;
    match a.k.cmp(&b.k) {
        Ordering::Equal => Ok(t.cmp_elems(&a.x, &b.x)),
        ord => Ok(ord),
    }
}

/// For a ≤ b, the element c with a ⊕ c = b, by the cancellation case split:
/// equal ω coordinates subtract remainders; otherwise either the remainders
/// subtract cleanly or one carry is given back as τ∸(x∸y).
pub fn p_cancel_witness(
    t: &TruncStructure,
    a: &PElement,
    b: &PElement,
) -> Result<PElement, ExtensionError> {
    if p_cmp(t, a, b)? == Ordering::Greater {
        return Err(ExtensionError::NotBelow);
    }
    let (x, y) = (&a.x, &b.x);
    if a.k == b.k {
        return PElement::new(t, BigUint::zero(), t.dotminus(y, x)?);
    }
    let gap = &b.k - &a.k;
    if t.le(x, y) {
        PElement::new(t, gap, t.dotminus(y, x)?)
    } else {
        let rem = t.tau_dotminus(&t.dotminus(x, y)?);
        PElement::new(t, gap - 1u32, rem)
    }
}

/// The order embedding of [0,τ] into [⟨0,0⟩, τ_P]: x goes to ⟨0,x⟩, τ to
/// ⟨1,0⟩.
pub fn embed(t: &TruncStructure, x: &TruncElement) -> Result<PElement, ExtensionError> {
    if !t.contains(x) {
        return Err(ExtensionError::ForeignElement(x.to_string()));
    }
    if t.is_tau(x) {
        Ok(p_tau(t))
    } else {
        Ok(PElement {
            k: BigUint::zero(),
            x: x.clone(),
        })
    }
}

/// Outcome of checking that embed carries the truncated structure onto the
/// initial segment [⟨0,0⟩, τ_P] of P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbedReport {
    pub pass: bool,
    /// Pair on which order or addition transport failed.
    pub witness: Option<(TruncElement, TruncElement)>,
    pub pairs: u64,
    pub exhaustive: bool,
    pub seed: u64,
}

impl fmt::Display for EmbedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EMBEDDING {}", if self.pass { "PASS" } else { "FAIL" })?;
        if let Some((a, b)) = &self.witness {
            write!(f, " witness=({a},{b})")?;
        }
        write!(f, " pairs={} seed={}", self.pairs, self.seed)
    }
}

/// Check, over element pairs, that embed preserves order both ways and that
/// x+y maps to min(embed(x) ⊕ embed(y), τ_P): addition in the structure is
/// the addition induced by truncating P at τ_P. (Every element of P at or
/// below ⟨1,0⟩ is ⟨0,x⟩ or ⟨1,0⟩ itself, so the map is onto that segment by
/// construction; the pair sweep carries the computational content.)
pub fn verify_embedding(t: &TruncStructure, budget: u64, seed: u64) -> EmbedReport {
    let pair_ok = |x: &TruncElement, y: &TruncElement| -> bool {
        let (ex, ey) = match (embed(t, x), embed(t, y)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return false,
        };
        let order_ok = match p_cmp(t, &ex, &ey) {
            Ok(ord) => ord == t.cmp_elems(x, y),
            Err(_) => false,
        };
        if !order_ok {
            return false;
        }
        let sum = match p_add(t, &ex, &ey) {
            Ok(s) => s,
            Err(_) => return false,
        };
        let tp = p_tau(t);
        let truncated = match p_cmp(t, &sum, &tp) {
            Ok(Ordering::Greater) => tp,
            Ok(_) => sum,
            Err(_) => return false,
        };
        match embed(t, &t.add(x, y)) {
            Ok(image) => image == truncated,
            Err(_) => false,
        }
    };
    match t.domain_size() {
        Some(size) if size.checked_mul(size).is_some_and(|p| p <= budget) => {
            let total = size * size;
            let found = (0..total)
                .into_par_iter()
                .find_map_first(|i| {
                    let x = t.element_at(i / size);
                    let y = t.element_at(i % size);
                    if pair_ok(&x, &y) {
                        None
                    } else {
                        Some((x, y))
                    }
                });
            EmbedReport {
                pass: found.is_none(),
                witness: found,
                pairs: total,
                exhaustive: true,
                seed,
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe01b_ed01);
            let pairs: Vec<(TruncElement, TruncElement)> = (0..budget)
                .map(|_| (t.sample(&mut rng), t.sample(&mut rng)))
                .collect();
            let found = pairs
                .par_iter()
                .find_map_first(|(x, y)| {
                    if pair_ok(x, y) {
                        None
                    } else {
                        Some((x.clone(), y.clone()))
                    }
                });
            EmbedReport {
                pass: found.is_none(),
                witness: found,
                pairs: budget,
                exhaustive: false,
                seed,
            }
        }
    }
}

/// Which branch of the associativity case analysis a triple lands in, read
/// off a ⊕ (b ⊕ c) with remainders (x,y,z) = (a.x, b.x, c.x): whether (y,z)
/// carries, whether x carries against that result, and — when the branches
/// disagree — whether (y,x) carries and where z lands against the leftover.
/// Five of the eleven branches are ruled out by the axioms; seeing one is a
/// counterexample, never a gap in the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssocPath {
    DirectDirect,
    DirectCarryDirect,
    DirectCarryCarryLow,
    DirectCarryCarryHigh,
    CarryDirectDirectLow,
    CarryDirectDirectHigh,
    CarryDirectCarryLow,
    CarryDirectCarryHigh,
    CarryCarryDirect,
    CarryCarryCarryLow,
    CarryCarryCarryHigh,
}

impl AssocPath {
    pub const ALL: [AssocPath; 11] = [
        AssocPath::DirectDirect,
        AssocPath::DirectCarryDirect,
        AssocPath::DirectCarryCarryLow,
        AssocPath::DirectCarryCarryHigh,
        AssocPath::CarryDirectDirectLow,
        AssocPath::CarryDirectDirectHigh,
        AssocPath::CarryDirectCarryLow,
        AssocPath::CarryDirectCarryHigh,
        AssocPath::CarryCarryDirect,
        AssocPath::CarryCarryCarryLow,
        AssocPath::CarryCarryCarryHigh,
    ];

    /// Whether any triple in any structure satisfying the axioms can land
    /// here; the other five branches each contradict one of the
    /// conditional-subtraction axioms.
    pub fn reachable(self) -> bool {
        matches!(
            self,
            AssocPath::DirectDirect
                | AssocPath::DirectCarryDirect
                | AssocPath::DirectCarryCarryLow
                | AssocPath::CarryDirectDirectHigh
                | AssocPath::CarryDirectCarryLow
                | AssocPath::CarryCarryCarryHigh
        )
    }
}

impl fmt::Display for AssocPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AssocPath::DirectDirect => "direct-direct",
            AssocPath::DirectCarryDirect => "direct-carry-direct",
            AssocPath::DirectCarryCarryLow => "direct-carry-carry-low",
            AssocPath::DirectCarryCarryHigh => "direct-carry-carry-high",
            AssocPath::CarryDirectDirectLow => "carry-direct-direct-low",
            AssocPath::CarryDirectDirectHigh => "carry-direct-direct-high",
            AssocPath::CarryDirectCarryLow => "carry-direct-carry-low",
            AssocPath::CarryDirectCarryHigh => "carry-direct-carry-high",
            AssocPath::CarryCarryDirect => "carry-carry-direct",
            AssocPath::CarryCarryCarryLow => "carry-carry-carry-low",
            AssocPath::CarryCarryCarryHigh => "carry-carry-carry-high",
        };
        f.write_str(s)
    }
}

/// Classify the triple (x,y,z) of remainders — all strictly below τ — by
/// the branch the computation of x ⊕ (y ⊕ z) takes.
pub fn classify_assoc_path(
    t: &TruncStructure,
    x: &TruncElement,
    y: &TruncElement,
    z: &TruncElement,
) -> Result<AssocPath, ExtensionError> {
    let tau = t.tau();
    let inner = t.addition_case(y, z)?;
    let rc = match inner {
        AdditionCase::Direct => t.add(y, z),
        AdditionCase::Carry => t.dotminus(y, &t.tau_dotminus(z))?,
    };
    let outer = t.addition_case(x, &rc)?;
    if inner == AdditionCase::Direct && outer == AdditionCase::Direct {
        return Ok(AssocPath::DirectDirect);
    }
    let swapped = t.addition_case(y, x)?;
    match (inner, outer, swapped) {
        (AdditionCase::Direct, AdditionCase::Carry, AdditionCase::Direct) => {
            Ok(AssocPath::DirectCarryDirect)
        }
        (AdditionCase::Carry, AdditionCase::Carry, AdditionCase::Direct) => {
            Ok(AssocPath::CarryCarryDirect)
        }
        (AdditionCase::Carry, AdditionCase::Direct, AdditionCase::Direct) => {
            let s = t.add(z, &t.add(y, x));
            if t.lt(&s, &tau) {
                Ok(AssocPath::CarryDirectDirectLow)
            } else {
                Ok(AssocPath::CarryDirectDirectHigh)
            }
        }
        (_, _, AdditionCase::Carry) => {
            let leftover = t.dotminus(y, &t.tau_dotminus(x))?;
            let low = t.lt(&t.add(z, &leftover), &tau);
            Ok(match (inner, outer, low) {
                (AdditionCase::Direct, AdditionCase::Carry, true) => {
                    AssocPath::DirectCarryCarryLow
                }
                (AdditionCase::Direct, AdditionCase::Carry, false) => {
                    AssocPath::DirectCarryCarryHigh
                }
                (AdditionCase::Carry, AdditionCase::Direct, true) => {
                    AssocPath::CarryDirectCarryLow
                }
                (AdditionCase::Carry, AdditionCase::Direct, false) => {
                    AssocPath::CarryDirectCarryHigh
                }
                (AdditionCase::Carry, AdditionCase::Carry, true) => {
                    AssocPath::CarryCarryCarryLow
                }
                (AdditionCase::Carry, AdditionCase::Carry, false) => {
                    AssocPath::CarryCarryCarryHigh
                }
                (AdditionCase::Direct, AdditionCase::Direct, _) => unreachable!(),
            })
        }
        (AdditionCase::Direct, AdditionCase::Direct, _) => unreachable!(),
    }
}

/// Tally of the monoid-law verification on P.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLawSummary {
    /// Elements in the working pool (the whole slab ω ≤ kmax × [0,τ) when
    /// the domain is finite).
    pub pool: u64,
    pub comm_pairs: u64,
    pub assoc_triples: u64,
    pub mono_quads: u64,
    pub cancel_pairs: u64,
    pub cancellative_triples: u64,
    /// How many associativity triples landed in each branch of the case
    /// analysis.
    pub path_counts: BTreeMap<AssocPath, u64>,
    /// True when every tuple family was fully enumerated.
    pub exhaustive: bool,
    pub seed: u64,
}

impl PLawSummary {
    /// Branches that were hit despite being ruled out by the axioms.
    pub fn impossible_paths_hit(&self) -> Vec<AssocPath> {
        self.path_counts
            .iter()
            .filter(|(p, &c)| !p.reachable() && c > 0)
            .map(|(p, _)| *p)
            .collect()
    }
}

fn sample_p(t: &TruncStructure, rng: &mut ChaCha8Rng, kmax: u64) -> PElement {
    let k = rng.gen_range(0..=kmax);
    let mut x = t.zero();
    for _ in 0..64 {
        let c = t.sample(rng);
        if !t.is_tau(&c) {
            x = c;
            break;
        }
    }
    PElement {
        k: BigUint::from(k),
        x,
    }
}

/// The full slab ω ≤ kmax over a finite domain, in lexicographic order;
/// None when the domain is infinite.
pub fn p_pool(t: &TruncStructure, kmax: u64) -> Option<Vec<PElement>> {
    let size = t.domain_size()?;
    let below = size - 1; // τ itself is excluded; τ > 0 keeps this positive
    let mut pool = Vec::with_capacity(((kmax + 1) * below) as usize);
    for k in 0..=kmax {
        for i in 0..below {
            pool.push(PElement {
                k: BigUint::from(k),
                x: t.element_at(i),
            });
        }
    }
    Some(pool)
}

/// Index tuples to feed a law check: the whole cube when it fits the
/// budget, otherwise `budget` seeded draws.
fn index_tuples(
    pool_len: usize,
    arity: u32,
    budget: u64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<usize>>, bool) {
    let n = pool_len as u128;
    let total = n.pow(arity);
    if total <= budget as u128 {
        let mut out = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; arity as usize];
        'outer: loop {
            out.push(idx.clone());
            for slot in (0..arity as usize).rev() {
                idx[slot] += 1;
                if idx[slot] < pool_len {
                    continue 'outer;
                }
                idx[slot] = 0;
            }
            break;
        }
        (out, true)
    } else {
        let out = (0..budget)
            .map(|_| {
                (0..arity)
                    .map(|_| rng.gen_range(0..pool_len))
                    .collect()
            })
            .collect();
        (out, false)
    }
}

/// Verify on P everything the extension construction promises of it:
/// commutativity, associativity (tallying the case-analysis branches),
/// monotonicity of ⊕, correctness of the cancellation witness, and
/// cancellativity. ω coordinates range over 0..=kmax. A violation is
/// returned as an error carrying the offending elements.
pub fn verify_p_laws(
    t: &TruncStructure,
    kmax: u64,
    budget: u64,
    seed: u64,
) -> Result<PLawSummary, ExtensionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70a6_1a35);
    let (pool, pool_exhaustive) = match p_pool(t, kmax) {
        Some(pool) => (pool, true),
        None => {
            let size = budget.clamp(1, 512);
            let pool = (0..size).map(|_| sample_p(t, &mut rng, kmax)).collect();
            (pool, false)
        }
    };
    let mut exhaustive = pool_exhaustive;

    // Commutativity: a ⊕ b = b ⊕ a.
    let (pairs, ex) = index_tuples(pool.len(), 2, budget, &mut rng);
    exhaustive &= ex;
    let comm_pairs = pairs.len() as u64;
    if let Some(err) = pairs
        .par_iter()
        .find_map_first(|idx| {
            let (a, b) = (&pool[idx[0]], &pool[idx[1]]);
            match (p_add(t, a, b), p_add(t, b, a)) {
                (Ok(l), Ok(r)) if l == r => None,
                _ => Some(ExtensionError::LawViolation {
                    law: "commutativity",
                    detail: format!("a={a} b={b}"),
                }),
            }
        })
    {
        return Err(err);
    }

    // Associativity, with branch classification.
    let (triples, ex) = index_tuples(pool.len(), 3, budget, &mut rng);
    exhaustive &= ex;
    let assoc_triples = triples.len() as u64;
    if let Some(err) = triples
        .par_iter()
        .find_map_first(|idx| {
            let (a, b, c) = (&pool[idx[0]], &pool[idx[1]], &pool[idx[2]]);
            let left = p_add(t, &p_add(t, a, b).ok()?, c).ok();
            let right = p_add(t, a, &p_add(t, b, c).ok()?).ok();
            if left.is_some() && left == right {
                return None;
            }
            Some(ExtensionError::LawViolation {
                law: "associativity",
                detail: format!("a={a} b={b} c={c}"),
            })
        })
        .or_else(|| {
            // p_add errors short-circuited through ok()? above; surface them
            triples.par_iter().find_map_first(|idx| {
                let (a, b, c) = (&pool[idx[0]], &pool[idx[1]], &pool[idx[2]]);
                let total = p_add(t, a, b)
                    .and_then(|ab| p_add(t, &ab, c))
                    .and(p_add(t, b, c).and_then(|bc| p_add(t, a, &bc)));
                match total {
                    Ok(_) => None,
                    Err(_) => Some(ExtensionError::LawViolation {
                        law: "associativity",
                        detail: format!("a={a} b={b} c={c} (addition not defined)"),
                    }),
                }
            })
        })
    {
        return Err(err);
    }
    let path_counts: BTreeMap<AssocPath, u64> = triples
        .par_iter()
        .try_fold(BTreeMap::new, |mut acc, idx| {
            let (a, b, c) = (&pool[idx[0]], &pool[idx[1]], &pool[idx[2]]);
            let path = classify_assoc_path(t, &a.x, &b.x, &c.x)?;
            *acc.entry(path).or_insert(0u64) += 1;
            Ok::<_, ExtensionError>(acc)
        })
        .try_reduce(BTreeMap::new, |mut l, r| {
            for (k, v) in r {
                *l.entry(k).or_insert(0) += v;
            }
            Ok(l)
        })?;

    // Monotonicity: a ≤ b, c ≤ d imply a ⊕ c ≤ b ⊕ d.
    let (quads, ex) = index_tuples(pool.len(), 4, budget, &mut rng);
    exhaustive &= ex;
    let mono_quads = quads.len() as u64;
    if let Some(err) = quads
        .par_iter()
        .find_map_first(|idx| {
            let (a, b) = (&pool[idx[0]], &pool[idx[1]]);
            let (c, d) = (&pool[idx[2]], &pool[idx[3]]);
            let ok = (|| -> Result<bool, ExtensionError> {
                if p_cmp(t, a, b)? == Ordering::Greater
                    || p_cmp(t, c, d)? == Ordering::Greater
                {
                    return Ok(true);
                }
                Ok(p_cmp(t, &p_add(t, a, c)?, &p_add(t, b, d)?)? != Ordering::Greater)
            })();
            match ok {
                Ok(true) => None,
                _ => Some(ExtensionError::LawViolation {
                    law: "monotonicity",
                    detail: format!("a={a} b={b} c={c} d={d}"),
                }),
            }
        })
    {
        return Err(err);
    }

    // Cancellation witnesses: for a ≤ b, a ⊕ witness = b.
    let cancel_pairs = pairs.len() as u64;
    if let Some(err) = pairs
        .par_iter()
        .find_map_first(|idx| {
            let (a, b) = (&pool[idx[0]], &pool[idx[1]]);
            let ok = (|| -> Result<bool, ExtensionError> {
                if p_cmp(t, a, b)? == Ordering::Greater {
                    return Ok(true);
                }
                let w = p_cancel_witness(t, a, b)?;
                Ok(p_add(t, a, &w)? == *b)
            })();
            match ok {
                Ok(true) => None,
                _ => Some(ExtensionError::LawViolation {
                    law: "cancellation",
                    detail: format!("a={a} b={b}"),
                }),
            }
        })
    {
        return Err(err);
    }

    // Cancellativity: a ⊕ c = a ⊕ c' forces c = c'.
    let cancellative_triples = triples.len() as u64;
    if let Some(err) = triples
        .par_iter()
        .find_map_first(|idx| {
            let (a, c, c2) = (&pool[idx[0]], &pool[idx[1]], &pool[idx[2]]);
            match (p_add(t, a, c), p_add(t, a, c2)) {
                (Ok(l), Ok(r)) if l == r && c != c2 => {
                    Some(ExtensionError::LawViolation {
                        law: "cancellativity",
                        detail: format!("a={a} c={c} c'={c2}"),
                    })
                }
                _ => None,
            }
        })
    {
        return Err(err);
    }

    Ok(PLawSummary {
        pool: pool.len() as u64,
        comm_pairs,
        assoc_triples,
        mono_quads,
        cancel_pairs,
        cancellative_triples,
        path_counts,
        exhaustive,
        seed,
    })
}

/// A formal difference pos ⊖ neg of cone elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionElement {
    pub pos: PElement,
    pub neg: PElement,
}

impl fmt::Display for CompletionElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.pos, self.neg)
    }
}

/// The ordered abelian group completing P by formal differences. Operations
/// assume the underlying structure satisfies the axioms (feed it a broken
/// table and they may panic where subtraction stops being defined); run the
/// axiom checks first when in doubt.
#[derive(Debug, Clone)]
pub struct Completion {
    t: TruncStructure,
}

impl Completion {
    pub fn new(t: TruncStructure) -> Completion {
        Completion { t }
    }

    pub fn structure(&self) -> &TruncStructure {
        &self.t
    }

    pub fn zero(&self) -> CompletionElement {
        CompletionElement {
            pos: p_zero(&self.t),
            neg: p_zero(&self.t),
        }
    }

    /// P sits inside as the non-negative cone: p ↦ p ⊖ 0.
    pub fn from_p(&self, p: PElement) -> CompletionElement {
        CompletionElement {
            pos: p,
            neg: p_zero(&self.t),
        }
    }

    /// The original [0,τ] composed through P.
    pub fn embed_trunc(&self, x: &TruncElement) -> Result<CompletionElement, ExtensionError> {
        Ok(self.from_p(embed(&self.t, x)?))
    }

    fn expect_add(&self, a: &PElement, b: &PElement) -> PElement {
        p_add(&self.t, a, b).expect("completion arithmetic needs the axioms to hold")
    }

    pub fn add(&self, a: &CompletionElement, b: &CompletionElement) -> CompletionElement {
        CompletionElement {
            pos: self.expect_add(&a.pos, &b.pos),
            neg: self.expect_add(&a.neg, &b.neg),
        }
    }

    pub fn neg(&self, a: &CompletionElement) -> CompletionElement {
        CompletionElement {
            pos: a.neg.clone(),
            neg: a.pos.clone(),
        }
    }

    pub fn sub(&self, a: &CompletionElement, b: &CompletionElement) -> CompletionElement {
        self.add(a, &self.neg(b))
    }

    /// Equality of formal differences by cross sums.
    pub fn eq(&self, a: &CompletionElement, b: &CompletionElement) -> bool {
        self.expect_add(&a.pos, &b.neg) == self.expect_add(&b.pos, &a.neg)
    }

    pub fn cmp(&self, a: &CompletionElement, b: &CompletionElement) -> Ordering {
        let l = self.expect_add(&a.pos, &b.neg);
        let r = self.expect_add(&b.pos, &a.neg);
        p_cmp(&self.t, &l, &r).expect("completion arithmetic needs the axioms to hold")
    }

    pub fn is_nonnegative(&self, a: &CompletionElement) -> bool {
        self.cmp(a, &self.zero()) != Ordering::Less
    }

    /// Canonical representative: one side reduced to ⟨0,0⟩ via a
    /// cancellation witness.
    pub fn normalize(&self, a: &CompletionElement) -> CompletionElement {
        let zero = p_zero(&self.t);
        if p_cmp(&self.t, &a.neg, &a.pos)
            .expect("completion arithmetic needs the axioms to hold")
            != Ordering::Greater
        {
            let d = p_cancel_witness(&self.t, &a.neg, &a.pos)
                .expect("completion arithmetic needs the axioms to hold");
            CompletionElement { pos: d, neg: zero }
        } else {
            let d = p_cancel_witness(&self.t, &a.pos, &a.neg)
                .expect("completion arithmetic needs the axioms to hold");
            CompletionElement { pos: zero, neg: d }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trunc::{int_truncation, FiniteTable};
    use num_bigint::BigInt;

    fn pe(t: &TruncStructure, k: u64, x: i64) -> PElement {
        PElement::new(t, BigUint::from(k), t.parse_element(&x.to_string()).unwrap()).unwrap()
    }

    #[test]
    fn p_add_direct_and_carry_cases() {
        let t = int_truncation(5);
        assert_eq!(p_add(&t, &pe(&t, 0, 2), &pe(&t, 0, 2)).unwrap(), pe(&t, 0, 4));
        assert_eq!(p_add(&t, &pe(&t, 1, 3), &pe(&t, 2, 4)).unwrap(), pe(&t, 4, 2));
        assert_eq!(p_add(&t, &pe(&t, 0, 3), &pe(&t, 0, 2)).unwrap(), p_tau(&t));
    }

    #[test]
    fn p_cmp_is_lexicographic() {
        let t = int_truncation(5);
        assert_eq!(p_cmp(&t, &pe(&t, 0, 4), &p_tau(&t)).unwrap(), Ordering::Less);
        assert_eq!(p_cmp(&t, &pe(&t, 2, 1), &pe(&t, 2, 1)).unwrap(), Ordering::Equal);
        assert_eq!(p_cmp(&t, &pe(&t, 3, 0), &pe(&t, 2, 4)).unwrap(), Ordering::Greater);
    }

    #[test]
    fn cancel_witness_round_trips() {
        let t = int_truncation(5);
        let w = p_cancel_witness(&t, &pe(&t, 0, 4), &pe(&t, 2, 1)).unwrap();
        assert_eq!(w, pe(&t, 1, 2));
        assert_eq!(p_add(&t, &pe(&t, 0, 4), &w).unwrap(), pe(&t, 2, 1));

        assert_eq!(
            p_cancel_witness(&t, &pe(&t, 1, 2), &pe(&t, 1, 4)).unwrap(),
            pe(&t, 0, 2)
        );
        assert_eq!(
            p_cancel_witness(&t, &pe(&t, 0, 1), &pe(&t, 2, 3)).unwrap(),
            pe(&t, 2, 2)
        );
        assert!(matches!(
            p_cancel_witness(&t, &pe(&t, 2, 3), &pe(&t, 0, 1)),
            Err(ExtensionError::NotBelow)
        ));
    }

    #[test]
    fn cancel_witness_round_trips_everywhere_small() {
        let t = int_truncation(6);
        let pool = p_pool(&t, 3).unwrap();
        for a in &pool {
            for b in &pool {
                if p_cmp(&t, a, b).unwrap() != Ordering::Greater {
                    let w = p_cancel_witness(&t, a, b).unwrap();
                    assert_eq!(p_add(&t, a, &w).unwrap(), *b, "a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn embedding_map_hits_the_right_images() {
        let t = int_truncation(5);
        let three = t.parse_element("3").unwrap();
        assert_eq!(embed(&t, &three).unwrap(), pe(&t, 0, 3));
        assert_eq!(embed(&t, &t.tau()).unwrap(), p_tau(&t));
        assert_eq!(embed(&t, &t.zero()).unwrap(), p_zero(&t));
    }

    #[test]
    fn element_rendering() {
        let t = int_truncation(5);
        assert_eq!(pe(&t, 4, 2).to_string(), "<4,2>");
        let c = CompletionElement {
            pos: pe(&t, 2, 1),
            neg: pe(&t, 0, 4),
        };
        assert_eq!(c.to_string(), "<2,1>-<0,4>");
    }

    #[test]
    fn pelement_validation() {
        let t = int_truncation(5);
        let tau = t.tau();
        assert!(matches!(
            PElement::new(&t, 0u32, tau),
            Err(ExtensionError::CoordinateAtTau(_))
        ));
        let q = TruncStructure::parse_spec("Q:tau=1").unwrap();
        let foreign = q.parse_element("1/2").unwrap();
        assert!(matches!(
            PElement::new(&t, 0u32, foreign),
            Err(ExtensionError::ForeignElement(_))
        ));
    }

    #[test]
    fn embedding_verifies_on_small_structures() {
        let t = int_truncation(7);
        let report = verify_embedding(&t, 100_000, 0);
        assert!(report.pass, "{report}");
        assert!(report.exhaustive);
        assert_eq!(report.pairs, 64);

        let sat = TruncStructure::from_table(FiniteTable::saturating(4));
        let report = verify_embedding(&sat, 100_000, 0);
        assert!(report.pass, "{report}");
        assert_eq!(report.pairs, 25);
    }

    #[test]
    fn embedding_verifies_sampled_on_infinite_structures() {
        for spec in ["Q:tau=1", "ZZ:tau=(1,0)", "QZ:tau=(1,0)"] {
            let t = TruncStructure::parse_spec(spec).unwrap();
            let report = verify_embedding(&t, 3_000, 7);
            assert!(report.pass, "{spec}: {report}");
            assert!(!report.exhaustive);
            assert_eq!(report.pairs, 3_000);
        }
    }

    #[test]
    fn integer_oracle_agrees_with_p_arithmetic() {
        // phi(<k,x>) = k*tau + x turns ⊕ into ordinary addition.
        let tau = 5i64;
        let t = int_truncation(tau);
        let phi = |p: &PElement| -> BigInt {
            let k: BigInt = p.k.clone().into();
            let x = match &p.x {
                TruncElement::Group(crate::group::GroupElement::Int(n)) => n.clone(),
                _ => unreachable!(),
            };
            k * tau + x
        };
        let pool = p_pool(&t, 4).unwrap();
        for a in &pool {
            for b in &pool {
                let sum = p_add(&t, a, b).unwrap();
                assert_eq!(phi(&sum), phi(a) + phi(b), "a={a} b={b}");
                assert_eq!(
                    p_cmp(&t, a, b).unwrap(),
                    phi(a).cmp(&phi(b)),
                    "a={a} b={b}"
                );
            }
        }
    }

    #[test]
    fn p_laws_hold_with_full_branch_coverage() {
        let t = int_truncation(5);
        let summary = verify_p_laws(&t, 2, 2_000_000, 0).unwrap();
        assert!(summary.exhaustive);
        assert_eq!(summary.pool, 3 * 5);
        assert!(summary.impossible_paths_hit().is_empty());
        let seen: Vec<AssocPath> = summary.path_counts.keys().copied().collect();
        let reachable: Vec<AssocPath> = AssocPath::ALL
            .into_iter()
            .filter(|p| p.reachable())
            .collect();
        assert_eq!(seen, reachable, "{:?}", summary.path_counts);
        assert!(summary.path_counts.values().all(|&c| c > 0));
    }

    #[test]
    fn p_laws_sampled_on_infinite_structures() {
        let t = TruncStructure::parse_spec("QZ:tau=(1,0)").unwrap();
        let summary = verify_p_laws(&t, 3, 4_000, 11).unwrap();
        assert!(!summary.exhaustive);
        assert!(summary.impossible_paths_hit().is_empty());
        // Reproducible end to end.
        let again = verify_p_laws(&t, 3, 4_000, 11).unwrap();
        assert_eq!(summary, again);
    }

    #[test]
    fn broken_table_is_caught_by_the_p_laws() {
        // 1+1=1: loads fine (the order axioms hold) but P over it is not
        // cancellative, and the cancellation witness can leave the cone.
        let table = FiniteTable::new(2, vec![0, 1, 2, 1, 1, 2, 2, 2, 2]).unwrap();
        let t = TruncStructure::from_table(table);
        let err = verify_p_laws(&t, 2, 1_000_000, 0).unwrap_err();
        assert!(
            matches!(err, ExtensionError::LawViolation { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn completion_identifies_equal_differences() {
        let t = int_truncation(5);
        let g = Completion::new(t.clone());
        let a = CompletionElement {
            pos: pe(&t, 2, 1),
            neg: pe(&t, 0, 4),
        };
        let b = CompletionElement {
            pos: pe(&t, 1, 2),
            neg: p_zero(&t),
        };
        assert!(g.eq(&a, &b));
        assert_eq!(g.cmp(&a, &b), Ordering::Equal);
        let n = g.normalize(&a);
        assert_eq!(n, b);
    }

    #[test]
    fn completion_group_laws_on_samples() {
        for spec in ["Z:tau=5", "QZ:tau=(1,0)"] {
            let t = TruncStructure::parse_spec(spec).unwrap();
            let g = Completion::new(t.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let elems: Vec<CompletionElement> = (0..40)
                .map(|_| CompletionElement {
                    pos: sample_p(&t, &mut rng, 3),
                    neg: sample_p(&t, &mut rng, 3),
                })
                .collect();
            for a in &elems {
                assert!(g.eq(&g.add(a, &g.neg(a)), &g.zero()), "{spec}: {a}");
                assert!(g.eq(&g.add(a, &g.zero()), a));
            }
            for a in &elems {
                for b in &elems {
                    assert!(g.eq(&g.add(a, b), &g.add(b, a)));
                    // order is translation invariant
                    let shifted = g.cmp(&g.add(a, &elems[0]), &g.add(b, &elems[0]));
                    assert_eq!(g.cmp(a, b), shifted, "{spec}: a={a} b={b}");
                }
            }
            for a in &elems[..8] {
                for b in &elems[..8] {
                    for c in &elems[..8] {
                        assert!(g.eq(&g.add(&g.add(a, b), c), &g.add(a, &g.add(b, c))));
                    }
                }
            }
        }
    }

    #[test]
    fn completion_of_integer_truncation_is_the_integers() {
        let tau = 5i64;
        let t = int_truncation(tau);
        let g = Completion::new(t.clone());
        // n >= 0 maps to <n div tau, n mod tau> ⊖ 0; negatives mirror it.
        let lift = |n: i64| -> CompletionElement {
            let m = n.unsigned_abs();
            let p = pe(&t, m / tau as u64, (m % tau as u64) as i64);
            let c = g.from_p(p);
            if n < 0 {
                g.neg(&c)
            } else {
                c
            }
        };
        for a in -50..=50 {
            for b in -50..=50 {
                assert!(g.eq(&g.add(&lift(a), &lift(b)), &lift(a + b)), "{a}+{b}");
                assert_eq!(g.cmp(&lift(a), &lift(b)), a.cmp(&b));
            }
        }
    }
}
