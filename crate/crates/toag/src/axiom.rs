//! The sixteen axioms of truncated ordered abelian groups, as executable
//! checks. Finite domains are checked exhaustively; infinite ones by seeded
//! sampling up to a tuple budget. Every FAIL carries a witness tuple that is
//! re-verified against the axiom before the report is emitted.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::trunc::{ToagError, TruncElement, TruncStructure};

/// Default tuple budget per axiom for sampled checks.
pub const DEFAULT_AXIOM_BUDGET: u64 = 100_000;

/// What a report is about: one of the numbered axioms, one of the two
/// lemmas, or the corollary on strict order reversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckId {
    Axiom(u8),
    Lemma(u8),
    Corollary(u8),
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckId::Axiom(n) => write!(f, "AXIOM {n}"),
            CheckId::Lemma(n) => write!(f, "LEMMA {n}"),
            CheckId::Corollary(n) => write!(f, "COROLLARY {n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    BudgetExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::BudgetExhausted => "EXHAUSTED-BUDGET",
        };
        f.write_str(s)
    }
}

/// Outcome of one axiom or lemma check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub id: CheckId,
    pub verdict: Verdict,
    /// Violating tuple, present exactly when the verdict is FAIL.
    pub witness: Option<Vec<TruncElement>>,
    /// Tuples evaluated (the full space for exhaustive runs; the position of
    /// the witness when one was found).
    pub samples: u64,
    pub seed: u64,
    /// True when the whole tuple space was covered.
    pub exhaustive: bool,
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.id, self.verdict)?;
        if let Some(w) = &self.witness {
            let parts: Vec<String> = w.iter().map(|e| e.to_string()).collect();
            write!(f, " witness=({})", parts.join(","))?;
        }
        write!(f, " samples={} seed={}", self.samples, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AxiomError {
    #[error("no axiom is numbered {0}; ids run 1..=16")]
    UnknownAxiom(u8),
    #[error(transparent)]
    Toag(#[from] ToagError),
}

/// Number of quantified variables per axiom. Axioms 7 and 8 carry one extra
/// probe variable standing in for "any other candidate": the probe lets the
/// unique-existence and minimality claims be refuted by ordinary tuples.
pub fn axiom_arity(id: u8) -> usize {
    match id {
        2 | 3 | 9 => 1,
        1 | 8 | 10 => 2,
        5 | 6 | 7 | 11 | 12 | 13 | 14 | 15 | 16 => 3,
        4 => 4,
        _ => panic!("unknown axiom {id}"),
    }
}

/// Evaluate axiom `id` at one tuple. `None` means the hypotheses do not
/// apply there (including any ∸ subterm being undefined), `Some(false)` a
/// genuine violation.
///
/// The conclusion checked for axiom 14 is x+(y∸(τ∸z)) = z+(x∸(τ∸y)): the
/// form its own verification derives and the one the extension's
/// associativity argument uses.
pub fn eval_axiom(t: &TruncStructure, id: u8, v: &[TruncElement]) -> Option<bool> {
    let tau = t.tau();
    let dm = |a: &TruncElement, b: &TruncElement| t.dotminus(a, b).ok();
    match id {
        1 => {
            let (x, y) = (&v[0], &v[1]);
            Some(t.add(x, y) == t.add(y, x))
        }
        2 => Some(t.add(&v[0], &t.zero()) == v[0]),
        3 => Some(t.add(&v[0], &tau) == tau),
        4 => {
            let (x1, y1, x2, y2) = (&v[0], &v[1], &v[2], &v[3]);
            if !(t.le(x1, y1) && t.le(x2, y2)) {
                return None;
            }
            Some(t.le(&t.add(x1, x2), &t.add(y1, y2)))
        }
        5 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            Some(t.add(&t.add(x, y), z) == t.add(x, &t.add(y, z)))
        }
        6 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            let xy = t.add(x, y);
            if !(xy == t.add(x, z) && t.lt(&xy, &tau)) {
                return None;
            }
            Some(y == z)
        }
        7 => {
            // x <= y < tau: a unique z solves x + z = y. The optional third
            // component probes uniqueness.
            let (x, y) = (&v[0], &v[1]);
            if !(t.le(x, y) && t.lt(y, &tau)) {
                return None;
            }
            let z = match t.dotminus(y, x) {
                Ok(z) => z,
                Err(_) => return Some(false), // no solution at all
            };
            if t.add(x, &z) != *y {
                return Some(false);
            }
            if let Some(probe) = v.get(2) {
                if *probe != z && t.add(x, probe) == *y {
                    return Some(false);
                }
            }
            Some(true)
        }
        8 => {
            // tau ∸ x is the least z with x + z = tau. The optional second
            // component probes minimality.
            let x = &v[0];
            let m = t.tau_dotminus(x);
            if t.add(x, &m) != tau {
                return Some(false);
            }
            if let Some(probe) = v.get(1) {
                if t.lt(probe, &m) && t.add(x, probe) == tau {
                    return Some(false);
                }
            }
            Some(true)
        }
        9 => Some(t.tau_dotminus(&t.tau_dotminus(&v[0])) == v[0]),
        10 => {
            let (x, y) = (&v[0], &v[1]);
            if !(t.lt(x, &tau) && t.lt(y, &tau)) {
                return None;
            }
            if t.add(x, y) != tau {
                return None;
            }
            let lhs = dm(y, &t.tau_dotminus(x))?;
            let rhs = dm(x, &t.tau_dotminus(y))?;
            Some(lhs == rhs)
        }
        11 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            let yz = t.add(y, z);
            if !t.lt(&yz, &tau) {
                return None;
            }
            if t.add(x, &yz) != tau {
                return None;
            }
            let yx = t.add(y, x);
            if !t.lt(&yx, &tau) {
                return None;
            }
            let lhs = dm(x, &t.tau_dotminus(&yz))?;
            let rhs = dm(z, &t.tau_dotminus(&yx))?;
            Some(lhs == rhs)
        }
        12 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            let yz = t.add(y, z);
            if !t.lt(&yz, &tau) {
                return None;
            }
            if t.add(x, &yz) != tau {
                return None;
            }
            if t.add(y, x) != tau {
                return None;
            }
            let w = dm(y, &t.tau_dotminus(x))?;
            let zw = t.add(z, &w);
            if !t.lt(&zw, &tau) {
                return None;
            }
            let rhs = dm(x, &t.tau_dotminus(&yz))?;
            Some(zw == rhs)
        }
        13 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            if t.add(y, x) != tau {
                return None;
            }
            if !t.lt(&t.add(y, z), &tau) {
                return None;
            }
            let w = dm(y, &t.tau_dotminus(x))?;
            Some(t.lt(&t.add(z, &w), &tau))
        }
        14 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            if t.add(y, z) != tau || t.add(y, x) != tau {
                return None;
            }
            let wx = dm(y, &t.tau_dotminus(x))?;
            if !t.lt(&t.add(z, &wx), &tau) {
                return None;
            }
            let wz = dm(y, &t.tau_dotminus(z))?;
            let wy = dm(x, &t.tau_dotminus(y))?;
            Some(t.add(x, &wz) == t.add(z, &wy))
        }
        15 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            if t.add(y, z) != tau || t.add(y, x) != tau {
                return None;
            }
            let wz = dm(y, &t.tau_dotminus(z))?;
            if t.add(x, &wz) != tau {
                return None;
            }
            let wx = dm(y, &t.tau_dotminus(x))?;
            Some(t.add(z, &wx) == tau)
        }
        16 => {
            let (x, y, z) = (&v[0], &v[1], &v[2]);
            if t.add(y, z) != tau || t.add(y, x) != tau {
                return None;
            }
            let wz = dm(y, &t.tau_dotminus(z))?;
            if t.add(x, &wz) != tau {
                return None;
            }
            let wx = dm(y, &t.tau_dotminus(x))?;
            let lhs = dm(&wx, &t.tau_dotminus(z))?;
            let rhs = dm(&wz, &t.tau_dotminus(x))?;
            Some(lhs == rhs)
        }
        _ => panic!("unknown axiom {id}"),
    }
}

/// Arity of the order lemmas (all two-variable).
pub fn lemma_arity(_id: CheckId) -> usize {
    2
}

/// Evaluate one of the lemmas: Lemma 1 (tau ∸ · reverses <=), Lemma 2
/// (tau ∸ · is injective below tau), Corollary 1 (strict reversal).
pub fn eval_lemma(t: &TruncStructure, id: CheckId, v: &[TruncElement]) -> Option<bool> {
    let tau = t.tau();
    match id {
        CheckId::Lemma(1) => {
            let (y, z) = (&v[0], &v[1]);
            if !(t.le(y, z) && t.lt(z, &tau)) {
                return None;
            }
            Some(t.le(&t.tau_dotminus(z), &t.tau_dotminus(y)))
        }
        CheckId::Lemma(2) => {
            let (x, y) = (&v[0], &v[1]);
            if !(t.lt(x, &tau) && t.lt(y, &tau)) {
                return None;
            }
            if t.tau_dotminus(x) != t.tau_dotminus(y) {
                return None;
            }
            Some(x == y)
        }
        CheckId::Corollary(1) => {
            let (x, y) = (&v[0], &v[1]);
            if !(t.lt(x, y) && t.lt(y, &tau)) {
                return None;
            }
            Some(t.lt(&t.tau_dotminus(y), &t.tau_dotminus(x)))
        }
        _ => panic!("unknown lemma {id}"),
    }
}

fn eval_check(t: &TruncStructure, id: CheckId, v: &[TruncElement]) -> Option<bool> {
    match id {
        CheckId::Axiom(n) => eval_axiom(t, n, v),
        _ => eval_lemma(t, id, v),
    }
}

/// Check one axiom on a structure. Finite domains whose tuple space fits the
/// budget are checked exhaustively (tables always are); otherwise `budget`
/// seeded tuples are sampled.
pub fn check_axiom(
    t: &TruncStructure,
    id: u8,
    budget: u64,
    seed: u64,
) -> Result<AxiomReport, AxiomError> {
    if !(1..=16).contains(&id) {
        return Err(AxiomError::UnknownAxiom(id));
    }
    Ok(run_check(t, CheckId::Axiom(id), axiom_arity(id), budget, seed))
}

/// Check all sixteen axioms in order.
pub fn check_all_axioms(t: &TruncStructure, budget: u64, seed: u64) -> Vec<AxiomReport> {
    (1..=16)
        .map(|id| check_axiom(t, id, budget, seed).expect("ids in range"))
        .collect()
}

/// Check Lemma 1, Lemma 2 and Corollary 1.
pub fn check_lemmas(t: &TruncStructure, budget: u64, seed: u64) -> Vec<AxiomReport> {
    [CheckId::Lemma(1), CheckId::Lemma(2), CheckId::Corollary(1)]
        .into_iter()
        .map(|id| run_check(t, id, lemma_arity(id), budget, seed))
        .collect()
}

fn run_check(t: &TruncStructure, id: CheckId, arity: usize, budget: u64, seed: u64) -> AxiomReport {
    let exhaustive_total = t.domain_size().and_then(|s| {
        let total = s.checked_pow(arity as u32)?;
        if t.is_table() || total <= budget {
            Some(total)
        } else {
            None
        }
    });
    let (witness, samples, exhaustive) = match exhaustive_total {
        Some(total) => {
            let size = t.domain_size().expect("finite domain");
            let found = (0..total)
                .into_par_iter()
                .find_map_first(|i| {
                    let tuple = decode_tuple(t, i, size, arity);
                    match eval_check(t, id, &tuple) {
                        Some(false) => Some((i, tuple)),
                        _ => None,
                    }
                });
            match found {
                Some((i, tuple)) => (Some(tuple), i + 1, true),
                None => (None, total, true),
            }
        }
        None => {
            let tuples = sample_tuples(t, arity, budget, seed, id);
            let found = tuples
                .par_iter()
                .enumerate()
                .with_min_len(256)
                .find_map_first(|(i, tuple)| match eval_check(t, id, tuple) {
                    Some(false) => Some(i),
                    _ => None,
                });
            match found {
                Some(i) => (Some(tuples[i].clone()), i as u64 + 1, false),
                None => (None, budget, false),
            }
        }
    };
    // A FAIL witness must re-evaluate to a violation before we report it.
    if let Some(w) = &witness {
        assert_eq!(
            eval_check(t, id, w),
            Some(false),
            "witness failed re-verification for {id}"
        );
    }
    AxiomReport {
        id,
        verdict: if witness.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
        witness,
        samples,
        seed,
        exhaustive,
    }
}

fn decode_tuple(t: &TruncStructure, mut i: u64, size: u64, arity: usize) -> Vec<TruncElement> {
    let mut tuple = Vec::with_capacity(arity);
    for _ in 0..arity {
        tuple.push(t.element_at(i % size));
        i /= size;
    }
    tuple
}

/// Pre-generates the sample tuples sequentially so parallel evaluation stays
/// deterministic: the report depends only on (structure, id, budget, seed).
fn sample_tuples(
    t: &TruncStructure,
    arity: usize,
    budget: u64,
    seed: u64,
    id: CheckId,
) -> Vec<Vec<TruncElement>> {
    let stream = match id {
        CheckId::Axiom(n) => n as u64,
        CheckId::Lemma(n) => 100 + n as u64,
        CheckId::Corollary(n) => 200 + n as u64,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
    (0..budget)
        .map(|_| (0..arity).map(|_| t.sample(&mut rng)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trunc::{int_truncation, FiniteTable};

    #[test]
    fn arities_cover_all_axioms() {
        for id in 1..=16 {
            assert!((1..=4).contains(&axiom_arity(id)));
        }
    }

    #[test]
    fn integer_truncation_passes_exhaustively() {
        let t = int_truncation(7);
        for report in check_all_axioms(&t, DEFAULT_AXIOM_BUDGET, 0) {
            assert_eq!(report.verdict, Verdict::Pass, "{report}");
            assert!(report.exhaustive, "{report}");
        }
        for report in check_lemmas(&t, DEFAULT_AXIOM_BUDGET, 0) {
            assert_eq!(report.verdict, Verdict::Pass, "{report}");
        }
    }

    #[test]
    fn associativity_matches_integer_oracle() {
        // Independent check of what "axiom 5 passes on [0,7]" means.
        let t = int_truncation(7);
        for a in 0..=7i64 {
            for b in 0..=7i64 {
                for c in 0..=7i64 {
                    let left = ((a + b).min(7) + c).min(7);
                    let right = (a + (b + c).min(7)).min(7);
                    assert_eq!(left, right);
                }
            }
        }
        let report = check_axiom(&t, 5, DEFAULT_AXIOM_BUDGET, 0).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.samples, 8 * 8 * 8);
    }

    #[test]
    fn idempotent_table_fails_unique_subtraction() {
        // {0,1,2} with 1+1=1: axioms 1-4 hold, so it loads, but x+z=y has
        // two solutions at x=y=1 (z=0 and z=1).
        let table = FiniteTable::new(2, vec![0, 1, 2, 1, 1, 2, 2, 2, 2]).unwrap();
        let t = TruncStructure::from_table(table);
        let report = check_axiom(&t, 7, DEFAULT_AXIOM_BUDGET, 0).unwrap();
        assert_eq!(report.verdict, Verdict::Fail, "{report}");
        let w = report.witness.as_ref().unwrap();
        assert_eq!(
            w.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            vec!["1", "1", "1"]
        );
        // The witness genuinely violates the axiom: 1+0 = 1+1 = 1.
        assert_eq!(eval_axiom(&t, 7, w), Some(false));
    }

    #[test]
    fn witness_is_deterministic_and_first_in_order() {
        let table = FiniteTable::new(2, vec![0, 1, 2, 1, 1, 2, 2, 2, 2]).unwrap();
        let t = TruncStructure::from_table(table);
        let a = check_axiom(&t, 7, DEFAULT_AXIOM_BUDGET, 0).unwrap();
        let b = check_axiom(&t, 7, DEFAULT_AXIOM_BUDGET, 17).unwrap();
        assert_eq!(a.witness, b.witness, "exhaustive checks ignore the seed");
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn sampled_checks_pass_on_infinite_structures_smoke() {
        let t = TruncStructure::parse_spec("QZ:tau=(1,0)").unwrap();
        for id in 1..=16 {
            let report = check_axiom(&t, id, 2_000, 0).unwrap();
            assert_eq!(report.verdict, Verdict::Pass, "{report}");
            assert!(!report.exhaustive);
            assert_eq!(report.samples, 2_000);
        }
    }

    #[test]
    fn sampled_reports_are_reproducible() {
        let t = TruncStructure::parse_spec("Q:tau=1").unwrap();
        let a = check_axiom(&t, 4, 500, 42).unwrap();
        let b = check_axiom(&t, 4, 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_axiom_is_an_error() {
        let t = int_truncation(2);
        assert!(matches!(
            check_axiom(&t, 0, 10, 0),
            Err(AxiomError::UnknownAxiom(0))
        ));
        assert!(matches!(
            check_axiom(&t, 17, 10, 0),
            Err(AxiomError::UnknownAxiom(17))
        ));
    }

    #[test]
    fn report_line_format() {
        let t = int_truncation(3);
        let line = check_axiom(&t, 1, DEFAULT_AXIOM_BUDGET, 0).unwrap().to_string();
        assert_eq!(line, "AXIOM 1 PASS samples=16 seed=0");
    }
}
