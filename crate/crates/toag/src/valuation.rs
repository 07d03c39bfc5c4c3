//! Desk-scale valuation theory: the ring of integers modulo p^k carries a
//! truncated p-adic valuation onto [0,k], and the two valuation laws hold
//! with [0,k] read as a truncated structure — the motivating example for
//! the whole axiom system.

use std::fmt;

use rayon::prelude::*;

use crate::trunc::{int_truncation, TruncElement, TruncStructure};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValuationError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent must be positive")]
    ZeroExponent,
    #[error("p^k overflows the ring's machine representation")]
    Overflow,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The ring ℤ/p^k with its truncated valuation v(p^j·u) = min(j, k).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidueRing {
    p: u64,
    k: u32,
    modulus: u64,
}

impl ResidueRing {
    pub fn new(p: u64, k: u32) -> Result<ResidueRing, ValuationError> {
        if !is_prime(p) {
            return Err(ValuationError::NotPrime(p));
        }
        if k == 0 {
            return Err(ValuationError::ZeroExponent);
        }
        let modulus = p.checked_pow(k).ok_or(ValuationError::Overflow)?;
        Ok(ResidueRing { p, k, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    pub fn add(&self, x: u64, y: u64) -> u64 {
        (self.reduce(x) + self.reduce(y)) % self.modulus
    }

    pub fn mul(&self, x: u64, y: u64) -> u64 {
        ((self.reduce(x) as u128 * self.reduce(y) as u128) % self.modulus as u128) as u64
    }

    /// The p-adic valuation of the class of x, capped at k; the zero class
    /// takes the top value k.
    pub fn valuation(&self, x: u64) -> u64 {
        let mut x = self.reduce(x);
        if x == 0 {
            return u64::from(self.k);
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// The valuation as an element of the value structure [0,k].
    pub fn truncated_valuation(&self, x: u64) -> TruncElement {
        let t = self.value_toag();
        t.element_at(self.valuation(x))
    }

    /// The value structure: the truncation of the integers at k.
    pub fn value_toag(&self) -> TruncStructure {
        int_truncation(i64::from(self.k))
    }
}

/// Outcome of the exhaustive valuation-law sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationReport {
    pub pass: bool,
    /// Failing pair and which law it broke ("sum" or "product").
    pub witness: Option<(u64, u64, &'static str)>,
    pub pairs: u64,
}

impl fmt::Display for ValuationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VALUATION {}", if self.pass { "PASS" } else { "FAIL" })?;
        if let Some((x, y, law)) = &self.witness {
            write!(f, " law={law} witness=({x},{y})")?;
        }
        write!(f, " pairs={}", self.pairs)
    }
}

/// Exhaustively check both laws over every pair of ring elements:
/// v(x+y) ≥ min(v(x),v(y)), and v(x·y) equals v(x)+v(y) computed in the
/// value structure (so capped at k — multiplying deep zero divisors lands
/// exactly on the class of zero).
pub fn check_valuation_laws(r: &ResidueRing) -> ValuationReport {
    let t = r.value_toag();
    let m = r.modulus();
    let bad = (0..m * m)
        .into_par_iter()
        .find_map_first(|i| {
            let (x, y) = (i / m, i % m);
            let vx = r.valuation(x);
            let vy = r.valuation(y);
            if r.valuation(r.add(x, y)) < vx.min(vy) {
                return Some((x, y, "sum"));
            }
            let expected = t.add(&t.element_at(vx), &t.element_at(vy));
            if t.element_at(r.valuation(r.mul(x, y))) != expected {
                return Some((x, y, "product"));
            }
            None
        });
    ValuationReport {
        pass: bad.is_none(),
        witness: bad,
        pairs: m * m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiom::{check_all_axioms, Verdict};

    #[test]
    fn ring_validation() {
        assert!(matches!(ResidueRing::new(4, 2), Err(ValuationError::NotPrime(4))));
        assert!(matches!(ResidueRing::new(1, 2), Err(ValuationError::NotPrime(1))));
        assert!(matches!(ResidueRing::new(3, 0), Err(ValuationError::ZeroExponent)));
        assert!(matches!(ResidueRing::new(2, 64), Err(ValuationError::Overflow)));
        assert_eq!(ResidueRing::new(3, 2).unwrap().modulus(), 9);
    }

    #[test]
    fn valuations_in_the_nine_element_ring() {
        let r = ResidueRing::new(3, 2).unwrap();
        assert_eq!(r.valuation(3), 1);
        assert_eq!(r.valuation(0), 2);
        assert_eq!(r.valuation(7), 0);
        assert_eq!(r.valuation(9), 2, "9 is the zero class");
        assert_eq!(r.truncated_valuation(3).to_string(), "1");
    }

    #[test]
    fn law_spot_checks() {
        let r = ResidueRing::new(3, 2).unwrap();
        // v(3*3) = v(0) = 2 = min(2, 1+1)
        assert_eq!(r.valuation(r.mul(3, 3)), 2);
        // v(3+6) = v(0) = 2 >= min(1,1)
        assert!(r.valuation(r.add(3, 6)) >= 1);
    }

    #[test]
    fn laws_hold_exhaustively() {
        let r = ResidueRing::new(2, 4).unwrap();
        let report = check_valuation_laws(&r);
        assert!(report.pass, "{report}");
        assert_eq!(report.pairs, 256);
    }

    #[test]
    fn value_structure_is_the_integer_truncation() {
        let r = ResidueRing::new(3, 2).unwrap();
        let t = r.value_toag();
        let z = int_truncation(2);
        assert_eq!(t.spec_string(), z.spec_string());
        for i in 0..=2 {
            for j in 0..=2 {
                assert_eq!(
                    t.add(&t.element_at(i), &t.element_at(j)),
                    z.add(&z.element_at(i), &z.element_at(j))
                );
            }
        }
        let two_elem = ResidueRing::new(5, 1).unwrap().value_toag();
        assert_eq!(two_elem.domain_size(), Some(2));
    }

    #[test]
    fn value_structure_passes_the_axioms() {
        let t = ResidueRing::new(2, 5).unwrap().value_toag();
        for report in check_all_axioms(&t, 100_000, 0) {
            assert_eq!(report.verdict, Verdict::Pass, "{report}");
        }
    }
}
