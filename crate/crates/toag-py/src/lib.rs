//! Python bindings: a thin string-oriented façade over the toag library.
//! Elements cross the boundary in their text form (the same syntax the
//! parsers accept), reports as plain strings or small dicts, verdicts as
//! bools and exit codes.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use toag::axiom::{check_all_axioms, check_lemmas, Verdict};
use toag::extension::{verify_embedding, verify_p_laws};
use toag::presburger::{
    elementarily_equivalent, euclidean_division, is_presburger_toag, realize_signature,
    type_signature, TypeSignature,
};
use toag::search::{enumerate_toags, SearchSpec};
use toag::trunc::{TruncElement, TruncStructure};
use toag::valuation::{check_valuation_laws, ResidueRing};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A truncated ordered structure [0, tau], loaded from a builtin spec
/// string (`Z:tau=7`, `Q:tau=1/2`, `ZZ:tau=(1,0)`, `QZ:tau=(1,0)`), a
/// TOAG1 file path, or TOAG1 text.
#[pyclass]
struct Toag {
    inner: TruncStructure,
}

impl Toag {
    fn element(&self, s: &str) -> PyResult<TruncElement> {
        self.inner.parse_element(s).map_err(value_err)
    }
}

#[pymethods]
impl Toag {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Toag {
            inner: TruncStructure::parse_spec(spec).map_err(value_err)?,
        })
    }

    /// Load a finite structure from TOAG1 text rather than a file path.
    #[staticmethod]
    fn from_toag1(text: &str) -> PyResult<Self> {
        Ok(Toag {
            inner: TruncStructure::parse_toag1(text).map_err(value_err)?,
        })
    }

    fn spec(&self) -> String {
        self.inner.spec_string()
    }

    fn __repr__(&self) -> String {
        format!("Toag({:?})", self.inner.spec_string())
    }

    fn zero(&self) -> String {
        self.inner.zero().to_string()
    }

    fn tau(&self) -> String {
        self.inner.tau().to_string()
    }

    /// Number of elements, or None when the domain is infinite.
    fn size(&self) -> Option<u64> {
        self.inner.domain_size()
    }

    /// Truncated addition min(x ⊕ y, tau).
    fn add(&self, x: &str, y: &str) -> PyResult<String> {
        Ok(self.inner.add(&self.element(x)?, &self.element(y)?).to_string())
    }

    /// Three-way comparison: -1, 0, or 1.
    fn cmp(&self, x: &str, y: &str) -> PyResult<i32> {
        Ok(match self.inner.cmp_elems(&self.element(x)?, &self.element(y)?) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        })
    }

    /// Partial subtraction y ∸ x; raises when (x, y) leaves its domain.
    fn dotminus(&self, y: &str, x: &str) -> PyResult<String> {
        self.inner
            .dotminus(&self.element(y)?, &self.element(x)?)
            .map(|d| d.to_string())
            .map_err(value_err)
    }

    /// The minimal z with x + z = tau.
    fn tau_dotminus(&self, x: &str) -> PyResult<String> {
        Ok(self.inner.tau_dotminus(&self.element(x)?).to_string())
    }

    /// One report line per axiom check, lemma, and corollary.
    #[pyo3(signature = (budget = 100_000, seed = 0))]
    fn check_axioms(&self, budget: u64, seed: u64) -> Vec<String> {
        let mut reports = check_all_axioms(&self.inner, budget, seed);
        reports.extend(check_lemmas(&self.inner, budget, seed));
        reports.iter().map(|r| r.to_string()).collect()
    }

    /// True when every axiom check, lemma, and corollary passes.
    #[pyo3(signature = (budget = 100_000, seed = 0))]
    fn axioms_pass(&self, budget: u64, seed: u64) -> bool {
        check_all_axioms(&self.inner, budget, seed)
            .iter()
            .chain(check_lemmas(&self.inner, budget, seed).iter())
            .all(|r| r.verdict == Verdict::Pass)
    }

    /// (passed, report line) for the embedding into the extension monoid.
    #[pyo3(signature = (budget = 100_000, seed = 0))]
    fn verify_embedding(&self, budget: u64, seed: u64) -> (bool, String) {
        let r = verify_embedding(&self.inner, budget, seed);
        (r.pass, r.to_string())
    }

    /// Tallies of the monoid-law sweep on the extension; raises with the
    /// violated law and witness when one fails.
    #[pyo3(signature = (kmax = 3, budget = 100_000, seed = 0))]
    fn verify_extension_laws(
        &self,
        kmax: u64,
        budget: u64,
        seed: u64,
    ) -> PyResult<BTreeMap<String, u64>> {
        let summary = verify_p_laws(&self.inner, kmax, budget, seed).map_err(value_err)?;
        let mut counts = BTreeMap::new();
        counts.insert("pool".to_string(), summary.pool);
        counts.insert("comm_pairs".to_string(), summary.comm_pairs);
        counts.insert("assoc_triples".to_string(), summary.assoc_triples);
        counts.insert("mono_quads".to_string(), summary.mono_quads);
        counts.insert("cancel_pairs".to_string(), summary.cancel_pairs);
        counts.insert(
            "cancellative_triples".to_string(),
            summary.cancellative_triples,
        );
        counts.insert("exhaustive".to_string(), u64::from(summary.exhaustive));
        for (path, count) in &summary.path_counts {
            counts.insert(format!("path:{path}"), *count);
        }
        Ok(counts)
    }

    /// Whether the structure is discrete with successors and admits
    /// Euclidean division — i.e. a truncation of a Presburger model.
    #[pyo3(signature = (nmax = 30, budget = 100_000, seed = 0))]
    fn is_presburger(&self, nmax: u64, budget: u64, seed: u64) -> bool {
        is_presburger_toag(&self.inner, nmax, budget, seed).pass
    }

    /// The elementary invariants as a display string
    /// (`standard=<bool> value=<v|-> residues={...}`).
    #[pyo3(signature = (nmax = 30))]
    fn signature(&self, nmax: u64) -> PyResult<String> {
        Ok(type_signature(&self.inner, nmax).map_err(value_err)?.to_string())
    }

    /// n ↦ (tau − 1) mod n for 2 ≤ n ≤ nmax.
    #[pyo3(signature = (nmax = 30))]
    fn residues(&self, nmax: u64) -> PyResult<BTreeMap<u64, u64>> {
        Ok(type_signature(&self.inner, nmax).map_err(value_err)?.residues)
    }

    /// (y, m) with x = n·y + m·1 and m < n, or None when no such
    /// representation exists.
    fn euclidean_division(&self, x: &str, n: u64) -> PyResult<Option<(String, u64)>> {
        let parsed = self.element(x)?;
        let result = euclidean_division(&self.inner, &parsed, n).map_err(value_err)?;
        Ok(result.map(|(y, m)| (y.to_string(), m)))
    }
}

/// (verdict, report line) comparing the elementary invariants of two specs.
#[pyfunction]
#[pyo3(signature = (spec_a, spec_b, nmax = 30))]
fn equivalent(spec_a: &str, spec_b: &str, nmax: u64) -> PyResult<(bool, String)> {
    let a = TruncStructure::parse_spec(spec_a).map_err(value_err)?;
    let b = TruncStructure::parse_spec(spec_b).map_err(value_err)?;
    let report = elementarily_equivalent(&a, &b, nmax).map_err(value_err)?;
    Ok((report.equivalent, report.to_string()))
}

/// All tables on [0, size] passing the sixteen axioms, as TOAG1 texts.
#[pyfunction]
#[pyo3(signature = (size, budget = 10_000_000))]
fn enumerate_tables(size: usize, budget: u64) -> PyResult<Vec<String>> {
    let spec = SearchSpec::all_pass(size, budget).map_err(value_err)?;
    let (tables, stats) = enumerate_toags(&spec);
    if !stats.exhausted {
        return Err(value_err("node budget exhausted before the search finished"));
    }
    Ok(tables.iter().map(|t| t.to_toag1()).collect())
}

/// Build a structure whose signature is nonstandard with the given
/// residues (n ↦ (tau−1) mod n); returns its spec string.
#[pyfunction]
fn realize(residues: BTreeMap<u64, u64>) -> PyResult<String> {
    let n_max = residues.keys().max().copied().unwrap_or(2);
    let sig = TypeSignature {
        standard: false,
        finite_value: None,
        residues,
        n_max,
    };
    Ok(realize_signature(&sig).map_err(value_err)?.spec_string())
}

/// (laws passed, report line) for the p-adic valuation on Z/p^k.
#[pyfunction]
fn check_valuation(p: u64, k: u32) -> PyResult<(bool, String)> {
    let ring = ResidueRing::new(p, k).map_err(value_err)?;
    let report = check_valuation_laws(&ring);
    Ok((report.pass, report.to_string()))
}

/// Run the command-line interface in-process: (exit code, report text).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String) {
    let mut buf = Vec::new();
    let code = toag::cli::run(&args, &mut buf);
    (code, String::from_utf8_lossy(&buf).into_owned())
}

#[pymodule]
fn toag_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Toag>()?;
    m.add_function(wrap_pyfunction!(equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_tables, m)?)?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(check_valuation, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
