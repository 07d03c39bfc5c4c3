//! Exhaustive search over finite truncation tables. Candidate tables are
//! symmetric and monotone by construction (those constraints prune the tree
//! hard), then filtered by which axioms they must satisfy or violate. This
//! is how one demonstrates that the later axioms are not consequences of the
//! earlier ones: exhibit a small table passing everything but the target.

use crate::axiom::{check_axiom, Verdict};
use crate::trunc::{FiniteTable, TruncStructure};

/// Largest table size the search accepts; the tuple spaces beyond this are
/// no longer worth enumerating.
pub const MAX_SEARCH_SIZE: usize = 5;

/// Default node budget for a search run.
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("table size must be between 1 and {MAX_SEARCH_SIZE}, got {0}")]
    SizeOutOfRange(usize),
    #[error("no axiom is numbered {0}; ids run 1..=16")]
    UnknownAxiom(u8),
    #[error("axiom {0} is both required and negated")]
    Conflicting(u8),
}

/// A validated search request: tables on [0, n] that satisfy every axiom in
/// `require` and violate every axiom in `negate`.
#[derive(Debug, Clone)]
pub struct SearchSpec {
    n: usize,
    require: Vec<u8>,
    negate: Vec<u8>,
    budget: u64,
}

impl SearchSpec {
    pub fn new(
        n: usize,
        require: Vec<u8>,
        negate: Vec<u8>,
        budget: u64,
    ) -> Result<Self, SearchError> {
        if n == 0 || n > MAX_SEARCH_SIZE {
            return Err(SearchError::SizeOutOfRange(n));
        }
        let mut require = require;
        let mut negate = negate;
        require.sort_unstable();
        require.dedup();
        negate.sort_unstable();
        negate.dedup();
        for &id in require.iter().chain(&negate) {
            if !(1..=16).contains(&id) {
                return Err(SearchError::UnknownAxiom(id));
            }
        }
        if let Some(&id) = require.iter().find(|id| negate.contains(id)) {
            return Err(SearchError::Conflicting(id));
        }
        Ok(SearchSpec {
            n,
            require,
            negate,
            budget,
        })
    }

    /// Tables satisfying all sixteen axioms.
    pub fn all_pass(n: usize, budget: u64) -> Result<Self, SearchError> {
        SearchSpec::new(n, (1..=16).collect(), Vec::new(), budget)
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchStats {
    /// Search-tree nodes visited.
    pub nodes: u64,
    /// False when the node budget cut the walk short, in which case the
    /// result list may be incomplete.
    pub exhausted: bool,
}

/// Walk every symmetric monotone table on [0, n] (identity row and
/// absorbing row fixed) in lexicographic order of the free entries and keep
/// the ones matching the spec.
pub fn enumerate_toags(spec: &SearchSpec) -> (Vec<FiniteTable>, SearchStats) {
    let n = spec.n;
    let positions: Vec<(usize, usize)> = (1..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();
    let mut table = vec![vec![0usize; n + 1]; n + 1];
    for k in 0..=n {
        table[0][k] = k;
        table[k][0] = k;
        table[n][k] = n;
        table[k][n] = n;
    }
    let mut out = Vec::new();
    let mut stats = SearchStats {
        nodes: 0,
        exhausted: true,
    };
    dfs(spec, &positions, 0, &mut table, &mut out, &mut stats);
    (out, stats)
}

fn dfs(
    spec: &SearchSpec,
    positions: &[(usize, usize)],
    idx: usize,
    table: &mut Vec<Vec<usize>>,
    out: &mut Vec<FiniteTable>,
    stats: &mut SearchStats,
) -> bool {
    stats.nodes += 1;
    if stats.nodes > spec.budget {
        stats.exhausted = false;
        return false;
    }
    if idx == positions.len() {
        let flat: Vec<usize> = table.iter().flatten().copied().collect();
        let ft = FiniteTable::new(spec.n, flat)
            .expect("search candidates are symmetric and monotone by construction");
        if matches_spec(spec, &ft) {
            out.push(ft);
        }
        return true;
    }
    let (i, j) = positions[idx];
    // Monotonicity lower bound: the entry left of and above this one. Both
    // already carry values (row 0 / column 0 are fixed, earlier free cells
    // are mirrored onto the lower triangle as they are assigned).
    let lo = table[i][j - 1].max(table[i - 1][j]);
    for v in lo..=spec.n {
        table[i][j] = v;
        table[j][i] = v;
        if !dfs(spec, positions, idx + 1, table, out, stats) {
            return false;
        }
    }
    true
}

fn matches_spec(spec: &SearchSpec, ft: &FiniteTable) -> bool {
    let t = TruncStructure::from_table(ft.clone());
    for &id in &spec.require {
        let report = check_axiom(&t, id, 1, 0).expect("validated ids");
        if report.verdict != Verdict::Pass {
            return false;
        }
    }
    for &id in &spec.negate {
        let report = check_axiom(&t, id, 1, 0).expect("validated ids");
        if report.verdict != Verdict::Fail {
            return false;
        }
    }
    true
}

/// One row of an independence report: the smallest table found that passes
/// every axiom except `id` and fails `id`, if any exists up to the size cap.
#[derive(Debug, Clone)]
pub struct IndependenceEntry {
    pub id: u8,
    pub witness: Option<FiniteTable>,
    /// Nodes visited across all sizes tried for this id.
    pub nodes: u64,
    /// False when some size was cut short by the budget, so absence of a
    /// witness is inconclusive.
    pub exhausted: bool,
}

/// For each axiom in `ids` (default: the conditional subtraction laws,
/// 10..=16), search table sizes 1..=n_max for a structure separating it
/// from the other fifteen.
pub fn independence_report(
    n_max: usize,
    budget: u64,
    ids: Option<Vec<u8>>,
) -> Result<Vec<IndependenceEntry>, SearchError> {
    if n_max == 0 || n_max > MAX_SEARCH_SIZE {
        return Err(SearchError::SizeOutOfRange(n_max));
    }
    let ids = ids.unwrap_or_else(|| (10..=16).collect());
    for &id in &ids {
        if !(1..=16).contains(&id) {
            return Err(SearchError::UnknownAxiom(id));
        }
    }
    let mut entries = Vec::new();
    for &id in &ids {
        let mut witness = None;
        let mut nodes = 0;
        let mut exhausted = true;
        for n in 1..=n_max {
            let others: Vec<u8> = (1..=16).filter(|&a| a != id).collect();
            let spec = SearchSpec::new(n, others, vec![id], budget)?;
            let (tables, stats) = enumerate_toags(&spec);
            nodes += stats.nodes;
            exhausted &= stats.exhausted;
            if let Some(t) = tables.into_iter().next() {
                witness = Some(t);
                break;
            }
        }
        entries.push(IndependenceEntry {
            id,
            witness,
            nodes,
            exhausted,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axiom::check_all_axioms;

    #[test]
    fn size_one_has_exactly_the_saturating_table() {
        let spec = SearchSpec::new(1, Vec::new(), Vec::new(), 1000).unwrap();
        let (tables, stats) = enumerate_toags(&spec);
        assert_eq!(tables, vec![FiniteTable::saturating(1)]);
        assert!(stats.exhausted);
    }

    #[test]
    fn size_two_all_axioms_leaves_only_saturation() {
        let spec = SearchSpec::all_pass(2, DEFAULT_SEARCH_BUDGET).unwrap();
        let (tables, stats) = enumerate_toags(&spec);
        assert!(stats.exhausted);
        assert_eq!(tables, vec![FiniteTable::saturating(2)]);
    }

    #[test]
    fn size_two_unfiltered_finds_idempotent_and_saturating() {
        let spec = SearchSpec::new(2, Vec::new(), Vec::new(), DEFAULT_SEARCH_BUDGET).unwrap();
        let (tables, _) = enumerate_toags(&spec);
        assert_eq!(tables.len(), 2);
        // Lexicographic emission: the idempotent table (1+1=1) precedes
        // saturation (1+1=2).
        assert_eq!(tables[0].get(1, 1), 1);
        assert_eq!(tables[1], FiniteTable::saturating(2));
        let idem = TruncStructure::from_table(tables[0].clone());
        let report = check_axiom(&idem, 7, 1, 0).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
    }

    /// Brute force every (v11, v12, v22) candidate directly and compare with
    /// the pruned walk, so the pruning itself is under test.
    #[test]
    fn size_three_matches_unpruned_enumeration() {
        let mut expected = Vec::new();
        for v11 in 0..=3usize {
            for v12 in 0..=3usize {
                for v22 in 0..=3usize {
                    let flat = vec![
                        0, 1, 2, 3, //
                        1, v11, v12, 3, //
                        2, v12, v22, 3, //
                        3, 3, 3, 3,
                    ];
                    if let Ok(ft) = FiniteTable::new(3, flat) {
                        expected.push(ft);
                    }
                }
            }
        }
        let spec = SearchSpec::new(3, Vec::new(), Vec::new(), DEFAULT_SEARCH_BUDGET).unwrap();
        let (tables, stats) = enumerate_toags(&spec);
        assert!(stats.exhausted);
        assert_eq!(tables, expected);
    }

    #[test]
    fn size_three_all_axioms_leaves_only_saturation() {
        let spec = SearchSpec::all_pass(3, DEFAULT_SEARCH_BUDGET).unwrap();
        let (tables, _) = enumerate_toags(&spec);
        assert_eq!(tables, vec![FiniteTable::saturating(3)]);
        let t = TruncStructure::from_table(tables[0].clone());
        for report in check_all_axioms(&t, 1, 0) {
            assert_eq!(report.verdict, Verdict::Pass, "{report}");
        }
    }

    #[test]
    fn filtered_search_agrees_with_post_filtering() {
        let unfiltered = SearchSpec::new(3, Vec::new(), Vec::new(), DEFAULT_SEARCH_BUDGET).unwrap();
        let (all, _) = enumerate_toags(&unfiltered);
        let expected: Vec<FiniteTable> = all
            .into_iter()
            .filter(|ft| {
                let t = TruncStructure::from_table(ft.clone());
                (1..=9).all(|id| check_axiom(&t, id, 1, 0).unwrap().verdict == Verdict::Pass)
            })
            .collect();
        let spec = SearchSpec::new(3, (1..=9).collect(), Vec::new(), DEFAULT_SEARCH_BUDGET).unwrap();
        let (tables, _) = enumerate_toags(&spec);
        assert_eq!(tables, expected);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = SearchSpec::new(3, Vec::new(), Vec::new(), 3).unwrap();
        let (_, stats) = enumerate_toags(&spec);
        assert!(!stats.exhausted);
        assert_eq!(stats.nodes, 4, "walk stops right after the budget trips");
    }

    #[test]
    fn independence_at_size_one_finds_nothing() {
        let entries = independence_report(1, DEFAULT_SEARCH_BUDGET, None).unwrap();
        assert_eq!(entries.len(), 7);
        for e in &entries {
            assert!(e.witness.is_none(), "axiom {}", e.id);
            assert!(e.exhausted);
        }
    }

    #[test]
    fn spec_validation_rejects_bad_requests() {
        assert!(matches!(
            SearchSpec::new(0, Vec::new(), Vec::new(), 1),
            Err(SearchError::SizeOutOfRange(0))
        ));
        assert!(matches!(
            SearchSpec::new(6, Vec::new(), Vec::new(), 1),
            Err(SearchError::SizeOutOfRange(6))
        ));
        assert!(matches!(
            SearchSpec::new(2, vec![17], Vec::new(), 1),
            Err(SearchError::UnknownAxiom(17))
        ));
        assert!(matches!(
            SearchSpec::new(2, vec![5], vec![5], 1),
            Err(SearchError::Conflicting(5))
        ));
    }
}
