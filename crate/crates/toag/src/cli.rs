//! Batch command-line front end. Every subcommand prints a line-oriented,
//! machine-parsable report on standard output and signals its verdict
//! through the exit code: 0 for pass/equivalent, 1 for any failure,
//! 2 for a usage or parse error, 3 when a budget ran out before the
//! question was settled.

use std::io::Write;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::axiom::{check_all_axioms, check_lemmas, Verdict, DEFAULT_AXIOM_BUDGET};
use crate::extension::{verify_embedding, verify_p_laws, ExtensionError};
use crate::presburger::{elementarily_equivalent, is_presburger_toag, type_signature, DEFAULT_NMAX};
use crate::search::{enumerate_toags, independence_report, SearchSpec, DEFAULT_SEARCH_BUDGET};
use crate::trunc::TruncStructure;
use crate::valuation::{check_valuation_laws, ResidueRing};

const EXIT_PASS: i32 = 0;
const EXIT_FAIL: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_INCONCLUSIVE: i32 = 3;

/// Structure arguments take either a builtin spec — `Z:tau=<int>`,
/// `Q:tau=<rat>`, `ZZ:tau=(a,b)`, `QZ:tau=(q,b)` — or a path to a TOAG1
/// table file.
#[derive(Parser)]
#[command(name = "toag", disable_help_subcommand = true)]
struct Cli {
    /// RNG seed for sampled checks; echoed in sampled report lines.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sixteen axiom checks plus the order lemmas on a structure.
    Check {
        /// Builtin spec or TOAG1 file path.
        spec: String,
        /// Tuples per check when the domain is too large to sweep.
        #[arg(long, default_value_t = DEFAULT_AXIOM_BUDGET)]
        budget: u64,
    },
    /// Build the extension monoid P and verify the embedding and its laws.
    Embed {
        /// Builtin spec or TOAG1 file path.
        spec: String,
        /// Largest omega-coordinate exercised in P.
        #[arg(long, default_value_t = 3)]
        kmax: u64,
        /// Tuples per law when the pool is too large to sweep.
        #[arg(long, default_value_t = DEFAULT_AXIOM_BUDGET)]
        budget: u64,
    },
    /// Decide the Presburger conditions and report the type signature.
    Classify {
        /// Builtin spec or TOAG1 file path.
        spec: String,
        /// Largest divisor probed for residues.
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: u64,
        /// Sampled spot checks per condition on infinite domains.
        #[arg(long, default_value_t = DEFAULT_AXIOM_BUDGET)]
        budget: u64,
    },
    /// Compare the elementary invariants of two Presburger truncations.
    Compare {
        /// Builtin spec or TOAG1 file path.
        spec_a: String,
        /// Builtin spec or TOAG1 file path.
        spec_b: String,
        /// Largest divisor compared.
        #[arg(long, default_value_t = DEFAULT_NMAX)]
        nmax: u64,
    },
    /// List every table on [0, N] matching the axiom constraints.
    Enumerate {
        /// Top element of the tables searched.
        #[arg(long)]
        size: usize,
        /// Axiom ids that must pass: a comma list such as 1,2,10, or "all".
        #[arg(long)]
        require: Option<String>,
        /// Axiom ids that must fail: a comma list such as 7,13.
        #[arg(long)]
        negate: Option<String>,
        /// Search-tree node budget.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Hunt for tables separating each subtraction axiom from the rest.
    Independence {
        /// Largest table size tried per axiom.
        #[arg(long, default_value_t = 3)]
        size_max: usize,
        /// Search-tree node budget per (axiom, size) pair.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Check the valuation laws on Z/p^k and audit its value structure.
    Valuation {
        /// Residue characteristic; must be prime.
        #[arg(long)]
        p: u64,
        /// Exponent; the modulus is p^k.
        #[arg(long)]
        k: u32,
    },
}

/// Entry point shared by the binary and the tests: parse `args` (without
/// the program name), run the command, write the report, return the exit
/// code.
pub fn run<W: Write>(args: &[String], out: &mut W) -> i32 {
    let argv = std::iter::once("toag".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = write!(out, "{err}");
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Check { spec, budget } => cmd_check(out, &spec, budget, seed),
        Command::Embed { spec, kmax, budget } => cmd_embed(out, &spec, kmax, budget, seed),
        Command::Classify { spec, nmax, budget } => cmd_classify(out, &spec, nmax, budget, seed),
        Command::Compare {
            spec_a,
            spec_b,
            nmax,
        } => cmd_compare(out, &spec_a, &spec_b, nmax),
        Command::Enumerate {
            size,
            require,
            negate,
            budget,
        } => cmd_enumerate(out, size, require.as_deref(), negate.as_deref(), budget),
        Command::Independence { size_max, budget } => cmd_independence(out, size_max, budget),
        Command::Valuation { p, k } => cmd_valuation(out, p, k, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(out, "error: {message}");
            EXIT_USAGE
        }
    }
}

fn load(spec: &str) -> Result<TruncStructure, String> {
    TruncStructure::parse_spec(spec).map_err(|e| format!("{spec}: {e}"))
}

fn cmd_check<W: Write>(out: &mut W, spec: &str, budget: u64, seed: u64) -> Result<i32, String> {
    let t = load(spec)?;
    let mut reports = check_all_axioms(&t, budget, seed);
    reports.extend(check_lemmas(&t, budget, seed));
    let mut code = EXIT_PASS;
    for report in &reports {
        let _ = writeln!(out, "{report}");
        match report.verdict {
            Verdict::Pass => {}
            Verdict::Fail => code = EXIT_FAIL,
            Verdict::BudgetExhausted => {
                if code == EXIT_PASS {
                    code = EXIT_INCONCLUSIVE;
                }
            }
        }
    }
    Ok(code)
}

fn cmd_embed<W: Write>(
    out: &mut W,
    spec: &str,
    kmax: u64,
    budget: u64,
    seed: u64,
) -> Result<i32, String> {
    let t = load(spec)?;
    let embedding = verify_embedding(&t, budget, seed);
    let _ = writeln!(out, "{embedding}");
    let laws_ok = match verify_p_laws(&t, kmax, budget, seed) {
        Ok(summary) => {
            let _ = writeln!(
                out,
                "P-LAWS PASS pool={} comm={} assoc={} mono={} cancel={} cancellative={} exhaustive={} seed={}",
                summary.pool,
                summary.comm_pairs,
                summary.assoc_triples,
                summary.mono_quads,
                summary.cancel_pairs,
                summary.cancellative_triples,
                summary.exhaustive,
                summary.seed,
            );
            for (path, count) in &summary.path_counts {
                let _ = writeln!(out, "PATH {path} {count}");
            }
            let impossible = summary.impossible_paths_hit();
            for path in &impossible {
                let _ = writeln!(out, "PATH-IMPOSSIBLE-HIT {path}");
            }
            impossible.is_empty()
        }
        Err(ExtensionError::LawViolation { law, detail }) => {
            let _ = writeln!(out, "P-LAWS FAIL law={law} witness={detail}");
            false
        }
        Err(other) => return Err(other.to_string()),
    };
    Ok(if embedding.pass && laws_ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn cmd_classify<W: Write>(
    out: &mut W,
    spec: &str,
    nmax: u64,
    budget: u64,
    seed: u64,
) -> Result<i32, String> {
    let t = load(spec)?;
    let report = is_presburger_toag(&t, nmax, budget, seed);
    let _ = writeln!(out, "{}", report.discrete);
    let _ = writeln!(out, "{}", report.division);
    let _ = writeln!(out, "{report} seed={seed}");
    if !report.pass {
        return Ok(EXIT_FAIL);
    }
    let signature = type_signature(&t, nmax).map_err(|e| e.to_string())?;
    let _ = writeln!(out, "SIGNATURE {signature}");
    Ok(EXIT_PASS)
}

fn cmd_compare<W: Write>(
    out: &mut W,
    spec_a: &str,
    spec_b: &str,
    nmax: u64,
) -> Result<i32, String> {
    let left = load(spec_a)?;
    let right = load(spec_b)?;
    let report = elementarily_equivalent(&left, &right, nmax).map_err(|e| e.to_string())?;
    let _ = writeln!(out, "LEFT {}", report.left);
    let _ = writeln!(out, "RIGHT {}", report.right);
    let _ = writeln!(out, "{report}");
    Ok(if report.equivalent {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

/// "all", a comma-separated id list, or nothing.
fn parse_ids(arg: Option<&str>) -> Result<Vec<u8>, String> {
    let text = match arg {
        Some(text) => text.trim(),
        None => return Ok(Vec::new()),
    };
    if text == "all" {
        return Ok((1..=16).collect());
    }
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u8>()
                .map_err(|_| format!("bad axiom id {:?}", tok.trim()))
        })
        .collect()
}

fn cmd_enumerate<W: Write>(
    out: &mut W,
    size: usize,
    require: Option<&str>,
    negate: Option<&str>,
    budget: u64,
) -> Result<i32, String> {
    let require = parse_ids(require)?;
    let negate = parse_ids(negate)?;
    let fmt_ids = |ids: &[u8]| {
        ids.iter()
            .map(|id| id.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let spec = SearchSpec::new(size, require.clone(), negate.clone(), budget)
        .map_err(|e| e.to_string())?;
    let (tables, stats) = enumerate_toags(&spec);
    let _ = writeln!(
        out,
        "# size={} require={} negate={} budget={}",
        size,
        fmt_ids(&require),
        fmt_ids(&negate),
        budget,
    );
    for table in &tables {
        let _ = write!(out, "{}", table.to_toag1());
        let _ = writeln!(out);
    }
    let _ = writeln!(
        out,
        "# tables={} nodes={} exhausted={}",
        tables.len(),
        stats.nodes,
        stats.exhausted,
    );
    Ok(if stats.exhausted {
        EXIT_PASS
    } else {
        EXIT_INCONCLUSIVE
    })
}

fn cmd_independence<W: Write>(out: &mut W, size_max: usize, budget: u64) -> Result<i32, String> {
    let entries = independence_report(size_max, budget, None).map_err(|e| e.to_string())?;
    let mut code = EXIT_PASS;
    for entry in &entries {
        match &entry.witness {
            Some(table) => {
                let _ = writeln!(
                    out,
                    "AXIOM {} INDEPENDENT size={} nodes={}",
                    entry.id,
                    table.n(),
                    entry.nodes,
                );
                let _ = write!(out, "{}", table.to_toag1());
            }
            None => {
                let _ = writeln!(
                    out,
                    "AXIOM {} NO-WITNESS size-max={} nodes={} exhausted={}",
                    entry.id, size_max, entry.nodes, entry.exhausted,
                );
                if !entry.exhausted && code == EXIT_PASS {
                    code = EXIT_INCONCLUSIVE;
                }
            }
        }
    }
    Ok(code)
}

fn cmd_valuation<W: Write>(out: &mut W, p: u64, k: u32, seed: u64) -> Result<i32, String> {
    let ring = ResidueRing::new(p, k).map_err(|e| e.to_string())?;
    let _ = writeln!(
        out,
        "RING p={} k={} modulus={}",
        ring.p(),
        ring.k(),
        ring.modulus(),
    );
    let laws = check_valuation_laws(&ring);
    let _ = writeln!(out, "{laws}");
    let mut code = if laws.pass { EXIT_PASS } else { EXIT_FAIL };
    let value = ring.value_toag();
    for report in check_all_axioms(&value, DEFAULT_AXIOM_BUDGET, seed) {
        let _ = writeln!(out, "VALUE {report}");
        if report.verdict != Verdict::Pass {
            code = EXIT_FAIL;
        }
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String) {
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        let code = run(&args, &mut buf);
        (code, String::from_utf8(buf).expect("utf8 report"))
    }

    #[test]
    fn check_reports_every_axiom_and_lemma() {
        let (code, text) = run_cli(&["check", "Z:tau=7"]);
        assert_eq!(code, 0, "{text}");
        let pass_lines = text.lines().filter(|l| l.contains(" PASS ")).count();
        assert_eq!(pass_lines, 19);
        for id in 1..=16 {
            assert!(text.contains(&format!("AXIOM {id} PASS")), "{text}");
        }
        assert!(text.contains("LEMMA 1 PASS"));
        assert!(text.contains("LEMMA 2 PASS"));
        assert!(text.contains("COROLLARY 1 PASS"));
        assert!(!text.contains("FAIL"));
    }

    #[test]
    fn seed_is_echoed() {
        let (code, text) = run_cli(&["check", "ZZ:tau=(1,0)", "--seed", "7", "--budget", "500"]);
        assert_eq!(code, 0, "{text}");
        assert!(text.lines().all(|l| l.ends_with("seed=7")), "{text}");
        let (_, text2) = run_cli(&["check", "ZZ:tau=(1,0)", "--seed", "7", "--budget", "500"]);
        assert_eq!(text, text2, "same flags and seed must reproduce the report");
    }

    #[test]
    fn compare_standard_against_nonstandard() {
        let (code, text) = run_cli(&["compare", "Z:tau=6", "QZ:tau=(1,0)"]);
        assert_eq!(code, 1, "{text}");
        assert!(text.contains("NOT EQUIVALENT"), "{text}");
        let (code, text) = run_cli(&["compare", "Z:tau=6", "QZ:tau=(0,6)"]);
        assert_eq!(code, 0, "{text}");
        assert!(text.lines().last() == Some("EQUIVALENT"), "{text}");
    }

    #[test]
    fn classify_failures_exit_one() {
        let (code, text) = run_cli(&["classify", "Q:tau=1"]);
        assert_eq!(code, 1, "{text}");
        assert!(text.contains("DISCRETE FAIL"), "{text}");
        assert!(!text.contains("SIGNATURE"), "{text}");
        let (code, text) = run_cli(&["classify", "Z:tau=6", "--nmax", "4"]);
        assert_eq!(code, 0, "{text}");
        assert!(
            text.contains("SIGNATURE standard=true value=5 residues={2:1,3:2,4:1}"),
            "{text}"
        );
    }

    #[test]
    fn enumerate_round_trips_through_the_parser() {
        let (code, text) = run_cli(&["enumerate", "--size", "2", "--require", "all"]);
        assert_eq!(code, 0, "{text}");
        assert_eq!(text.matches("TOAG1").count(), 1, "{text}");
        let reparsed = TruncStructure::parse_toag1(&text).expect("report is a loadable table");
        assert_eq!(reparsed, TruncStructure::from_table(crate::trunc::FiniteTable::saturating(2)));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_cli(&["frobnicate"]).0, 2);
        assert_eq!(run_cli(&[]).0, 2);
        assert_eq!(run_cli(&["check", "W:tau=3"]).0, 2);
        assert_eq!(run_cli(&["check", "/no/such/file.toag1"]).0, 2);
        assert_eq!(run_cli(&["enumerate", "--size", "2", "--require", "all", "--negate", "5"]).0, 2);
        assert_eq!(run_cli(&["valuation", "--p", "4", "--k", "2"]).0, 2);
        assert_eq!(run_cli(&["--help"]).0, 0);
    }

    #[test]
    fn valuation_reports_ring_laws_and_value_structure() {
        let (code, text) = run_cli(&["valuation", "--p", "3", "--k", "2"]);
        assert_eq!(code, 0, "{text}");
        assert!(text.contains("RING p=3 k=2 modulus=9"), "{text}");
        assert!(text.contains("VALUATION PASS pairs=81"), "{text}");
        assert_eq!(
            text.lines().filter(|l| l.starts_with("VALUE AXIOM")).count(),
            16,
            "{text}"
        );
    }

    #[test]
    fn budget_exhaustion_exits_three() {
        let (code, text) = run_cli(&["enumerate", "--size", "3", "--require", "all", "--budget", "2"]);
        assert_eq!(code, 3, "{text}");
        assert!(text.contains("exhausted=false"), "{text}");
    }
}
