//! EXACT COVER instances: evaluation, unique-solution generation and the
//! plain-text instance format.
//!
//! The text format is line based:
//!
//! ```text
//! c optional comment lines
//! p ec <n_vars> <n_clauses>
//! 0 1 2
//! 1 3 4
//! ```
//!
//! Each clause line holds three distinct zero-based variable indices.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::MAX_QUBITS;

pub type Clause = [usize; 3];

/// Smallest variable count accepted by [`generate_hard_instance`].
pub const GENERATE_MIN_VARS: usize = 4;

/// `n_vars` boolean variables and a list of 3-variable clauses, each of
/// which is satisfied when exactly one of its variables is true.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactCoverInstance {
    n_vars: usize,
    clauses: Vec<Clause>,
}

impl ExactCoverInstance {
    /// Clause triples are sorted on the way in; indices must be distinct,
    /// in range, and no clause may repeat.
    pub fn new(n_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        if n_vars == 0 || n_vars > MAX_QUBITS {
            return Err(Error::QubitCount(n_vars));
        }
        let mut seen = BTreeSet::new();
        let mut sorted = Vec::with_capacity(clauses.len());
        for mut c in clauses {
            c.sort_unstable();
            check_clause(&c, n_vars).map_err(Error::InvalidArgument)?;
            if !seen.insert(c) {
                return Err(Error::InvalidArgument(format!("duplicate clause {c:?}")));
            }
            sorted.push(c);
        }
        Ok(Self { n_vars, clauses: sorted })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// `sum_clauses (t - 1)^2` where `t` counts the true variables of the
    /// clause. Bit `q` of `assignment` is variable `q`.
    pub fn evaluate(&self, assignment: u64) -> u32 {
        self.clauses.iter().map(|c| clause_penalty(c, assignment)).sum()
    }

    /// True when every clause has exactly one true variable.
    pub fn satisfies(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| true_count(c, assignment) == 1)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "p" {
                if header.is_some() {
                    return Err(err("second header line".into()));
                }
                if fields.len() != 4 || fields[1] != "ec" {
                    return Err(err(format!("malformed header {line:?}, expected \"p ec <n_vars> <n_clauses>\"")));
                }
                let n_vars = parse_usize(fields[2]).map_err(err)?;
                let n_clauses = parse_usize(fields[3]).map_err(err)?;
                if n_vars == 0 || n_vars > MAX_QUBITS {
                    return Err(err(format!("n_vars {n_vars} outside 1..={MAX_QUBITS}")));
                }
                header = Some((n_vars, n_clauses, line_no));
                continue;
            }
            let Some((n_vars, _, _)) = header else {
                return Err(err("clause before header".into()));
            };
            if fields.len() != 3 {
                return Err(err(format!("clause must have 3 indices, found {}", fields.len())));
            }
            let mut c = [0usize; 3];
            for (slot, f) in c.iter_mut().zip(&fields) {
                *slot = parse_usize(f).map_err(err)?;
            }
            c.sort_unstable();
            check_clause(&c, n_vars).map_err(err)?;
            if !seen.insert(c) {
                return Err(err(format!("duplicate clause {c:?}")));
            }
            clauses.push(c);
        }
        let Some((n_vars, n_clauses, header_line)) = header else {
            return Err(Error::Parse { line: 0, message: "missing \"p ec\" header".into() });
        };
        if clauses.len() != n_clauses {
            return Err(Error::Parse {
                line: header_line,
                message: format!("header declares {n_clauses} clauses, found {}", clauses.len()),
            });
        }
        Ok(Self { n_vars, clauses })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "p ec {} {}", self.n_vars, self.clauses.len());
        for [i, j, k] in &self.clauses {
            let _ = writeln!(out, "{i} {j} {k}");
        }
        out
    }
}

fn parse_usize(s: &str) -> core::result::Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, found {s:?}"))
}

fn check_clause(c: &Clause, n_vars: usize) -> core::result::Result<(), String> {
    if c[0] == c[1] || c[1] == c[2] {
        return Err(format!("clause {c:?} repeats a variable"));
    }
    if c[2] >= n_vars {
        return Err(format!("index {} out of range for {n_vars} variables", c[2]));
    }
    Ok(())
}

#[inline]
fn true_count(c: &Clause, assignment: u64) -> u32 {
    c.iter().map(|&v| ((assignment >> v) & 1) as u32).sum()
}

#[inline]
fn clause_penalty(c: &Clause, assignment: u64) -> u32 {
    let t = true_count(c, assignment) as i32 - 1;
    (t * t) as u32
}

/// Summary of an instance's solution structure.
#[derive(Debug, Clone, PartialEq)]
pub struct HardnessReport {
    pub solution_count: usize,
    /// The solution, when it is unique.
    pub solution: Option<u64>,
    pub clause_count: usize,
    /// Minimum spectral gap along the driver-to-problem interpolation,
    /// when it has been computed.
    pub min_gap: Option<f64>,
}

/// Rejection-samples an instance with exactly one satisfying assignment.
///
/// Random distinct triples are added one at a time. After every addition
/// the surviving satisfying assignments are recounted; a clause that would
/// leave no solution is withdrawn and another is drawn. Generation stops
/// once exactly one assignment survives. Every proposal counts against
/// `max_attempts`.
pub fn generate_hard_instance(
    n_vars: usize,
    rng_seed: u64,
    max_attempts: usize,
) -> Result<(ExactCoverInstance, HardnessReport)> {
    if !(GENERATE_MIN_VARS..=MAX_QUBITS).contains(&n_vars) {
        return Err(Error::InvalidArgument(format!(
            "n_vars {n_vars} outside {GENERATE_MIN_VARS}..={MAX_QUBITS}"
        )));
    }
    let mut rng = crate::rng_from_seed(rng_seed);
    let mut clauses: Vec<Clause> = Vec::new();
    let mut used = BTreeSet::new();
    let mut survivors: Option<Vec<u32>> = None;
    let mut attempts = 0;
    while attempts < max_attempts {
        attempts += 1;
        let clause = random_triple(&mut rng, n_vars);
        if used.contains(&clause) {
            continue;
        }
        let next: Vec<u32> = match &survivors {
            Some(s) => s.iter().copied().filter(|&a| true_count(&clause, a as u64) == 1).collect(),
            None => (0..1u32 << n_vars).filter(|&a| true_count(&clause, a as u64) == 1).collect(),
        };
        if next.is_empty() {
            continue;
        }
        used.insert(clause);
        clauses.push(clause);
        if next.len() == 1 {
            let solution = next[0] as u64;
            let report = HardnessReport {
                solution_count: 1,
                solution: Some(solution),
                clause_count: clauses.len(),
                min_gap: None,
            };
            return Ok((ExactCoverInstance { n_vars, clauses }, report));
        }
        survivors = Some(next);
    }
    Err(Error::Generation { n_vars, seed: rng_seed, attempts })
}

fn random_triple(rng: &mut crate::Rng, n: usize) -> Clause {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut c = rng.gen_range(0..n - 2);
    if c >= lo {
        c += 1;
    }
    if c >= hi {
        c += 1;
    }
    let mut t = [a, b, c];
    t.sort_unstable();
    t
}
