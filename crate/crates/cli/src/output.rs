//! Output schemas and writers.
//!
//! Every JSON document carries `schema_version`. CSV files start with a
//! header row; floats are written in shortest round-trip form, with `inf`
//! for infinities. Bitstrings are written most significant qubit first, so
//! qubit 0 is the rightmost character.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub const VQE_TRACE: &str = "vqe_trace.csv";
pub const VQE_SUMMARY: &str = "vqe_summary.json";
pub const AAVQE_TRACE: &str = "aavqe_trace.csv";
pub const AAVQE_STEPS: &str = "aavqe_steps.csv";
pub const AAVQE_SUMMARY: &str = "aavqe_summary.json";
pub const HISTOGRAM: &str = "first_solution_histogram.csv";
pub const SPECTRUM: &str = "spectrum.csv";
pub const SPECTRUM_SUMMARY: &str = "spectrum_summary.json";
pub const MANIFEST: &str = "manifest.json";
pub const TIMING: &str = "timing.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeSummary {
    pub schema_version: u32,
    pub command: String,
    pub problem: String,
    pub n_qubits: usize,
    pub depth: usize,
    /// Shots per measurement group; absent for exact expectation values.
    pub shots: Option<usize>,
    pub iterations: usize,
    pub init_seed: u64,
    pub success_tol: f64,
    pub runs: Vec<VqeRunSummary>,
    pub success_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeRunSummary {
    pub run_id: usize,
    pub seed: u64,
    pub instance: Option<String>,
    /// Objective value at the final parameters (sampled under a shot budget).
    pub final_energy: f64,
    pub final_energy_exact: f64,
    pub ground_energy: Option<f64>,
    pub success: Option<bool>,
    pub most_probable_bitstring: String,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AavqeSummary {
    pub schema_version: u32,
    pub command: String,
    pub problem: String,
    pub n_qubits: usize,
    pub depth: usize,
    pub shots: Option<usize>,
    pub grid: Vec<f64>,
    pub iterations_per_step: usize,
    pub success_tol: f64,
    pub runs: Vec<AavqeRunSummary>,
    pub success_count: Option<usize>,
    /// First-detection histogram over the grid, for EXACT COVER runs.
    pub histogram: Option<HistogramSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AavqeRunSummary {
    pub run_id: usize,
    pub seed: u64,
    pub instance: Option<String>,
    pub final_energy_exact: f64,
    pub ground_energy: Option<f64>,
    pub most_probable_bitstring: String,
    /// The unique satisfying assignment, when the instance has one.
    pub solution: Option<String>,
    /// Final state encodes the solution (EXACT COVER) or sits within
    /// `success_tol` of the ground energy (other problems).
    pub success: Option<bool>,
    pub detected_solution: Option<String>,
    pub first_solution_s: Option<f64>,
    pub first_solution_iteration_global: Option<usize>,
    pub total_iterations: usize,
    pub retried_steps: usize,
    pub failed_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    /// Runs that never sampled the solution.
    pub overflow: usize,
    /// Fraction of runs detected at or below each grid point.
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub schema_version: u32,
    pub command: String,
    pub problem: String,
    pub n_qubits: usize,
    pub rows: usize,
    pub min_gap: f64,
    pub s_at_min_gap: f64,
    /// Largest finite ratio.
    pub max_finite_ratio: Option<f64>,
    pub degenerate_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub n_vars: usize,
    pub count: usize,
    pub base_seed: u64,
    pub max_attempts: usize,
    pub instances: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    pub n_clauses: usize,
    pub solution: u64,
    pub solution_bits: String,
    /// Smallest gap along the driver-to-problem path (small instances only).
    pub min_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub schema_version: u32,
    pub command: String,
    pub workers: usize,
    pub total_seconds: f64,
    pub runs: Vec<RunTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub run_id: usize,
    pub seconds: f64,
}

/// `n`-character binary string, qubit 0 last.
pub fn bits(value: u64, n: usize) -> String {
    format!("{value:0n$b}")
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Format { path: path.to_path_buf(), message: e.to_string() })?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format { path: path.to_path_buf(), message: e.to_string() })
}

/// Writes a header row and then `rows`.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let fmt_err = |e: csv::Error| CliError::Format { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(fmt_err)?;
    w.write_record(header).map_err(fmt_err)?;
    for row in rows {
        w.write_record(&row).map_err(fmt_err)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Formats a float so it parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
