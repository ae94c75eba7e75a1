//! Experiment configuration: a TOML document per experiment, with command
//! line flags layered on top.
//!
//! Relative paths inside a config file resolve against the directory that
//! holds the file. Paths given as flags resolve against the working
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use aavqe_core::ansatz::AnsatzSpec;
use aavqe_core::driver::Schedule;
use aavqe_core::hamiltonians::{build_chain, build_driver, build_exact_cover};
use aavqe_core::{ChainSpec, ExactCoverInstance, Pauli, PauliHamiltonian, ShotBudget, SpsaConfig};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const DEFAULT_DEPTH: usize = 3;
pub const DEFAULT_DELTA_S: f64 = 0.05;
pub const DEFAULT_VQE_ITERATIONS: usize = 1000;
pub const DEFAULT_SUCCESS_TOL: f64 = 0.1;
pub const DEFAULT_SPECTRUM_INTERVALS: usize = 100;
pub const DEFAULT_MAX_ATTEMPTS: usize = 100_000;

/// The file as written, every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub problem: Option<ProblemKind>,
    pub seeds: Option<SeedList>,
    pub shots: Option<Shots>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Energy distance from the ground energy that counts as solved.
    pub success_tol: Option<f64>,
    pub chain: Option<ChainSection>,
    pub driver: Option<DriverSection>,
    pub exact_cover: Option<ExactCoverSection>,
    pub ansatz: Option<AnsatzSection>,
    pub schedule: Option<ScheduleSection>,
    pub spsa: Option<SpsaSection>,
    pub vqe: Option<VqeSection>,
    pub spectrum: Option<SpectrumSection>,
    pub gen_ec: Option<GenEcSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Chain,
    ExactCover,
    Driver,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedList {
    List(Vec<u64>),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Shots {
    Count(usize),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub n_qubits: usize,
    pub lambda: Option<f64>,
    pub coupling_axis: Option<String>,
    pub field_axis: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverSection {
    pub n_qubits: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactCoverSection {
    /// Instance files.
    pub instances: Option<Vec<PathBuf>>,
    /// A directory whose `*.txt` files are all used, in name order.
    pub instance_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub delta_s: Option<f64>,
    /// Explicit grid; overrides `delta_s`.
    pub points: Option<Vec<f64>>,
    pub iterations_per_step: Option<usize>,
    pub retry_on_divergence: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpsaSection {
    pub a: Option<f64>,
    pub c: Option<f64>,
    pub big_a: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub convergence_window: Option<usize>,
    pub convergence_tol: Option<f64>,
    pub target_step: Option<f64>,
    pub calibration_pairs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeSection {
    pub iterations: Option<usize>,
    /// Seed of the initial parameters shared by every run.
    pub init_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Grid intervals; the CSV has one more row.
    pub intervals: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenEcSection {
    pub n_vars: Option<usize>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub max_attempts: Option<usize>,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub shots: Option<ShotBudget>,
    pub delta_s: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::invalid(e.to_string()))
    }

    /// Reads `path`; relative paths inside are rebased onto its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::invalid(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(out) = cfg.out.as_mut() {
            rebase(out);
        }
        if let Some(ec) = cfg.exact_cover.as_mut() {
            ec.instances.iter_mut().flatten().for_each(rebase);
            if let Some(dir) = ec.instance_dir.as_mut() {
                rebase(dir);
            }
        }
        Ok(cfg)
    }
}

/// Parses `"0..20"`, `"0..=19"`, `"3"` or `"1,4,9"`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || CliError::invalid(format!("cannot read seed list {text:?}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..=") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        return Ok((lo..=hi).collect());
    }
    if let Some((lo, hi)) = text.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi)?);
        return Ok((lo..hi).collect());
    }
    text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
}

/// Parses a shot count or the word `exact`.
pub fn parse_shots(text: &str) -> Result<ShotBudget> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("exact") {
        return Ok(ShotBudget::Exact);
    }
    match text.parse::<usize>() {
        Ok(0) | Err(_) => Err(CliError::invalid(format!("shots must be a positive integer or \"exact\", got {text:?}"))),
        Ok(m) => Ok(ShotBudget::Shots(m)),
    }
}

fn parse_axis(text: &str) -> Result<Pauli> {
    match text.trim() {
        "x" | "X" => Ok(Pauli::X),
        "z" | "Z" => Ok(Pauli::Z),
        other => Err(CliError::invalid(format!("chain axis must be X or Z, got {other:?}"))),
    }
}

#[derive(Debug, Clone)]
pub struct NamedInstance {
    /// File stem, used as the instance label in outputs.
    pub name: String,
    pub path: PathBuf,
    pub instance: ExactCoverInstance,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Chain(ChainSpec),
    ExactCover(Vec<NamedInstance>),
    Driver(usize),
}

impl Problem {
    pub fn n_qubits(&self) -> usize {
        match self {
            Problem::Chain(c) => c.n_qubits,
            Problem::ExactCover(list) => list[0].instance.n_vars(),
            Problem::Driver(n) => *n,
        }
    }

    /// One target Hamiltonian per instance (a single entry otherwise).
    pub fn targets(&self) -> Result<Vec<(Option<&NamedInstance>, PauliHamiltonian)>> {
        Ok(match self {
            Problem::Chain(c) => vec![(None, build_chain(c)?)],
            Problem::Driver(n) => vec![(None, build_driver(*n)?)],
            Problem::ExactCover(list) => list
                .iter()
                .map(|ni| Ok((Some(ni), build_exact_cover(&ni.instance)?)))
                .collect::<Result<_>>()?,
        })
    }
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub ansatz: AnsatzSpec,
    pub schedule: Schedule,
    pub iterations_per_step: usize,
    pub retry_on_divergence: bool,
    pub vqe_iterations: usize,
    pub init_seed: u64,
    /// SPSA settings; `max_iterations` and `big_a` are filled in per use.
    pub spsa: SpsaSection,
    pub budget: ShotBudget,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub workers: usize,
    pub success_tol: f64,
    pub spectrum_intervals: usize,
}

impl ExperimentConfig {
    pub fn resolve(file: &ConfigFile, flags: &Overrides) -> Result<Self> {
        let problem = resolve_problem(file)?;
        let n = problem.n_qubits();
        let depth = file.ansatz.as_ref().and_then(|a| a.depth).unwrap_or(DEFAULT_DEPTH);
        let ansatz = AnsatzSpec::new(n, depth).map_err(|e| CliError::invalid(e.to_string()))?;

        let sched = file.schedule.clone().unwrap_or_default();
        let schedule = match (flags.delta_s, &sched.points) {
            (None, Some(points)) => Schedule::from_points(points.clone()),
            (delta, _) => Schedule::linear(delta.or(sched.delta_s).unwrap_or(DEFAULT_DELTA_S)),
        }
        .map_err(|e| CliError::invalid(e.to_string()))?;
        let iterations_per_step = sched.iterations_per_step.unwrap_or(aavqe_core::driver::DEFAULT_ITERATIONS_PER_STEP);
        if iterations_per_step == 0 {
            return Err(CliError::invalid("iterations_per_step must be >= 1"));
        }
        let vqe = file.vqe.clone().unwrap_or_default();
        let vqe_iterations = vqe.iterations.unwrap_or(DEFAULT_VQE_ITERATIONS);
        if vqe_iterations == 0 {
            return Err(CliError::invalid("vqe.iterations must be >= 1"));
        }

        let budget = match (&flags.shots, &file.shots) {
            (Some(b), _) => *b,
            (None, Some(Shots::Count(m))) => parse_shots(&m.to_string())?,
            (None, Some(Shots::Text(t))) => parse_shots(t)?,
            (None, None) => ShotBudget::Exact,
        };
        let seeds = match (&flags.seeds, &file.seeds) {
            (Some(s), _) => s.clone(),
            (None, Some(SeedList::List(s))) => s.clone(),
            (None, Some(SeedList::Text(t))) => parse_seeds(t)?,
            // A single run when nothing is given; an explicit empty list is an error.
            (None, None) => vec![0],
        };
        if seeds.is_empty() {
            return Err(CliError::invalid("seed list is empty"));
        }
        let out = flags.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
        let workers = flags.workers.or(file.workers).unwrap_or_else(default_workers);
        if workers == 0 {
            return Err(CliError::invalid("workers must be >= 1"));
        }
        let success_tol = file.success_tol.unwrap_or(DEFAULT_SUCCESS_TOL);
        let spectrum_intervals = file.spectrum.as_ref().and_then(|s| s.intervals).unwrap_or(DEFAULT_SPECTRUM_INTERVALS);
        if spectrum_intervals == 0 {
            return Err(CliError::invalid("spectrum.intervals must be >= 1"));
        }

        let cfg = Self {
            problem,
            ansatz,
            schedule,
            iterations_per_step,
            retry_on_divergence: sched.retry_on_divergence.unwrap_or(true),
            vqe_iterations,
            init_seed: vqe.init_seed.unwrap_or(0),
            spsa: file.spsa.clone().unwrap_or_default(),
            budget,
            seeds,
            out,
            workers,
            success_tol,
            spectrum_intervals,
        };
        cfg.spsa_config(1)?.validate().map_err(|e| CliError::invalid(e.to_string()))?;
        Ok(cfg)
    }

    /// SPSA settings for a run of `iterations`.
    pub fn spsa_config(&self, iterations: usize) -> Result<SpsaConfig> {
        let s = &self.spsa;
        let base = SpsaConfig::with_iterations(iterations);
        Ok(SpsaConfig {
            a: s.a.or(base.a),
            c: s.c.unwrap_or(base.c),
            big_a: s.big_a.unwrap_or(base.big_a),
            alpha: s.alpha.unwrap_or(base.alpha),
            gamma: s.gamma.unwrap_or(base.gamma),
            convergence_window: s.convergence_window.unwrap_or(base.convergence_window),
            convergence_tol: s.convergence_tol.unwrap_or(base.convergence_tol),
            target_step: s.target_step.unwrap_or(base.target_step),
            calibration_pairs: s.calibration_pairs.unwrap_or(base.calibration_pairs),
            ..base
        })
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn resolve_problem(file: &ConfigFile) -> Result<Problem> {
    let kind = file.problem.ok_or_else(|| CliError::invalid("missing `problem` (chain, exact_cover or driver)"))?;
    match kind {
        ProblemKind::Chain => {
            let c = file.chain.as_ref().ok_or_else(|| CliError::invalid("problem = \"chain\" needs a [chain] section"))?;
            let spec = ChainSpec {
                n_qubits: c.n_qubits,
                lambda: c.lambda.unwrap_or(1.0),
                coupling_axis: c.coupling_axis.as_deref().map(parse_axis).transpose()?.unwrap_or(Pauli::X),
                field_axis: c.field_axis.as_deref().map(parse_axis).transpose()?.unwrap_or(Pauli::X),
            };
            build_chain(&spec).map_err(|e| CliError::invalid(e.to_string()))?;
            Ok(Problem::Chain(spec))
        }
        ProblemKind::Driver => {
            let d = file.driver.as_ref().ok_or_else(|| CliError::invalid("problem = \"driver\" needs a [driver] section"))?;
            build_driver(d.n_qubits).map_err(|e| CliError::invalid(e.to_string()))?;
            Ok(Problem::Driver(d.n_qubits))
        }
        ProblemKind::ExactCover => {
            let ec = file.exact_cover.clone().unwrap_or_default();
            let mut paths = ec.instances.unwrap_or_default();
            if let Some(dir) = &ec.instance_dir {
                paths.extend(list_instances(dir)?);
            }
            if paths.is_empty() {
                return Err(CliError::invalid("problem = \"exact_cover\" needs `instances` or `instance_dir`"));
            }
            let list = paths.into_iter().map(|p| read_instance(&p)).collect::<Result<Vec<_>>>()?;
            let n = list[0].instance.n_vars();
            if let Some(other) = list.iter().find(|ni| ni.instance.n_vars() != n) {
                return Err(CliError::invalid(format!(
                    "{} has {} variables, expected {n} like the first instance",
                    other.path.display(),
                    other.instance.n_vars()
                )));
            }
            Ok(Problem::ExactCover(list))
        }
    }
}

fn list_instances(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(CliError::invalid(format!("instance directory {} does not exist", dir.display())));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Reads and parses an instance file; a missing file is a validation error.
pub fn read_instance(path: &Path) -> Result<NamedInstance> {
    if !path.is_file() {
        return Err(CliError::invalid(format!("instance file {} does not exist", path.display())));
    }
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let instance = ExactCoverInstance::parse(&text)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(NamedInstance { name, path: path.to_path_buf(), instance })
}
