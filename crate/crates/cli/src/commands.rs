//! The four subcommands. Runs execute on a bounded worker pool; every
//! output file is written once, after all runs finish, in run-id order.

use std::path::Path;
use std::time::Instant;

use aavqe_core::driver::{
    first_solution_statistics, run_aavqe, run_vqe_with, RunRecord, ScheduleConfig, VqeOptions, VqeRun,
    EXACT_TRACKING_MAX_QUBITS,
};
use aavqe_core::hamiltonians::{build_driver, interpolate, DENSE_MAX_QUBITS};
use aavqe_core::oracle::{adiabatic_error_profile, brute_force_exact_cover, exact_spectrum, uniform_grid, PROFILE_MAX_QUBITS};
use aavqe_core::problems::{generate_hard_instance, GENERATE_MIN_VARS};
use aavqe_core::{derive_seed, PauliHamiltonian, MAX_QUBITS};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, NamedInstance, Problem};
use crate::error::{CliError, Result};
use crate::output::{self, *};

/// Per-step ground energies go into the steps CSV up to this size.
pub const STEP_ORACLE_MAX_QUBITS: usize = 8;

/// Manifests report the adiabatic minimum gap up to this size.
pub const MANIFEST_GAP_MAX_QUBITS: usize = 8;

struct Job<'a> {
    run_id: usize,
    seed: u64,
    target: usize,
    instance: Option<&'a NamedInstance>,
}

fn jobs<'a>(cfg: &ExperimentConfig, targets: &[(Option<&'a NamedInstance>, PauliHamiltonian)]) -> Vec<Job<'a>> {
    let mut out = Vec::with_capacity(targets.len() * cfg.seeds.len());
    for (t, (instance, _)) in targets.iter().enumerate() {
        for &seed in &cfg.seeds {
            out.push(Job { run_id: out.len(), seed, target: t, instance: *instance });
        }
    }
    out
}

fn run_pool<T, F>(workers: usize, jobs: &[Job<'_>], f: F) -> Result<Vec<(T, f64)>>
where
    T: Send,
    F: Fn(&Job<'_>) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::invalid(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let start = Instant::now();
                let r = f(job)?;
                Ok((r, start.elapsed().as_secs_f64()))
            })
            .collect()
    })
}

fn describe(problem: &Problem) -> String {
    match problem {
        Problem::Chain(c) => format!(
            "chain n={} lambda={} coupling={} field={}",
            c.n_qubits, c.lambda, c.coupling_axis, c.field_axis
        ),
        Problem::ExactCover(list) => format!("exact_cover n={} instances={}", list[0].instance.n_vars(), list.len()),
        Problem::Driver(n) => format!("driver n={n}"),
    }
}

fn ground_energy(h: &PauliHamiltonian) -> Result<Option<f64>> {
    if h.n_qubits() > DENSE_MAX_QUBITS {
        return Ok(None);
    }
    Ok(Some(exact_spectrum(h, 2)?.ground_energy()))
}

/// The unique satisfying assignment, if there is exactly one.
fn unique_solution(instance: Option<&NamedInstance>) -> Option<u64> {
    let sols = brute_force_exact_cover(&instance?.instance);
    (sols.len() == 1).then(|| sols[0])
}

fn write_timing(dir: &Path, command: &str, workers: usize, total: f64, per_run: &[f64]) -> Result<()> {
    let timing = Timing {
        schema_version: SCHEMA_VERSION,
        command: command.into(),
        workers,
        total_seconds: total,
        runs: per_run.iter().enumerate().map(|(run_id, &seconds)| RunTiming { run_id, seconds }).collect(),
    };
    write_json(&dir.join(TIMING), &timing)
}

/// One plain VQE per seed and target, all from the same initial
/// parameters; seeds select the perturbation and sampling streams.
pub fn cmd_vqe(cfg: &ExperimentConfig) -> Result<VqeSummary> {
    let start = Instant::now();
    output::ensure_dir(&cfg.out)?;
    let targets = cfg.problem.targets()?;
    let grounds = targets.iter().map(|(_, h)| ground_energy(h)).collect::<Result<Vec<_>>>()?;
    let theta0 = cfg.ansatz.random_parameters(derive_seed(cfg.init_seed, 1, 0));
    let n = cfg.ansatz.n_qubits;
    let jobs = jobs(cfg, &targets);

    let runs: Vec<(VqeRun, f64)> = run_pool(cfg.workers, &jobs, |job| {
        let opt = aavqe_core::SpsaConfig { rng_seed: derive_seed(job.seed, 2, 0), ..cfg.spsa_config(cfg.vqe_iterations)? };
        let options = VqeOptions {
            budget: cfg.budget,
            sampling_seed: job.seed,
            sampling_offset: 0,
            target: job.instance.map(|ni| &ni.instance),
        };
        Ok(run_vqe_with(&targets[job.target].1, &cfg.ansatz, &theta0, &opt, &options)?)
    })?;

    let exact_column = n <= EXACT_TRACKING_MAX_QUBITS;
    let mut header = vec!["run_id", "seed", "instance", "iteration", "energy"];
    if exact_column {
        header.push("energy_exact");
    }
    let mut rows = Vec::new();
    for (job, (run, _)) in jobs.iter().zip(&runs) {
        for (k, rec) in run.trace.records.iter().enumerate() {
            let mut row = vec![
                job.run_id.to_string(),
                job.seed.to_string(),
                job.instance.map(|ni| ni.name.clone()).unwrap_or_default(),
                k.to_string(),
                num(rec.value),
            ];
            if exact_column {
                let exact = match &run.exact_energies {
                    Some(e) => e.get(k).copied(),
                    None => Some(rec.value),
                };
                row.push(opt_num(exact));
            }
            rows.push(row);
        }
    }
    write_csv(&cfg.out.join(VQE_TRACE), &header, rows)?;

    let run_summaries: Vec<VqeRunSummary> = jobs
        .iter()
        .zip(&runs)
        .map(|(job, (run, _))| {
            let ground = grounds[job.target];
            VqeRunSummary {
                run_id: job.run_id,
                seed: job.seed,
                instance: job.instance.map(|ni| ni.name.clone()),
                final_energy: run.trace.final_value,
                final_energy_exact: run.final_energy_exact,
                ground_energy: ground,
                success: ground.map(|g| run.final_energy_exact - g <= cfg.success_tol),
                most_probable_bitstring: bits(run.state.most_probable(), n),
                iterations: run.trace.len(),
                evaluations: run.trace.evaluations,
                converged: run.trace.converged,
                failed: run.failed,
            }
        })
        .collect();
    let success_count = grounds
        .iter()
        .all(Option::is_some)
        .then(|| run_summaries.iter().filter(|r| r.success == Some(true)).count());
    let summary = VqeSummary {
        schema_version: SCHEMA_VERSION,
        command: "vqe".into(),
        problem: describe(&cfg.problem),
        n_qubits: n,
        depth: cfg.ansatz.depth,
        shots: cfg.budget.shots(),
        iterations: cfg.vqe_iterations,
        init_seed: cfg.init_seed,
        success_tol: cfg.success_tol,
        runs: run_summaries,
        success_count,
    };
    write_json(&cfg.out.join(VQE_SUMMARY), &summary)?;
    let per_run: Vec<f64> = runs.iter().map(|r| r.1).collect();
    write_timing(&cfg.out, "vqe", cfg.workers, start.elapsed().as_secs_f64(), &per_run)?;
    Ok(summary)
}

/// One AAVQE run per seed and target, from the driver to the problem.
pub fn cmd_aavqe(cfg: &ExperimentConfig) -> Result<AavqeSummary> {
    let start = Instant::now();
    output::ensure_dir(&cfg.out)?;
    let n = cfg.ansatz.n_qubits;
    let h0 = build_driver(n)?;
    let targets = cfg.problem.targets()?;
    let grounds = targets.iter().map(|(_, h)| ground_energy(h)).collect::<Result<Vec<_>>>()?;
    let solutions: Vec<Option<u64>> = targets.iter().map(|(ni, _)| unique_solution(*ni)).collect();
    let grid = cfg.schedule.points().to_vec();
    let step_grounds: Vec<Option<Vec<f64>>> = targets
        .iter()
        .map(|(_, hp)| {
            if n > STEP_ORACLE_MAX_QUBITS {
                return Ok(None);
            }
            grid.iter()
                .map(|&s| Ok(exact_spectrum(&interpolate(&h0, hp, s)?, 2)?.ground_energy()))
                .collect::<Result<Vec<_>>>()
                .map(Some)
        })
        .collect::<Result<_>>()?;
    let jobs = jobs(cfg, &targets);
    let opt = cfg.spsa_config(cfg.iterations_per_step)?;

    let runs: Vec<(RunRecord, f64)> = run_pool(cfg.workers, &jobs, |job| {
        let schedule = ScheduleConfig {
            schedule: cfg.schedule.clone(),
            iterations_per_step: cfg.iterations_per_step,
            budget: cfg.budget,
            master_seed: job.seed,
            retry_on_divergence: cfg.retry_on_divergence,
        };
        let target = job.instance.map(|ni| &ni.instance);
        Ok(run_aavqe(&h0, &targets[job.target].1, &cfg.ansatz, &schedule, &opt, target)?)
    })?;

    let exact_column = n <= EXACT_TRACKING_MAX_QUBITS;
    let mut header = vec!["run_id", "seed", "instance", "step", "s", "iteration", "iteration_global", "energy"];
    if exact_column {
        header.push("energy_exact");
    }
    header.push("solution_found");
    let mut rows = Vec::new();
    let mut step_rows = Vec::new();
    let mut first_global = Vec::with_capacity(runs.len());
    for (job, (rec, _)) in jobs.iter().zip(&runs) {
        let name = job.instance.map(|ni| ni.name.clone()).unwrap_or_default();
        let mut offset = 0;
        let mut first = None;
        for (i, st) in rec.steps.iter().enumerate() {
            for (k, r) in st.trace.records.iter().enumerate() {
                let found = st.solution_iterations.binary_search(&k).is_ok();
                if found && first.is_none() {
                    first = Some(offset + k);
                }
                let mut row = vec![
                    job.run_id.to_string(),
                    job.seed.to_string(),
                    name.clone(),
                    i.to_string(),
                    num(st.s),
                    k.to_string(),
                    (offset + k).to_string(),
                    num(r.value),
                ];
                if exact_column {
                    let exact = match &st.exact_energies {
                        Some(e) => e.get(k).copied(),
                        None => Some(r.value),
                    };
                    row.push(opt_num(exact));
                }
                row.push(u8::from(found).to_string());
                rows.push(row);
            }
            offset += st.trace.len();
            step_rows.push(vec![
                job.run_id.to_string(),
                job.seed.to_string(),
                name.clone(),
                i.to_string(),
                num(st.s),
                num(st.final_energy_exact),
                opt_num(st.final_energy_sampled),
                opt_num(step_grounds[job.target].as_ref().map(|g| g[i])),
                st.trace.len().to_string(),
                st.first_solution_iteration.map(|k| k.to_string()).unwrap_or_default(),
                u8::from(st.retried).to_string(),
                u8::from(st.failed).to_string(),
            ]);
        }
        first_global.push(first);
    }
    write_csv(&cfg.out.join(AAVQE_TRACE), &header, rows)?;
    write_csv(
        &cfg.out.join(AAVQE_STEPS),
        &[
            "run_id",
            "seed",
            "instance",
            "step",
            "s",
            "final_energy_exact",
            "final_energy_sampled",
            "ground_energy",
            "iterations",
            "first_solution_iteration",
            "retried",
            "failed",
        ],
        step_rows,
    )?;

    let run_summaries: Vec<AavqeRunSummary> = jobs
        .iter()
        .zip(&runs)
        .zip(first_global)
        .map(|((job, (rec, _)), first)| {
            let ground = grounds[job.target];
            let solution = solutions[job.target];
            let success = match (job.instance, solution) {
                (Some(_), Some(sol)) => Some(rec.most_probable_bitstring == sol),
                (Some(_), None) => None,
                (None, _) => ground.map(|g| rec.final_energy_exact - g <= cfg.success_tol),
            };
            AavqeRunSummary {
                run_id: job.run_id,
                seed: job.seed,
                instance: job.instance.map(|ni| ni.name.clone()),
                final_energy_exact: rec.final_energy_exact,
                ground_energy: ground,
                most_probable_bitstring: bits(rec.most_probable_bitstring, n),
                solution: solution.map(|s| bits(s, n)),
                success,
                detected_solution: rec.detected_solution.map(|s| bits(s, n)),
                first_solution_s: rec.first_solution_s,
                first_solution_iteration_global: first,
                total_iterations: rec.total_iterations(),
                retried_steps: rec.steps.iter().filter(|s| s.retried).count(),
                failed_steps: rec.steps.iter().filter(|s| s.failed).count(),
            }
        })
        .collect();

    let histogram = match &cfg.problem {
        Problem::ExactCover(_) => {
            let records: Vec<RunRecord> = runs.iter().map(|(r, _)| r.clone()).collect();
            let h = first_solution_statistics(&records, &grid);
            write_csv(
                &cfg.out.join(HISTOGRAM),
                &["s", "count", "cumulative_fraction"],
                h.grid.iter().zip(&h.counts).map(|(s, c)| vec![num(*s), c.to_string(), num(h.fraction_at_or_below(*s))]),
            )?;
            let cumulative = h.grid.iter().map(|&s| h.fraction_at_or_below(s)).collect();
            Some(HistogramSummary { grid: h.grid, counts: h.counts, overflow: h.overflow, cumulative })
        }
        _ => None,
    };
    let success_count = run_summaries
        .iter()
        .all(|r| r.success.is_some())
        .then(|| run_summaries.iter().filter(|r| r.success == Some(true)).count());
    let summary = AavqeSummary {
        schema_version: SCHEMA_VERSION,
        command: "aavqe".into(),
        problem: describe(&cfg.problem),
        n_qubits: n,
        depth: cfg.ansatz.depth,
        shots: cfg.budget.shots(),
        grid,
        iterations_per_step: cfg.iterations_per_step,
        success_tol: cfg.success_tol,
        runs: run_summaries,
        success_count,
        histogram,
    };
    write_json(&cfg.out.join(AAVQE_SUMMARY), &summary)?;
    let per_run: Vec<f64> = runs.iter().map(|r| r.1).collect();
    write_timing(&cfg.out, "aavqe", cfg.workers, start.elapsed().as_secs_f64(), &per_run)?;
    Ok(summary)
}

/// Gap profile of the driver-to-problem interpolation.
pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<SpectrumSummary> {
    let n = cfg.ansatz.n_qubits;
    if n > PROFILE_MAX_QUBITS {
        return Err(CliError::invalid(format!("spectrum needs at most {PROFILE_MAX_QUBITS} qubits, got {n}")));
    }
    let targets = cfg.problem.targets()?;
    if targets.len() != 1 {
        return Err(CliError::invalid(format!("spectrum takes exactly one instance, got {}", targets.len())));
    }
    output::ensure_dir(&cfg.out)?;
    let h0 = build_driver(n)?;
    let profile = adiabatic_error_profile(&h0, &targets[0].1, &uniform_grid(cfg.spectrum_intervals))?;
    write_csv(
        &cfg.out.join(SPECTRUM),
        &["s", "gap", "numerator", "ratio"],
        profile.points.iter().map(|p| vec![num(p.s), num(p.gap), num(p.numerator), num(p.ratio)]),
    )?;
    let min = profile.min_gap().expect("grid is never empty");
    let summary = SpectrumSummary {
        schema_version: SCHEMA_VERSION,
        command: "spectrum".into(),
        problem: describe(&cfg.problem),
        n_qubits: n,
        rows: profile.points.len(),
        min_gap: min.gap,
        s_at_min_gap: min.s,
        max_finite_ratio: profile.points.iter().map(|p| p.ratio).filter(|r| r.is_finite()).reduce(f64::max),
        degenerate_points: profile.points.iter().filter(|p| p.degenerate).count(),
    };
    write_json(&cfg.out.join(SPECTRUM_SUMMARY), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct GenEcArgs {
    pub n_vars: usize,
    pub count: usize,
    pub seed: u64,
    pub max_attempts: usize,
    pub out: std::path::PathBuf,
}

/// File name of the generated instance for `seed`.
pub fn instance_file_name(n_vars: usize, seed: u64) -> String {
    format!("ec_n{n_vars}_s{seed}.txt")
}

/// Writes `count` unique-solution instances, seeds `seed..seed + count`,
/// plus a manifest.
pub fn cmd_gen_ec(args: &GenEcArgs) -> Result<Manifest> {
    let n = args.n_vars;
    if !(GENERATE_MIN_VARS..=MAX_QUBITS).contains(&n) {
        return Err(CliError::invalid(format!("n_vars {n} outside {GENERATE_MIN_VARS}..={MAX_QUBITS}")));
    }
    if args.count == 0 || args.max_attempts == 0 {
        return Err(CliError::invalid("count and max_attempts must be >= 1"));
    }
    output::ensure_dir(&args.out)?;
    let mut entries = Vec::with_capacity(args.count);
    for seed in (0..args.count as u64).map(|i| args.seed + i) {
        let (instance, report) = generate_hard_instance(n, seed, args.max_attempts).map_err(CliError::Generation)?;
        let solution = report.solution.expect("generator only accepts unique solutions");
        let min_gap = if n <= MANIFEST_GAP_MAX_QUBITS {
            let hp = aavqe_core::hamiltonians::build_exact_cover(&instance)?;
            adiabatic_error_profile(&build_driver(n)?, &hp, &uniform_grid(100))?.min_gap().map(|p| p.gap)
        } else {
            None
        };
        let file = instance_file_name(n, seed);
        let text = format!(
            "c EXACT COVER instance with a unique satisfying assignment\nc generator seed {seed}\nc solution {} (qubit 0 last)\n{}",
            bits(solution, n),
            instance.serialize()
        );
        let path = args.out.join(&file);
        std::fs::write(&path, text).map_err(CliError::io(&path))?;
        entries.push(ManifestEntry {
            file,
            seed,
            n_clauses: report.clause_count,
            solution,
            solution_bits: bits(solution, n),
            min_gap,
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: "gen-ec".into(),
        n_vars: n,
        count: args.count,
        base_seed: args.seed,
        max_attempts: args.max_attempts,
        instances: entries,
    };
    write_json(&args.out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}
