//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Criteria 1 to 4 run the shipped recipes end to end.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use aavqe_cli::commands::{cmd_aavqe, cmd_vqe};
use aavqe_cli::config::{ConfigFile, ExperimentConfig, Overrides};
use aavqe_cli::output::{num, AavqeSummary, VqeSummary};
use aavqe_core::ansatz::AnsatzSpec;
use aavqe_core::driver::run_aavqe;
use aavqe_core::estimator::{expectation_exact, expectation_sampled};
use aavqe_core::hamiltonians::{build_chain, build_driver, build_exact_cover, interpolate};
use aavqe_core::optim::{gradient_estimate, minimize};
use aavqe_core::oracle::exact_spectrum;
use aavqe_core::{ChainSpec, ExactCoverInstance, Gate, ParameterVector, Pauli, ScheduleConfig, ShotBudget, SpsaConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn recipe(name: &str, out: &Path) -> ExperimentConfig {
    let file = ConfigFile::load(&root().join("recipes").join(name)).expect("recipe loads");
    let flags = Overrides { out: Some(out.join(name)), ..Overrides::default() };
    ExperimentConfig::resolve(&file, &flags).expect("recipe resolves")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn aavqe_chain(out: &Path) -> (AavqeSummary, Duration) {
    let (summary, dt) = timed(|| cmd_aavqe(&recipe("aavqe_chain4.cfg", out)).expect("chain AAVQE runs"));
    (summary, dt)
}

fn criterion_1(chain: &(AavqeSummary, Duration)) -> Outcome {
    let (summary, dt) = chain;
    let ok = summary.runs.iter().filter(|r| r.success == Some(true)).count();
    let pass = summary.runs.len() == 20 && ok >= 18 && dt.as_secs_f64() < 120.0;
    outcome(pass, format!("{ok}/20 runs within 0.1 of the ground energy, {:.1} s (need >= 18, < 120 s)", dt.as_secs_f64()))
}

fn criterion_2(out: &Path, chain: &AavqeSummary) -> Outcome {
    let summary: VqeSummary = cmd_vqe(&recipe("vqe_chain4.cfg", out)).expect("chain VQE runs");
    let stuck = summary
        .runs
        .iter()
        .filter(|r| r.final_energy_exact - r.ground_energy.expect("chain ground energy") >= 0.1)
        .count();
    let vqe_ok = summary.runs.len() - stuck;
    let aavqe_ok = chain.runs.iter().filter(|r| r.success == Some(true)).count();
    outcome(
        stuck >= 2 && aavqe_ok >= vqe_ok,
        format!("{stuck}/20 VQE runs stuck >= 0.1 above ground; successes AAVQE {aavqe_ok} vs VQE {vqe_ok}"),
    )
}

fn criterion_3(out: &Path) -> Outcome {
    let (summary, dt) = timed(|| cmd_aavqe(&recipe("aavqe_ec8.cfg", out)).expect("N=8 AAVQE runs"));
    let hits = summary.runs.iter().filter(|r| r.most_probable_bitstring.as_str() == r.solution.as_deref().unwrap_or("")).count();
    let pass = summary.runs.len() == 10 && hits >= 8 && dt.as_secs_f64() < 300.0;
    let got: Vec<&str> = summary.runs.iter().map(|r| r.most_probable_bitstring.as_str()).collect();
    outcome(
        pass,
        format!(
            "{hits}/10 seeds end on solution {} (need >= 8), {:.1} s; final most probable: {}",
            summary.runs[0].solution.as_deref().unwrap_or("?"),
            dt.as_secs_f64(),
            got.join(" ")
        ),
    )
}

fn criterion_4(out: &Path) -> Outcome {
    let (summary, dt) = timed(|| cmd_aavqe(&recipe("first_detection_n12.cfg", out)).expect("N=12 AAVQE runs"));
    let early = summary.runs.iter().filter(|r| r.first_solution_s.is_some_and(|s| s <= 0.3 + 1e-12)).count();
    let frac = early as f64 / summary.runs.len() as f64;
    let latest = summary.runs.iter().filter_map(|r| r.first_solution_s).fold(0.0f64, f64::max);
    let pass = summary.runs.len() == 20 && summary.n_qubits == 12 && frac >= 0.8 && dt.as_secs_f64() < 1800.0;
    outcome(
        pass,
        format!("{early}/20 instances sampled the solution at s <= 0.3 (latest first detection s = {latest}), {:.1} s", dt.as_secs_f64()),
    )
}

fn fixture_instances(max_n: usize) -> Vec<(PathBuf, ExactCoverInstance)> {
    let mut found = Vec::new();
    for dir in std::fs::read_dir(root().join("fixtures")).unwrap() {
        for entry in std::fs::read_dir(dir.unwrap().path()).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "txt") {
                let inst = ExactCoverInstance::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
                if inst.n_vars() <= max_n {
                    found.push((path, inst));
                }
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found
}

fn criterion_5() -> Outcome {
    let fixtures = fixture_instances(10);
    let mut bad = Vec::new();
    for (path, inst) in &fixtures {
        let h = build_exact_cover(inst).unwrap();
        let diag = h.diagonal();
        let diag_ok = diag.iter().enumerate().all(|(a, &d)| d == inst.evaluate(a as u64) as f64);
        let spec = exact_spectrum(&h, 2).unwrap();
        if !diag_ok || spec.energies[0] != 0.0 || spec.energies[1] != 1.0 {
            bad.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    outcome(
        bad.is_empty() && !fixtures.is_empty(),
        format!("{} fixtures checked, diagonal == clause penalty, E0 = 0, E1 = 1; mismatches: {bad:?}", fixtures.len()),
    )
}

fn std_dev(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn criterion_6() -> Outcome {
    let spec = AnsatzSpec::new(4, 2).unwrap();
    let state = spec.prepare_state(&spec.random_parameters(99)).unwrap();
    let zz = ChainSpec { coupling_axis: Pauli::Z, ..ChainSpec::xx(4, 1.0) };
    let h = interpolate(&build_driver(4).unwrap(), &build_chain(&zz).unwrap(), 0.5).unwrap();
    let spread = |m: usize| {
        let xs: Vec<f64> = (0..200).map(|seed| expectation_sampled(&state, &h, ShotBudget::Shots(m), seed).unwrap()).collect();
        std_dev(&xs)
    };
    let ratio = spread(100) / spread(1600);
    outcome((4.0 / 1.25..=4.0 * 1.25).contains(&ratio), format!("std(M=100) / std(M=1600) = {ratio:.3} (need 4 within x1.25)"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for dim in 1..=8usize {
        let m: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let q: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| m[i][j] + m[j][i]).collect()).collect();
        let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let theta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = |t: &[f64]| -> f64 {
            (0..dim).map(|i| 0.5 * t[i] * (0..dim).map(|j| q[i][j] * t[j]).sum::<f64>() + b[i] * t[i]).sum()
        };
        let mut mean = vec![0.0; dim];
        for bits in 0u32..1 << dim {
            let delta: Vec<f64> = (0..dim).map(|j| if bits >> j & 1 == 1 { 1.0 } else { -1.0 }).collect();
            let g = gradient_estimate(&theta, &mut |t: &[f64]| f(t), 0.1, &delta).unwrap();
            for (acc, gj) in mean.iter_mut().zip(g) {
                *acc += gj / (1u32 << dim) as f64;
            }
        }
        for i in 0..dim {
            let exact = (0..dim).map(|j| q[i][j] * theta[j]).sum::<f64>() + b[i];
            worst = worst.max((mean[i] - exact).abs());
        }
    }
    let dim = 8;
    let theta0 = ParameterVector(vec![1.0 / (dim as f64).sqrt(); dim]);
    let cfg = SpsaConfig { rng_seed: 7, ..SpsaConfig::with_iterations(500) };
    let trace = minimize(&theta0, &mut |t: &[f64]| t.iter().map(|x| x * x).sum::<f64>(), &cfg).unwrap();
    let norm = trace.final_parameters.iter().map(|x| x * x).sum::<f64>().sqrt();
    outcome(
        worst < 1e-10 && norm <= 0.1,
        format!("max |mean SPSA - gradient| = {worst:.2e} over dims 1..8; |theta| = {norm:.4} after {} iterations", trace.len()),
    )
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    let qubit = rng.gen_range(0..n);
    let angle = rng.gen_range(-4.0..4.0);
    match rng.gen_range(0..4) {
        0 => Gate::Rx { qubit, angle },
        1 => Gate::Ry { qubit, angle },
        2 => Gate::Rz { qubit, angle },
        _ => {
            let other = (qubit + rng.gen_range(1..n)) % n;
            Gate::Cnot { control: qubit, target: other }
        }
    }
}

fn criterion_8(summaries: &[String]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();

    let spec = AnsatzSpec::new(4, 2).unwrap();
    let norm_ok = (0..200).all(|k| {
        let mut s = spec.prepare_state(&spec.random_parameters(k)).unwrap();
        let gates: Vec<Gate> = (0..30).map(|_| random_gate(&mut rng, 4)).collect();
        s.apply_all(&gates).unwrap();
        (s.norm() - 1.0).abs() < 1e-12
    });
    if !norm_ok {
        failures.push("norm");
    }

    let h0 = build_driver(4).unwrap();
    let hp = build_chain(&ChainSpec::xx(4, 1.0)).unwrap();
    let linear_ok = (0..200).all(|k| {
        let st = spec.prepare_state(&spec.random_parameters(1000 + k)).unwrap();
        let s: f64 = rng.gen_range(0.0..=1.0);
        let lhs = expectation_exact(&st, &interpolate(&h0, &hp, s).unwrap()).unwrap();
        let rhs = (1.0 - s) * expectation_exact(&st, &h0).unwrap() + s * expectation_exact(&st, &hp).unwrap();
        (lhs - rhs).abs() < 1e-10
    });
    if !linear_ok {
        failures.push("interpolation");
    }

    let small = AnsatzSpec::new(3, 2).unwrap();
    let (h0, hp) = (build_driver(3).unwrap(), build_chain(&ChainSpec::xx(3, 1.0)).unwrap());
    let mut sched = ScheduleConfig::linear(0.1).unwrap();
    sched.iterations_per_step = 30;
    let rec = run_aavqe(&h0, &hp, &small, &sched, &SpsaConfig::with_iterations(30), None).unwrap();
    let pike_ok = rec.steps.windows(2).all(|w| {
        let carried = small.prepare_state(&w[0].trace.final_parameters).unwrap();
        let pike = (w[1].s - w[0].s) * (expectation_exact(&carried, &hp).unwrap() - expectation_exact(&carried, &h0).unwrap());
        (w[1].trace.records[0].value - w[0].final_energy_exact - pike).abs() < 1e-9
    });
    if !pike_ok {
        failures.push("warm-start pike");
    }

    let instances_ok = fixture_instances(usize::MAX)
        .iter()
        .all(|(_, inst)| ExactCoverInstance::parse(&inst.serialize()).as_ref() == Ok(inst));
    let floats_ok = (0..10_000).all(|_| {
        let x: f64 = rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-20..20));
        num(x).parse::<f64>() == Ok(x)
    }) && num(f64::INFINITY).parse::<f64>() == Ok(f64::INFINITY);
    let json_ok = summaries.iter().all(|text| {
        let back: AavqeSummary = serde_json::from_str(text).unwrap();
        serde_json::to_string(&back).unwrap() == *text
    });
    for (ok, name) in [(instances_ok, "instance round trip"), (floats_ok, "float round trip"), (json_ok, "JSON round trip")] {
        if !ok {
            failures.push(name);
        }
    }

    outcome(
        failures.is_empty(),
        format!("norm preservation, interpolation linearity, warm-start pike, instance/float/JSON round trips; failing: {failures:?}"),
    )
}

fn main() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path();
    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut record = |id, name, f: &mut dyn FnMut() -> Outcome| {
        let (o, dt) = timed(f);
        println!("criterion {id} {:<4} {name}: {} [{:.1} s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, dt.as_secs_f64());
        results.push((id, name, o, dt));
    };

    let mut chain = None;
    record(1, "AAVQE chain N=4", &mut || criterion_1(chain.insert(aavqe_chain(out))));
    let chain = chain.unwrap().0;
    let chain_json = serde_json::to_string(&chain).unwrap();
    record(2, "VQE local minima", &mut || criterion_2(out, &chain));
    let mut ec_json = Vec::new();
    record(3, "EXACT COVER N=8", &mut || {
        let o = criterion_3(out);
        ec_json.push(std::fs::read_to_string(out.join("aavqe_ec8.cfg/aavqe_summary.json")).unwrap());
        o
    });
    record(4, "first detection N=12", &mut || criterion_4(out));
    record(5, "EC Hamiltonian diagonal", &mut criterion_5);
    record(6, "shot-noise scaling", &mut criterion_6);
    record(7, "SPSA gradient and convergence", &mut criterion_7);
    let mut jsons = vec![chain_json];
    jsons.extend(ec_json.iter().map(|t| serde_json::to_string(&serde_json::from_str::<AavqeSummary>(t).unwrap()).unwrap()));
    record(8, "invariant suites", &mut || criterion_8(&jsons));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
