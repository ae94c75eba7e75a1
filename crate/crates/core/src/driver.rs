//! VQE and the adiabatically assisted VQE loop.
//!
//! An AAVQE run walks a grid `0 = s_0 < s_1 < ... < s_T = 1`. At every grid
//! point it minimizes the energy of `H(s) = (1 - s) H_0 + s H_P` with SPSA,
//! starting from the parameters that finished the previous point. The very
//! first point starts from random parameters.
//!
//! Random streams are derived from the run's master seed with
//! [`crate::derive_seed`]: stream 1 draws the initial parameters, stream 2
//! seeds the SPSA perturbations of step `i` (counter `i`), stream 3 seeds
//! measurement sampling (counter `(i << 32) | evaluation`), and stream 4
//! seeds divergence retries.

use alloc::vec::Vec;

use crate::ansatz::{AnsatzSpec, ParameterVector};
use crate::error::{Error, Result};
use crate::estimator::{Observable, ShotBudget};
use crate::hamiltonians::{interpolate, PauliHamiltonian};
use crate::optim::{minimize, Objective, OptTrace, SpsaConfig};
use crate::oracle::exact_spectrum;
use crate::problems::ExactCoverInstance;
use crate::simulator::StateVector;
use crate::derive_seed;

const STREAM_INIT: u16 = 1;
const STREAM_SPSA: u16 = 2;
const STREAM_SHOTS: u16 = 3;
const STREAM_RETRY: u16 = 4;

/// Per-iteration exact energies are tracked next to sampled objectives up
/// to this register size.
pub const EXACT_TRACKING_MAX_QUBITS: usize = 14;

/// The divergence retry consults the dense oracle up to this size.
pub const RETRY_ORACLE_MAX_QUBITS: usize = 8;

/// Default SPSA iterations per grid point.
pub const DEFAULT_ITERATIONS_PER_STEP: usize = 100;

/// A strictly increasing list of interpolation points from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    points: Vec<f64>,
}

impl Schedule {
    /// `s_i = i * delta_s` for `i < T = ceil(1 / delta_s)`, and `s_T = 1`.
    pub fn linear(delta_s: f64) -> Result<Self> {
        if !(delta_s > 0.0 && delta_s <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!("delta_s {delta_s} outside (0, 1]")));
        }
        // Absorb representation error so 1/0.05 gives 20 steps, not 21.
        let steps = libm::ceil(1.0 / delta_s - 1e-9) as usize;
        let points = (0..=steps).map(|i| if i == steps { 1.0 } else { i as f64 * delta_s }).collect();
        Ok(Self { points })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        let ok = points.len() >= 2
            && points[0] == 0.0
            && *points.last().unwrap() == 1.0
            && points.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidArgument(
                "schedule must increase strictly from exactly 0 to exactly 1".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of steps `T` (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleConfig {
    pub schedule: Schedule,
    pub iterations_per_step: usize,
    pub budget: ShotBudget,
    pub master_seed: u64,
    /// Re-run a step once when it loses track of the ground state by more
    /// than half the previous level gap (small registers only).
    pub retry_on_divergence: bool,
}

impl ScheduleConfig {
    pub fn linear(delta_s: f64) -> Result<Self> {
        Ok(Self {
            schedule: Schedule::linear(delta_s)?,
            iterations_per_step: DEFAULT_ITERATIONS_PER_STEP,
            budget: ShotBudget::Exact,
            master_seed: 0,
            retry_on_divergence: true,
        })
    }
}

/// Everything one VQE minimization produced.
#[derive(Debug, Clone, PartialEq)]
pub struct VqeRun {
    pub trace: OptTrace,
    /// State prepared from the final parameters.
    pub state: StateVector,
    pub final_energy_exact: f64,
    /// Exact energy at every recorded iteration, when the objective was
    /// sampled and the register is small enough.
    pub exact_energies: Option<Vec<f64>>,
    /// First satisfying bitstring seen in the measurements, with the
    /// iteration it appeared in.
    pub first_solution: Option<(usize, u64)>,
    /// Iterations whose measurements contained a satisfying bitstring.
    pub solution_iterations: Vec<usize>,
    /// Set when SPSA hit a non-finite energy; the trace is partial.
    pub failed: bool,
}

/// Energy of the ansatz state, exact or sampled, with solution detection
/// on every sampled computational-basis round.
struct EnergyObjective<'a> {
    spec: &'a AnsatzSpec,
    observable: Observable,
    budget: ShotBudget,
    seed: u64,
    stream_counter: u64,
    evaluations: u64,
    iteration: usize,
    record_next: bool,
    exact_energies: Option<Vec<f64>>,
    target: Option<&'a ExactCoverInstance>,
    first_solution: Option<(usize, u64)>,
    solution_iterations: Vec<usize>,
    error: Option<Error>,
}

impl EnergyObjective<'_> {
    fn energy(&mut self, theta: &[f64]) -> Result<f64> {
        let params = ParameterVector(theta.to_vec());
        let state = self.spec.prepare_state(&params)?;
        let Some(shots) = self.budget.shots() else {
            return self.observable.exact(&state);
        };
        let counter = self.stream_counter | self.evaluations;
        self.evaluations += 1;
        let mut rng = crate::rng_from_seed(derive_seed(self.seed, STREAM_SHOTS, counter));
        let est = self.observable.sampled_with(&state, shots, &mut rng)?;
        if let Some(inst) = self.target {
            if let Some(hit) = crate::estimator::detect_solution(&est.computational_samples, inst) {
                if self.first_solution.is_none() {
                    self.first_solution = Some((self.iteration, hit));
                }
                if self.solution_iterations.last() != Some(&self.iteration) {
                    self.solution_iterations.push(self.iteration);
                }
            }
        }
        if self.record_next {
            if let Some(exact) = self.exact_energies.as_mut() {
                exact.push(self.observable.exact(&state)?);
            }
        }
        Ok(est.energy)
    }
}

impl Objective for EnergyObjective<'_> {
    fn evaluate(&mut self, theta: &[f64]) -> f64 {
        let value = self.energy(theta).unwrap_or_else(|e| {
            self.error.get_or_insert(e);
            f64::NAN
        });
        self.record_next = false;
        value
    }

    fn begin_iteration(&mut self, k: usize) {
        self.iteration = k;
        self.record_next = true;
    }
}

/// Options for [`run_vqe_with`].
#[derive(Debug, Clone, Copy)]
pub struct VqeOptions<'a> {
    pub budget: ShotBudget,
    /// Seed for measurement sampling.
    pub sampling_seed: u64,
    /// Counter offset for the sampling stream.
    pub sampling_offset: u64,
    pub target: Option<&'a ExactCoverInstance>,
}

/// Plain VQE on `h` from `theta0`. Measurement sampling is seeded from
/// `opt.rng_seed`.
pub fn run_vqe(
    h: &PauliHamiltonian,
    spec: &AnsatzSpec,
    theta0: &ParameterVector,
    opt: &SpsaConfig,
    budget: ShotBudget,
) -> Result<VqeRun> {
    let options = VqeOptions { budget, sampling_seed: opt.rng_seed, sampling_offset: 0, target: None };
    run_vqe_with(h, spec, theta0, opt, &options)
}

pub fn run_vqe_with(
    h: &PauliHamiltonian,
    spec: &AnsatzSpec,
    theta0: &ParameterVector,
    opt: &SpsaConfig,
    options: &VqeOptions<'_>,
) -> Result<VqeRun> {
    if h.n_qubits() != spec.n_qubits {
        return Err(Error::QubitMismatch { expected: spec.n_qubits, found: h.n_qubits() });
    }
    if theta0.len() != spec.parameter_count() {
        return Err(Error::ParameterLength { expected: spec.parameter_count(), found: theta0.len() });
    }
    let sampled = options.budget.shots().is_some();
    let mut objective = EnergyObjective {
        spec,
        observable: Observable::new(h),
        budget: options.budget,
        seed: options.sampling_seed,
        stream_counter: options.sampling_offset,
        evaluations: 0,
        iteration: 0,
        record_next: false,
        exact_energies: (sampled && h.n_qubits() <= EXACT_TRACKING_MAX_QUBITS).then(Vec::new),
        target: options.target,
        first_solution: None,
        solution_iterations: Vec::new(),
        error: None,
    };
    let (trace, failed) = match minimize(theta0, &mut objective, opt) {
        Ok(t) => (t, false),
        Err(failure) => {
            if let Some(e) = objective.error.take() {
                return Err(e);
            }
            (failure.partial, true)
        }
    };
    let state = spec.prepare_state(&trace.final_parameters)?;
    let final_energy_exact = objective.observable.exact(&state)?;
    let mut exact_energies = objective.exact_energies;
    if let Some(e) = exact_energies.as_mut() {
        e.truncate(trace.len());
    }
    Ok(VqeRun {
        trace,
        state,
        final_energy_exact,
        exact_energies,
        first_solution: objective.first_solution,
        solution_iterations: objective.solution_iterations,
        failed,
    })
}

/// One grid point of an AAVQE run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub s: f64,
    pub trace: OptTrace,
    pub exact_energies: Option<Vec<f64>>,
    /// Exact energy of the final state under `H(s)`.
    pub final_energy_exact: f64,
    /// Sampled energy at the final parameters, for finite shot budgets.
    pub final_energy_sampled: Option<f64>,
    /// Iteration within this step at which a satisfying bitstring first
    /// appeared in the measurements.
    pub first_solution_iteration: Option<usize>,
    pub detected_solution: Option<u64>,
    pub solution_iterations: Vec<usize>,
    pub retried: bool,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub master_seed: u64,
    pub steps: Vec<StepRecord>,
    pub final_parameters: ParameterVector,
    /// Most probable basis state of the final prepared state.
    pub most_probable_bitstring: u64,
    pub final_energy_exact: f64,
    /// First satisfying bitstring seen during the run.
    pub detected_solution: Option<u64>,
    /// Grid point at which it was first seen.
    pub first_solution_s: Option<f64>,
}

impl RunRecord {
    /// Iterations summed over all steps.
    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.trace.len()).sum()
    }
}

#[derive(Clone, Copy)]
struct Tracking {
    /// Final energy above the exact ground energy.
    excess: f64,
    gap: f64,
}

/// Runs the AAVQE loop from `h0` to `hp`.
///
/// `target`, when given, enables solution detection on sampled
/// computational-basis measurements. A step whose optimizer fails is
/// recorded and the run continues from the last good parameters.
///
/// With `retry_on_divergence`, registers up to [`RETRY_ORACLE_MAX_QUBITS`]
/// are checked against the exact spectrum after every step: when the final
/// energy sits further above the ground energy than the previous step's did,
/// by more than half the previous level gap, the step is re-run once from
/// the same warm start with a fresh perturbation seed and the lower of the
/// two results kept.
pub fn run_aavqe(
    h0: &PauliHamiltonian,
    hp: &PauliHamiltonian,
    spec: &AnsatzSpec,
    schedule: &ScheduleConfig,
    opt: &SpsaConfig,
    target: Option<&ExactCoverInstance>,
) -> Result<RunRecord> {
    if h0.n_qubits() != hp.n_qubits() {
        return Err(Error::QubitMismatch { expected: h0.n_qubits(), found: hp.n_qubits() });
    }
    if h0.n_qubits() != spec.n_qubits {
        return Err(Error::QubitMismatch { expected: spec.n_qubits, found: h0.n_qubits() });
    }
    if schedule.iterations_per_step == 0 {
        return Err(Error::InvalidArgument("iterations_per_step must be >= 1".into()));
    }
    let master = schedule.master_seed;
    let mut theta = spec.random_parameters(derive_seed(master, STREAM_INIT, 0));
    let mut steps: Vec<StepRecord> = Vec::with_capacity(schedule.schedule.points().len());
    let mut prev_track: Option<Tracking> = None;
    // A calibrated gain is resolved once, at s = 0, and then reused: warm
    // starts sit near a minimum where the local slope says little about
    // the right step size.
    let mut gain = opt.a;

    for (i, &s) in schedule.schedule.points().iter().enumerate() {
        let h = interpolate(h0, hp, s)?;
        let step_opt = SpsaConfig {
            max_iterations: schedule.iterations_per_step,
            rng_seed: derive_seed(master, STREAM_SPSA, i as u64),
            a: gain,
            ..opt.clone()
        };
        let options = VqeOptions {
            budget: schedule.budget,
            sampling_seed: master,
            sampling_offset: (i as u64) << 32,
            target,
        };
        let mut run = run_vqe_with(&h, spec, &theta, &step_opt, &options)?;
        let mut retried = false;

        if schedule.retry_on_divergence && h.n_qubits() <= RETRY_ORACLE_MAX_QUBITS {
            let spectrum = exact_spectrum(&h, 1 << h.n_qubits())?;
            let excess = run.final_energy_exact - spectrum.ground_energy();
            if let Some(prev) = prev_track {
                if excess > prev.excess + 0.5 * prev.gap {
                    let retry_opt = SpsaConfig { rng_seed: derive_seed(master, STREAM_RETRY, i as u64), ..step_opt };
                    let retry_options = VqeOptions { sampling_offset: options.sampling_offset | (1 << 31), ..options };
                    let second = run_vqe_with(&h, spec, &theta, &retry_opt, &retry_options)?;
                    retried = true;
                    if second.final_energy_exact < run.final_energy_exact {
                        run = second;
                    }
                }
            }
            prev_track = spectrum.level_gap(1e-9).map(|gap| Tracking {
                excess: run.final_energy_exact - spectrum.ground_energy(),
                gap,
            });
        }

        if !run.failed {
            theta = run.trace.final_parameters.clone();
        }
        if gain.is_none() && run.trace.gain.is_finite() {
            gain = Some(run.trace.gain);
        }
        let final_energy_sampled = schedule.budget.shots().map(|_| run.trace.final_value);
        steps.push(StepRecord {
            s,
            final_energy_exact: run.final_energy_exact,
            final_energy_sampled,
            first_solution_iteration: run.first_solution.map(|(k, _)| k),
            detected_solution: run.first_solution.map(|(_, b)| b),
            solution_iterations: run.solution_iterations,
            exact_energies: run.exact_energies,
            trace: run.trace,
            retried,
            failed: run.failed,
        });
    }

    let final_state = spec.prepare_state(&theta)?;
    let first = steps.iter().find(|st| st.detected_solution.is_some());
    Ok(RunRecord {
        master_seed: master,
        most_probable_bitstring: final_state.most_probable(),
        final_energy_exact: crate::estimator::expectation_exact(&final_state, hp)?,
        detected_solution: first.and_then(|st| st.detected_solution),
        first_solution_s: first.map(|st| st.s),
        final_parameters: theta,
        steps,
    })
}

/// Counts of runs by the grid point at which a solution was first seen.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionHistogram {
    /// Bin positions (the schedule's grid).
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    /// Runs that never sampled a solution.
    pub overflow: usize,
}

impl SolutionHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.overflow
    }

    /// Fraction of runs whose first detection happened at `s <= s_max`.
    pub fn fraction_at_or_below(&self, s_max: f64) -> f64 {
        let hits: usize = self.grid.iter().zip(&self.counts).filter(|(s, _)| **s <= s_max + 1e-12).map(|(_, c)| c).sum();
        if self.total() == 0 { 0.0 } else { hits as f64 / self.total() as f64 }
    }
}

/// Bins every run's first-detection `s` onto `grid`.
pub fn first_solution_statistics(records: &[RunRecord], grid: &[f64]) -> SolutionHistogram {
    let mut counts = alloc::vec![0; grid.len()];
    let mut overflow = 0;
    for r in records {
        let bin = r.first_solution_s.and_then(|s| {
            grid.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - s).abs().total_cmp(&(b.1 - s).abs()))
                .map(|(i, _)| i)
        });
        match bin {
            Some(i) => counts[i] += 1,
            None => overflow += 1,
        }
    }
    SolutionHistogram { grid: grid.to_vec(), counts, overflow }
}
