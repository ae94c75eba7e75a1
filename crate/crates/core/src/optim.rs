//! Simultaneous perturbation stochastic approximation (SPSA).
//!
//! Each step perturbs every coordinate at once along a random Rademacher
//! direction and estimates the gradient from two objective evaluations:
//!
//! ```text
//! c_k = c / (k + 1)^gamma
//! a_k = a / (A + k + 1)^alpha
//! g_k = [f(theta + c_k D) - f(theta - c_k D)] / (2 c_k) * D
//! theta_{k+1} = theta_k - a_k g_k
//! ```

use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;

use crate::ansatz::ParameterVector;
use crate::error::{Error, Result};

/// Something SPSA can minimize.
///
/// Any `FnMut(&[f64]) -> f64` closure is an objective. Implementors that
/// want to know which iteration an evaluation belongs to can override
/// [`Objective::begin_iteration`]; it is called before the recorded
/// evaluation of every iteration.
pub trait Objective {
    fn evaluate(&mut self, theta: &[f64]) -> f64;

    fn begin_iteration(&mut self, _k: usize) {}
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn evaluate(&mut self, theta: &[f64]) -> f64 {
        self(theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsaConfig {
    /// Step gain `a`. `None` calibrates it at the starting point so the
    /// first update moves each coordinate by about `target_step`.
    pub a: Option<f64>,
    /// Perturbation size `c` in radians.
    pub c: f64,
    /// Stability offset `A`.
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub max_iterations: usize,
    /// Stop when the best value improved by less than `convergence_tol`
    /// over the last `convergence_window` iterations. A window of 0
    /// disables the rule.
    pub convergence_window: usize,
    pub convergence_tol: f64,
    pub rng_seed: u64,
    /// First-step magnitude targeted by gain calibration.
    pub target_step: f64,
    /// Perturbation pairs used by gain calibration (two evaluations each).
    pub calibration_pairs: usize,
    /// Keep a copy of the parameters at every recorded iteration.
    pub keep_snapshots: bool,
}

impl SpsaConfig {
    /// Standard settings for a run of `max_iterations`.
    pub fn with_iterations(max_iterations: usize) -> Self {
        Self {
            a: None,
            c: 0.1,
            big_a: 0.1 * max_iterations as f64,
            alpha: 0.602,
            gamma: 0.101,
            max_iterations,
            convergence_window: 50,
            convergence_tol: 1e-4,
            rng_seed: 0,
            target_step: 0.1,
            calibration_pairs: 5,
            keep_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if let Some(a) = self.a {
            if !(a > 0.0) {
                return bad("SPSA gain a must be positive");
            }
        }
        if !(self.c > 0.0) {
            return bad("SPSA perturbation c must be positive");
        }
        if !(0.0 < self.gamma && self.gamma < self.alpha && self.alpha <= 1.0) {
            return bad("SPSA exponents must satisfy 0 < gamma < alpha <= 1");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1");
        }
        if !(self.big_a >= 0.0) {
            return bad("SPSA stability offset A must be non-negative");
        }
        if self.a.is_none() && (self.calibration_pairs == 0 || !(self.target_step > 0.0)) {
            return bad("gain calibration needs calibration_pairs >= 1 and target_step > 0");
        }
        Ok(())
    }

    /// `c_k`.
    pub fn perturbation(&self, k: usize) -> f64 {
        self.c / libm::pow(k as f64 + 1.0, self.gamma)
    }

    /// `a_k` for a resolved gain `a`.
    pub fn step_gain(&self, a: f64, k: usize) -> f64 {
        a / libm::pow(self.big_a + k as f64 + 1.0, self.alpha)
    }
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self::with_iterations(100)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective at the parameters held at the start of the iteration.
    pub value: f64,
    pub parameters: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptTrace {
    pub records: Vec<IterationRecord>,
    /// Parameters of the last recorded iteration.
    pub final_parameters: ParameterVector,
    pub final_value: f64,
    /// Total objective calls, calibration included.
    pub evaluations: usize,
    pub calibration_evaluations: usize,
    /// The gain `a` actually used.
    pub gain: f64,
    pub converged: bool,
}

impl OptTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.value)
    }

    pub fn best_value(&self) -> f64 {
        self.values().fold(f64::INFINITY, f64::min)
    }
}

/// A run aborted by a non-finite objective value, with everything recorded
/// before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationFailure {
    pub iteration: usize,
    pub partial: OptTrace,
}

impl fmt::Display for OptimizationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "objective returned a non-finite value at iteration {}", self.iteration)
    }
}

impl From<OptimizationFailure> for Error {
    fn from(e: OptimizationFailure) -> Self {
        Error::NonFiniteObjective { iteration: e.iteration }
    }
}

/// Rademacher direction in `{-1, +1}^dim`.
pub fn rademacher(rng: &mut crate::Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Two-sided simultaneous-perturbation gradient estimate along `delta`.
/// Returns `None` if either evaluation is non-finite.
pub fn gradient_estimate(
    theta: &[f64],
    objective: &mut impl Objective,
    c_k: f64,
    delta: &[f64],
) -> Option<Vec<f64>> {
    let shifted = |sign: f64| -> Vec<f64> { theta.iter().zip(delta).map(|(t, d)| t + sign * c_k * d).collect() };
    let plus = objective.evaluate(&shifted(1.0));
    let minus = objective.evaluate(&shifted(-1.0));
    if !plus.is_finite() || !minus.is_finite() {
        return None;
    }
    let scale = (plus - minus) / (2.0 * c_k);
    // 1/D_j = D_j for Rademacher entries.
    Some(delta.iter().map(|d| scale * d).collect())
}

/// Stateful SPSA: owns the perturbation RNG and the resolved gain.
pub struct Spsa {
    config: SpsaConfig,
    rng: crate::Rng,
    gain: Option<f64>,
}

impl Spsa {
    pub fn new(config: SpsaConfig) -> Result<Self> {
        config.validate()?;
        let rng = crate::rng_from_seed(config.rng_seed);
        let gain = config.a;
        Ok(Self { config, rng, gain })
    }

    pub fn config(&self) -> &SpsaConfig {
        &self.config
    }

    /// Resolves `a` if it was left to calibration. Returns the number of
    /// objective evaluations spent.
    pub fn calibrate(&mut self, theta: &[f64], objective: &mut impl Objective) -> Option<usize> {
        if self.gain.is_some() {
            return Some(0);
        }
        let cfg = &self.config;
        let mut total = 0.0;
        for _ in 0..cfg.calibration_pairs {
            let delta = rademacher(&mut self.rng, theta.len());
            let g = gradient_estimate(theta, objective, cfg.c, &delta)?;
            total += g.first().map_or(0.0, |v| v.abs());
        }
        let mean = total / cfg.calibration_pairs as f64;
        let scale = libm::pow(cfg.big_a + 1.0, cfg.alpha);
        // A flat start gives no slope information; fall back to a unit slope.
        let magnitude = if mean > 1e-12 { mean } else { 1.0 };
        self.gain = Some(cfg.target_step * scale / magnitude);
        Some(2 * cfg.calibration_pairs)
    }

    /// One SPSA update from `theta` at iteration `k`. Exactly two objective
    /// evaluations. Uncalibrated instances fall back to `target_step` as
    /// the raw gain.
    pub fn step(&mut self, theta: &[f64], objective: &mut impl Objective, k: usize) -> Option<Vec<f64>> {
        let a = self.gain.unwrap_or(self.config.target_step);
        let c_k = self.config.perturbation(k);
        let a_k = self.config.step_gain(a, k);
        let delta = rademacher(&mut self.rng, theta.len());
        let g = gradient_estimate(theta, objective, c_k, &delta)?;
        Some(theta.iter().zip(&g).map(|(t, gi)| t - a_k * gi).collect())
    }
}

/// A single update with a fresh perturbation stream seeded from
/// `config.rng_seed`.
pub fn spsa_gradient_step(
    theta: &ParameterVector,
    objective: &mut impl Objective,
    k: usize,
    config: &SpsaConfig,
) -> Result<ParameterVector> {
    let mut spsa = Spsa::new(config.clone())?;
    spsa.step(theta, objective, k)
        .map(ParameterVector)
        .ok_or(Error::NonFiniteObjective { iteration: k })
}

/// Runs SPSA from `theta0`.
///
/// Every iteration records the objective at the current parameters and
/// then takes one update, so an iteration costs three evaluations. The
/// returned parameters are those of the last recorded value.
pub fn minimize(
    theta0: &ParameterVector,
    objective: &mut impl Objective,
    config: &SpsaConfig,
) -> core::result::Result<OptTrace, OptimizationFailure> {
    let mut spsa = Spsa::new(config.clone()).map_err(|_| OptimizationFailure {
        iteration: 0,
        partial: empty_trace(theta0),
    })?;
    let mut trace = empty_trace(theta0);
    let mut theta: Vec<f64> = theta0.to_vec();

    match spsa.calibrate(&theta, objective) {
        Some(n) => {
            trace.calibration_evaluations = n;
            trace.evaluations = n;
        }
        None => {
            trace.evaluations = 2 * config.calibration_pairs;
            trace.calibration_evaluations = trace.evaluations;
            return Err(OptimizationFailure { iteration: 0, partial: trace });
        }
    }
    trace.gain = spsa.gain.unwrap_or(config.target_step);

    let mut best = f64::INFINITY;
    let mut best_history = Vec::with_capacity(config.max_iterations);
    for k in 0..config.max_iterations {
        objective.begin_iteration(k);
        let value = objective.evaluate(&theta);
        trace.evaluations += 1;
        if !value.is_finite() {
            return Err(OptimizationFailure { iteration: k, partial: trace });
        }
        trace.records.push(IterationRecord {
            iteration: k,
            value,
            parameters: config.keep_snapshots.then(|| theta.clone()),
        });
        trace.final_parameters = ParameterVector(theta.clone());
        trace.final_value = value;
        best = best.min(value);
        best_history.push(best);

        let next = spsa.step(&theta, objective, k);
        trace.evaluations += 2;
        match next {
            Some(t) => theta = t,
            None => return Err(OptimizationFailure { iteration: k, partial: trace }),
        }

        if has_converged(&best_history, config) {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

fn has_converged(best_history: &[f64], config: &SpsaConfig) -> bool {
    let w = config.convergence_window;
    let n = best_history.len();
    if w == 0 || n < w {
        return false;
    }
    let reference = best_history[n - w];
    let improvement = reference - best_history[n - 1];
    improvement < config.convergence_tol
}

fn empty_trace(theta0: &ParameterVector) -> OptTrace {
    OptTrace {
        records: Vec::new(),
        final_parameters: theta0.clone(),
        final_value: f64::NAN,
        evaluations: 0,
        calibration_evaluations: 0,
        gain: f64::NAN,
        converged: false,
    }
}
