//! Energy estimation: exact expectation values and simulated finite-shot
//! measurement.
//!
//! For sampling, terms are split into measurement groups:
//! every I/Z-only term shares one computational-basis group, every
//! I/X-only term shares one group measured after H on each qubit, every
//! I/Y-only term shares one group measured after RX(pi/2) on each qubit,
//! and each remaining mixed string is its own group. Each group receives
//! its own `shots` samples.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonians::{Pauli, PauliHamiltonian, PauliString};
use crate::problems::ExactCoverInstance;
use crate::simulator::{Gate, StateVector};

/// Default number of shots per measurement group.
pub const DEFAULT_SHOTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotBudget {
    /// Full state-vector expectation value.
    Exact,
    /// Samples per measurement group.
    Shots(usize),
}

impl ShotBudget {
    pub fn shots(self) -> Option<usize> {
        match self {
            ShotBudget::Exact => None,
            ShotBudget::Shots(m) => Some(m),
        }
    }
}

impl Default for ShotBudget {
    fn default() -> Self {
        ShotBudget::Shots(DEFAULT_SHOTS)
    }
}

/// One set of terms measured from the same rotated copy of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    /// Measurement basis per qubit; `I` and `Z` need no rotation.
    pub basis: Vec<Pauli>,
    /// Terms, each read out as the parity of its support.
    pub terms: Vec<PauliString>,
}

impl MeasurementGroup {
    pub fn is_computational(&self) -> bool {
        self.basis.iter().all(|p| matches!(p, Pauli::I | Pauli::Z))
    }

    fn rotation(&self) -> impl Iterator<Item = Gate> + '_ {
        self.basis.iter().enumerate().filter_map(|(q, p)| match p {
            Pauli::X => Some(Gate::H(q)),
            Pauli::Y => Some(Gate::Rx { qubit: q, angle: FRAC_PI_2 }),
            _ => None,
        })
    }

    /// Mean of `sum_t c_t (-1)^{|b & support_t|}` over the samples.
    fn estimate(&self, samples: &[u64]) -> f64 {
        let total: f64 = samples
            .iter()
            .map(|&b| {
                self.terms
                    .iter()
                    .map(|t| {
                        let odd = (b as u32 & t.support()).count_ones() % 2 == 1;
                        if odd { -t.coefficient } else { t.coefficient }
                    })
                    .sum::<f64>()
            })
            .sum();
        total / samples.len() as f64
    }
}

/// A Hamiltonian laid out for repeated evaluation against many states.
#[derive(Debug, Clone)]
pub struct Observable {
    n_qubits: usize,
    constant: f64,
    /// Diagonal part including the constant, when any diagonal term exists.
    diagonal: Option<Vec<f64>>,
    /// Off-diagonal terms keyed by their X mask.
    off_diagonal: Vec<(usize, Vec<PauliString>)>,
    groups: Vec<MeasurementGroup>,
}

impl Observable {
    pub fn new(h: &PauliHamiltonian) -> Self {
        let n = h.n_qubits();
        let diagonal = h.terms().iter().any(PauliString::is_diagonal).then(|| h.diagonal());
        let mut by_x: BTreeMap<u32, Vec<PauliString>> = BTreeMap::new();
        for t in h.terms().iter().filter(|t| !t.is_diagonal()) {
            by_x.entry(t.x_mask()).or_default().push(*t);
        }
        let off_diagonal = by_x.into_iter().map(|(x, ts)| (x as usize, ts)).collect();
        Self { n_qubits: n, constant: h.constant(), diagonal, off_diagonal, groups: measurement_groups(h) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn groups(&self) -> &[MeasurementGroup] {
        &self.groups
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, found: state.n_qubits() });
        }
        Ok(())
    }

    /// `<psi|H|psi>`.
    pub fn exact(&self, state: &StateVector) -> Result<f64> {
        self.check(state)?;
        let amps = state.amplitudes();
        let mut energy = match &self.diagonal {
            Some(d) => amps.iter().zip(d).map(|(a, v)| a.norm_sqr() * v).sum(),
            None => self.constant,
        };
        for (x, terms) in &self.off_diagonal {
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, a) in amps.iter().enumerate() {
                let overlap = amps[b ^ x].conj() * a;
                let weight: Complex64 = terms.iter().map(|t| t.phase(b) * t.coefficient).sum();
                acc += overlap * weight;
            }
            energy += acc.re;
        }
        Ok(energy)
    }

    /// Finite-shot estimate drawing `shots` samples per group from `rng`.
    pub fn sampled_with(&self, state: &StateVector, shots: usize, rng: &mut crate::Rng) -> Result<SampledEstimate> {
        self.check(state)?;
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be >= 1".into()));
        }
        let mut energy = self.constant;
        let mut computational = Vec::new();
        for group in &self.groups {
            let samples = if group.is_computational() {
                state.sample_with(shots, rng)
            } else {
                let mut rotated = state.clone();
                for g in group.rotation() {
                    rotated.apply(&g)?;
                }
                rotated.sample_with(shots, rng)
            };
            energy += group.estimate(&samples);
            if group.is_computational() {
                computational = samples;
            }
        }
        Ok(SampledEstimate { energy, computational_samples: computational })
    }
}

/// Result of one simulated measurement round.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEstimate {
    pub energy: f64,
    /// Raw outcomes of the computational-basis group (empty when the
    /// Hamiltonian has no diagonal terms).
    pub computational_samples: Vec<u64>,
}

fn measurement_groups(h: &PauliHamiltonian) -> Vec<MeasurementGroup> {
    let n = h.n_qubits();
    let uniform = |axis: Pauli| MeasurementGroup { basis: alloc::vec![axis; n], terms: Vec::new() };
    let (mut z, mut x, mut y) = (uniform(Pauli::Z), uniform(Pauli::X), uniform(Pauli::Y));
    let mut mixed = Vec::new();
    for t in h.terms() {
        let (xm, zm) = (t.x_mask(), t.z_mask());
        if xm == 0 {
            z.terms.push(*t);
        } else if zm == 0 {
            x.terms.push(*t);
        } else if xm == zm {
            y.terms.push(*t);
        } else {
            mixed.push(MeasurementGroup { basis: t.axes(n), terms: alloc::vec![*t] });
        }
    }
    [z, x, y].into_iter().filter(|g| !g.terms.is_empty()).chain(mixed).collect()
}

/// Exact `<psi|H|psi>` including the constant term.
pub fn expectation_exact(state: &StateVector, h: &PauliHamiltonian) -> Result<f64> {
    Observable::new(h).exact(state)
}

/// Finite-shot estimate of `<psi|H|psi>`. The budget must not be
/// [`ShotBudget::Exact`].
pub fn expectation_sampled(state: &StateVector, h: &PauliHamiltonian, budget: ShotBudget, rng_seed: u64) -> Result<f64> {
    let shots = budget
        .shots()
        .ok_or_else(|| Error::InvalidArgument("expectation_sampled needs a finite shot budget".into()))?;
    let mut rng = crate::rng_from_seed(rng_seed);
    Ok(Observable::new(h).sampled_with(state, shots, &mut rng)?.energy)
}

/// First sample that satisfies every clause of `instance`.
pub fn detect_solution(samples: &[u64], instance: &ExactCoverInstance) -> Option<u64> {
    samples.iter().copied().find(|&b| instance.satisfies(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_driver, build_exact_cover};
    use alloc::vec;

    fn minus_state(n: usize) -> StateVector {
        let mut s = StateVector::basis(n, (1u64 << n) - 1).unwrap();
        for q in 0..n {
            s.apply(&Gate::H(q)).unwrap();
        }
        s
    }

    #[test]
    fn driver_ground_state_energy() {
        let e = expectation_exact(&minus_state(4), &build_driver(4).unwrap()).unwrap();
        assert!((e + 4.0).abs() < 1e-12);
    }

    #[test]
    fn satisfying_state_has_zero_energy() {
        let inst = ExactCoverInstance::new(4, vec![[0, 1, 2], [1, 2, 3]]).unwrap();
        let h = build_exact_cover(&inst).unwrap();
        // x1 = 1 alone satisfies both clauses.
        let s = StateVector::basis(4, 0b0010).unwrap();
        assert!(expectation_exact(&s, &h).unwrap().abs() < 1e-12);
        for seed in 0..5 {
            assert_eq!(expectation_sampled(&s, &h, ShotBudget::Shots(7), seed).unwrap(), 0.0);
        }
        let s = StateVector::basis(4, 0b0111).unwrap();
        assert_eq!(expectation_sampled(&s, &h, ShotBudget::Shots(3), 1).unwrap(), inst.evaluate(0b0111) as f64);
    }

    #[test]
    fn sampled_x_on_zero_state() {
        let h = build_driver(1).unwrap();
        let s = StateVector::zero(1).unwrap();
        let e = expectation_sampled(&s, &h, ShotBudget::Shots(10_000), 11).unwrap();
        assert!(e.abs() <= 0.05, "{e}");
    }

    #[test]
    fn exact_budget_rejected_for_sampling() {
        let h = build_driver(1).unwrap();
        let s = StateVector::zero(1).unwrap();
        assert!(expectation_sampled(&s, &h, ShotBudget::Exact, 0).is_err());
        assert!(expectation_sampled(&s, &h, ShotBudget::Shots(0), 0).is_err());
    }

    #[test]
    fn qubit_mismatch() {
        let h = build_driver(2).unwrap();
        let s = StateVector::zero(3).unwrap();
        assert!(matches!(expectation_exact(&s, &h), Err(Error::QubitMismatch { .. })));
    }

    #[test]
    fn grouping() {
        let t = |axes: &[Pauli]| PauliString::new(axes, 1.0);
        use Pauli::*;
        let h = PauliHamiltonian::new(
            2,
            [t(&[Z, I]), t(&[Z, Z]), t(&[X, I]), t(&[X, X]), t(&[Y, Y]), t(&[X, Z]), t(&[Y, X])],
            0.5,
        )
        .unwrap();
        let obs = Observable::new(&h);
        let sizes: Vec<usize> = obs.groups().iter().map(|g| g.terms.len()).collect();
        assert_eq!(sizes, vec![2, 2, 1, 1, 1]);
        assert!(obs.groups()[0].is_computational());
        assert!(!obs.groups()[1].is_computational());
    }

    #[test]
    fn detect_solution_first_hit() {
        let inst = ExactCoverInstance::new(3, vec![[0, 1, 2]]).unwrap();
        assert_eq!(detect_solution(&[7, 1], &inst), Some(1));
        assert_eq!(detect_solution(&[7, 0, 3], &inst), None);
        assert_eq!(detect_solution(&[], &inst), None);
        assert_eq!(detect_solution(&[4, 2], &inst), Some(4));
    }
}
