//! Hardware-efficient layered ansatz.
//!
//! Layer 0 is a rotation layer `RY(theta) RZ(theta)` on every qubit. Each of
//! the `depth` following blocks applies a CZ ladder over the pairs
//! `(0,1), (2,3), ...` then `(1,2), (3,4), ...`, followed by another
//! rotation layer. Within a rotation layer qubit `q` consumes parameters
//! `2q` (RY) and `2q + 1` (RZ), RY acting first.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Deref, DerefMut};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::simulator::{Gate, StateVector};
use crate::MAX_QUBITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    /// Number of entangling blocks.
    pub depth: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        Ok(Self { n_qubits, depth })
    }

    pub fn parameter_count(&self) -> usize {
        2 * self.n_qubits * (self.depth + 1)
    }

    /// The full gate sequence for `theta`.
    pub fn circuit(&self, theta: &ParameterVector) -> Result<Vec<Gate>> {
        self.check(theta)?;
        let n = self.n_qubits;
        let mut gates = Vec::with_capacity(self.parameter_count() + self.depth * n);
        for (layer, block) in theta.chunks_exact(2 * n).enumerate() {
            if layer > 0 {
                gates.extend((0..n.saturating_sub(1)).step_by(2).map(|q| Gate::Cz(q, q + 1)));
                gates.extend((1..n.saturating_sub(1)).step_by(2).map(|q| Gate::Cz(q, q + 1)));
            }
            for (q, pair) in block.chunks_exact(2).enumerate() {
                gates.push(Gate::Ry { qubit: q, angle: pair[0] });
                gates.push(Gate::Rz { qubit: q, angle: pair[1] });
            }
        }
        Ok(gates)
    }

    /// The circuit applied to `|0...0>`.
    pub fn prepare_state(&self, theta: &ParameterVector) -> Result<StateVector> {
        let gates = self.circuit(theta)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        state.apply_all(&gates)?;
        Ok(state)
    }

    /// Independent uniform draws from `[-pi, pi)`.
    pub fn random_parameters(&self, rng_seed: u64) -> ParameterVector {
        let mut rng = crate::rng_from_seed(rng_seed);
        ParameterVector((0..self.parameter_count()).map(|_| rng.gen_range(-PI..PI)).collect())
    }

    pub fn zero_parameters(&self) -> ParameterVector {
        ParameterVector(alloc::vec![0.0; self.parameter_count()])
    }

    fn check(&self, theta: &ParameterVector) -> Result<()> {
        if theta.len() != self.parameter_count() {
            return Err(Error::ParameterLength { expected: self.parameter_count(), found: theta.len() });
        }
        Ok(())
    }
}

/// Circuit angles in radians.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for ParameterVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParameterVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}
