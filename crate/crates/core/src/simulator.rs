//! Dense state-vector register and gate kernels.
//!
//! Qubit 0 is the least significant bit of the amplitude index, so the basis
//! state `|q_{N-1} ... q_1 q_0>` lives at index `sum_q q_q 2^q`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::MAX_QUBITS;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A gate of the supported set, with its target qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    X(usize),
    H(usize),
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    /// Qubits the gate acts on, in declaration order.
    pub fn targets(&self) -> ([usize; 2], usize) {
        match *self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => {
                ([qubit, 0], 1)
            }
            Gate::X(q) | Gate::H(q) => ([q, 0], 1),
            Gate::Cz(a, b) => ([a, b], 2),
            Gate::Cnot { control, target } => ([control, target], 2),
        }
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx { qubit, angle } => Gate::Rx { qubit, angle: -angle },
            Gate::Ry { qubit, angle } => Gate::Ry { qubit, angle: -angle },
            Gate::Rz { qubit, angle } => Gate::Rz { qubit, angle: -angle },
            g => g,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let (t, len) = self.targets();
        for &q in &t[..len] {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
        }
        if len == 2 && t[0] == t[1] {
            return Err(Error::DuplicateTarget(t[0]));
        }
        Ok(())
    }
}

/// The amplitudes of an N-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|bitstring>` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, bitstring: u64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if bitstring >= dim as u64 {
            return Err(Error::BasisOutOfRange { index: bitstring, n_qubits });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[bitstring as usize] = ONE;
        Ok(Self { n_qubits, amplitudes })
    }

    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector
    /// is normalized.
    pub fn from_amplitudes(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(alloc::format!(
                "amplitude count {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let norm = libm::sqrt(amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("amplitudes have zero or non-finite norm".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Basis index with the largest probability (lowest index on ties).
    pub fn most_probable(&self) -> u64 {
        let mut best = 0usize;
        let mut best_p = -1.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > best_p {
                best_p = p;
                best = i;
            }
        }
        best as u64
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Rx { qubit, angle } => {
                let (c, s) = half_angle(angle);
                let m = [[Complex64::new(c, 0.0), Complex64::new(0.0, -s)], [
                    Complex64::new(0.0, -s),
                    Complex64::new(c, 0.0),
                ]];
                self.apply_1q(qubit, &m);
            }
            Gate::Ry { qubit, angle } => {
                let (c, s) = half_angle(angle);
                let m = [[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], [
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ]];
                self.apply_1q(qubit, &m);
            }
            Gate::Rz { qubit, angle } => {
                let (c, s) = half_angle(angle);
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                let mask = 1usize << qubit;
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & mask == 0 { lo } else { hi };
                }
            }
            Gate::X(q) => {
                let mask = 1usize << q;
                for_each_pair(self.amplitudes.len(), mask, |i, j| self.amplitudes.swap(i, j));
            }
            Gate::H(q) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                self.apply_1q(q, &[[h, h], [h, -h]]);
            }
            Gate::Cz(a, b) => {
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let c = 1usize << control;
                let t = 1usize << target;
                for i in 0..self.amplitudes.len() {
                    if i & c != 0 && i & t == 0 {
                        self.amplitudes.swap(i, i | t);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    fn apply_1q(&mut self, qubit: usize, m: &[[Complex64; 2]; 2]) {
        let mask = 1usize << qubit;
        let amps = &mut self.amplitudes;
        for_each_pair(amps.len(), mask, |i, j| {
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        });
    }

    /// Draws `shots` computational-basis outcomes with probability
    /// `|amplitude_i|^2`.
    pub fn sample_with(&self, shots: usize, rng: &mut crate::Rng) -> Vec<u64> {
        let cdf = self.cumulative();
        let total = *cdf.last().unwrap_or(&1.0);
        (0..shots)
            .map(|_| {
                let u = rng.gen::<f64>() * total;
                // First index whose cumulative mass exceeds u.
                let idx = cdf.partition_point(|&c| c <= u);
                idx.min(cdf.len() - 1) as u64
            })
            .collect()
    }

    /// Seeded variant of [`StateVector::sample_with`].
    pub fn sample_bitstrings(&self, shots: usize, rng_seed: u64) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be >= 1".into()));
        }
        Ok(self.sample_with(shots, &mut crate::rng_from_seed(rng_seed)))
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.amplitudes
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect()
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    Ok(())
}

fn half_angle(angle: f64) -> (f64, f64) {
    let half = 0.5 * angle;
    (libm::cos(half), libm::sin(half))
}

/// Calls `f(i, i | mask)` for every index `i` with the `mask` bit clear.
#[inline]
fn for_each_pair(dim: usize, mask: usize, mut f: impl FnMut(usize, usize)) {
    let mut base = 0;
    while base < dim {
        for i in base..base + mask {
            f(i, i | mask);
        }
        base += mask << 1;
    }
}
