//! Pauli-string Hamiltonians and the builders for the driver, the spin
//! chain, EXACT COVER and the linear interpolation between two of them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::problems::ExactCoverInstance;
use crate::MAX_QUBITS;

/// Coefficients below this magnitude are dropped.
pub const COEFF_EPS: f64 = 1e-12;

/// Largest register [`PauliHamiltonian::to_dense`] will build.
pub const DENSE_MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// A weighted tensor product of single-qubit Paulis.
///
/// Stored in symplectic form: qubit `q` carries X if bit `q` of `x_mask` is
/// set, Z if bit `q` of `z_mask` is set, and Y if both are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliString {
    x_mask: u32,
    z_mask: u32,
    pub coefficient: f64,
}

impl PauliString {
    /// Builds a string from per-qubit labels, qubit 0 first.
    pub fn new(axes: &[Pauli], coefficient: f64) -> Self {
        let (mut x_mask, mut z_mask) = (0u32, 0u32);
        for (q, p) in axes.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= 1 << q,
                Pauli::Y => {
                    x_mask |= 1 << q;
                    z_mask |= 1 << q;
                }
                Pauli::Z => z_mask |= 1 << q,
            }
        }
        Self { x_mask, z_mask, coefficient }
    }

    pub fn from_masks(x_mask: u32, z_mask: u32, coefficient: f64) -> Self {
        Self { x_mask, z_mask, coefficient }
    }

    /// `coefficient * P_q` on a single qubit.
    pub fn single(qubit: usize, axis: Pauli, coefficient: f64) -> Self {
        let mut s = Self { x_mask: 0, z_mask: 0, coefficient };
        s.set(qubit, axis);
        s
    }

    fn set(&mut self, q: usize, axis: Pauli) {
        let bit = 1u32 << q;
        self.x_mask &= !bit;
        self.z_mask &= !bit;
        match axis {
            Pauli::I => {}
            Pauli::X => self.x_mask |= bit,
            Pauli::Y => {
                self.x_mask |= bit;
                self.z_mask |= bit;
            }
            Pauli::Z => self.z_mask |= bit,
        }
    }

    pub fn axis(&self, qubit: usize) -> Pauli {
        let bit = 1u32 << qubit;
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn axes(&self, n_qubits: usize) -> Vec<Pauli> {
        (0..n_qubits).map(|q| self.axis(q)).collect()
    }

    pub fn x_mask(&self) -> u32 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u32 {
        self.z_mask
    }

    pub fn support(&self) -> u32 {
        self.x_mask | self.z_mask
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    /// Action on a basis state: `P|b> = phase * |b ^ x_mask>`, without the
    /// coefficient.
    #[inline]
    pub fn phase(&self, basis: usize) -> Complex64 {
        let sign = if (basis as u32 & self.z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        // i^{#Y}
        match self.y_count() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }
}

/// A real-weighted sum of Pauli strings plus a constant offset.
///
/// Always normalized: one term per distinct string, sorted by masks, no
/// near-zero coefficients and no identity term (identity goes into
/// `constant`).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliString>,
    constant: f64,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = PauliString>, constant: f64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let mut acc = Accumulator::new(n_qubits);
        acc.constant = constant;
        for t in terms {
            if t.support() >> n_qubits != 0 {
                return Err(Error::InvalidArgument(format!(
                    "Pauli string acts outside {n_qubits} qubits"
                )));
            }
            acc.add(t);
        }
        Ok(acc.finish())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// True when every term is built from I and Z only.
    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(PauliString::is_diagonal)
    }

    /// Diagonal matrix elements `<b|H|b>` for all `2^N` basis states.
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.n_qubits;
        let mut out = alloc::vec![self.constant; dim];
        for t in self.terms.iter().filter(|t| t.is_diagonal()) {
            for (b, v) in out.iter_mut().enumerate() {
                if (b as u32 & t.z_mask).count_ones() % 2 == 0 {
                    *v += t.coefficient;
                } else {
                    *v -= t.coefficient;
                }
            }
        }
        out
    }

    /// Scales every coefficient including the constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut acc = Accumulator::new(self.n_qubits);
        acc.constant = factor * self.constant;
        for t in &self.terms {
            acc.add(PauliString { coefficient: factor * t.coefficient, ..*t });
        }
        acc.finish()
    }

    /// Dense `2^N x 2^N` matrix.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > DENSE_MAX_QUBITS {
            return Err(Error::TooLarge {
                what: "dense matrix",
                n_qubits: self.n_qubits,
                cap: DENSE_MAX_QUBITS,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for b in 0..dim {
            m[(b, b)] += Complex64::new(self.constant, 0.0);
        }
        for t in &self.terms {
            let x = t.x_mask as usize;
            for b in 0..dim {
                m[(b ^ x, b)] += t.phase(b) * t.coefficient;
            }
        }
        Ok(m)
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for t in &self.terms {
            write!(f, " {:+} ", t.coefficient)?;
            for q in 0..self.n_qubits {
                write!(f, "{}", t.axis(q))?;
            }
        }
        Ok(())
    }
}

struct Accumulator {
    n_qubits: usize,
    constant: f64,
    terms: BTreeMap<(u32, u32), f64>,
}

impl Accumulator {
    fn new(n_qubits: usize) -> Self {
        Self { n_qubits, constant: 0.0, terms: BTreeMap::new() }
    }

    fn add(&mut self, t: PauliString) {
        if t.is_identity() {
            self.constant += t.coefficient;
        } else {
            *self.terms.entry((t.x_mask, t.z_mask)).or_insert(0.0) += t.coefficient;
        }
    }

    fn finish(self) -> PauliHamiltonian {
        let terms = self
            .terms
            .into_iter()
            .filter(|(_, c)| c.abs() >= COEFF_EPS)
            .map(|((x, z), c)| PauliString::from_masks(x, z, c))
            .collect();
        PauliHamiltonian { n_qubits: self.n_qubits, terms, constant: self.constant }
    }
}

/// Parameters of the open spin chain
/// `sum_i P^a_i P^a_{i+1} + lambda sum_i P^b_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub n_qubits: usize,
    pub lambda: f64,
    /// `a`, either X or Z.
    pub coupling_axis: Pauli,
    /// `b`, either X or Z.
    pub field_axis: Pauli,
}

impl ChainSpec {
    /// XX coupling with a longitudinal X field.
    pub fn xx(n_qubits: usize, lambda: f64) -> Self {
        Self { n_qubits, lambda, coupling_axis: Pauli::X, field_axis: Pauli::X }
    }
}

/// `H_0 = sum_i X_i`. Ground energy `-N`, ground state `|->^N`.
pub fn build_driver(n_qubits: usize) -> Result<PauliHamiltonian> {
    PauliHamiltonian::new(n_qubits, (0..n_qubits).map(|q| PauliString::single(q, Pauli::X, 1.0)), 0.0)
}

pub fn build_chain(spec: &ChainSpec) -> Result<PauliHamiltonian> {
    let n = spec.n_qubits;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("chain needs at least 2 qubits, got {n}")));
    }
    for axis in [spec.coupling_axis, spec.field_axis] {
        if !matches!(axis, Pauli::X | Pauli::Z) {
            return Err(Error::InvalidArgument(format!("chain axis must be X or Z, got {axis}")));
        }
    }
    let bonds = (0..n - 1).map(|i| {
        let mut s = PauliString::single(i, spec.coupling_axis, 1.0);
        s.set(i + 1, spec.coupling_axis);
        s
    });
    let field = (0..n).map(|i| PauliString::single(i, spec.field_axis, spec.lambda));
    PauliHamiltonian::new(n, bonds.chain(field), 0.0)
}

/// `sum_clauses (n_i + n_j + n_k - 1)^2` with `n_q = (1 - Z_q)/2`, i.e.
/// `n_q = 1` exactly when qubit `q` reads 1.
///
/// Using `n^2 = n` each clause expands to
/// `1 - (n_i + n_j + n_k) + 2 (n_i n_j + n_i n_k + n_j n_k)`.
pub fn build_exact_cover(instance: &ExactCoverInstance) -> Result<PauliHamiltonian> {
    let n = instance.n_vars();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    let mut acc = Accumulator::new(n);
    for &[i, j, k] in instance.clauses() {
        acc.constant += 1.0;
        for q in [i, j, k] {
            add_number_product(&mut acc, &[q], -1.0);
        }
        for (a, b) in [(i, j), (i, k), (j, k)] {
            add_number_product(&mut acc, &[a, b], 2.0);
        }
    }
    Ok(acc.finish())
}

/// Adds `coefficient * prod_{q in qubits} (1 - Z_q)/2`, expanded into Z strings.
fn add_number_product(acc: &mut Accumulator, qubits: &[usize], coefficient: f64) {
    let k = qubits.len();
    let scale = coefficient / (1u32 << k) as f64;
    for subset in 0u32..(1 << k) {
        let mut z = 0u32;
        for (pos, &q) in qubits.iter().enumerate() {
            if subset & (1 << pos) != 0 {
                z |= 1 << q;
            }
        }
        let sign = if subset.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(PauliString::from_masks(0, z, sign * scale));
    }
}

/// `(1 - s) h0 + s hp`.
pub fn interpolate(h0: &PauliHamiltonian, hp: &PauliHamiltonian, s: f64) -> Result<PauliHamiltonian> {
    if h0.n_qubits != hp.n_qubits {
        return Err(Error::QubitMismatch { expected: h0.n_qubits, found: hp.n_qubits });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("interpolation parameter {s} outside [0, 1]")));
    }
    let mut acc = Accumulator::new(h0.n_qubits);
    acc.constant = (1.0 - s) * h0.constant + s * hp.constant;
    for t in &h0.terms {
        acc.add(PauliString { coefficient: (1.0 - s) * t.coefficient, ..*t });
    }
    for t in &hp.terms {
        acc.add(PauliString { coefficient: s * t.coefficient, ..*t });
    }
    Ok(acc.finish())
}

/// `hp - h0`, the s-derivative of the linear interpolation.
pub fn difference(hp: &PauliHamiltonian, h0: &PauliHamiltonian) -> Result<PauliHamiltonian> {
    if h0.n_qubits != hp.n_qubits {
        return Err(Error::QubitMismatch { expected: hp.n_qubits, found: h0.n_qubits });
    }
    let neg = h0.scaled(-1.0);
    PauliHamiltonian::new(hp.n_qubits, hp.terms.iter().chain(&neg.terms).copied(), hp.constant + neg.constant)
}
