//! Exact classical references: dense diagonalization, brute-force EXACT
//! COVER, and the gap / transition-amplitude profile along the
//! interpolation `H(s) = (1 - s) H_0 + s H_P`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonians::{difference, interpolate, PauliHamiltonian, DENSE_MAX_QUBITS};
use crate::problems::{ExactCoverInstance, HardnessReport};

/// Largest register for which [`adiabatic_error_profile`] runs.
pub const PROFILE_MAX_QUBITS: usize = 12;

/// Gaps below this are treated as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Lowest eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors matching `energies`.
    pub states: Vec<Vec<Complex64>>,
}

impl SpectrumReport {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_state(&self) -> &[Complex64] {
        &self.states[0]
    }

    /// `E_1 - E_0`, zero for a degenerate ground level.
    pub fn gap(&self) -> f64 {
        (self.energies[1] - self.energies[0]).max(0.0)
    }

    /// Distance from `E_0` to the first level more than `tol` above it,
    /// if the returned eigenvalues reach one.
    pub fn level_gap(&self, tol: f64) -> Option<f64> {
        let e0 = self.energies[0];
        self.energies.iter().find(|&&e| e - e0 > tol).map(|e| e - e0)
    }

    /// Number of returned eigenvalues within `tol` of `E_0`.
    pub fn ground_degeneracy(&self, tol: f64) -> usize {
        let e0 = self.energies[0];
        self.energies.iter().take_while(|&&e| e - e0 <= tol).count()
    }
}

/// The `k` lowest eigenpairs of `h` (`k >= 2`; clamped to the dimension).
pub fn exact_spectrum(h: &PauliHamiltonian, k: usize) -> Result<SpectrumReport> {
    if k < 2 {
        return Err(Error::InvalidArgument("exact_spectrum needs k >= 2".into()));
    }
    if h.n_qubits() > DENSE_MAX_QUBITS {
        return Err(Error::TooLarge { what: "spectrum", n_qubits: h.n_qubits(), cap: DENSE_MAX_QUBITS });
    }
    let dim = 1usize << h.n_qubits();
    let k = k.min(dim);
    if h.is_diagonal() {
        let diag = h.diagonal();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let states = order[..k]
            .iter()
            .map(|&i| {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[i] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        return Ok(SpectrumReport { energies: order[..k].iter().map(|&i| diag[i]).collect(), states });
    }
    Ok(dense_eigen(&h.to_dense()?, k))
}

fn dense_eigen(m: &DMatrix<Complex64>, k: usize) -> SpectrumReport {
    // Real matrices (no Y-odd terms) take the much cheaper real solver.
    if m.iter().all(|z| z.im == 0.0) {
        let r = m.map(|z| z.re);
        let eig = ((&r + r.transpose()) * 0.5).symmetric_eigen();
        let order = ascending(eig.eigenvalues.as_slice());
        let energies = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
        let states = order[..k]
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        return SpectrumReport { energies, states };
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let order = ascending(eig.eigenvalues.as_slice());
    let energies = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let states = order[..k].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    SpectrumReport { energies, states }
}

fn ascending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Largest `|eigenvalue|` of `h`.
pub fn operator_norm(h: &PauliHamiltonian) -> Result<f64> {
    let full = exact_spectrum(h, 1usize << h.n_qubits())?;
    Ok(full.energies.iter().fold(0.0f64, |m, e| m.max(e.abs())))
}

/// Every assignment in which each clause has exactly one true variable,
/// ascending.
pub fn brute_force_exact_cover(instance: &ExactCoverInstance) -> Vec<u64> {
    (0..1u64 << instance.n_vars()).filter(|&a| instance.satisfies(a)).collect()
}

/// Solution count, unique solution and clause count of `instance`.
pub fn hardness_report(instance: &ExactCoverInstance) -> HardnessReport {
    let solutions = brute_force_exact_cover(instance);
    HardnessReport {
        solution_count: solutions.len(),
        solution: (solutions.len() == 1).then(|| solutions[0]),
        clause_count: instance.clauses().len(),
        min_gap: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub s: f64,
    /// `E_1(s) - E_0(s)`.
    pub gap: f64,
    /// `|<psi_1| dH/ds |psi_0>|`.
    pub numerator: f64,
    /// `numerator / gap^2`; infinite at degenerate points.
    pub ratio: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticProfile {
    pub points: Vec<ProfilePoint>,
}

impl AdiabaticProfile {
    pub fn max_ratio(&self) -> f64 {
        self.points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The grid point with the smallest gap.
    pub fn min_gap(&self) -> Option<ProfilePoint> {
        self.points.iter().copied().min_by(|a, b| a.gap.total_cmp(&b.gap))
    }
}

/// Gap, transition amplitude and their ratio at every `s` in `grid`.
///
/// `dH/ds = H_P - H_0` for the linear interpolation. At degenerate points
/// the eigenvector pair returned by the solver is used and the point is
/// flagged.
pub fn adiabatic_error_profile(h0: &PauliHamiltonian, hp: &PauliHamiltonian, grid: &[f64]) -> Result<AdiabaticProfile> {
    if h0.n_qubits() > PROFILE_MAX_QUBITS {
        return Err(Error::TooLarge { what: "adiabatic profile", n_qubits: h0.n_qubits(), cap: PROFILE_MAX_QUBITS });
    }
    let derivative = difference(hp, h0)?.to_dense()?;
    let mut points = Vec::with_capacity(grid.len());
    for &s in grid {
        let hs = interpolate(h0, hp, s)?;
        let spec = dense_eigen(&hs.to_dense()?, 2);
        let psi0 = DVector::from_column_slice(&spec.states[0]);
        let psi1 = DVector::from_column_slice(&spec.states[1]);
        let numerator = (psi1.adjoint() * &derivative * &psi0)[(0, 0)].norm();
        let gap = spec.gap();
        let degenerate = gap < DEGENERATE_GAP;
        let ratio = if degenerate { f64::INFINITY } else { numerator / (gap * gap) };
        points.push(ProfilePoint { s, gap, numerator, ratio, degenerate });
    }
    Ok(AdiabaticProfile { points })
}

/// `n + 1` evenly spaced points from 0 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| if i == n { 1.0 } else { i as f64 / n as f64 }).collect()
}
