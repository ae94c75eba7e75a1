use aavqe_core::estimator::expectation_exact;
use aavqe_core::hamiltonians::{build_chain, build_driver, build_exact_cover, difference, interpolate};
use aavqe_core::oracle::exact_spectrum;
use aavqe_core::{ChainSpec, ExactCoverInstance, Pauli, PauliHamiltonian, PauliString, StateVector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

const N: usize = 3;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli_matrix(p: Pauli) -> DMatrix<Complex64> {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
    }
}

/// Kronecker-product construction; qubit 0 is the rightmost factor.
fn kron_dense(h: &PauliHamiltonian) -> DMatrix<Complex64> {
    let n = h.n_qubits();
    let dim = 1 << n;
    let mut m = DMatrix::<Complex64>::identity(dim, dim) * c(h.constant(), 0.0);
    for t in h.terms() {
        let mut prod = DMatrix::<Complex64>::identity(1, 1);
        for q in (0..n).rev() {
            prod = prod.kronecker(&pauli_matrix(t.axis(q)));
        }
        m += prod * c(t.coefficient, 0.0);
    }
    m
}

fn axis() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn hamiltonian() -> impl Strategy<Value = PauliHamiltonian> {
    (prop::collection::vec((prop::collection::vec(axis(), N), -2.0f64..2.0), 0..8), -1.0f64..1.0)
        .prop_map(|(terms, k)| PauliHamiltonian::new(N, terms.iter().map(|(a, w)| PauliString::new(a, *w)), k).unwrap())
}

fn state() -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << N)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| StateVector::from_amplitudes(v.into_iter().map(|(re, im)| c(re, im)).collect()).unwrap())
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn dense_matches_kronecker_construction(h in hamiltonian()) {
        prop_assert!(max_diff(&h.to_dense().unwrap(), &kron_dense(&h)) < 1e-12);
    }

    #[test]
    fn dense_is_hermitian(h in hamiltonian()) {
        let m = h.to_dense().unwrap();
        prop_assert!(max_diff(&m, &m.adjoint()) < 1e-12);
    }

    #[test]
    fn exact_expectation_matches_dense(h in hamiltonian(), s in state()) {
        let psi = DVector::from_column_slice(s.amplitudes());
        let dense = (psi.adjoint() * kron_dense(&h) * &psi)[(0, 0)];
        prop_assert!(dense.im.abs() < 1e-10);
        prop_assert!((expectation_exact(&s, &h).unwrap() - dense.re).abs() < 1e-10);
    }

    #[test]
    fn interpolation_is_linear(h0 in hamiltonian(), hp in hamiltonian(), s in 0.0f64..=1.0, st in state()) {
        let hs = interpolate(&h0, &hp, s).unwrap();
        let expected = h0.to_dense().unwrap() * c(1.0 - s, 0.0) + hp.to_dense().unwrap() * c(s, 0.0);
        prop_assert!(max_diff(&hs.to_dense().unwrap(), &expected) < 1e-12);
        let e = |h: &PauliHamiltonian| expectation_exact(&st, h).unwrap();
        prop_assert!((e(&hs) - ((1.0 - s) * e(&h0) + s * e(&hp))).abs() < 1e-10);
    }

    #[test]
    fn difference_is_the_derivative(h0 in hamiltonian(), hp in hamiltonian()) {
        let d = difference(&hp, &h0).unwrap().to_dense().unwrap();
        prop_assert!(max_diff(&d, &(hp.to_dense().unwrap() - h0.to_dense().unwrap())) < 1e-12);
    }

    #[test]
    fn exact_cover_diagonal_matches_clause_count(
        n in 3usize..=8,
        raw in prop::collection::vec((0usize..64, 0usize..64, 0usize..64), 1..10),
    ) {
        let mut clauses: Vec<[usize; 3]> = raw
            .into_iter()
            .map(|(a, b, k)| { let mut t = [a % n, b % n, k % n]; t.sort_unstable(); t })
            .filter(|t| t[0] != t[1] && t[1] != t[2])
            .collect();
        clauses.sort_unstable();
        clauses.dedup();
        prop_assume!(!clauses.is_empty());
        let inst = ExactCoverInstance::new(n, clauses.clone()).unwrap();
        let diag = build_exact_cover(&inst).unwrap().diagonal();
        for (a, &d) in diag.iter().enumerate() {
            let penalty: i64 = clauses
                .iter()
                .map(|cl| { let t = cl.iter().filter(|&&q| a >> q & 1 == 1).count() as i64; (t - 1) * (t - 1) })
                .sum();
            prop_assert_eq!(d, penalty as f64);
        }
    }
}

#[test]
fn driver_spectrum_is_binomial() {
    let rep = exact_spectrum(&build_driver(4).unwrap(), 16).unwrap();
    let mut levels: Vec<(i64, usize)> = Vec::new();
    for e in &rep.energies {
        let r = e.round();
        assert!((e - r).abs() < 1e-9);
        match levels.last_mut() {
            Some((v, k)) if *v == r as i64 => *k += 1,
            _ => levels.push((r as i64, 1)),
        }
    }
    assert_eq!(levels, vec![(-4, 1), (-2, 4), (0, 6), (2, 4), (4, 1)]);
}

#[test]
fn chain_ground_energy_by_enumeration() {
    // With X coupling and X field every term commutes, so the spectrum is
    // the classical energy of each X-basis configuration.
    for (n, lambda) in [(4usize, 1.0f64), (5, 0.5), (3, 2.0)] {
        let classical = (0..1u32 << n)
            .map(|b| {
                let x = |q: usize| if b >> q & 1 == 1 { -1.0 } else { 1.0 };
                (0..n - 1).map(|q| x(q) * x(q + 1)).sum::<f64>() + lambda * (0..n).map(x).sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let e0 = exact_spectrum(&build_chain(&ChainSpec::xx(n, lambda)).unwrap(), 2).unwrap().ground_energy();
        assert!((e0 - classical).abs() < 1e-9, "n={n} lambda={lambda}: {e0} vs {classical}");
    }
    let e0 = exact_spectrum(&build_chain(&ChainSpec::xx(4, 1.0)).unwrap(), 2).unwrap().ground_energy();
    assert!((e0 + 3.0).abs() < 1e-9);
}

#[test]
fn transverse_chain_ground_energy() {
    // ZZ coupling with an X field: compare the sparse path with the
    // Kronecker construction.
    let spec = ChainSpec { coupling_axis: Pauli::Z, field_axis: Pauli::X, ..ChainSpec::xx(4, 0.7) };
    let h = build_chain(&spec).unwrap();
    let kron = kron_dense(&h);
    let sym = (&kron + kron.adjoint()) * c(0.5, 0.0);
    let e_kron = sym.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((exact_spectrum(&h, 2).unwrap().ground_energy() - e_kron).abs() < 1e-9);
}
