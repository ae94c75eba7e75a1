use aavqe_core::ansatz::AnsatzSpec;
use aavqe_core::estimator::{expectation_exact, expectation_sampled};
use aavqe_core::hamiltonians::{build_chain, build_driver, interpolate};
use aavqe_core::{ChainSpec, Gate, Pauli, PauliHamiltonian, PauliString, ShotBudget, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn std_dev(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn fixed_pair() -> (StateVector, PauliHamiltonian) {
    let spec = AnsatzSpec::new(3, 1).unwrap();
    let state = spec.prepare_state(&spec.random_parameters(2024)).unwrap();
    let h = interpolate(&build_driver(3).unwrap(), &build_chain(&ChainSpec { coupling_axis: Pauli::Z, ..ChainSpec::xx(3, 1.0) }).unwrap(), 0.5).unwrap();
    (state, h)
}

#[test]
fn shot_noise_scales_as_inverse_root() {
    let (state, h) = fixed_pair();
    let sample = |m: usize| -> Vec<f64> {
        (0..200).map(|seed| expectation_sampled(&state, &h, ShotBudget::Shots(m), seed).unwrap()).collect()
    };
    let ratio = std_dev(&sample(100)) / std_dev(&sample(1600));
    assert!((4.0 / 1.25..=4.0 * 1.25).contains(&ratio), "ratio {ratio}");
}

#[test]
fn sampled_mean_is_unbiased() {
    let (state, h) = fixed_pair();
    let exact = expectation_exact(&state, &h).unwrap();
    let xs: Vec<f64> = (0..400).map(|seed| expectation_sampled(&state, &h, ShotBudget::Shots(256), seed).unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let stderr = std_dev(&xs) / (xs.len() as f64).sqrt();
    assert!((mean - exact).abs() < 4.0 * stderr, "mean {mean} exact {exact} stderr {stderr}");
}

#[test]
fn y_measurement_basis() {
    let y = PauliHamiltonian::new(1, [PauliString::single(0, Pauli::Y, 1.0)], 0.0).unwrap();
    for (i, angle) in [-1.5707963267948966, 0.3, 1.1, 2.5, -2.0].into_iter().enumerate() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::Rx { qubit: 0, angle }).unwrap();
        s.apply(&Gate::Rz { qubit: 0, angle: 0.4 * i as f64 }).unwrap();
        let exact = expectation_exact(&s, &y).unwrap();
        let sampled = expectation_sampled(&s, &y, ShotBudget::Shots(100_000), i as u64).unwrap();
        assert!((sampled - exact).abs() < 0.02, "angle {angle}: {sampled} vs {exact}");
    }
}

fn axis() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn large_samples_converge_to_exact(
        terms in prop::collection::vec((prop::collection::vec(axis(), 3), -1.0f64..1.0), 1..6),
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        seed in any::<u64>(),
    ) {
        prop_assume!(amps.iter().any(|(a, b)| a.abs() + b.abs() > 1e-2));
        let h = PauliHamiltonian::new(3, terms.iter().map(|(a, w)| PauliString::new(a, *w)), 0.25).unwrap();
        let s = StateVector::from_amplitudes(amps.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let exact = expectation_exact(&s, &h).unwrap();
        let sampled = expectation_sampled(&s, &h, ShotBudget::Shots(50_000), seed).unwrap();
        // Each group contributes at most sum|c| / sqrt(M) per standard deviation.
        let scale: f64 = h.terms().iter().map(|t| t.coefficient.abs()).sum();
        prop_assert!((sampled - exact).abs() <= 5.0 * scale / (50_000f64).sqrt() + 1e-12,
            "sampled {} exact {}", sampled, exact);
    }

    #[test]
    fn eigenstates_have_no_shot_noise(bits in 0u64..16, seed in any::<u64>()) {
        let h = build_chain(&ChainSpec { coupling_axis: Pauli::Z, field_axis: Pauli::Z, ..ChainSpec::xx(4, 0.3) }).unwrap();
        let s = StateVector::basis(4, bits).unwrap();
        let exact = expectation_exact(&s, &h).unwrap();
        prop_assert!((expectation_sampled(&s, &h, ShotBudget::Shots(3), seed).unwrap() - exact).abs() < 1e-12);
    }
}
