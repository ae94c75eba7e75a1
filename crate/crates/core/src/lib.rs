//! Adiabatically assisted variational quantum eigensolver.
//!
//! A dense state-vector simulator, Pauli-string Hamiltonians, a
//! hardware-efficient ansatz, exact and shot-sampled energy estimation,
//! an SPSA optimizer and the VQE / AAVQE drivers built on top of them.
//! Exact classical references (dense diagonalization, brute-force EXACT
//! COVER) live in [`oracle`].
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! seed-parallel execution live in the `aavqe-cli` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ansatz;
pub mod driver;
pub mod error;
pub mod estimator;
pub mod hamiltonians;
pub mod optim;
pub mod oracle;
pub mod problems;
pub mod simulator;

pub use ansatz::{AnsatzSpec, ParameterVector};
pub use driver::{RunRecord, Schedule, ScheduleConfig, StepRecord};
pub use error::{Error, Result};
pub use estimator::ShotBudget;
pub use hamiltonians::{ChainSpec, Pauli, PauliHamiltonian, PauliString};
pub use optim::{OptTrace, SpsaConfig};
pub use problems::ExactCoverInstance;
pub use simulator::{Gate, StateVector};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Seed splitting rule shared by every component that needs
/// independent random streams from one run-level master seed:
/// `master ^ (stream << 48) ^ counter`.
pub fn derive_seed(master: u64, stream: u16, counter: u64) -> u64 {
    master ^ ((stream as u64) << 48) ^ counter
}

/// Deterministic RNG used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub(crate) fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
