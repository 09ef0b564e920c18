//! Brute-force evolution of a few atoms and a finite photon pulse under the
//! full Hamiltonian, used to check the covariance engine and the
//! decoupling symmetry.

mod compare;
mod evolve;
mod operators;

pub use compare::{
    oracle_jz_trace, oracle_vs_gaussian, oracle_vs_gaussian_from, ComparisonReport, InitialTilt, Moments,
    PulseComparison, LINEARIZATION_LIMIT,
};
pub use evolve::{
    evolve_pulse, photon_pulse_state, product_atomic_state, tilted_single_atom_state, ExactState, OracleState,
    PulsePropagator, PulseResult, NORM_TOLERANCE,
};
pub use operators::{
    bangbang_deviation, build_heff, build_heff_flipped, build_joint_operators, build_joint_operators_with_cap,
    check_bangbang_equivalence, decoupling_rotation, AtomicOperators, CollectiveOperators, DEFAULT_JOINT_CAP,
};
