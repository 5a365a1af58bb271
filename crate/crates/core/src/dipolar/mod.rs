//! Exact operator construction on NV spin-1 ⊗ P1 spin-½ ⊗ rotor spaces.
//! All Hamiltonians are `H/ħ` in rad/s with spin and rotor operators in
//! units of ħ, so J_z has an exactly (half-)integer spectrum.

mod coefficients;
mod hamiltonian;
mod pairs;
mod space;
mod sparse;

pub use coefficients::{
    dipolar_coefficients, spin_phonon_coefficients, DipolarCoefficients, PairGeometry, SpinPhononCoefficients,
};
pub use hamiltonian::{
    build_full_hamiltonian, dipolar_hamiltonian, pair_subspace_indices, truncate_to_pair_subspace, SpinTensors,
    TruncatedPair,
};
pub use pairs::{
    brute_force_transform, full_delta2, full_pair_kz, two_pair_from_couplings, two_pair_hamiltonian,
    two_pair_transformed_hamiltonian, u_mu_pair, u_mu_total, SpinRotorSpace, TwoPairHamiltonian,
};
pub use space::{
    embed, rotor_lz, rotor_shift, spin1_minus, spin1_plus, spin1_z, spin_half_minus, spin_half_plus, spin_half_z,
    CompositeHilbertSpace,
};
pub use sparse::SparseOp;
