//! Two-chain tight-binding rotor: Strang-split unitary steps plus
//! quantum-jump pumping and quantum-drift dephasing, averaged over
//! independently seeded trajectories.

mod analysis;
mod propagator;
mod state;
mod stochastic;
mod trajectory;

pub use analysis::{
    energy_step_rate, fit_lz, predicted_plateau_m, pseudo_terminal_analysis, resonant_detuning, PlateauEstimate,
};
pub use propagator::{build_propagator_step, check_step, LatticeGenerator, PropagatorStep, MAX_STEP_PHASE};
pub use state::{default_window, thermal_initial_state, thermal_sigma, Distribution, RotorLatticeState};
pub use stochastic::{no_jump_decay, project_to_a, quantum_drift, quantum_jump};
pub use trajectory::{
    average_ensemble, derive_seed, run_ensemble, run_trajectory, Ensemble, JumpScheme, ObservableSeries, Trajectory,
    TrajectoryConfig, GROWTH_FRACTION, LEAKAGE_THRESHOLD,
};
