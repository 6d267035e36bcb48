//! Time-dependent Schrödinger evolution for one particle on a line or two
//! particles on a line (a 2D configuration space).

mod evolve;
mod linsolve;
mod params;
mod potential;
mod state;

pub use evolve::{
    check_time_step, energy, evolve, evolve_with, snapshot_slabs, state_slabs, Method, Propagator, StateSlabs,
    STEP_NORM_DRIFT_LIMIT, TOTAL_NORM_DRIFT_LIMIT,
};
pub use params::PhysParams;
pub use potential::{Modulation, Potential, PotentialKind};
pub use state::{
    free_gaussian_width, harmonic_ground_energy, initial_state, norm_squared, Exchange,
    InitialSpec, QuantumState, MIN_POINTS_PER_TWO_SIGMA, NORM_TOLERANCE,
};
