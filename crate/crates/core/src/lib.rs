//! Numerical toolkit for Madelung hydrodynamics of one- and two-particle
//! wavefunctions.
//!
//! The layers build on each other:
//!
//! * [`numerics`]: grids, fields, spectral and finite-difference operators;
//! * [`schrodinger`]: time-dependent Schrödinger evolution (split-step Fourier
//!   and Crank-Nicolson) for one particle or two particles on a line;
//! * [`madelung`]: density, phase, velocity, quantum potential and stress
//!   fields extracted from a wavefunction;
//! * [`verify`]: the residual engine that assembles the hydrodynamic balance
//!   laws and second-order density wave equations from extracted fields and
//!   measures how fast they converge under refinement;
//! * [`permutation`]: particle-label swaps and the linear wave operator acting
//!   on the two-body density;
//! * [`nonequilibrium`]: direct integrators for densities that are not tied to
//!   `|psi|^2`;
//! * [`scenario`]: declarative scenario files, bundled scenarios, run bundles
//!   and reports.

pub mod error;
pub mod numerics;
pub mod schrodinger;
pub mod madelung;
pub mod verify;
pub mod permutation;
pub mod nonequilibrium;
pub mod scenario;

pub use error::{Error, Result};
