//! Dense statevector simulation for one and two qubits.
//!
//! Qubit `a` (the system) is the high-order bit and qubit `b` (the pointer)
//! the low-order bit: basis index = 2·bit(a) + bit(b). Rotations follow
//! `R_z(θ) = exp(−iθσ_z/2)`, `R_y(θ) = exp(−iθσ_y/2)`; global phases are kept.

mod circuit;
mod gate;
mod sampling;
mod state;
mod unitary;

pub use circuit::{apply_gate, Circuit};
pub use gate::{GateOp, Qubit};
pub use sampling::{outcome_probabilities, sample_shots, sample_shots_with, ShotCounts};
pub use state::StateVector;
pub use unitary::UnitaryMatrix;

/// Tolerance used when validating normalization and unitarity of inputs.
pub const VALIDATION_TOL: f64 = 1e-10;
