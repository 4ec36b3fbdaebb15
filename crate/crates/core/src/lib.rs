//! Weak-value measurement at arbitrary coupling strength on a two-qubit
//! system/pointer pair.
//!
//! The crate is organised bottom-up:
//!
//! - [`qsim`]: dense statevector simulation of one- and two-qubit circuits and
//!   seeded shot sampling.
//! - [`noise`]: density-matrix evolution under per-gate depolarizing and
//!   thermal-relaxation channels, plus readout confusion.
//! - [`circuits`]: the three measurement circuits, the closed-form evolution
//!   operator and the theoretical intensities.
//! - [`estimator`]: inversion of intensities into weak values and
//!   preselection parameters, uncertainty propagation and RMS merit figures.
//! - [`optics`]: Jones-calculus check of the wave-plate and interferometer
//!   realization.
//! - [`sweep`]: the seeded experiment harness and its CSV/JSON outputs.
//! - [`verify`]: the operator-identity oracles bundled for the `verify` command.
//!
//! ```
//! use weakval_core::circuits::theoretical_intensities;
//! use weakval_core::estimator::invert_weak_value;
//! use weakval_core::ExperimentSetting;
//!
//! let s = ExperimentSetting::new(std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2, 0.5);
//! let w = invert_weak_value(&theoretical_intensities(&s)?, s.epsilon)?;
//! assert!((w.real + (0.25f64).tan()).abs() < 1e-12);
//! # Ok::<(), weakval_core::Error>(())
//! ```

pub mod circuits;
pub mod error;
pub mod estimator;
pub mod noise;
pub mod optics;
pub mod qsim;
pub mod sweep;
pub mod verify;

pub use circuits::{ExperimentSetting, PointerBasis};
pub use error::{Error, Result};
pub use estimator::{
    IntensitySet, MeritFigures, Parameter, PhaseMode, PreselectionEstimate, SigmaConvention,
    WeakValueEstimate,
};
pub use noise::{DensityMatrix, KrausChannel, NoiseModel};
pub use optics::{JonesConvention, OpticalAxisVector, WavePlate};
pub use qsim::{Circuit, GateOp, Qubit, ShotCounts, StateVector, UnitaryMatrix};
pub use sweep::{MeritRow, SweepConfig, SweepOutput, SweepResultRow};
pub use verify::{CheckResult, VerificationReport};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
