//! The three measurement circuits and their closed-form counterparts.
//!
//! Preparation: `R_y(α_i)` on the system `a` and a Hadamard on the pointer
//! `b`. Evolution: `R_z(−φ)`, `CR_y(−4ε)` controlled by `b`, `R_y(2ε)`,
//! `R_z(φ)`, all on `a`, which equals `cos ε·I − i sin ε·σ_n⊗σ_z` with
//! `n = (−sin φ, cos φ, 0)`. A basis-selecting gate on `b` follows, and the
//! intensities are the probabilities of `|0_a 0_b⟩` and `|0_a 1_b⟩`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::IntensitySet;
use crate::qsim::{Circuit, GateOp, Qubit, UnitaryMatrix};
use crate::C64;

/// Below this `|sin 2ε|` the inversion is ill-conditioned; circuits are still
/// built but a warning is logged.
pub const ILL_CONDITIONED_SIN_2EPS: f64 = 1e-6;

/// Preselection angles with `|cos(α_i/2)|` at or below this are treated as
/// orthogonal to the postselected `|0_a⟩`.
pub const ORTHOGONAL_OVERLAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSetting {
    /// Measurement strength ε (radians).
    pub epsilon: f64,
    /// Angle of the measured axis `n = (−sin φ, cos φ, 0)`.
    pub phi: f64,
    /// Preselection angle: `|A_i⟩ = R_y(α_i)|0_a⟩`.
    pub alpha_i: f64,
}

impl ExperimentSetting {
    pub fn new(epsilon: f64, phi: f64, alpha_i: f64) -> Self {
        ExperimentSetting {
            epsilon,
            phi,
            alpha_i,
        }
    }

    /// Unit vector `n` of the measured Pauli operator.
    pub fn axis(&self) -> [f64; 3] {
        [-self.phi.sin(), self.phi.cos(), 0.0]
    }

    pub fn is_ill_conditioned(&self) -> bool {
        (2.0 * self.epsilon).sin().abs() < ILL_CONDITIONED_SIN_2EPS
    }
}

/// Final pointer basis, selected by the gate `G` before measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointerBasis {
    /// `G = H`: intensities i0 (|+⟩), i1 (|−⟩).
    PlusMinus,
    /// `G = I`: intensities i2 (|0⟩), i3 (|1⟩).
    ZeroOne,
    /// `G = H·S†`: intensities i4 (|r⟩), i5 (|l⟩).
    RightLeft,
}

impl PointerBasis {
    pub const ALL: [PointerBasis; 3] = [
        PointerBasis::PlusMinus,
        PointerBasis::ZeroOne,
        PointerBasis::RightLeft,
    ];

    pub fn index(self) -> usize {
        match self {
            PointerBasis::PlusMinus => 0,
            PointerBasis::ZeroOne => 1,
            PointerBasis::RightLeft => 2,
        }
    }

    /// Indices of the intensities read from outcomes `00` and `01`.
    pub fn intensity_indices(self) -> (usize, usize) {
        let k = 2 * self.index();
        (k, k + 1)
    }

    /// Time-ordered gates on `b` realizing `G`.
    pub fn gates(self) -> Vec<GateOp> {
        match self {
            PointerBasis::PlusMinus => vec![GateOp::h(Qubit::B)],
            PointerBasis::ZeroOne => vec![],
            PointerBasis::RightLeft => vec![GateOp::sdg(Qubit::B), GateOp::h(Qubit::B)],
        }
    }
}

/// `R_y(α_i)` on `a`, `H` on `b`.
pub fn preparation_circuit(s: &ExperimentSetting) -> Circuit {
    Circuit::from_gates(
        2,
        vec![GateOp::ry(s.alpha_i, Qubit::A), GateOp::h(Qubit::B)],
    )
    .expect("static gate list")
}

/// `R_z(φ)·R_y(2ε)·CR_y(−4ε)·R_z(−φ)`, time ordered right to left.
pub fn evolution_circuit(s: &ExperimentSetting) -> Circuit {
    Circuit::from_gates(
        2,
        vec![
            GateOp::rz(-s.phi, Qubit::A),
            GateOp::cry(-4.0 * s.epsilon, Qubit::B, Qubit::A),
            GateOp::ry(2.0 * s.epsilon, Qubit::A),
            GateOp::rz(s.phi, Qubit::A),
        ],
    )
    .expect("static gate list")
}

/// Preparation, evolution and the pointer-basis gate for one intensity pair.
pub fn build_measurement_circuit(s: &ExperimentSetting, basis: PointerBasis) -> Circuit {
    if s.is_ill_conditioned() {
        log::warn!(
            "measurement strength ε = {} has |sin 2ε| < {ILL_CONDITIONED_SIN_2EPS}; inversion will be ill-conditioned",
            s.epsilon
        );
    }
    let mut c = preparation_circuit(s);
    c.extend(&evolution_circuit(s)).expect("two-qubit gates");
    for g in basis.gates() {
        c.push(g).expect("pointer gate");
    }
    c
}

/// `cos ε·I⊗I − i sin ε·σ_n⊗σ_z` for an arbitrary unit vector `n`.
pub fn closed_form_evolution(n: [f64; 3], epsilon: f64) -> UnitaryMatrix {
    let (s, c) = epsilon.sin_cos();
    let sigma_n = pauli_combination(n);
    let sigma_z = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    );
    let m = DMatrix::<C64>::identity(4, 4) * C64::new(c, 0.0)
        - sigma_n.kronecker(&sigma_z) * C64::new(0.0, s);
    UnitaryMatrix::from_matrix_unchecked(m)
}

/// Closed-form evolution for the circuit's axis `n = (−sin φ, cos φ, 0)`.
pub fn evolution_closed_form(s: &ExperimentSetting) -> UnitaryMatrix {
    closed_form_evolution(s.axis(), s.epsilon)
}

/// Max entrywise difference between the gate decomposition and the closed
/// form. No global phase is removed: the two are the same operator.
pub fn verify_decomposition(s: &ExperimentSetting) -> f64 {
    evolution_circuit(s)
        .unitary()
        .max_abs_diff(&evolution_closed_form(s))
}

/// `n·σ`.
pub(crate) fn pauli_combination(n: [f64; 3]) -> DMatrix<C64> {
    let [x, y, z] = n;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(z, 0.0),
            C64::new(x, -y),
            C64::new(x, y),
            C64::new(-z, 0.0),
        ],
    )
}

/// Forward model for i0…i5 with postselection on `|0_a⟩`, overlap
/// `cos²(α_i/2)` and weak value `−tan(α_i/2)(sin φ + i cos φ)`. All σ are 0.
pub fn theoretical_intensities(s: &ExperimentSetting) -> Result<IntensitySet> {
    let (sa, ca) = (s.alpha_i / 2.0).sin_cos();
    if ca.abs() <= ORTHOGONAL_OVERLAP {
        return Err(Error::PostselectionImpossible);
    }
    let overlap2 = ca * ca;
    // overlap-weighted weak value: ⟨0|A_i⟩·⟨σ_n⟩_w = −sin(α_i/2)(sin φ + i cos φ)
    let (wr, wi) = (-sa * s.phi.sin(), -sa * s.phi.cos());
    let (se, ce) = s.epsilon.sin_cos();
    // c²(cos ε ± I sin ε)² = (c·cos ε ± c·I·sin ε)², with c = cos(α_i/2)
    let (a_ce, a2) = (ca * ce, sa * sa);
    let i0 = overlap2 * ce * ce;
    let i1 = se * se * a2;
    let i2 = 0.5 * ((a_ce + wi * se).powi(2) + (wr * se).powi(2));
    let i3 = 0.5 * ((a_ce - wi * se).powi(2) + (wr * se).powi(2));
    let i4 = 0.5 * ((a_ce + wr * se).powi(2) + (wi * se).powi(2));
    let i5 = 0.5 * ((a_ce - wr * se).powi(2) + (wi * se).powi(2));
    Ok(IntensitySet::exact([i0, i1, i2, i3, i4, i5]))
}
