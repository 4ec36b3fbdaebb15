//! Jones-calculus model of the all-optical realization: five wave plates
//! synthesize `exp(−iε σ_n)` on polarization, and a Mach-Zehnder
//! interferometer couples polarization (qubit `a`) to path (qubit `b`).
//!
//! Polarization is the high-order factor of the 4×4 matrices, so the basis
//! index is `2·polarization + path`, matching the circuit ordering.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circuits::pauli_combination;
use crate::error::{Error, Result};
use crate::qsim::{UnitaryMatrix, VALIDATION_TOL};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlate {
    /// Angle of the major axis, referenced as set by the [`JonesConvention`].
    pub axis_angle: f64,
    /// Retardance Γ in (0, 2π): π for half-wave, π/2 for quarter-wave.
    pub retardance: f64,
}

impl WavePlate {
    pub fn new(axis_angle: f64, retardance: f64) -> Result<Self> {
        if !axis_angle.is_finite() || !(retardance > 0.0 && retardance < 2.0 * PI) {
            return Err(Error::InvalidGate(format!(
                "wave plate needs a finite axis and retardance in (0, 2π), got ({axis_angle}, {retardance})"
            )));
        }
        Ok(WavePlate {
            axis_angle,
            retardance,
        })
    }

    pub fn half_wave(axis_angle: f64) -> Self {
        WavePlate {
            axis_angle,
            retardance: PI,
        }
    }

    pub fn quarter_wave(axis_angle: f64) -> Self {
        WavePlate {
            axis_angle,
            retardance: FRAC_PI_2,
        }
    }

    /// Same retardance, axis turned by π/2.
    pub fn rotated_quarter_turn(self) -> Self {
        WavePlate {
            axis_angle: self.axis_angle + FRAC_PI_2,
            ..self
        }
    }
}

/// Jones matrix convention for a retarder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JonesConvention {
    /// `cos(Γ/2)·I − i sin(Γ/2)(cos 2θ σ_x + sin 2θ σ_y)`. The only convention
    /// under which the five-plate product equals `exp(−iε σ_n)`.
    #[default]
    TransverseAxis,
    /// `R(θ)·diag(e^{−iΓ/2}, e^{iΓ/2})·R(−θ)`, θ from the vertical.
    LinearFromVertical,
    /// As `LinearFromVertical` with θ from the horizontal.
    LinearFromHorizontal,
}

/// Unit vector `n = (sin ϑ cos φ, sin ϑ sin φ, cos ϑ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalAxisVector {
    pub theta: f64,
    pub varphi: f64,
}

impl OpticalAxisVector {
    pub fn new(theta: f64, varphi: f64) -> Result<Self> {
        if !theta.is_finite() || !varphi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "axis angles must be finite, got ({theta}, {varphi})"
            )));
        }
        Ok(OpticalAxisVector { theta, varphi })
    }

    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.varphi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

pub fn plate_matrix(p: WavePlate) -> UnitaryMatrix {
    plate_matrix_with(p, JonesConvention::default())
}

pub fn plate_matrix_with(p: WavePlate, convention: JonesConvention) -> UnitaryMatrix {
    let (sg, cg) = (p.retardance / 2.0).sin_cos();
    let m = match convention {
        JonesConvention::TransverseAxis => {
            let (s2, c2) = (2.0 * p.axis_angle).sin_cos();
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(cg, 0.0),
                    C64::new(-sg * s2, -sg * c2),
                    C64::new(sg * s2, -sg * c2),
                    C64::new(cg, 0.0),
                ],
            )
        }
        JonesConvention::LinearFromVertical | JonesConvention::LinearFromHorizontal => {
            let theta = match convention {
                JonesConvention::LinearFromHorizontal => p.axis_angle + FRAC_PI_2,
                _ => p.axis_angle,
            };
            let (s, c) = theta.sin_cos();
            let rot = |s: f64, c: f64| {
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C64::new(c, 0.0),
                        C64::new(-s, 0.0),
                        C64::new(s, 0.0),
                        C64::new(c, 0.0),
                    ],
                )
            };
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(cg, -sg),
                C64::new(cg, sg),
            ]));
            rot(s, c) * d * rot(-s, c)
        }
    };
    UnitaryMatrix::from_matrix_unchecked(m)
}

/// The five plates, leftmost factor first:
/// `Q((π+φ)/2)·Q((ϑ+φ)/2)·H((−π+ϑ+φ)/2 + ε/2)·Q((ϑ+φ)/2)·Q(φ/2)`.
pub fn plate_sequence(n: OpticalAxisVector, epsilon: f64) -> [WavePlate; 5] {
    let (t, p) = (n.theta, n.varphi);
    [
        WavePlate::quarter_wave((PI + p) / 2.0),
        WavePlate::quarter_wave((t + p) / 2.0),
        WavePlate::half_wave((-PI + t + p) / 2.0 + epsilon / 2.0),
        WavePlate::quarter_wave((t + p) / 2.0),
        WavePlate::quarter_wave(p / 2.0),
    ]
}

/// Matrix product of plates, leftmost factor first.
pub fn plate_product(plates: &[WavePlate], convention: JonesConvention) -> UnitaryMatrix {
    plates.iter().fold(UnitaryMatrix::identity(2), |acc, p| {
        acc.mul(&plate_matrix_with(*p, convention))
    })
}

/// Five-plate product; equals `exp(−iε σ_n)` up to global phase.
pub fn ua_from_plates(n: OpticalAxisVector, epsilon: f64) -> UnitaryMatrix {
    ua_from_plates_with(n, epsilon, JonesConvention::default())
}

pub fn ua_from_plates_with(
    n: OpticalAxisVector,
    epsilon: f64,
    convention: JonesConvention,
) -> UnitaryMatrix {
    plate_product(&plate_sequence(n, epsilon), convention)
}

/// Same plates in reverse order, each axis turned by π/2.
pub fn ua_adjoint_from_plates(n: OpticalAxisVector, epsilon: f64) -> UnitaryMatrix {
    let mut plates = plate_sequence(n, epsilon).map(WavePlate::rotated_quarter_turn);
    plates.reverse();
    plate_product(&plates, JonesConvention::default())
}

/// `exp(+iε σ_n)`, the arm operator of the interferometer, realized as the
/// five-plate sequence at strength −ε.
pub fn ua_eq8_from_plates(n: OpticalAxisVector, epsilon: f64) -> UnitaryMatrix {
    ua_from_plates(n, -epsilon)
}

/// `exp(−iε σ_n)` from the closed form `cos ε·I − i sin ε·σ_n`.
pub fn rotation_exp(n: OpticalAxisVector, epsilon: f64) -> UnitaryMatrix {
    let (s, c) = epsilon.sin_cos();
    let m = DMatrix::<C64>::identity(2, 2) * C64::new(c, 0.0)
        - pauli_combination(n.cartesian()) * C64::new(0.0, s);
    UnitaryMatrix::from_matrix_unchecked(m)
}

/// Symmetric 50:50 beam splitter on the path factor, phase i on reflection.
pub fn beam_splitter() -> UnitaryMatrix {
    let h = FRAC_1_SQRT_2;
    let bs = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(h, 0.0),
            C64::new(0.0, h),
            C64::new(0.0, h),
            C64::new(h, 0.0),
        ],
    );
    UnitaryMatrix::identity(2).kron(&UnitaryMatrix::from_matrix_unchecked(bs))
}

/// Mirrors: both arms redirected (path swap) with a common phase i.
pub fn mirrors() -> UnitaryMatrix {
    let z = C64::new(0.0, 0.0);
    let swap = DMatrix::from_row_slice(2, 2, &[z, C64::new(0.0, 1.0), C64::new(0.0, 1.0), z]);
    UnitaryMatrix::identity(2).kron(&UnitaryMatrix::from_matrix_unchecked(swap))
}

/// `V⊗|0_b⟩⟨0_b| + W⊗|1_b⟩⟨1_b|`.
fn path_conditional(v: &UnitaryMatrix, w: &UnitaryMatrix) -> UnitaryMatrix {
    let p0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
    ]));
    let p1 = DMatrix::<C64>::identity(2, 2) - &p0;
    UnitaryMatrix::from_matrix_unchecked(v.matrix().kronecker(&p0) + w.matrix().kronecker(&p1))
}

/// Input block, beam splitter, mirrors, arm operators, recombining beam
/// splitter and output block, as one 4×4 unitary on polarization⊗path.
/// With `Vi = Vf = U_a†` and `V0 = V1 = U_a = exp(+iε σ_n)` this is
/// `cos ε·I − i sin ε·σ_n⊗σ_z` up to global phase.
pub fn interferometer_unitary(
    vi: &UnitaryMatrix,
    v0: &UnitaryMatrix,
    v1: &UnitaryMatrix,
    vf: &UnitaryMatrix,
) -> Result<UnitaryMatrix> {
    for v in [vi, v0, v1, vf] {
        if v.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: v.dim(),
            });
        }
        let deviation = v.unitarity_deviation();
        if deviation > VALIDATION_TOL {
            return Err(Error::NonUnitaryInput { deviation });
        }
    }
    let id = UnitaryMatrix::identity(2);
    let bs = beam_splitter();
    Ok(path_conditional(vf, &id)
        .mul(&bs)
        .mul(&path_conditional(v0, v1))
        .mul(&mirrors())
        .mul(&bs)
        .mul(&path_conditional(vi, &id)))
}

/// The interferometer with the wave-plate arm operators at `(n, ε)`.
pub fn interferometer_from_plates(n: OpticalAxisVector, epsilon: f64) -> Result<UnitaryMatrix> {
    let ua = ua_eq8_from_plates(n, epsilon);
    let ua_dag = ua.adjoint();
    interferometer_unitary(&ua_dag, &ua, &ua, &ua_dag)
}
