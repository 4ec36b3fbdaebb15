use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::UnitaryMatrix;
use crate::C64;

/// Qubit label. `A` is the system (high-order bit), `B` the pointer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qubit {
    A,
    B,
}

impl Qubit {
    /// Position in the register (0 for `a`, 1 for `b`).
    pub fn index(self) -> usize {
        match self {
            Qubit::A => 0,
            Qubit::B => 1,
        }
    }

    pub fn other(self) -> Qubit {
        match self {
            Qubit::A => Qubit::B,
            Qubit::B => Qubit::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    Ry {
        angle: f64,
        target: Qubit,
    },
    Rz {
        angle: f64,
        target: Qubit,
    },
    Hadamard {
        target: Qubit,
    },
    SDagger {
        target: Qubit,
    },
    /// `Π₀(control) ⊗ I + Π₁(control) ⊗ R_y(angle)(target)`.
    ControlledRy {
        angle: f64,
        control: Qubit,
        target: Qubit,
    },
    /// Arbitrary unitary; a 4×4 matrix is indexed `2·bit(targets[0]) + bit(targets[1])`.
    RawUnitary {
        matrix: UnitaryMatrix,
        targets: Vec<Qubit>,
    },
}

impl GateOp {
    pub fn ry(angle: f64, target: Qubit) -> Self {
        GateOp::Ry { angle, target }
    }

    pub fn rz(angle: f64, target: Qubit) -> Self {
        GateOp::Rz { angle, target }
    }

    pub fn h(target: Qubit) -> Self {
        GateOp::Hadamard { target }
    }

    pub fn sdg(target: Qubit) -> Self {
        GateOp::SDagger { target }
    }

    pub fn cry(angle: f64, control: Qubit, target: Qubit) -> Self {
        GateOp::ControlledRy {
            angle,
            control,
            target,
        }
    }

    /// Qubits touched, in matrix order.
    pub fn qubits(&self) -> Vec<Qubit> {
        match self {
            GateOp::Ry { target, .. }
            | GateOp::Rz { target, .. }
            | GateOp::Hadamard { target }
            | GateOp::SDagger { target } => vec![*target],
            GateOp::ControlledRy {
                control, target, ..
            } => vec![*control, *target],
            GateOp::RawUnitary { targets, .. } => targets.clone(),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().len() == 2
    }

    /// Checks target/control validity against a register of `num_qubits`.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        if qubits.iter().any(|q| q.index() >= num_qubits) {
            return Err(Error::InvalidGate(format!(
                "{self:?} addresses a qubit outside a {num_qubits}-qubit register"
            )));
        }
        match qubits.as_slice() {
            [_] => {}
            [x, y] if x != y => {}
            [_, _] => return Err(Error::InvalidGate("control and target must differ".into())),
            _ => {
                return Err(Error::InvalidGate(format!(
                    "gate must act on 1 or 2 qubits, got {}",
                    qubits.len()
                )))
            }
        }
        if let GateOp::RawUnitary { matrix, targets } = self {
            let want = 1 << targets.len();
            if matrix.dim() != want {
                return Err(Error::DimensionMismatch {
                    expected: want,
                    found: matrix.dim(),
                });
            }
        }
        Ok(())
    }

    /// The gate's own matrix: 2×2 for single-qubit gates, 4×4 on
    /// `(control, target)` for the controlled rotation.
    pub fn matrix(&self) -> UnitaryMatrix {
        let c = |re: f64, im: f64| C64::new(re, im);
        let m = match self {
            GateOp::Ry { angle, .. } => ry(*angle),
            GateOp::Rz { angle, .. } => {
                let h = angle / 2.0;
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C64::from_polar(1.0, -h),
                        c(0.0, 0.0),
                        c(0.0, 0.0),
                        C64::from_polar(1.0, h),
                    ],
                )
            }
            GateOp::Hadamard { .. } => {
                let s = FRAC_1_SQRT_2;
                DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
            }
            GateOp::SDagger { .. } => DMatrix::from_row_slice(
                2,
                2,
                &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)],
            ),
            GateOp::ControlledRy { angle, .. } => {
                let mut m = DMatrix::<C64>::identity(4, 4);
                m.view_mut((2, 2), (2, 2)).copy_from(&ry(*angle));
                m
            }
            GateOp::RawUnitary { matrix, .. } => return matrix.clone(),
        };
        UnitaryMatrix::from_matrix_unchecked(m)
    }

    /// The gate's matrix embedded into the full `2^n`-dimensional register.
    pub fn embedded(&self, num_qubits: usize) -> Result<DMatrix<C64>> {
        self.validate(num_qubits)?;
        let local = self.matrix().into_matrix();
        if num_qubits == 1 {
            return Ok(local);
        }
        let id = DMatrix::<C64>::identity(2, 2);
        Ok(match self.qubits().as_slice() {
            [Qubit::A] => local.kronecker(&id),
            [Qubit::B] => id.kronecker(&local),
            [Qubit::A, Qubit::B] => local,
            _ => {
                let swap = swap_matrix();
                &swap * local * &swap
            }
        })
    }

    /// Inverse gate.
    pub fn adjoint(&self) -> GateOp {
        match self {
            GateOp::Ry { angle, target } => GateOp::ry(-angle, *target),
            GateOp::Rz { angle, target } => GateOp::rz(-angle, *target),
            GateOp::Hadamard { target } => GateOp::h(*target),
            GateOp::ControlledRy {
                angle,
                control,
                target,
            } => GateOp::cry(-angle, *control, *target),
            GateOp::SDagger { target } => GateOp::RawUnitary {
                matrix: self.matrix().adjoint(),
                targets: vec![*target],
            },
            GateOp::RawUnitary { matrix, targets } => GateOp::RawUnitary {
                matrix: matrix.adjoint(),
                targets: targets.clone(),
            },
        }
    }
}

/// `exp(−iθσ_y/2)`.
fn ry(angle: f64) -> DMatrix<C64> {
    let (s, c) = (angle / 2.0).sin_cos();
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
}

fn swap_matrix() -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(r, c)] = C64::new(1.0, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn assert_matrix(u: &UnitaryMatrix, rows: &[C64]) {
        let want = UnitaryMatrix::from_rows(u.dim(), rows).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-15, "{u:?}");
    }

    #[test]
    fn ry_pi_rotates_zero_to_one() {
        let z = C64::new(0.0, 0.0);
        assert_matrix(
            &GateOp::ry(PI, Qubit::A).matrix(),
            &[z, C64::new(-1.0, 0.0), C64::new(1.0, 0.0), z],
        );
    }

    #[test]
    fn rz_zero_is_identity() {
        assert!(
            GateOp::rz(0.0, Qubit::B)
                .matrix()
                .max_abs_diff(&UnitaryMatrix::identity(2))
                == 0.0
        );
    }

    #[test]
    fn sdagger_matches_phase_shift() {
        let z = C64::new(0.0, 0.0);
        assert_matrix(
            &GateOp::sdg(Qubit::B).matrix(),
            &[C64::new(1.0, 0.0), z, z, C64::new(0.0, -1.0)],
        );
    }

    #[test]
    fn controlled_ry_blocks() {
        let m = GateOp::cry(0.7, Qubit::B, Qubit::A).matrix();
        let r = GateOp::ry(0.7, Qubit::A).matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m.entry(2 + i, 2 + j), r.entry(i, j));
                assert_eq!(
                    m.entry(i, j),
                    if i == j {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                );
            }
        }
    }

    #[test]
    fn validation_errors() {
        assert!(GateOp::cry(1.0, Qubit::A, Qubit::A).validate(2).is_err());
        assert!(GateOp::h(Qubit::B).validate(1).is_err());
        let bad = GateOp::RawUnitary {
            matrix: UnitaryMatrix::identity(4),
            targets: vec![Qubit::A],
        };
        assert!(bad.validate(2).is_err());
    }

    #[test]
    fn reversed_control_embedding_uses_swap() {
        // Control on b, target a: |0_a 1_b⟩ (index 1) is rotated into |1_a 1_b⟩ (index 3).
        let m = GateOp::cry(PI, Qubit::B, Qubit::A).embedded(2).unwrap();
        assert!((m[(3, 1)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((m[(2, 2)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
