use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qsim::state::dim_for;
use crate::qsim::{GateOp, StateVector, UnitaryMatrix};
use crate::C64;

/// Time-ordered gate list on a one- or two-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        dim_for(num_qubits)?;
        Ok(Circuit {
            num_qubits,
            gates: Vec::new(),
        })
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: GateOp) -> Result<&mut Self> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Applies the gates left to right to `initial`.
    pub fn run(&self, initial: &StateVector) -> Result<StateVector> {
        self.check_state(initial)?;
        self.gates
            .iter()
            .try_fold(initial.clone(), |s, g| apply_gate(&s, g))
    }

    /// Product of the embedded gate matrices, last gate leftmost.
    pub fn unitary(&self) -> UnitaryMatrix {
        let dim = 1 << self.num_qubits;
        let m = self
            .gates
            .iter()
            .fold(DMatrix::<C64>::identity(dim, dim), |acc, g| {
                // gates were validated on push
                g.embedded(self.num_qubits).expect("validated gate") * acc
            });
        UnitaryMatrix::from_matrix_unchecked(m)
    }

    /// The inverse circuit: adjoint gates in reverse order.
    pub fn adjoint(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(GateOp::adjoint).collect(),
        }
    }

    /// Appends all gates of `other`.
    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        for g in other.gates() {
            self.push(g.clone())?;
        }
        Ok(self)
    }

    fn check_state(&self, s: &StateVector) -> Result<()> {
        let dim = 1 << self.num_qubits;
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(())
    }
}

/// Applies one gate to a state, embedding it on the gate's qubits.
pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let m = gate.embedded(state.num_qubits())?;
    if m.nrows() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: state.dim(),
        });
    }
    let u = UnitaryMatrix::from_matrix_unchecked(m);
    Ok(StateVector::from_raw(u.apply(state.amplitudes())))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

    use proptest::prelude::*;

    use super::*;
    use crate::qsim::Qubit;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn assert_amps(s: &StateVector, want: &[C64]) {
        for (x, y) in s.amplitudes().iter().zip(want) {
            assert!((x - y).norm() < 1e-12, "{s:?} vs {want:?}");
        }
    }

    #[test]
    fn hadamard_on_pointer() {
        let s = apply_gate(&StateVector::zero(2).unwrap(), &GateOp::h(Qubit::B)).unwrap();
        assert_amps(&s, &[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0), c(0.0)]);
    }

    #[test]
    fn controlled_ry_idle_when_control_is_zero() {
        for idx in [0, 2] {
            let s0 = StateVector::basis(2, idx).unwrap();
            let s = apply_gate(&s0, &GateOp::cry(1.234, Qubit::B, Qubit::A)).unwrap();
            assert_amps(&s, s0.amplitudes());
        }
    }

    #[test]
    fn ry_half_pi_on_single_qubit() {
        let s = apply_gate(
            &StateVector::zero(1).unwrap(),
            &GateOp::ry(FRAC_PI_2, Qubit::A),
        )
        .unwrap();
        let h = (PI / 4.0).cos();
        assert_amps(&s, &[c(h), c((PI / 4.0).sin())]);
    }

    #[test]
    fn dimension_mismatch() {
        let circ = Circuit::new(2).unwrap();
        assert!(matches!(
            circ.run(&StateVector::zero(1).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(apply_gate(&StateVector::zero(1).unwrap(), &GateOp::h(Qubit::B)).is_err());
    }

    #[test]
    fn empty_circuit() {
        let circ = Circuit::new(2).unwrap();
        let s0 = StateVector::product([c(0.6), c(0.8)], [c(1.0), C64::new(0.0, 1.0)]).unwrap();
        assert_eq!(circ.run(&s0).unwrap(), s0);
        assert_eq!(
            circ.unitary().max_abs_diff(&UnitaryMatrix::identity(4)),
            0.0
        );
    }

    #[test]
    fn opposite_rz_cancel() {
        let circ = Circuit::from_gates(
            2,
            vec![GateOp::rz(0.9, Qubit::A), GateOp::rz(-0.9, Qubit::A)],
        )
        .unwrap();
        assert!(circ.unitary().max_abs_diff(&UnitaryMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn preparation_block() {
        let alpha = FRAC_PI_4;
        let circ =
            Circuit::from_gates(2, vec![GateOp::ry(alpha, Qubit::A), GateOp::h(Qubit::B)]).unwrap();
        let s = circ.run(&StateVector::zero(2).unwrap()).unwrap();
        let (sa, ca) = (alpha / 2.0).sin_cos();
        let want = StateVector::product([c(ca), c(sa)], [c(1.0), c(1.0)]).unwrap();
        assert!((s.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);
    }

    fn arb_gate() -> impl Strategy<Value = GateOp> {
        let q = prop_oneof![Just(Qubit::A), Just(Qubit::B)];
        let angle = -10.0..10.0f64;
        prop_oneof![
            (angle.clone(), q.clone()).prop_map(|(a, t)| GateOp::ry(a, t)),
            (angle.clone(), q.clone()).prop_map(|(a, t)| GateOp::rz(a, t)),
            q.clone().prop_map(GateOp::h),
            q.clone().prop_map(GateOp::sdg),
            (angle, q).prop_map(|(a, t)| GateOp::cry(a, t.other(), t)),
        ]
    }

    fn arb_state() -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4)
            .prop_filter_map("non-zero", |v| {
                StateVector::normalized(v.into_iter().map(|(r, i)| C64::new(r, i)).collect()).ok()
            })
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(g in arb_gate(), s in arb_state()) {
            let out = apply_gate(&s, &g).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn circuit_unitary_is_unitary_and_composes(
            gates in proptest::collection::vec(arb_gate(), 0..=20),
            s in arb_state(),
        ) {
            let circ = Circuit::from_gates(2, gates).unwrap();
            let u = circ.unitary();
            prop_assert!(u.unitarity_deviation() < 1e-10);
            let direct = circ.run(&s).unwrap();
            let via_u = u.apply(s.amplitudes());
            for (x, y) in direct.amplitudes().iter().zip(&via_u) {
                prop_assert!((x - y).norm() < 1e-10);
            }
            let back = circ.adjoint().run(&direct).unwrap();
            prop_assert!((back.fidelity(&s).unwrap() - 1.0).abs() < 1e-10);
        }
    }
}
