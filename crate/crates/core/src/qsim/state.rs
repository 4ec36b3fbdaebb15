use crate::error::{Error, Result};
use crate::qsim::VALIDATION_TOL;
use crate::C64;

/// Pure state of one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Builds a state from raw amplitudes. The length must be 2 or 4 and the
    /// vector normalized within `1e-10`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 2 && amps.len() != 4 {
            return Err(Error::InvalidState(format!(
                "dimension must be 2 or 4, got {}",
                amps.len()
            )));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidState(format!("squared norm is {norm2}")));
        }
        Ok(StateVector { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        Self::new(amps.into_iter().map(|a| a / norm).collect())
    }

    /// Computational basis state `|index⟩` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = dim_for(num_qubits)?;
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { amps })
    }

    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// `|a⟩ ⊗ |b⟩` from two single-qubit amplitude pairs.
    pub fn product(a: [C64; 2], b: [C64; 2]) -> Result<Self> {
        Self::normalized(vec![a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        StateVector { amps }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn num_qubits(&self) -> usize {
        if self.amps.len() == 4 {
            2
        } else {
            1
        }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

pub(crate) fn dim_for(num_qubits: usize) -> Result<usize> {
    match num_qubits {
        1 => Ok(2),
        2 => Ok(4),
        n => Err(Error::InvalidState(format!(
            "only 1 or 2 qubits are supported, got {n}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimension_and_norm() {
        assert!(StateVector::new(vec![C64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
        assert!(StateVector::basis(3, 0).is_err());
        assert!(StateVector::basis(2, 4).is_err());
    }

    #[test]
    fn product_state_ordering() {
        // |1_a⟩|0_b⟩ sits at index 2
        let s = StateVector::product(
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        assert_eq!(s.amplitudes()[2], C64::new(1.0, 0.0));
    }

    #[test]
    fn fidelity_ignores_global_phase() {
        let a = StateVector::basis(1, 1).unwrap();
        let b = StateVector::new(vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-15);
    }
}
