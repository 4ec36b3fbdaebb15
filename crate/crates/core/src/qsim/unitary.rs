use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qsim::VALIDATION_TOL;
use crate::C64;

/// Square complex matrix of dimension 2 or 4 that is unitary within `1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || (m.nrows() != 2 && m.nrows() != 4) {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: m.nrows().max(m.ncols()),
            });
        }
        let u = UnitaryMatrix(m);
        let deviation = u.unitarity_deviation();
        if deviation > VALIDATION_TOL {
            return Err(Error::NonUnitaryInput { deviation });
        }
        Ok(u)
    }

    /// Row-major constructor, validated like [`UnitaryMatrix::new`].
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        UnitaryMatrix(m)
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &UnitaryMatrix) -> Self {
        UnitaryMatrix(&self.0 * &rhs.0)
    }

    /// Kronecker product `self ⊗ rhs` (only 2×2 ⊗ 2×2 stays in range).
    pub fn kron(&self, rhs: &UnitaryMatrix) -> Self {
        UnitaryMatrix(self.0.kronecker(&rhs.0))
    }

    /// Max entrywise `|U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.0.nrows();
        let prod = self.0.adjoint() * &self.0;
        max_abs_entry(&(prod - DMatrix::<C64>::identity(n, n)))
    }

    /// Max entrywise `|self − other|`; infinite when dimensions differ.
    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs_entry(&(&self.0 - &other.0))
    }

    /// Max entrywise deviation after removing global phase: both matrices are
    /// divided by their entry at the position of `self`'s largest-magnitude
    /// entry.
    pub fn max_diff_up_to_phase(&self, other: &UnitaryMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        let (mut best, mut at) = (-1.0, (0, 0));
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let m = self.0[(r, c)].norm();
                if m > best {
                    best = m;
                    at = (r, c);
                }
            }
        }
        let pa = self.0[at];
        let pb = other.0[at];
        if pb.norm() < 1e-300 {
            return f64::INFINITY;
        }
        max_abs_entry(&(self.0.map(|z| z / pa) - other.0.map(|z| z / pb)))
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|r| (0..n).map(|c| self.0[(r, c)] * amps[c]).sum())
            .collect()
    }
}

pub(crate) fn max_abs_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unitary_and_bad_dims() {
        let m = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(
            UnitaryMatrix::new(m),
            Err(Error::NonUnitaryInput { .. })
        ));
        assert!(UnitaryMatrix::new(DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn phase_aligned_comparison() {
        let u = UnitaryMatrix::identity(2);
        let v = UnitaryMatrix::from_matrix_unchecked(u.matrix().map(|z| z * C64::new(0.0, 1.0)));
        assert!(u.max_abs_diff(&v) > 1.0);
        assert!(u.max_diff_up_to_phase(&v) < 1e-15);
    }
}
