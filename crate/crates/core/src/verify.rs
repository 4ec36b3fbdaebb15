//! Self-checks run by `weakval verify`: circuit decomposition, wave-plate
//! identity and interferometer assembly against their closed forms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    closed_form_evolution, pauli_combination, verify_decomposition, ExperimentSetting,
};
use crate::optics::{
    interferometer_from_plates, ua_adjoint_from_plates, ua_from_plates, OpticalAxisVector,
};
use crate::qsim::UnitaryMatrix;
use crate::C64;

pub const DECOMPOSITION_TOL: f64 = 1e-12;
pub const PLATE_TOL: f64 = 1e-9;
pub const INTERFEROMETER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, cases: usize, max_deviation: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            cases,
            max_deviation,
            tolerance,
            passed: max_deviation < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Gate decomposition vs closed form over `cases` random settings.
pub fn check_decomposition(cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let worst = (0..cases)
        .map(|_| {
            let s = ExperimentSetting::new(
                rng.random_range(0.0..PI),
                rng.random_range(-PI..PI),
                rng.random_range(0.0..PI),
            );
            verify_decomposition(&s)
        })
        .fold(0.0, f64::max);
    CheckResult::new("decomposition", cases, worst, DECOMPOSITION_TOL)
}

/// `exp(−iε σ_n)` through the matrix exponential.
pub fn rotation_by_exponential(n: OpticalAxisVector, epsilon: f64) -> UnitaryMatrix {
    let m: DMatrix<C64> = pauli_combination(n.cartesian()) * C64::new(0.0, -epsilon);
    UnitaryMatrix::new(m.exp()).expect("exponential of anti-Hermitian matrix")
}

/// Five-plate product and its reversed, quarter-turned counterpart on a
/// `k×k×k` grid over ϑ ∈ [0, π], φ ∈ [−π, π], ε ∈ (0, π).
pub fn check_plate_identity(k: usize) -> (CheckResult, CheckResult) {
    let closed = |lo: f64, hi: f64, j: usize| lo + (hi - lo) * j as f64 / (k.max(2) - 1) as f64;
    let (mut ident, mut adj): (f64, f64) = (0.0, 0.0);
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                let n = OpticalAxisVector::new(closed(0.0, PI, a), closed(-PI, PI, b))
                    .expect("finite grid");
                let e = PI * (c as f64 + 1.0) / (k as f64 + 1.0);
                let u = ua_from_plates(n, e);
                ident = ident.max(u.max_diff_up_to_phase(&rotation_by_exponential(n, e)));
                adj = adj.max(ua_adjoint_from_plates(n, e).max_diff_up_to_phase(&u.adjoint()));
            }
        }
    }
    let cases = k * k * k;
    (
        CheckResult::new("plate_identity", cases, ident, PLATE_TOL),
        CheckResult::new("plate_adjoint", cases, adj, PLATE_TOL),
    )
}

/// Interferometer with plate-built arms vs the closed-form evolution over
/// `cases` random `(n, ε)`.
pub fn check_interferometer(cases: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = OpticalAxisVector::new(rng.random_range(0.0..PI), rng.random_range(-PI..PI))
            .expect("finite");
        let e = rng.random_range(0.0..PI);
        let d = match interferometer_from_plates(n, e) {
            Ok(u) => u.max_diff_up_to_phase(&closed_form_evolution(n.cartesian(), e)),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(d);
    }
    CheckResult::new("interferometer", cases, worst, INTERFEROMETER_TOL)
}

/// All oracles at their default sizes.
pub fn run_all(seed: u64) -> VerificationReport {
    let (ident, adj) = check_plate_identity(10);
    VerificationReport {
        checks: vec![
            check_decomposition(100, seed),
            ident,
            adj,
            check_interferometer(25, seed.wrapping_add(1)),
        ],
    }
}
