//! Density-matrix evolution under per-gate noise.
//!
//! Each gate is followed by depolarizing noise on the qubits it touches and
//! by zero-temperature amplitude damping plus pure dephasing on both qubits
//! for the gate's duration. Readout applies a per-qubit confusion matrix to
//! the computational-basis populations.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{Circuit, GateOp, Qubit, StateVector};
use crate::C64;

pub type Mat4 = Matrix4<C64>;
type Mat2 = Matrix2<C64>;

/// Two-qubit mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (min eigenvalue ≥ −1e-10).
    pub fn new(m: Mat4) -> Result<Self> {
        let herm = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let rho = DensityMatrix(m);
        let min_eig = rho.min_eigenvalue();
        if min_eig < -1e-10 {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a two-qubit pure state.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        if state.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: state.dim(),
            });
        }
        let v = nalgebra::Vector4::from_column_slice(state.amplitudes());
        Ok(DensityMatrix(v * v.adjoint()))
    }

    /// `|00⟩⟨00|`.
    pub fn ground() -> Self {
        let mut m = Mat4::zeros();
        m[(0, 0)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat4::identity() * C64::new(0.25, 0.0))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Diagonal in the computational basis.
    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0[(i, i)].re)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, state: &StateVector) -> f64 {
        let v = nalgebra::Vector4::from_column_slice(state.amplitudes());
        (v.adjoint() * self.0 * v)[(0, 0)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Hermitian part only; anti-Hermitian residue is rejected separately.
        let h = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Reduced state of one qubit.
    pub fn partial_trace(&self, keep: Qubit) -> Mat2 {
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let (r, c) = match keep {
                        Qubit::A => (2 * i + k, 2 * j + k),
                        Qubit::B => (2 * k + i, 2 * k + j),
                    };
                    out[(i, j)] += self.0[(r, c)];
                }
            }
        }
        out
    }
}

/// Device calibration. Times in µs, durations in ns; per-qubit arrays are
/// indexed `[a, b]`. `readout_p01` is P(read 1 | state 0) and `readout_p10`
/// is P(read 0 | state 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(with = "infinite_as_null")]
    pub t1_us: [f64; 2],
    #[serde(with = "infinite_as_null")]
    pub t2_us: [f64; 2],
    pub depol_1q: f64,
    pub depol_2q: f64,
    pub dur_1q_ns: f64,
    pub dur_2q_ns: f64,
    pub dur_readout_ns: f64,
    pub readout_p01: [f64; 2],
    pub readout_p10: [f64; 2],
}

impl NoiseModel {
    /// No errors at all: infinite T1/T2 and zero rates.
    pub fn noiseless() -> Self {
        NoiseModel {
            t1_us: [f64::INFINITY; 2],
            t2_us: [f64::INFINITY; 2],
            depol_1q: 0.0,
            depol_2q: 0.0,
            dur_1q_ns: 0.0,
            dur_2q_ns: 0.0,
            dur_readout_ns: 0.0,
            readout_p01: [0.0; 2],
            readout_p10: [0.0; 2],
        }
    }

    /// Same model with a symmetric readout flip probability on both qubits.
    pub fn with_readout_flip(mut self, p: f64) -> Self {
        self.readout_p01 = [p; 2];
        self.readout_p10 = [p; 2];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidNoiseModel(msg));
        let probs = [
            ("depol_1q", self.depol_1q),
            ("depol_2q", self.depol_2q),
            ("readout_p01[a]", self.readout_p01[0]),
            ("readout_p01[b]", self.readout_p01[1]),
            ("readout_p10[a]", self.readout_p10[0]),
            ("readout_p10[b]", self.readout_p10[1]),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not in [0, 1]"));
            }
        }
        for (name, d) in [
            ("dur_1q_ns", self.dur_1q_ns),
            ("dur_2q_ns", self.dur_2q_ns),
            ("dur_readout_ns", self.dur_readout_ns),
        ] {
            if d.is_nan() || d < 0.0 {
                return bad(format!("{name} = {d} must be non-negative"));
            }
        }
        for q in 0..2 {
            let (t1, t2) = (self.t1_us[q], self.t2_us[q]);
            if t1.is_nan() || t2.is_nan() || t1 <= 0.0 || t2 <= 0.0 {
                return bad(format!("T1/T2 of qubit {q} must be positive"));
            }
            if t2 > 2.0 * t1 {
                return bad(format!(
                    "T2 = {t2} exceeds 2·T1 = {} on qubit {q}",
                    2.0 * t1
                ));
            }
        }
        Ok(())
    }

    /// Amplitude-damping probability γ = 1 − exp(−t/T1) for `duration_ns`.
    pub fn damping_probability(&self, qubit: Qubit, duration_ns: f64) -> f64 {
        let t1 = self.t1_us[qubit.index()];
        if duration_ns == 0.0 || t1.is_infinite() {
            return 0.0;
        }
        -(-duration_ns / (t1 * 1e3)).exp_m1()
    }

    /// Phase-flip probability q with coherence factor 1 − 2q = exp(−t/T_φ),
    /// where 1/T_φ = 1/T2 − 1/(2·T1).
    pub fn dephasing_probability(&self, qubit: Qubit, duration_ns: f64) -> f64 {
        let (t1, t2) = (self.t1_us[qubit.index()], self.t2_us[qubit.index()]);
        let rate_per_us = (1.0 / t2 - 0.5 / t1).max(0.0);
        if duration_ns == 0.0 || rate_per_us == 0.0 {
            return 0.0;
        }
        -0.5 * (-duration_ns * 1e-3 * rate_per_us).exp_m1()
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        paper_noise_model()
    }
}

/// Default calibration of the two-qubit device: measured T1/T2, midpoints of
/// the quoted gate error ranges, typical gate/readout durations and a 2%
/// symmetric readout flip.
pub fn paper_noise_model() -> NoiseModel {
    NoiseModel {
        t1_us: [142.0, 135.0],
        t2_us: [101.0, 26.0],
        depol_1q: 0.0004,
        depol_2q: 0.008,
        dur_1q_ns: 35.0,
        dur_2q_ns: 300.0,
        dur_readout_ns: 950.0,
        readout_p01: [0.02; 2],
        readout_p10: [0.02; 2],
    }
}

/// Completely positive map as a list of 4×4 Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<Mat4>,
}

impl KrausChannel {
    /// Validates completeness `Σ K†K = I` within 1e-10.
    pub fn new(ops: Vec<Mat4>) -> Result<Self> {
        let ch = KrausChannel { ops };
        let dev = ch.completeness_deviation();
        if ch.ops.is_empty() || dev > 1e-10 {
            return Err(Error::InvalidNoiseModel(format!(
                "Kraus operators are not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(ch)
    }

    pub fn identity() -> Self {
        KrausChannel {
            ops: vec![Mat4::identity()],
        }
    }

    pub fn unitary(u: Mat4) -> Self {
        KrausChannel { ops: vec![u] }
    }

    pub fn operators(&self) -> &[Mat4] {
        &self.ops
    }

    /// Max entrywise `|Σ K†K − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .ops
            .iter()
            .fold(Mat4::zeros(), |acc, k| acc + k.adjoint() * k);
        (sum - Mat4::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &KrausChannel) -> KrausChannel {
        let ops = next
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b * a))
            .collect();
        KrausChannel { ops }
    }
}

/// `ρ' = Σ K ρ K†`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel) -> DensityMatrix {
    let m = ch
        .ops
        .iter()
        .fold(Mat4::zeros(), |acc, k| acc + k * rho.0 * k.adjoint());
    // re-symmetrize to keep rounding from accumulating an anti-Hermitian part
    DensityMatrix((m + m.adjoint()) * C64::new(0.5, 0.0))
}

/// Single-qubit depolarizing channel `ρ → (1−p)ρ + p·Tr_q(ρ)⊗I/2` on `qubit`.
pub fn depolarizing_1q(p: f64, qubit: Qubit) -> KrausChannel {
    if p == 0.0 {
        return KrausChannel::identity();
    }
    let paulis = paulis();
    let mut ops = vec![embed1(
        &(paulis[0] * C64::new((1.0 - 0.75 * p).sqrt(), 0.0)),
        qubit,
    )];
    for s in &paulis[1..] {
        ops.push(embed1(&(s * C64::new((p / 4.0).sqrt(), 0.0)), qubit));
    }
    KrausChannel { ops }
}

/// Two-qubit depolarizing channel `ρ → (1−p)ρ + p·I/4`.
pub fn depolarizing_2q(p: f64) -> KrausChannel {
    if p == 0.0 {
        return KrausChannel::identity();
    }
    let paulis = paulis();
    let mut ops = Vec::with_capacity(16);
    for (i, a) in paulis.iter().enumerate() {
        for (j, b) in paulis.iter().enumerate() {
            let w = if i == 0 && j == 0 {
                1.0 - 15.0 * p / 16.0
            } else {
                p / 16.0
            };
            ops.push(kron2(a, b) * C64::new(w.sqrt(), 0.0));
        }
    }
    KrausChannel { ops }
}

/// Zero-temperature amplitude damping with decay probability `gamma`.
pub fn amplitude_damping(gamma: f64, qubit: Qubit) -> KrausChannel {
    if gamma == 0.0 {
        return KrausChannel::identity();
    }
    let z = C64::new(0.0, 0.0);
    let k0 = Mat2::new(
        C64::new(1.0, 0.0),
        z,
        z,
        C64::new((1.0 - gamma).sqrt(), 0.0),
    );
    let k1 = Mat2::new(z, C64::new(gamma.sqrt(), 0.0), z, z);
    KrausChannel {
        ops: vec![embed1(&k0, qubit), embed1(&k1, qubit)],
    }
}

/// Phase flip with probability `q`.
pub fn phase_damping(q: f64, qubit: Qubit) -> KrausChannel {
    if q == 0.0 {
        return KrausChannel::identity();
    }
    let p = paulis();
    KrausChannel {
        ops: vec![
            embed1(&(p[0] * C64::new((1.0 - q).sqrt(), 0.0)), qubit),
            embed1(&(p[3] * C64::new(q.sqrt(), 0.0)), qubit),
        ],
    }
}

/// T1/T2 relaxation of both qubits over `duration_ns`.
pub fn idle_channel(nm: &NoiseModel, duration_ns: f64) -> KrausChannel {
    relaxation_stages(nm, duration_ns)
        .iter()
        .fold(KrausChannel::identity(), |acc, s| acc.then(s))
}

/// Gate unitary, then depolarizing on the touched qubits, then relaxation of
/// both qubits for the gate duration.
pub fn channel_for_gate(g: &GateOp, nm: &NoiseModel) -> Result<KrausChannel> {
    nm.validate()?;
    let stages = gate_stages(g, nm)?;
    let mut it = stages.into_iter();
    let first = it.next().expect("unitary stage");
    Ok(it.fold(first, |acc, s| acc.then(&s)))
}

/// Runs a two-qubit circuit gate by gate, then idles both qubits for the
/// readout duration.
pub fn noisy_run(c: &Circuit, initial: &DensityMatrix, nm: &NoiseModel) -> Result<DensityMatrix> {
    if c.num_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: c.num_qubits(),
        });
    }
    nm.validate()?;
    let mut rho = initial.clone();
    for g in c.gates() {
        // stages are applied one at a time; composing them first is equivalent
        for stage in gate_stages(g, nm)? {
            rho = apply_channel(&rho, &stage);
        }
    }
    for stage in relaxation_stages(nm, nm.dur_readout_ns) {
        rho = apply_channel(&rho, &stage);
    }
    Ok(rho)
}

/// Populations pushed through the per-qubit confusion matrices.
pub fn readout_probabilities(rho: &DensityMatrix, nm: &NoiseModel) -> Vec<f64> {
    let pops = rho.populations();
    // confusion[q][read][true]
    let conf = |q: usize| {
        [
            [1.0 - nm.readout_p01[q], nm.readout_p10[q]],
            [nm.readout_p01[q], 1.0 - nm.readout_p10[q]],
        ]
    };
    let (ca, cb) = (conf(0), conf(1));
    let mut out = vec![0.0; 4];
    for (read, o) in out.iter_mut().enumerate() {
        let (ra, rb) = (read >> 1, read & 1);
        for (truth, p) in pops.iter().enumerate() {
            let (ta, tb) = (truth >> 1, truth & 1);
            *o += ca[ra][ta] * cb[rb][tb] * p.max(0.0);
        }
    }
    out
}

fn gate_stages(g: &GateOp, nm: &NoiseModel) -> Result<Vec<KrausChannel>> {
    let u = g.embedded(2)?;
    let u = Mat4::from_iterator(u.iter().copied());
    let (depol, duration) = if g.is_two_qubit() {
        (depolarizing_2q(nm.depol_2q), nm.dur_2q_ns)
    } else {
        let q = g.qubits()[0];
        (depolarizing_1q(nm.depol_1q, q), nm.dur_1q_ns)
    };
    let mut stages = vec![KrausChannel::unitary(u)];
    if depol != KrausChannel::identity() {
        stages.push(depol);
    }
    stages.extend(relaxation_stages(nm, duration));
    Ok(stages)
}

fn relaxation_stages(nm: &NoiseModel, duration_ns: f64) -> Vec<KrausChannel> {
    let mut out = Vec::new();
    for q in [Qubit::A, Qubit::B] {
        out.push(amplitude_damping(nm.damping_probability(q, duration_ns), q));
        out.push(phase_damping(nm.dephasing_probability(q, duration_ns), q));
    }
    out.retain(|s| *s != KrausChannel::identity());
    out
}

fn paulis() -> [Mat2; 4] {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    [
        Mat2::new(l, o, o, l),
        Mat2::new(o, l, l, o),
        Mat2::new(o, -i, i, o),
        Mat2::new(l, o, o, -l),
    ]
}

fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)])
}

fn embed1(op: &Mat2, qubit: Qubit) -> Mat4 {
    match qubit {
        Qubit::A => kron2(op, &Mat2::identity()),
        Qubit::B => kron2(&Mat2::identity(), op),
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
        v.map(|x| if x.is_infinite() { None } else { Some(x) })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 2], D::Error> {
        let v = <[Option<f64>; 2]>::deserialize(d)?;
        Ok(v.map(|x| x.unwrap_or(f64::INFINITY)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{
        build_measurement_circuit, theoretical_intensities, ExperimentSetting, PointerBasis,
    };
    use crate::estimator::{invert_weak_value, theoretical_weak_value, IntensitySet};
    use crate::qsim::outcome_probabilities;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn excited_a() -> DensityMatrix {
        let mut m = Mat4::zeros();
        m[(2, 2)] = C64::new(1.0, 0.0);
        DensityMatrix::new(m).unwrap()
    }

    fn exact_intensities(s: &ExperimentSetting, nm: &NoiseModel) -> [f64; 6] {
        let mut v = [0.0; 6];
        for b in PointerBasis::ALL {
            let rho = noisy_run(
                &build_measurement_circuit(s, b),
                &DensityMatrix::ground(),
                nm,
            )
            .unwrap();
            let p = readout_probabilities(&rho, nm);
            let (k0, k1) = b.intensity_indices();
            v[k0] = p[0];
            v[k1] = p[1];
        }
        v
    }

    #[test]
    fn noiseless_channel_is_the_unitary() {
        let g = GateOp::cry(0.7, Qubit::B, Qubit::A);
        let ch = channel_for_gate(&g, &NoiseModel::noiseless()).unwrap();
        assert_eq!(ch.operators().len(), 1);
        let u = g.embedded(2).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!(
                    (ch.operators()[0][(r, c)] - u[(r, c)]).norm(),
                    0.0,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn long_idle_relaxes_to_ground() {
        let nm = NoiseModel {
            t1_us: [1.0, 1.0],
            t2_us: [1.0, 1.0],
            ..NoiseModel::noiseless()
        };
        let rho = apply_channel(&excited_a(), &idle_channel(&nm, 1e9));
        assert_abs_diff_eq!(rho.populations()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn depolarizing_fixed_point_and_full_strength() {
        let mixed = DensityMatrix::maximally_mixed();
        let out = apply_channel(&mixed, &depolarizing_1q(0.3, Qubit::A));
        assert!((out.matrix() - mixed.matrix())
            .iter()
            .all(|z| z.norm() < 1e-15));
        let full = apply_channel(&excited_a(), &depolarizing_1q(1.0, Qubit::A));
        let red = full.partial_trace(Qubit::A);
        assert_abs_diff_eq!(red[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(red[(1, 1)].re, 0.5, epsilon = 1e-15);
        let two = apply_channel(&excited_a(), &depolarizing_2q(1.0));
        for p in two.populations() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_and_unitary_channels() {
        let psi = StateVector::normalized(vec![
            C64::new(0.3, 0.1),
            C64::new(0.0, 0.5),
            C64::new(-0.2, 0.0),
            C64::new(0.4, 0.4),
        ])
        .unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert_eq!(apply_channel(&rho, &KrausChannel::identity()), rho);
        let g = GateOp::ry(0.9, Qubit::B);
        let u = g.embedded(2).unwrap();
        let out = apply_channel(
            &rho,
            &KrausChannel::unitary(Mat4::from_fn(|r, c| u[(r, c)])),
        );
        let expect = StateVector::new(
            crate::qsim::UnitaryMatrix::new(u)
                .unwrap()
                .apply(psi.amplitudes()),
        )
        .unwrap();
        assert_abs_diff_eq!(out.fidelity_with_pure(&expect), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn readout_examples() {
        let nm = NoiseModel::noiseless().with_readout_flip(0.05);
        let p = readout_probabilities(&DensityMatrix::ground(), &nm);
        for (a, b) in p.iter().zip([0.9025, 0.0475, 0.0475, 0.0025]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for q in readout_probabilities(
            &DensityMatrix::maximally_mixed(),
            &nm.clone().with_readout_flip(0.3),
        ) {
            assert_abs_diff_eq!(q, 0.25, epsilon = 1e-15);
        }
        let clean = readout_probabilities(&excited_a(), &NoiseModel::noiseless());
        assert_eq!(clean, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn asymmetric_readout() {
        let nm = NoiseModel {
            readout_p01: [0.1, 0.0],
            readout_p10: [0.0, 0.0],
            ..NoiseModel::noiseless()
        };
        let p = readout_probabilities(&DensityMatrix::ground(), &nm);
        assert_abs_diff_eq!(p[2], 0.1, epsilon = 1e-15);
        let q = readout_probabilities(&excited_a(), &nm);
        assert_abs_diff_eq!(q[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn default_calibration() {
        let nm = paper_noise_model();
        assert_eq!(nm.t1_us[0], 142.0);
        assert_eq!(nm.depol_2q, 0.008);
        assert!((0.01..=0.14).contains(&nm.readout_p01[0]));
        assert!(nm.validate().is_ok());
        assert_eq!(NoiseModel::default(), nm);
    }

    #[test]
    fn invalid_models() {
        let t2 = NoiseModel {
            t1_us: [10.0, 10.0],
            t2_us: [25.0, 10.0],
            ..NoiseModel::noiseless()
        };
        assert!(matches!(t2.validate(), Err(Error::InvalidNoiseModel(_))));
        let p = NoiseModel {
            depol_1q: 1.5,
            ..NoiseModel::noiseless()
        };
        assert!(p.validate().is_err());
        assert!(channel_for_gate(&GateOp::h(Qubit::A), &p).is_err());
    }

    #[test]
    fn infinite_times_serialize_as_null() {
        let text = serde_json::to_string(&NoiseModel::noiseless()).unwrap();
        assert!(text.contains("\"t1_us\":[null,null]"));
        let back: NoiseModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, NoiseModel::noiseless());
        let device: NoiseModel =
            serde_json::from_str(&serde_json::to_string(&paper_noise_model()).unwrap()).unwrap();
        assert_eq!(device, paper_noise_model());
    }

    #[test]
    fn channels_are_trace_preserving() {
        let nm = paper_noise_model();
        for g in [
            GateOp::h(Qubit::A),
            GateOp::sdg(Qubit::B),
            GateOp::cry(1.0, Qubit::B, Qubit::A),
            GateOp::cry(-0.3, Qubit::A, Qubit::B),
        ] {
            assert!(channel_for_gate(&g, &nm).unwrap().completeness_deviation() < 1e-10);
        }
        assert!(idle_channel(&nm, 950.0).completeness_deviation() < 1e-10);
        assert!(depolarizing_2q(0.3).completeness_deviation() < 1e-12);
        assert!(KrausChannel::new(vec![Mat4::identity() * C64::new(0.5, 0.0)]).is_err());
    }

    #[test]
    fn noisy_postselection_drops() {
        let s = ExperimentSetting::new(FRAC_PI_4, PI / 2.0, FRAC_PI_4);
        let nm = NoiseModel {
            depol_1q: 0.0004,
            depol_2q: 0.008,
            ..NoiseModel::noiseless()
        };
        let noisy = exact_intensities(&s, &nm);
        assert!(noisy[0] < 0.426776695296637);
        let readout_only = exact_intensities(&s, &NoiseModel::noiseless().with_readout_flip(0.0));
        let clean = theoretical_intensities(&s).unwrap();
        for (a, b) in readout_only.iter().zip(clean.values()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn deviation_grows_with_readout_flip() {
        let s = ExperimentSetting::new(FRAC_PI_4, PI / 2.0, FRAC_PI_4);
        let w = theoretical_weak_value(&s).unwrap();
        let mut last = -1.0;
        for p in [0.0, 0.02, 0.05, 0.10] {
            let v = exact_intensities(&s, &paper_noise_model().with_readout_flip(p));
            let est = invert_weak_value(&IntensitySet::exact(v), s.epsilon).unwrap();
            let d = ((est.real - w.re).powi(2) + (est.imag - w.im).powi(2)).sqrt();
            assert!(d >= last, "{p}: {d} < {last}");
            last = d;
        }
    }

    fn gate_strategy() -> impl Strategy<Value = GateOp> {
        let q = prop_oneof![Just(Qubit::A), Just(Qubit::B)];
        (0..5usize, -PI..PI, q).prop_map(|(k, t, q)| match k {
            0 => GateOp::ry(t, q),
            1 => GateOp::rz(t, q),
            2 => GateOp::h(q),
            3 => GateOp::sdg(q),
            _ => GateOp::cry(t, q, q.other()),
        })
    }

    proptest! {
        #[test]
        fn noiseless_density_matches_statevector(gates in proptest::collection::vec(gate_strategy(), 0..12)) {
            let c = Circuit::from_gates(2, gates).unwrap();
            let rho = noisy_run(&c, &DensityMatrix::ground(), &NoiseModel::noiseless()).unwrap();
            let p = readout_probabilities(&rho, &NoiseModel::noiseless());
            let q = outcome_probabilities(&c.run(&StateVector::zero(2).unwrap()).unwrap());
            for k in 0..4 {
                prop_assert!((p[k] - q[k]).abs() < 1e-10);
            }
        }

        #[test]
        fn noisy_runs_preserve_trace(gates in proptest::collection::vec(gate_strategy(), 0..12)) {
            let c = Circuit::from_gates(2, gates).unwrap();
            let rho = noisy_run(&c, &DensityMatrix::ground(), &paper_noise_model()).unwrap();
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
            prop_assert!(rho.min_eigenvalue() > -1e-10);
            let p = readout_probabilities(&rho, &paper_noise_model());
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
