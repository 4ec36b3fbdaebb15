//! Inversion of measured intensities into weak values and preselection
//! parameters, first-order uncertainty propagation, and RMS merit figures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuits::{theoretical_intensities, ExperimentSetting, ORTHOGONAL_OVERLAP};
use crate::error::{Error, Result};
use crate::qsim::{ShotCounts, StateVector};
use crate::C64;

/// Minimum i0 accepted by the inversion.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 1e-9;
/// `|sin 2ε|` at or below this is a singular strength.
pub const SINGULAR_SIN_2EPS: f64 = 1e-12;
/// Intensity differences at or below this count as zero when fixing the phase.
pub const PHASE_FLOOR: f64 = 1e-12;
/// Relative step of the central finite differences.
pub const FD_RELATIVE_STEP: f64 = 1e-6;

/// Intensities i0…i5 and the standard deviations of their means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntensityRepr", into = "IntensityRepr")]
pub struct IntensitySet {
    values: [f64; 6],
    sigmas: [f64; 6],
}

impl IntensitySet {
    pub fn new(values: [f64; 6], sigmas: [f64; 6]) -> Result<Self> {
        for (k, v) in values.iter().enumerate() {
            if !(-1e-12..=1.0 + 1e-12).contains(v) {
                return Err(Error::InvalidProbabilities(format!(
                    "i{k} = {v} is outside [0, 1]"
                )));
            }
        }
        for (k, s) in sigmas.iter().enumerate() {
            if !s.is_finite() || *s < 0.0 {
                return Err(Error::InvalidProbabilities(format!(
                    "sigma_i{k} = {s} must be >= 0"
                )));
            }
        }
        Ok(IntensitySet { values, sigmas })
    }

    /// Intensities with zero uncertainty.
    pub fn exact(values: [f64; 6]) -> Self {
        IntensitySet {
            values,
            sigmas: [0.0; 6],
        }
    }

    pub fn values(&self) -> &[f64; 6] {
        &self.values
    }

    pub fn sigmas(&self) -> &[f64; 6] {
        &self.sigmas
    }

    pub fn i(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn sigma(&self, k: usize) -> f64 {
        self.sigmas[k]
    }

    pub fn with_sigmas(mut self, sigmas: [f64; 6]) -> Result<Self> {
        self.sigmas = sigmas;
        Self::new(self.values, self.sigmas)
    }
}

#[derive(Serialize, Deserialize)]
struct IntensityRepr {
    i0: f64,
    i1: f64,
    i2: f64,
    i3: f64,
    i4: f64,
    i5: f64,
    #[serde(default)]
    sigma_i0: f64,
    #[serde(default)]
    sigma_i1: f64,
    #[serde(default)]
    sigma_i2: f64,
    #[serde(default)]
    sigma_i3: f64,
    #[serde(default)]
    sigma_i4: f64,
    #[serde(default)]
    sigma_i5: f64,
}

impl TryFrom<IntensityRepr> for IntensitySet {
    type Error = Error;

    fn try_from(r: IntensityRepr) -> Result<Self> {
        IntensitySet::new(
            [r.i0, r.i1, r.i2, r.i3, r.i4, r.i5],
            [
                r.sigma_i0, r.sigma_i1, r.sigma_i2, r.sigma_i3, r.sigma_i4, r.sigma_i5,
            ],
        )
    }
}

impl From<IntensitySet> for IntensityRepr {
    fn from(s: IntensitySet) -> Self {
        let [i0, i1, i2, i3, i4, i5] = s.values;
        let [sigma_i0, sigma_i1, sigma_i2, sigma_i3, sigma_i4, sigma_i5] = s.sigmas;
        IntensityRepr {
            i0,
            i1,
            i2,
            i3,
            i4,
            i5,
            sigma_i0,
            sigma_i1,
            sigma_i2,
            sigma_i3,
            sigma_i4,
            sigma_i5,
        }
    }
}

/// Real part, imaginary part and squared magnitude of `⟨σ_n⟩_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValueEstimate {
    #[serde(rename = "R")]
    pub real: f64,
    #[serde(rename = "I")]
    pub imag: f64,
    /// Squared magnitude from the (i0, i1) pair, independent of R and I.
    pub mag2: f64,
    #[serde(rename = "sigma_R")]
    pub sigma_real: f64,
    #[serde(rename = "sigma_I")]
    pub sigma_imag: f64,
}

impl WeakValueEstimate {
    pub fn weak_value(&self) -> C64 {
        C64::new(self.real, self.imag)
    }

    /// `|mag2 − (R² + I²)|`; zero on noiseless data.
    pub fn magnitude_discrepancy(&self) -> f64 {
        (self.mag2 - self.weak_value().norm_sqr()).abs()
    }
}

/// How φ is recovered from `(i4 − i5, i2 − i3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Full-circle phase from the two-argument arctangent.
    #[default]
    Signed,
    /// `arctan|(i4 − i5)/(i2 − i3)|`, constrained to [0, π/2].
    FirstQuadrant,
}

/// How per-intensity σ is formed from repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaConvention {
    /// Standard error of the mean.
    #[default]
    Sem,
    /// Sample standard deviation of the repetitions.
    SampleSd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreselectionEstimate {
    pub nu: f64,
    pub alpha: f64,
    pub phi: f64,
    /// `⟨Π₊⟩_w`.
    pub pi_plus: C64,
    /// `⟨Π₋⟩_w`.
    pub pi_minus: C64,
    /// Reconstructed `|A_i⟩` in the `{|0_a⟩, |1_a⟩}` basis.
    pub state: [C64; 2],
    pub sigma_nu: f64,
    pub sigma_alpha: f64,
    pub sigma_phi: f64,
}

impl PreselectionEstimate {
    pub fn state_vector(&self) -> StateVector {
        StateVector::normalized(self.state.to_vec()).expect("unit-norm reconstruction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeritFigures {
    /// RMS of the propagated uncertainties.
    pub sigma_bar: f64,
    /// RMS of theory − measurement.
    pub delta_bar: f64,
    pub n: usize,
}

/// The five parameters tracked by the merit figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parameter {
    R,
    I,
    #[serde(rename = "nu")]
    Nu,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "phi")]
    Phi,
}

impl Parameter {
    pub const ALL: [Parameter; 5] = [
        Parameter::R,
        Parameter::I,
        Parameter::Nu,
        Parameter::Alpha,
        Parameter::Phi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::R => "R",
            Parameter::I => "I",
            Parameter::Nu => "nu",
            Parameter::Alpha => "alpha",
            Parameter::Phi => "phi",
        }
    }

    /// Whether deviations must be wrapped onto the circle.
    pub fn is_periodic(self, mode: PhaseMode) -> bool {
        self == Parameter::Phi && mode == PhaseMode::Signed
    }

    /// Raw inversion formula, without domain checks.
    pub fn evaluate(self, i: &[f64; 6], epsilon: f64, mode: PhaseMode) -> f64 {
        match self {
            Parameter::R => raw_real(i, epsilon),
            Parameter::I => raw_imag(i, epsilon),
            Parameter::Nu => nu_from_mag2(raw_mag2(i, epsilon)),
            Parameter::Alpha => alpha_from_mag2(raw_mag2(i, epsilon)),
            Parameter::Phi => raw_phase(i, epsilon, mode),
        }
    }

    /// Value implied by the setting's theoretical weak value.
    pub fn theory(self, s: &ExperimentSetting, mode: PhaseMode) -> Result<f64> {
        let w = theoretical_weak_value(s)?;
        Ok(match self {
            Parameter::R => w.re,
            Parameter::I => w.im,
            Parameter::Nu => nu_from_mag2(w.norm_sqr()),
            Parameter::Alpha => alpha_from_mag2(w.norm_sqr()),
            Parameter::Phi => phase_of_weak_value(w, mode),
        })
    }
}

pub fn raw_real(i: &[f64; 6], epsilon: f64) -> f64 {
    (i[4] - i[5]) / (2.0 * i[0]) / epsilon.tan()
}

pub fn raw_imag(i: &[f64; 6], epsilon: f64) -> f64 {
    (i[2] - i[3]) / (2.0 * i[0]) / epsilon.tan()
}

pub fn raw_mag2(i: &[f64; 6], epsilon: f64) -> f64 {
    i[1] / i[0] / epsilon.tan().powi(2)
}

fn nu_from_mag2(mag2: f64) -> f64 {
    (0.5 + 0.5 * mag2.max(0.0)).powf(-0.5)
}

fn alpha_from_mag2(mag2: f64) -> f64 {
    2.0 * mag2.max(0.0).sqrt().atan()
}

fn raw_phase(i: &[f64; 6], epsilon: f64, mode: PhaseMode) -> f64 {
    let (d45, d23) = (i[4] - i[5], i[2] - i[3]);
    match mode {
        // R = −|w| sin φ and I = −|w| cos φ; the differences carry sign(sin 2ε).
        PhaseMode::Signed => {
            let s = -(2.0 * epsilon).sin().signum();
            (s * d45).atan2(s * d23)
        }
        PhaseMode::FirstQuadrant => d45.abs().atan2(d23.abs()),
    }
}

fn phase_of_weak_value(w: C64, mode: PhaseMode) -> f64 {
    if w.norm() == 0.0 {
        return 0.0;
    }
    match mode {
        PhaseMode::Signed => (-w.re).atan2(-w.im),
        PhaseMode::FirstQuadrant => w.re.abs().atan2(w.im.abs()),
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn check_strength(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || (2.0 * epsilon).sin().abs() <= SINGULAR_SIN_2EPS {
        return Err(Error::SingularStrength { epsilon });
    }
    Ok(())
}

fn check_inputs(iset: &IntensitySet, epsilon: f64) -> Result<()> {
    if iset.i(0).is_nan() || iset.i(0) <= DEFAULT_OVERLAP_THRESHOLD {
        return Err(Error::ZeroPostselectionOverlap { i0: iset.i(0) });
    }
    check_strength(epsilon)
}

fn check_setting(s: &ExperimentSetting) -> Result<()> {
    check_strength(s.epsilon)?;
    if (s.alpha_i / 2.0).cos().abs() <= ORTHOGONAL_OVERLAP {
        return Err(Error::PostselectionImpossible);
    }
    Ok(())
}

/// Squared magnitude, real and imaginary part of the weak value from
/// measured intensities. Uncertainties use analytic partials at the measured
/// point (no setting is known here).
pub fn invert_weak_value(iset: &IntensitySet, epsilon: f64) -> Result<WeakValueEstimate> {
    check_inputs(iset, epsilon)?;
    let i = iset.values();
    let s = iset.sigmas();
    let (real, imag) = (raw_real(i, epsilon), raw_imag(i, epsilon));
    let slope = 1.0 / (2.0 * i[0] * epsilon.tan());
    let sigma_real =
        ((real / i[0] * s[0]).powi(2) + slope.powi(2) * (s[4].powi(2) + s[5].powi(2))).sqrt();
    let sigma_imag =
        ((imag / i[0] * s[0]).powi(2) + slope.powi(2) * (s[2].powi(2) + s[3].powi(2))).sqrt();
    Ok(WeakValueEstimate {
        real,
        imag,
        mag2: raw_mag2(i, epsilon),
        sigma_real,
        sigma_imag,
    })
}

/// `−tan(α_i/2)·(sin φ + i cos φ)`.
pub fn theoretical_weak_value(s: &ExperimentSetting) -> Result<C64> {
    let (sa, ca) = (s.alpha_i / 2.0).sin_cos();
    if ca.abs() <= ORTHOGONAL_OVERLAP {
        return Err(Error::PostselectionImpossible);
    }
    let t = sa / ca;
    Ok(C64::new(-t * s.phi.sin(), -t * s.phi.cos()))
}

/// `(⟨Π₊⟩_w, ⟨Π₋⟩_w) = ((1 + w)/2, (1 − w)/2)`.
pub fn projector_weak_values(w: C64) -> (C64, C64) {
    let one = C64::new(1.0, 0.0);
    ((one + w) / 2.0, (one - w) / 2.0)
}

/// Normalization ν, amplitude angle α, phase φ and the reconstructed
/// preselection state.
///
/// The state is `(⟨Π₊⟩_w|n₊⟩ − ⟨Π₋⟩_w|n₋⟩)/√(|⟨Π₊⟩_w|² + |⟨Π₋⟩_w|²)` with
/// `|n±⟩ = (±|0⟩ + i e^{iφ}|1⟩)/√2` evaluated at the recovered φ. When both
/// intensity differences and the magnitude vanish the weak value is zero, φ
/// is reported as 0 and the state is `|0_a⟩`. Uncertainties use numeric
/// partials at the measured intensities.
pub fn reconstruct_preselection(
    iset: &IntensitySet,
    epsilon: f64,
    mode: PhaseMode,
) -> Result<PreselectionEstimate> {
    check_inputs(iset, epsilon)?;
    let i = iset.values();
    let mag2 = raw_mag2(i, epsilon).max(0.0);
    let phase_free = (i[2] - i[3]).abs() <= PHASE_FLOOR && (i[4] - i[5]).abs() <= PHASE_FLOOR;
    if phase_free && mag2 > PHASE_FLOOR {
        return Err(Error::IndeterminatePhase);
    }
    let phi = if phase_free {
        0.0
    } else {
        raw_phase(i, epsilon, mode)
    };

    let w = C64::new(raw_real(i, epsilon), raw_imag(i, epsilon));
    let (pi_plus, pi_minus) = projector_weak_values(w);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = C64::from_polar(h, phi) * C64::new(0.0, 1.0);
    let n_plus = [C64::new(h, 0.0), e];
    let n_minus = [C64::new(-h, 0.0), e];
    let norm = (pi_plus.norm_sqr() + pi_minus.norm_sqr()).sqrt();
    let state = [0, 1].map(|k| (pi_plus * n_plus[k] - pi_minus * n_minus[k]) / norm);

    let sigma = |p: Parameter| {
        propagate_at(
            |x| p.evaluate(x, epsilon, mode),
            i,
            iset.sigmas(),
            p.is_periodic(mode),
        )
    };
    Ok(PreselectionEstimate {
        nu: nu_from_mag2(mag2),
        alpha: alpha_from_mag2(mag2),
        phi,
        pi_plus,
        pi_minus,
        state,
        sigma_nu: sigma(Parameter::Nu),
        sigma_alpha: sigma(Parameter::Alpha),
        sigma_phi: if phase_free {
            0.0
        } else {
            sigma(Parameter::Phi)
        },
    })
}

/// Closed-form σ_R and σ_I with partials taken at the setting's theoretical
/// intensities.
pub fn propagate_uncertainty_closed(
    iset: &IntensitySet,
    s: &ExperimentSetting,
) -> Result<(f64, f64)> {
    check_setting(s)?;
    let sg = iset.sigmas();
    let (sa, ca) = (s.alpha_i / 2.0).sin_cos();
    let (t2, c2) = ((sa / ca).powi(2), ca * ca);
    let cos4 = s.epsilon.cos().powi(4);
    let sin2_2e = (2.0 * s.epsilon).sin().powi(2);
    let (sp, cp) = s.phi.sin_cos();
    let sigma_r = (t2 * sp * sp / cos4 * sg[0].powi(2) + (sg[4].powi(2) + sg[5].powi(2)) / sin2_2e)
        .sqrt()
        / c2;
    let sigma_i = (t2 * cp * cp / cos4 * sg[0].powi(2) + (sg[2].powi(2) + sg[3].powi(2)) / sin2_2e)
        .sqrt()
        / c2;
    Ok((sigma_r, sigma_i))
}

/// First-order propagation of `iset`'s σ through `f`, with central
/// finite-difference partials at the setting's theoretical intensities.
pub fn propagate_uncertainty_numeric<F>(
    f: F,
    iset: &IntensitySet,
    s: &ExperimentSetting,
) -> Result<f64>
where
    F: Fn(&[f64; 6]) -> f64,
{
    check_setting(s)?;
    let at = theoretical_intensities(s)?;
    Ok(propagate_at(f, at.values(), iset.sigmas(), false))
}

/// As [`propagate_uncertainty_numeric`] for an angle-valued `f`: differences
/// are wrapped into (−π, π] before dividing by the step.
pub fn propagate_angle_uncertainty_numeric<F>(
    f: F,
    iset: &IntensitySet,
    s: &ExperimentSetting,
) -> Result<f64>
where
    F: Fn(&[f64; 6]) -> f64,
{
    check_setting(s)?;
    let at = theoretical_intensities(s)?;
    Ok(propagate_at(f, at.values(), iset.sigmas(), true))
}

/// Propagated σ of `param` at the setting's theoretical intensities.
pub fn parameter_uncertainty(
    param: Parameter,
    iset: &IntensitySet,
    s: &ExperimentSetting,
    mode: PhaseMode,
) -> Result<f64> {
    let f = |x: &[f64; 6]| param.evaluate(x, s.epsilon, mode);
    if param.is_periodic(mode) {
        propagate_angle_uncertainty_numeric(f, iset, s)
    } else {
        propagate_uncertainty_numeric(f, iset, s)
    }
}

fn propagate_at<F>(f: F, at: &[f64; 6], sigmas: &[f64; 6], periodic: bool) -> f64
where
    F: Fn(&[f64; 6]) -> f64,
{
    let mut var = 0.0;
    for k in 0..6 {
        if sigmas[k] == 0.0 {
            continue;
        }
        let h = FD_RELATIVE_STEP * at[k].abs().max(1e-3);
        let (mut up, mut down) = (*at, *at);
        up[k] += h;
        down[k] -= h;
        let mut diff = f(&up) - f(&down);
        if periodic {
            diff = wrap_angle(diff);
        }
        var += (diff / (2.0 * h) * sigmas[k]).powi(2);
    }
    var.sqrt()
}

/// RMS uncertainty and RMS theory–measurement deviation over N samples.
pub fn merit_figures(theory: &[f64], measured: &[f64], sigmas: &[f64]) -> Result<MeritFigures> {
    merit_figures_with(theory, measured, sigmas, false)
}

/// As [`merit_figures`], optionally wrapping deviations onto the circle.
pub fn merit_figures_with(
    theory: &[f64],
    measured: &[f64],
    sigmas: &[f64],
    periodic: bool,
) -> Result<MeritFigures> {
    let n = theory.len();
    if measured.len() != n || sigmas.len() != n {
        return Err(Error::LengthMismatch(format!(
            "theory {n}, measured {}, sigmas {}",
            measured.len(),
            sigmas.len()
        )));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let nf = n as f64;
    let sigma_bar = (sigmas.iter().map(|s| s * s).sum::<f64>() / nf).sqrt();
    let delta_bar = (theory
        .iter()
        .zip(measured)
        .map(|(t, m)| {
            let d = t - m;
            if periodic {
                wrap_angle(d).powi(2)
            } else {
                d * d
            }
        })
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(MeritFigures {
        sigma_bar,
        delta_bar,
        n,
    })
}

/// Averages per-repetition intensities. Each repetition holds the counts of
/// the three circuits in [`crate::PointerBasis::ALL`] order; outcomes `00`
/// and `01` give the intensity pair of that circuit.
pub fn intensities_from_counts(
    repetitions: &[[ShotCounts; 3]],
    convention: SigmaConvention,
) -> Result<IntensitySet> {
    if repetitions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = repetitions.len() as f64;
    let mut samples = vec![[0.0; 6]; repetitions.len()];
    for (rep, out) in repetitions.iter().zip(samples.iter_mut()) {
        for (b, counts) in rep.iter().enumerate() {
            out[2 * b] = counts.frequency(0);
            out[2 * b + 1] = counts.frequency(1);
        }
    }
    let mut mean = [0.0; 6];
    let mut sigma = [0.0; 6];
    for k in 0..6 {
        mean[k] = samples.iter().map(|s| s[k]).sum::<f64>() / n;
        if repetitions.len() > 1 {
            let var = samples
                .iter()
                .map(|s| (s[k] - mean[k]).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            sigma[k] = match convention {
                SigmaConvention::Sem => (var / n).sqrt(),
                SigmaConvention::SampleSd => var.sqrt(),
            };
        }
    }
    IntensitySet::new(mean, sigma)
}
