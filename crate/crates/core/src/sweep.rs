//! Parameter sweeps over measurement strength and measured axis.
//!
//! Every (ε, φ, basis, repetition) task draws from its own ChaCha8 stream
//! seeded by [`derive_task_seed`], and rows are reduced in grid order, so
//! output depends only on the config and never on thread count.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    build_measurement_circuit, ExperimentSetting, PointerBasis, ORTHOGONAL_OVERLAP,
};
use crate::error::{Error, Result};
use crate::estimator::{
    intensities_from_counts, invert_weak_value, merit_figures_with, parameter_uncertainty,
    propagate_uncertainty_closed, reconstruct_preselection, theoretical_weak_value, IntensitySet,
    Parameter, PhaseMode, SigmaConvention, SINGULAR_SIN_2EPS,
};
use crate::noise::{noisy_run, readout_probabilities, DensityMatrix, NoiseModel};
use crate::qsim::{outcome_probabilities, sample_shots_with, ShotCounts, StateVector};

pub const EPSILON_INDEX_BITS: u32 = 16;
pub const PHI_INDEX_BITS: u32 = 16;
pub const BASIS_INDEX_BITS: u32 = 2;
pub const REPETITION_INDEX_BITS: u32 = 24;

/// `kπ/24` for k = 1…23 without k = 12.
pub fn default_epsilon_grid() -> Vec<f64> {
    (1..24)
        .filter(|&k| k != 12)
        .map(|k| k as f64 * PI / 24.0)
        .collect()
}

/// `n` points uniform over [−π, π], endpoints included; `[0]` for n = 1.
pub fn phi_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|j| -PI + 2.0 * PI * j as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub epsilon_grid: Vec<f64>,
    pub phi_samples: usize,
    pub alpha_i: f64,
    /// Shots per circuit and repetition; 0 selects exact probabilities with a
    /// single repetition.
    pub shots: u64,
    pub repetitions: usize,
    pub master_seed: u64,
    /// Density-matrix simulation when present, statevector otherwise.
    pub noise: Option<NoiseModel>,
    pub phase_mode: PhaseMode,
    pub sigma_convention: SigmaConvention,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            epsilon_grid: default_epsilon_grid(),
            phi_samples: 9,
            alpha_i: PI / 4.0,
            shots: 2000,
            repetitions: 20,
            master_seed: 0,
            noise: None,
            phase_mode: PhaseMode::Signed,
            sigma_convention: SigmaConvention::Sem,
        }
    }
}

impl SweepConfig {
    pub fn is_exact(&self) -> bool {
        self.shots == 0
    }

    pub fn effective_repetitions(&self) -> usize {
        if self.is_exact() {
            1
        } else {
            self.repetitions
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.epsilon_grid.is_empty() {
            return bad("epsilon_grid is empty".into());
        }
        if self.epsilon_grid.len() > 1 << EPSILON_INDEX_BITS {
            return bad(format!(
                "epsilon_grid exceeds {} points",
                1u64 << EPSILON_INDEX_BITS
            ));
        }
        for &e in &self.epsilon_grid {
            if !e.is_finite() || (2.0 * e).sin().abs() <= SINGULAR_SIN_2EPS {
                return bad(format!("epsilon {e} is singular (a multiple of π/2)"));
            }
        }
        if self.phi_samples == 0 || self.phi_samples > 1 << PHI_INDEX_BITS {
            return bad(format!(
                "phi_samples = {} is out of range",
                self.phi_samples
            ));
        }
        if !self.alpha_i.is_finite() || (self.alpha_i / 2.0).cos().abs() <= ORTHOGONAL_OVERLAP {
            return bad(format!(
                "alpha_i = {} makes postselection impossible",
                self.alpha_i
            ));
        }
        if !self.is_exact()
            && (self.repetitions == 0 || self.repetitions > 1 << REPETITION_INDEX_BITS)
        {
            return bad(format!(
                "repetitions = {} is out of range",
                self.repetitions
            ));
        }
        if let Some(nm) = &self.noise {
            nm.validate()?;
        }
        Ok(())
    }
}

fn splitmix64(x: u64) -> u64 {
    finalize(x.wrapping_add(0x9E37_79B9_7F4A_7C15))
}

fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one sampling task.
///
/// The indices are packed into 58 bits (ε 16, φ 16, basis 2, repetition 24),
/// XORed with `splitmix64(master_seed)` and passed through the splitmix64
/// finalizer. Both steps are bijections, so distinct tuples under one master
/// seed never collide and changing the master seed changes every task seed.
pub fn derive_task_seed(
    master_seed: u64,
    epsilon_index: usize,
    phi_index: usize,
    basis_index: usize,
    repetition_index: usize,
) -> Result<u64> {
    let fits = |v: usize, bits: u32| (v as u64) < (1u64 << bits);
    if !fits(epsilon_index, EPSILON_INDEX_BITS)
        || !fits(phi_index, PHI_INDEX_BITS)
        || !fits(basis_index, BASIS_INDEX_BITS)
        || !fits(repetition_index, REPETITION_INDEX_BITS)
    {
        return Err(Error::InvalidConfig(format!(
            "task index ({epsilon_index}, {phi_index}, {basis_index}, {repetition_index}) exceeds the seed layout"
        )));
    }
    let packed = epsilon_index as u64
        | (phi_index as u64) << EPSILON_INDEX_BITS
        | (basis_index as u64) << (EPSILON_INDEX_BITS + PHI_INDEX_BITS)
        | (repetition_index as u64) << (EPSILON_INDEX_BITS + PHI_INDEX_BITS + BASIS_INDEX_BITS);
    Ok(finalize(packed ^ splitmix64(master_seed)))
}

/// One (ε, φ) sample. Measured quantities are `None` when the inversion
/// failed; `error` then holds the error code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResultRow {
    pub epsilon: f64,
    pub phi_target: f64,
    pub alpha_i: f64,
    #[serde(rename = "R_t")]
    pub r_t: f64,
    #[serde(rename = "I_t")]
    pub i_t: f64,
    #[serde(rename = "R_m")]
    pub r_m: Option<f64>,
    #[serde(rename = "I_m")]
    pub i_m: Option<f64>,
    pub mag2_m: Option<f64>,
    #[serde(rename = "sigma_R")]
    pub sigma_r: Option<f64>,
    #[serde(rename = "sigma_I")]
    pub sigma_i: Option<f64>,
    pub nu_m: Option<f64>,
    pub sigma_nu: Option<f64>,
    pub alpha_m: Option<f64>,
    pub sigma_alpha: Option<f64>,
    pub phi_m: Option<f64>,
    pub sigma_phi: Option<f64>,
    pub intensities: [f64; 6],
    pub sigma_intensities: [f64; 6],
    /// Seed of the task (ε, φ, basis 0, repetition 0).
    pub seed: u64,
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 30] = [
    "epsilon",
    "phi_target",
    "alpha_i",
    "R_t",
    "I_t",
    "R_m",
    "I_m",
    "mag2_m",
    "sigma_R",
    "sigma_I",
    "nu_m",
    "sigma_nu",
    "alpha_m",
    "sigma_alpha",
    "phi_m",
    "sigma_phi",
    "i0",
    "i1",
    "i2",
    "i3",
    "i4",
    "i5",
    "sigma_i0",
    "sigma_i1",
    "sigma_i2",
    "sigma_i3",
    "sigma_i4",
    "sigma_i5",
    "seed",
    "error",
];

impl SweepResultRow {
    /// Measured value of `p`, if available.
    pub fn measured(&self, p: Parameter) -> Option<f64> {
        match p {
            Parameter::R => self.r_m,
            Parameter::I => self.i_m,
            Parameter::Nu => self.nu_m,
            Parameter::Alpha => self.alpha_m,
            Parameter::Phi => self.phi_m,
        }
    }

    pub fn sigma(&self, p: Parameter) -> Option<f64> {
        match p {
            Parameter::R => self.sigma_r,
            Parameter::I => self.sigma_i,
            Parameter::Nu => self.sigma_nu,
            Parameter::Alpha => self.sigma_alpha,
            Parameter::Phi => self.sigma_phi,
        }
    }

    pub fn setting(&self) -> ExperimentSetting {
        ExperimentSetting::new(self.epsilon, self.phi_target, self.alpha_i)
    }

    fn csv_record(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:?}");
        let o = |x: Option<f64>| x.map(f).unwrap_or_default();
        let mut rec = vec![
            f(self.epsilon),
            f(self.phi_target),
            f(self.alpha_i),
            f(self.r_t),
            f(self.i_t),
            o(self.r_m),
            o(self.i_m),
            o(self.mag2_m),
            o(self.sigma_r),
            o(self.sigma_i),
            o(self.nu_m),
            o(self.sigma_nu),
            o(self.alpha_m),
            o(self.sigma_alpha),
            o(self.phi_m),
            o(self.sigma_phi),
        ];
        rec.extend(self.intensities.iter().map(|&x| f(x)));
        rec.extend(self.sigma_intensities.iter().map(|&x| f(x)));
        rec.push(self.seed.to_string());
        rec.push(self.error.clone().unwrap_or_default());
        rec
    }
}

/// RMS merit figures of one parameter at one ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritRow {
    pub epsilon: f64,
    pub parameter: Parameter,
    pub sigma_bar: f64,
    pub delta_bar: f64,
    /// Number of φ samples that entered the averages.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub rows: Vec<SweepResultRow>,
    pub merits: Vec<MeritRow>,
    pub version: String,
}

impl SweepOutput {
    /// Merit rows of `p` in ε order.
    pub fn merits_for(&self, p: Parameter) -> Vec<&MeritRow> {
        self.merits.iter().filter(|m| m.parameter == p).collect()
    }
}

/// Outcome probabilities of the three measurement circuits, basis order.
fn circuit_probabilities(
    s: &ExperimentSetting,
    noise: Option<&NoiseModel>,
) -> Result<[Vec<f64>; 3]> {
    let mut out: [Vec<f64>; 3] = Default::default();
    for basis in PointerBasis::ALL {
        let c = build_measurement_circuit(s, basis);
        out[basis.index()] = match noise {
            None => outcome_probabilities(&c.run(&StateVector::zero(2)?)?),
            Some(nm) => readout_probabilities(&noisy_run(&c, &DensityMatrix::ground(), nm)?, nm),
        };
    }
    Ok(out)
}

fn point_intensities(
    cfg: &SweepConfig,
    s: &ExperimentSetting,
    ei: usize,
    pj: usize,
) -> Result<IntensitySet> {
    let probs = circuit_probabilities(s, cfg.noise.as_ref())?;
    if cfg.is_exact() {
        let mut v = [0.0; 6];
        for b in PointerBasis::ALL {
            let (k0, k1) = b.intensity_indices();
            v[k0] = probs[b.index()][0];
            v[k1] = probs[b.index()][1];
        }
        return IntensitySet::new(v, [0.0; 6]);
    }
    let mut reps = Vec::with_capacity(cfg.repetitions);
    for r in 0..cfg.repetitions {
        let mut counts: [ShotCounts; 3] = Default::default();
        for b in PointerBasis::ALL {
            let seed = derive_task_seed(cfg.master_seed, ei, pj, b.index(), r)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            counts[b.index()] = sample_shots_with(&probs[b.index()], cfg.shots, &mut rng)?;
        }
        reps.push(counts);
    }
    intensities_from_counts(&reps, cfg.sigma_convention)
}

fn run_point(cfg: &SweepConfig, ei: usize, pj: usize, phi: f64) -> Result<SweepResultRow> {
    let epsilon = cfg.epsilon_grid[ei];
    let s = ExperimentSetting::new(epsilon, phi, cfg.alpha_i);
    let w = theoretical_weak_value(&s)?;
    let iset = point_intensities(cfg, &s, ei, pj)?;
    let mut row = SweepResultRow {
        epsilon,
        phi_target: phi,
        alpha_i: cfg.alpha_i,
        r_t: w.re,
        i_t: w.im,
        r_m: None,
        i_m: None,
        mag2_m: None,
        sigma_r: None,
        sigma_i: None,
        nu_m: None,
        sigma_nu: None,
        alpha_m: None,
        sigma_alpha: None,
        phi_m: None,
        sigma_phi: None,
        intensities: *iset.values(),
        sigma_intensities: *iset.sigmas(),
        seed: derive_task_seed(cfg.master_seed, ei, pj, 0, 0)?,
        error: None,
    };
    let est = match invert_weak_value(&iset, epsilon) {
        Ok(e) => e,
        Err(e) => {
            row.error = Some(e.code().to_string());
            return Ok(row);
        }
    };
    let (sr, si) = propagate_uncertainty_closed(&iset, &s)?;
    row.r_m = Some(est.real);
    row.i_m = Some(est.imag);
    row.mag2_m = Some(est.mag2);
    row.sigma_r = Some(sr);
    row.sigma_i = Some(si);
    let sigma = |p| parameter_uncertainty(p, &iset, &s, cfg.phase_mode);
    match reconstruct_preselection(&iset, epsilon, cfg.phase_mode) {
        Ok(pre) => {
            row.nu_m = Some(pre.nu);
            row.sigma_nu = Some(sigma(Parameter::Nu)?);
            row.alpha_m = Some(pre.alpha);
            row.sigma_alpha = Some(sigma(Parameter::Alpha)?);
            row.phi_m = Some(pre.phi);
            row.sigma_phi = Some(sigma(Parameter::Phi)?);
        }
        Err(e) => row.error = Some(e.code().to_string()),
    }
    Ok(row)
}

/// Per-ε merit figures of every parameter over the rows that carry it.
pub fn merit_rows(cfg: &SweepConfig, rows: &[SweepResultRow]) -> Result<Vec<MeritRow>> {
    let mut out = Vec::new();
    for &epsilon in &cfg.epsilon_grid {
        let at: Vec<&SweepResultRow> = rows.iter().filter(|r| r.epsilon == epsilon).collect();
        for p in Parameter::ALL {
            let (mut t, mut m, mut s) = (Vec::new(), Vec::new(), Vec::new());
            for r in &at {
                if let (Some(mv), Some(sv)) = (r.measured(p), r.sigma(p)) {
                    t.push(p.theory(&r.setting(), cfg.phase_mode)?);
                    m.push(mv);
                    s.push(sv);
                }
            }
            if t.is_empty() {
                continue;
            }
            let mf = merit_figures_with(&t, &m, &s, p.is_periodic(cfg.phase_mode))?;
            out.push(MeritRow {
                epsilon,
                parameter: p,
                sigma_bar: mf.sigma_bar,
                delta_bar: mf.delta_bar,
                n: mf.n,
            });
        }
    }
    Ok(out)
}

/// Runs the sweep on the global rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let phis = phi_grid(cfg.phi_samples);
    let tasks: Vec<(usize, usize, f64)> = (0..cfg.epsilon_grid.len())
        .flat_map(|ei| phis.iter().enumerate().map(move |(pj, &phi)| (ei, pj, phi)))
        .collect();
    let rows = tasks
        .par_iter()
        .map(|&(ei, pj, phi)| run_point(cfg, ei, pj, phi))
        .collect::<Result<Vec<_>>>()?;
    let merits = merit_rows(cfg, &rows)?;
    Ok(SweepOutput {
        config: cfg.clone(),
        rows,
        merits,
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(cfg: &SweepConfig, threads: usize) -> Result<SweepOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(cfg))
}

pub fn write_csv<W: Write>(rows: &[SweepResultRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in rows {
        wr.write_record(r.csv_record())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[SweepResultRow], path: &Path) -> Result<()> {
    write_csv(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn emit_json(output: &SweepOutput, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, output)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<SweepOutput> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// `ln σ̄` and `ln Δ̄` against ε for one parameter. Zero metrics map to `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub parameter: Parameter,
    pub epsilon: Vec<f64>,
    pub ln_sigma_bar: Vec<Option<f64>>,
    pub ln_delta_bar: Vec<Option<f64>>,
}

pub fn plot_series(output: &SweepOutput) -> Vec<PlotSeries> {
    let ln = |x: f64| if x > 0.0 { Some(x.ln()) } else { None };
    Parameter::ALL
        .iter()
        .map(|&p| {
            let m = output.merits_for(p);
            PlotSeries {
                parameter: p,
                epsilon: m.iter().map(|r| r.epsilon).collect(),
                ln_sigma_bar: m.iter().map(|r| ln(r.sigma_bar)).collect(),
                ln_delta_bar: m.iter().map(|r| ln(r.delta_bar)).collect(),
            }
        })
        .collect()
}

/// Writes `merit_<parameter>.csv` with columns `epsilon, ln_sigma_bar,
/// ln_delta_bar` into `dir`; returns the written paths.
pub fn write_plot_data(output: &SweepOutput, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for s in plot_series(output) {
        let path = dir.join(format!("merit_{}.csv", s.parameter.name()));
        let mut wr = csv::Writer::from_path(&path)?;
        wr.write_record(["epsilon", "ln_sigma_bar", "ln_delta_bar"])?;
        for k in 0..s.epsilon.len() {
            let o = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
            wr.write_record([
                format!("{:?}", s.epsilon[k]),
                o(s.ln_sigma_bar[k]),
                o(s.ln_delta_bar[k]),
            ])?;
        }
        wr.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
