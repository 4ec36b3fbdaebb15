use std::f64::consts::PI;

use weakval_core::estimator::Parameter;
use weakval_core::noise::paper_noise_model;
use weakval_core::sweep::{
    emit_csv, emit_json, read_json, run_sweep, run_sweep_with_threads, write_csv,
};
use weakval_core::SweepConfig;

fn seeded() -> SweepConfig {
    SweepConfig {
        master_seed: 20240611,
        ..SweepConfig::default()
    }
}

fn csv_bytes(cfg: &SweepConfig, threads: usize) -> Vec<u8> {
    let out = run_sweep_with_threads(cfg, threads).unwrap();
    let mut buf = Vec::new();
    write_csv(&out.rows, &mut buf).unwrap();
    buf
}

#[test]
fn output_independent_of_thread_count() {
    let cfg = SweepConfig {
        repetitions: 4,
        ..seeded()
    };
    let one = csv_bytes(&cfg, 1);
    assert_eq!(one, csv_bytes(&cfg, 4));
    assert_eq!(one, csv_bytes(&cfg, 1));
}

#[test]
fn json_round_trip_through_file() {
    let cfg = SweepConfig {
        repetitions: 3,
        epsilon_grid: vec![PI / 8.0, 3.0 * PI / 8.0, 5.0 * PI / 8.0],
        noise: Some(paper_noise_model()),
        ..seeded()
    };
    let out = run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    emit_json(&out, &path).unwrap();
    assert_eq!(read_json(&path).unwrap(), out);
    let csv_path = dir.path().join("sweep.csv");
    emit_csv(&out.rows, &csv_path).unwrap();
    let text = std::fs::read_to_string(csv_path).unwrap();
    assert_eq!(text.lines().count(), out.rows.len() + 1);
}

#[test]
fn pulls_are_calibrated() {
    let out = run_sweep(&seeded()).unwrap();
    let pulls: Vec<f64> = out
        .rows
        .iter()
        .filter(|r| (2.0 * r.epsilon).sin().abs() > 0.3)
        .map(|r| (r.r_m.unwrap() - r.r_t) / r.sigma_r.unwrap())
        .collect();
    let inside = pulls.iter().filter(|p| p.abs() <= 3.0).count();
    assert!(
        inside as f64 >= 0.95 * pulls.len() as f64,
        "{inside}/{}",
        pulls.len()
    );
}

#[test]
fn sigma_bar_has_interior_minimum() {
    let out = run_sweep(&seeded()).unwrap();
    let s = |e: f64| {
        out.merits_for(Parameter::R)
            .into_iter()
            .find(|m| (m.epsilon - e).abs() < 1e-12)
            .unwrap()
            .sigma_bar
    };
    assert!(s(PI / 4.0) < s(PI / 24.0));
    assert!(s(PI / 4.0) < s(11.0 * PI / 24.0));
}

#[test]
fn noise_raises_median_deviation() {
    let clean = run_sweep(&seeded()).unwrap();
    let noisy = run_sweep(&SweepConfig {
        noise: Some(paper_noise_model()),
        ..seeded()
    })
    .unwrap();
    let median = |o: &weakval_core::SweepOutput| {
        let mut v: Vec<f64> = o
            .merits_for(Parameter::R)
            .iter()
            .map(|m| m.delta_bar)
            .collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    };
    assert!(
        median(&noisy) > median(&clean),
        "{} vs {}",
        median(&noisy),
        median(&clean)
    );
}
