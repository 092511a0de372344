//! Harness-level integration: config parsing, sweep determinism, CSV
//! emission, and the spectral-efficiency trend wiring.

use mapsp::harness::{
    default_group_shifts, emit_csv, run_mse_sweep, run_prediction_sweep, selftest,
    ExperimentConfig, MuMode, PreprocessMode, SweepRecord,
};
use std::fs;

fn tiny_config() -> ExperimentConfig {
    ExperimentConfig {
        m: 4,
        nc: 32,
        ng: 4,
        q_grid: vec![1, 2],
        k_grid: vec![2, 4],
        snr_grid_db: vec![10.0, 30.0],
        trials: 12,
        taps: 4,
        beams_min: 3,
        beams_max: 4,
        preprocess: PreprocessMode::Both,
        mu_mode: MuMode::Zero,
        prediction_lags: vec![0, 2],
        se_subcarriers: 4,
        seed: 7,
        ..ExperimentConfig::default()
    }
}

#[test]
fn config_round_trip_and_defaults() {
    let text = r#"
m = 8
nc = 64
ng = 8
taps = 8
beams_min = 6
beams_max = 8
k_grid = [4]
snr_grid_db = [15.0]
trials = 3
seed = 42
"#;
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    assert_eq!(cfg.m, 8);
    assert_eq!(cfg.k_grid, vec![4]);
    assert_eq!(cfg.seed, 42);
    // Unspecified keys fall back to the desk defaults.
    assert_eq!(cfg.q_grid, vec![1, 2]);
    assert_eq!(cfg.zc_root, 2);
    // Unknown keys are rejected.
    assert!(ExperimentConfig::from_toml("nonsense = 1").is_err());
    // Invalid combinations are rejected.
    assert!(ExperimentConfig::from_toml("ng = 0").is_err());
    assert!(ExperimentConfig::from_toml("trials = 0").is_err());
}

#[test]
fn default_shifts_reach_every_group() {
    assert_eq!(default_group_shifts(1, 128), vec![0]);
    assert_eq!(default_group_shifts(2, 128), vec![0, 32]);
    assert_eq!(default_group_shifts(3, 128), vec![0, 16, 48]);
    let many = default_group_shifts(5, 128);
    assert_eq!(many.len(), 5);
    let mut sorted = many.clone();
    sorted.dedup();
    assert_eq!(sorted.len(), 5, "shifts must be distinct: {many:?}");
}

#[test]
fn sweep_is_deterministic_for_fixed_seed() {
    let cfg = tiny_config();
    let a = run_mse_sweep(&cfg).unwrap();
    let b = run_mse_sweep(&cfg).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.method, y.method);
        assert_eq!((x.q, x.k), (y.q, y.k));
        assert_eq!(x.snr_db, y.snr_db);
        assert_eq!(x.mse_emp.to_bits(), y.mse_emp.to_bits(), "{}", x.method);
        assert_eq!(x.mse_theory.to_bits(), y.mse_theory.to_bits());
        assert_eq!(x.mse_bound.to_bits(), y.mse_bound.to_bits());
        assert_eq!(x.se_proxy.to_bits(), y.se_proxy.to_bits());
    }
}

#[test]
fn sweep_invariants_hold() {
    let cfg = tiny_config();
    let records = run_mse_sweep(&cfg).unwrap();
    // Methods x K x SNR grid fully populated: q=1 has one variant, q=2 two.
    assert_eq!(records.len(), (1 + 2) * 2 * 2);
    for r in &records {
        assert!(r.mse_emp >= 0.0);
        assert!(r.mse_bound <= r.mse_theory + 1e-12, "{}", r.method);
        assert!(r.se_proxy >= 0.0);
    }
}

#[test]
fn prediction_sweep_shapes_and_monotonicity() {
    let mut cfg = tiny_config();
    cfg.q_grid = vec![1];
    cfg.k_grid = vec![2];
    cfg.trials = 60;
    let records = run_prediction_sweep(&cfg).unwrap();
    assert_eq!(
        records.len(),
        cfg.snr_grid_db.len() * cfg.prediction_lags.len()
    );
    // Larger lag on the first correlation lobe means larger closed-form
    // error.
    for w in records.chunks(cfg.prediction_lags.len()) {
        for pair in w.windows(2) {
            assert!(pair[0].lag < pair[1].lag);
            assert!(pair[0].mse_theory <= pair[1].mse_theory + 1e-12);
        }
    }
}

#[test]
fn csv_emission_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    // Header-only for an empty record set.
    emit_csv(&[], &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "method,q,k,snr_db,mse_emp,mse_theory,mse_bound,se_proxy,seed,wall_ms\n"
    );
    // Round-trip of the numeric fields.
    let rec = SweepRecord {
        method: "apsp".into(),
        q: 1,
        k: 4,
        snr_db: 15.0,
        mse_emp: 0.012345678901,
        mse_theory: 0.0123,
        mse_bound: 0.011,
        se_proxy: 33.25,
        seed: 9,
        wall_ms: 12,
    };
    emit_csv(std::slice::from_ref(&rec), &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let line = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split(',').collect();
    assert_eq!(fields[0], "apsp");
    assert_eq!(fields[1].parse::<usize>().unwrap(), 1);
    assert_eq!(fields[3].parse::<f64>().unwrap(), 15.0);
    assert_eq!(fields[4].parse::<f64>().unwrap(), rec.mse_emp);
    assert_eq!(fields[7].parse::<f64>().unwrap(), rec.se_proxy);
    assert_eq!(fields[8].parse::<u64>().unwrap(), 9);
    // Re-running the same sweep yields byte-identical CSV apart from the
    // wall-clock column.
    let cfg = tiny_config();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    emit_csv(&run_mse_sweep(&cfg).unwrap(), &p1).unwrap();
    emit_csv(&run_mse_sweep(&cfg).unwrap(), &p2).unwrap();
    let strip = |p: &std::path::Path| -> String {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| {
                l.rsplit_once(',')
                    .map(|(head, _)| head.to_string())
                    .unwrap_or_default()
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&p1), strip(&p2));
}

#[test]
fn noise_free_zero_overlap_scene_is_exact() {
    // One trial, effectively infinite SNR, UT count within capacity: the
    // chain reproduces every channel to numerical precision.
    let cfg = ExperimentConfig {
        m: 4,
        nc: 32,
        ng: 4,
        q_grid: vec![1],
        k_grid: vec![4],
        snr_grid_db: vec![300.0],
        trials: 1,
        taps: 4,
        beams_min: 3,
        beams_max: 4,
        preprocess: PreprocessMode::Off,
        se_subcarriers: 1,
        seed: 3,
        ..ExperimentConfig::default()
    };
    let records = run_mse_sweep(&cfg).unwrap();
    assert!(
        records[0].mse_emp < 1e-9,
        "noise-free MSE {}",
        records[0].mse_emp
    );
}

#[test]
fn selftest_passes() {
    for (name, ok) in selftest() {
        assert!(ok, "selftest check failed: {name}");
    }
}
