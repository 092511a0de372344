//! Seeded Monte Carlo sweeps over (method, UT count, SNR) grids. Trials run
//! on a worker pool; every trial owns an RNG stream derived from the base
//! seed and the grid indices, so results are independent of worker count and
//! identical channel noise hits every method at the same grid point.

use super::scene::{build_scene, realize_trial, SweepScene};
use super::se::{sample_subcarriers, se_proxy};
use super::{scene_rng, ExperimentConfig, MuMode, PreprocessMode};
use crate::channel::{evolve_channel, MagnitudeLaw};
use crate::estimation::{
    aggregate_interference_power, estimate_preprocessed, mmse_error_lower_bound,
    mmse_error_theoretical, mmse_estimate, predict_channel, prediction_error_theoretical,
    preprocessed_error_theoretical, InterferenceScope,
};
use crate::transforms::ad_to_sf;
use crate::uplink::{ls_decorrelate, synthesize_received};
use crate::Error;
use rayon::prelude::*;
use std::time::Instant;

const TRIAL_STREAM: u64 = 3 << 56;

/// One (method, K, SNR) grid point of the estimation sweep. Error columns
/// are normalized per UT by the total channel power, so the bound, the
/// closed form, and the sample error are directly comparable across K.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub method: String,
    pub q: usize,
    pub k: usize,
    pub snr_db: f64,
    pub mse_emp: f64,
    pub mse_theory: f64,
    pub mse_bound: f64,
    pub se_proxy: f64,
    pub seed: u64,
    pub wall_ms: u128,
}

/// One (method, K, SNR, lag) grid point of the prediction sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub method: String,
    pub q: usize,
    pub k: usize,
    pub snr_db: f64,
    pub lag: i64,
    pub mse_emp: f64,
    pub mse_theory: f64,
    pub seed: u64,
    pub wall_ms: u128,
}

fn method_label(q: usize, preprocess: bool) -> String {
    if q == 1 {
        "apsp".to_string()
    } else if preprocess {
        format!("{q}-apsp")
    } else {
        format!("{q}-apsp-nopre")
    }
}

fn method_variants(cfg: &ExperimentConfig, q: usize) -> Vec<bool> {
    if q == 1 {
        return vec![false];
    }
    match cfg.preprocess {
        PreprocessMode::On => vec![true],
        PreprocessMode::Off => vec![false],
        PreprocessMode::Both => vec![false, true],
    }
}

fn trial_stream(ki: usize, si: usize, lag_idx: usize, trial: usize) -> u64 {
    TRIAL_STREAM
        | ((ki as u64) << 48)
        | ((si as u64) << 40)
        | ((lag_idx as u64) << 32)
        | trial as u64
}

/// Run the estimation-error sweep over every configured method, UT count,
/// and SNR. Per trial: realize channels, synthesize the uplink symbol,
/// decorrelate and estimate every UT, and score both the squared error and
/// the spectral-efficiency proxy.
pub fn run_mse_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>, Error> {
    cfg.validate()?;
    let dims = cfg.dims();
    let norm = (dims.m * dims.nc) as f64;
    let subcarriers = sample_subcarriers(dims.nc, cfg.se_subcarriers);
    let mut records = Vec::new();
    for &q in &cfg.q_grid {
        for preprocess in method_variants(cfg, q) {
            for (ki, &k) in cfg.k_grid.iter().enumerate() {
                let mut template = build_scene(cfg, q, k)?;
                template.preprocess = preprocess;
                let bound = {
                    let powers: Vec<_> = template.scene.uts.iter().map(|u| &u.power).collect();
                    move |eta: f64| mmse_error_lower_bound(&powers, eta) / (k as f64 * norm)
                };
                for (si, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
                    let start = Instant::now();
                    let eta = 10f64.powf(snr_db / 10.0);
                    let per_trial: Vec<(f64, f64, f64)> = (0..cfg.trials)
                        .into_par_iter()
                        .map(|t| {
                            run_estimation_trial(
                                cfg,
                                &template,
                                eta,
                                &subcarriers,
                                scene_rng(cfg.seed, trial_stream(ki, si, 0, t)),
                            )
                        })
                        .collect::<Result<_, Error>>()?;
                    let trials = cfg.trials as f64;
                    let mse_emp = per_trial.iter().map(|r| r.0).sum::<f64>() / trials;
                    let se = per_trial.iter().map(|r| r.1).sum::<f64>() / trials;
                    // The closed form depends on the mean-argument fields
                    // only through the cancellation decisions, so it is
                    // averaged over the same trials.
                    let theory = per_trial.iter().map(|r| r.2).sum::<f64>() / trials;
                    records.push(SweepRecord {
                        method: method_label(q, preprocess),
                        q,
                        k,
                        snr_db,
                        mse_emp,
                        mse_theory: theory,
                        mse_bound: bound(eta),
                        se_proxy: se,
                        seed: cfg.seed,
                        wall_ms: start.elapsed().as_millis(),
                    });
                }
            }
        }
    }
    Ok(records)
}

fn run_estimation_trial(
    cfg: &ExperimentConfig,
    template: &SweepScene,
    eta: f64,
    subcarriers: &[usize],
    mut rng: rand_chacha::ChaCha8Rng,
) -> Result<(f64, f64, f64), Error> {
    let dims = template.scene.dims;
    let mut sweep = template.clone();
    sweep.scene.noise_power = 1.0 / eta;
    realize_trial(&mut sweep, cfg.mu_mode, cfg.sigma_bar_sq, &mut rng)?;
    // Mean arguments feed the cancellation step; refresh the profiles when
    // they were redrawn this trial.
    if sweep.preprocess && cfg.mu_mode == MuMode::Uniform {
        for t in 0..sweep.scene.uts.len() {
            sweep.profiles[t] = aggregate_interference_power(&sweep.scene, t)?;
        }
    }
    let y = synthesize_received(&sweep.scene, &mut rng)?;
    let k = sweep.scene.uts.len();
    let norm = (dims.m * dims.nc) as f64;
    let mut sq_err = 0.0;
    let mut theory = 0.0;
    let mut true_g = Vec::with_capacity(k);
    let mut est_g = Vec::with_capacity(k);
    for (t, ut) in sweep.scene.uts.iter().enumerate() {
        let d = ls_decorrelate(
            &y,
            &ut.assignment,
            &sweep.scene.basic[ut.assignment.group],
            dims,
        );
        let est = if sweep.preprocess {
            theory += preprocessed_error_theoretical(
                &ut.power,
                &sweep.profiles[t],
                cfg.sigma_bar_sq,
                eta,
            );
            estimate_preprocessed(&d, &ut.power, &sweep.profiles[t], cfg.sigma_bar_sq, eta)
        } else {
            theory += mmse_error_theoretical(
                &ut.power,
                &sweep.profiles[t],
                eta,
                InterferenceScope::AllGroups,
            );
            mmse_estimate(
                &d,
                &ut.power,
                &sweep.profiles[t],
                eta,
                InterferenceScope::AllGroups,
            )
        };
        sq_err += est.diff_energy(&ut.channel);
        true_g.push(ad_to_sf(&ut.channel, dims));
        est_g.push(ad_to_sf(&est, dims));
    }
    let se = se_proxy(&true_g, &est_g, eta, subcarriers, cfg.data_fraction);
    Ok((sq_err / (k as f64 * norm), se, theory / (k as f64 * norm)))
}

/// Run the prediction sweep: estimate at the pilot symbol, score against the
/// channel after it has evolved by each configured lag.
pub fn run_prediction_sweep(cfg: &ExperimentConfig) -> Result<Vec<PredictionRecord>, Error> {
    cfg.validate()?;
    let dims = cfg.dims();
    let norm = (dims.m * dims.nc) as f64;
    let mut records = Vec::new();
    for &q in &cfg.q_grid {
        for (ki, &k) in cfg.k_grid.iter().enumerate() {
            let template = build_scene(cfg, q, k)?;
            for (si, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
                let eta = 10f64.powf(snr_db / 10.0);
                for (li, &lag) in cfg.prediction_lags.iter().enumerate() {
                    let start = Instant::now();
                    let theory: f64 = template
                        .scene
                        .uts
                        .iter()
                        .zip(template.profiles.iter())
                        .map(|(ut, prof)| {
                            prediction_error_theoretical(
                                &ut.power,
                                prof,
                                eta,
                                lag,
                                cfg.nu_tsym,
                                InterferenceScope::SameGroup,
                            )
                        })
                        .sum::<f64>()
                        / (k as f64 * norm);
                    let per_trial: Vec<f64> = (0..cfg.trials)
                        .into_par_iter()
                        .map(|t| {
                            run_prediction_trial(
                                cfg,
                                &template,
                                eta,
                                lag,
                                scene_rng(cfg.seed, trial_stream(ki, si, li + 1, t)),
                            )
                        })
                        .collect::<Result<_, Error>>()?;
                    let mse_emp = per_trial.iter().sum::<f64>() / cfg.trials as f64;
                    records.push(PredictionRecord {
                        method: method_label(q, false),
                        q,
                        k,
                        snr_db,
                        lag,
                        mse_emp,
                        mse_theory: theory,
                        seed: cfg.seed,
                        wall_ms: start.elapsed().as_millis(),
                    });
                }
            }
        }
    }
    Ok(records)
}

fn run_prediction_trial(
    cfg: &ExperimentConfig,
    template: &SweepScene,
    eta: f64,
    lag: i64,
    mut rng: rand_chacha::ChaCha8Rng,
) -> Result<f64, Error> {
    let dims = template.scene.dims;
    let mut sweep = template.clone();
    sweep.scene.noise_power = 1.0 / eta;
    realize_trial(&mut sweep, cfg.mu_mode, cfg.sigma_bar_sq, &mut rng)?;
    let y = synthesize_received(&sweep.scene, &mut rng)?;
    let mut future = Vec::with_capacity(sweep.scene.uts.len());
    for ut in &sweep.scene.uts {
        future.push(evolve_channel(
            &ut.channel,
            &ut.power,
            &ut.args,
            MagnitudeLaw::Deterministic,
            lag,
            cfg.nu_tsym,
            &mut rng,
        )?);
    }
    let k = sweep.scene.uts.len();
    let norm = (dims.m * dims.nc) as f64;
    let mut sq_err = 0.0;
    for (t, ut) in sweep.scene.uts.iter().enumerate() {
        let d = ls_decorrelate(
            &y,
            &ut.assignment,
            &sweep.scene.basic[ut.assignment.group],
            dims,
        );
        let pred = predict_channel(
            &d,
            &ut.power,
            &sweep.profiles[t],
            eta,
            lag,
            cfg.nu_tsym,
            InterferenceScope::SameGroup,
        );
        sq_err += pred.diff_energy(&future[t]);
    }
    Ok(sq_err / (k as f64 * norm))
}
