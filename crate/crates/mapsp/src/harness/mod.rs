//! Experiment orchestration: configuration, seeded Monte Carlo sweeps,
//! the simplified spectral-efficiency metric, and CSV emission.

mod scene;
mod se;
mod selftest;
mod sweep;

pub use scene::{build_scene, default_group_shifts, SweepScene};
pub use se::se_proxy;
pub use selftest::selftest;
pub use sweep::{run_mse_sweep, run_prediction_sweep, PredictionRecord, SweepRecord};

use crate::pilot::{interference_profile, zc_sequence, zc_sequence_extended};
use crate::scheduler::ScheduleOutcome;
use crate::transforms::SystemDims;
use crate::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Whether sweeps run the inter-group cancellation before estimating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessMode {
    On,
    Off,
    Both,
}

/// How mean channel arguments are drawn.
///
/// `Zero` matches the aligned regime the inter-group cancellation is derived
/// in. `Uniform` redraws an independent uniform mean per element per trial:
/// the zero-mean ensemble under which the closed-form error expressions are
/// exact and UTs stay spatially separable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuMode {
    Zero,
    Uniform,
}

/// Sweep configuration; all keys are flat and optional on disk, falling back
/// to the desk-scale defaults below.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// BS antennas.
    pub m: usize,
    /// Subcarriers.
    pub nc: usize,
    /// Cyclic-prefix length (delay capture window).
    pub ng: usize,
    /// Group counts to sweep (1 = single-group baseline).
    pub q_grid: Vec<usize>,
    /// UT counts to sweep.
    pub k_grid: Vec<usize>,
    /// Training SNR grid in dB (pilot power fixed at one, noise swept).
    pub snr_grid_db: Vec<f64>,
    /// Monte Carlo trials per grid point.
    pub trials: usize,
    /// Normalized Doppler (Doppler frequency times symbol duration).
    pub nu_tsym: f64,
    /// Channel argument variance, radians^2.
    pub sigma_bar_sq: f64,
    /// Intra-group scheduling threshold.
    pub upsilon: f64,
    /// Active delay taps per UT.
    pub taps: usize,
    /// Power drop across each UT's tap cluster, in dB.
    pub tap_decay_db: f64,
    /// Angular span bounds in beams, drawn uniformly per UT.
    pub beams_min: usize,
    pub beams_max: usize,
    /// Shared ZC root for the basic pilots.
    pub zc_root: u64,
    /// Basic-pilot cyclic shift per group; empty selects built-in defaults.
    pub zc_shifts: Vec<usize>,
    pub preprocess: PreprocessMode,
    pub mu_mode: MuMode,
    /// Symbol lags for the prediction sweep.
    pub prediction_lags: Vec<i64>,
    /// Subcarriers sampled by the spectral-efficiency proxy.
    pub se_subcarriers: usize,
    /// Fraction of the frame carrying data (one pilot symbol out of seven).
    pub data_fraction: f64,
    /// Base RNG seed; `MAPSP_SEED` overrides it when set.
    pub seed: u64,
    /// Output CSV path.
    pub out: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 16,
            nc: 128,
            ng: 16,
            q_grid: vec![1, 2],
            k_grid: vec![4, 8, 12],
            snr_grid_db: vec![0.0, 15.0, 30.0],
            trials: 200,
            nu_tsym: 0.0314,
            sigma_bar_sq: 0.01,
            upsilon: 1e-7,
            taps: 16,
            tap_decay_db: 6.0,
            beams_min: 12,
            beams_max: 16,
            zc_root: 2,
            zc_shifts: Vec::new(),
            preprocess: PreprocessMode::On,
            mu_mode: MuMode::Zero,
            prediction_lags: vec![0, 1, 2, 3],
            se_subcarriers: 8,
            data_fraction: 6.0 / 7.0,
            seed: 1,
            out: "results.csv".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn dims(&self) -> SystemDims {
        SystemDims::new(self.m, self.nc, self.ng)
    }

    /// Parse a TOML document of flat keys.
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load from a file, then apply the `MAPSP_SEED` environment override.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Ok(seed) = std::env::var("MAPSP_SEED") {
            cfg.seed = seed
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("MAPSP_SEED not a u64: {seed}")))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.m < 1 || self.ng < 1 || self.ng > self.nc {
            return Err(Error::InvalidConfig("need m >= 1 and 1 <= ng <= nc".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig("snr grid must be non-empty".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.q_grid.iter().any(|&q| q < 1) {
            return Err(Error::InvalidConfig("group counts must be >= 1".into()));
        }
        if self.taps < 1 || self.taps > self.ng {
            return Err(Error::InvalidConfig("need 1 <= taps <= ng".into()));
        }
        if self.beams_min < 1 || self.beams_min > self.beams_max || self.beams_max > self.m {
            return Err(Error::InvalidConfig(
                "need 1 <= beams_min <= beams_max <= m".into(),
            ));
        }
        if !self.zc_shifts.is_empty() && self.zc_shifts.iter().any(|&s| s >= self.nc) {
            return Err(Error::InvalidConfig("zc shift out of range".into()));
        }
        Ok(())
    }
}

/// Write sweep records as CSV with a fixed column order. Deterministic for a
/// fixed (config, seed) pair except for the wall-clock column.
pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<(), Error> {
    let mut out = Vec::new();
    writeln!(
        out,
        "method,q,k,snr_db,mse_emp,mse_theory,mse_bound,se_proxy,seed,wall_ms"
    )?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.q,
            r.k,
            r.snr_db,
            r.mse_emp,
            r.mse_theory,
            r.mse_bound,
            r.se_proxy,
            r.seed,
            r.wall_ms
        )?;
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Write prediction records as CSV (same conventions, lag column added).
pub fn emit_prediction_csv(records: &[PredictionRecord], path: &Path) -> Result<(), Error> {
    let mut out = Vec::new();
    writeln!(out, "method,q,k,snr_db,lag,mse_emp,mse_theory,seed,wall_ms")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.method, r.q, r.k, r.snr_db, r.lag, r.mse_emp, r.mse_theory, r.seed, r.wall_ms
        )?;
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Emit the interference profile of one pilot pair as `index,magnitude`
/// CSV rows for external plotting.
pub fn emit_profile_csv(
    nc: usize,
    root_a: u64,
    shift_a: usize,
    root_b: u64,
    shift_b: usize,
    extended: bool,
    path: &Path,
) -> Result<(), Error> {
    let (a, b) = if extended {
        (
            zc_sequence_extended(nc, root_a, shift_a)?,
            zc_sequence_extended(nc, root_b, shift_b)?,
        )
    } else {
        (
            zc_sequence(nc, root_a, shift_a)?,
            zc_sequence(nc, root_b, shift_b)?,
        )
    };
    let profile = interference_profile(&a, &b)?;
    let mut out = Vec::new();
    writeln!(out, "index,magnitude")?;
    for (i, mag) in profile {
        writeln!(out, "{},{}", i, mag)?;
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Run the scheduler for the first (q, k) of a config and emit
/// `ut_id,group,shift,gamma` CSV rows.
pub fn emit_schedule_csv(cfg: &ExperimentConfig, path: &Path) -> Result<(), Error> {
    let q = *cfg.q_grid.first().unwrap_or(&1);
    let k = *cfg.k_grid.first().unwrap_or(&4);
    let outcome = schedule_for(cfg, q, k)?;
    let mut out = Vec::new();
    writeln!(out, "ut_id,group,shift,gamma")?;
    for (ut, (a, g)) in outcome
        .assignments
        .iter()
        .zip(outcome.gammas.iter())
        .enumerate()
    {
        writeln!(out, "{},{},{},{}", ut, a.group, a.shift, g)?;
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn schedule_for(cfg: &ExperimentConfig, q: usize, k: usize) -> Result<ScheduleOutcome, Error> {
    Ok(build_scene(cfg, q, k)?.schedule)
}

/// Derive an independent RNG from the base seed and a stable stream id.
/// This is the documented splitting rule: results never depend on worker
/// count because every consumer owns its own stream.
pub(crate) fn scene_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
