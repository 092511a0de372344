//! Static sweep-scene construction: power matrices, schedule, basic pilots,
//! and per-UT interference profiles for one (group count, UT count) cell.

use super::{scene_rng, ExperimentConfig, MuMode};
use crate::channel::{generate_power_matrix, ArgumentModel, ChannelParams, SupportSpec};
use crate::estimation::{aggregate_interference_power, InterferenceProfile};
use crate::pilot::{zc_sequence, BasicPilot};
use crate::scheduler::{schedule, ScheduleOutcome};
use crate::transforms::ComplexMatrix;
use crate::uplink::{UplinkScene, UtEntry};
use crate::Error;
use rand::Rng;

const POWERS_STREAM: u64 = 1 << 56;
const SCHED_STREAM: u64 = 2 << 56;

/// A fully scheduled scene ready for Monte Carlo trials; channels are
/// placeholders until a trial realizes them.
#[derive(Debug, Clone)]
pub struct SweepScene {
    pub q: usize,
    pub k: usize,
    pub scene: UplinkScene,
    pub profiles: Vec<InterferenceProfile>,
    pub schedule: ScheduleOutcome,
    pub preprocess: bool,
}

/// Built-in basic-pilot shifts per group. With an even root these place each
/// group pair's cross-correlation spike away from the capture window and its
/// deterministic argument away from 0 and pi, which is what the cancellation
/// step needs.
pub fn default_group_shifts(q: usize, nc: usize) -> Vec<usize> {
    match q {
        1 => vec![0],
        2 => vec![0, nc / 4],
        3 => vec![0, nc / 8, 3 * nc / 8],
        _ => (0..q).map(|i| i * nc / (2 * q)).collect(),
    }
}

/// Build the static part of one sweep cell with the cancellation flag off
/// (sweeps flip it per method variant). Power matrices and the schedule
/// depend only on the UT count (not the group count), so different methods
/// compare against identical channel statistics.
pub fn build_scene(cfg: &ExperimentConfig, q: usize, k: usize) -> Result<SweepScene, Error> {
    let dims = cfg.dims();
    let mut powers_rng = scene_rng(cfg.seed, POWERS_STREAM | k as u64);
    let powers: Vec<_> = (0..k)
        .map(|_| {
            let beams = if cfg.beams_max > cfg.beams_min {
                powers_rng.gen_range(cfg.beams_min..=cfg.beams_max)
            } else {
                cfg.beams_min
            };
            let params = ChannelParams::new(
                dims,
                cfg.nu_tsym,
                cfg.sigma_bar_sq,
                SupportSpec {
                    taps: cfg.taps,
                    beams,
                },
            )
            .with_tap_decay_db(cfg.tap_decay_db);
            generate_power_matrix(&params, &mut powers_rng)
        })
        .collect::<Result<_, _>>()?;

    let mut sched_rng = scene_rng(cfg.seed, SCHED_STREAM | k as u64);
    let outcome = schedule(&powers, dims, q, None, cfg.upsilon, &mut sched_rng)?;

    let shifts = if cfg.zc_shifts.len() == q {
        cfg.zc_shifts.clone()
    } else {
        default_group_shifts(q, dims.nc)
    };
    let basic: Vec<BasicPilot> = shifts
        .iter()
        .map(|&s| zc_sequence(dims.nc, cfg.zc_root, s))
        .collect::<Result<_, _>>()?;

    let uts: Vec<UtEntry> = powers
        .into_iter()
        .zip(outcome.assignments.iter())
        .map(|(power, asg)| UtEntry {
            channel: ComplexMatrix::zeros(dims.m, dims.ng),
            args: ArgumentModel::zero(dims.m, dims.ng, cfg.sigma_bar_sq),
            power,
            assignment: *asg,
        })
        .collect();

    let scene = UplinkScene {
        dims,
        basic,
        uts,
        noise_power: 0.0,
    };
    let profiles: Vec<InterferenceProfile> = (0..k)
        .map(|t| aggregate_interference_power(&scene, t))
        .collect::<Result<_, _>>()?;

    Ok(SweepScene {
        q,
        k,
        scene,
        profiles,
        schedule: outcome,
        preprocess: false,
    })
}

/// Redraw every UT channel for one trial, honoring the argument mode.
pub(crate) fn realize_trial(
    sweep: &mut SweepScene,
    mu_mode: MuMode,
    sigma_bar_sq: f64,
    rng: &mut impl Rng,
) -> Result<(), Error> {
    use crate::channel::{realize_channel, MagnitudeLaw};
    let dims = sweep.scene.dims;
    for ut in &mut sweep.scene.uts {
        if let MuMode::Uniform = mu_mode {
            ut.args = ArgumentModel::uniform(dims.m, dims.ng, sigma_bar_sq, rng);
        }
        ut.channel = realize_channel(&ut.power, &ut.args, MagnitudeLaw::Deterministic, rng)?;
    }
    Ok(())
}
