//! Dual-layer pilot scheduling: every UT is trial-scheduled in each group,
//! scanning phase shifts with an early-exit threshold on the channel-overlap
//! metric, and lands in the group where its overlap is smallest. A zero
//! threshold degenerates to the exhaustive greedy search.

use crate::channel::PowerMatrix;
use crate::pilot::PilotAssignment;
use crate::transforms::{RealMatrix, SystemDims};
use crate::Error;
use rand::seq::SliceRandom;
use rand::Rng;

/// Overlap between a candidate placement and a group's accumulated power:
/// the sum of the Hadamard product of the zero-padded, shifted candidate
/// with the superposition matrix. Zero exactly when the supports are
/// disjoint.
pub fn overlap_metric(p_k: &PowerMatrix, phi: usize, p_sigma: &RealMatrix) -> f64 {
    let nc = p_sigma.cols();
    assert_eq!(p_k.rows(), p_sigma.rows(), "row mismatch");
    assert!(p_k.cols() <= nc, "candidate wider than superposition");
    let mut acc = 0.0;
    for i in 0..p_k.rows() {
        let row = p_k.values().row(i);
        let sig = p_sigma.row(i);
        for (n, &v) in row.iter().enumerate() {
            if v != 0.0 {
                acc += v * sig[(n + phi) % nc];
            }
        }
    }
    acc
}

/// Early-exit threshold for one candidate placement:
/// `upsilon * sqrt(sum(P_k) * sum(P_sigma))`. The candidate sum is invariant
/// under the shift, so callers may hoist both sums out of the phase scan.
pub fn threshold_value(p_k: &PowerMatrix, _phi: usize, p_sigma: &RealMatrix, upsilon: f64) -> f64 {
    upsilon * (p_k.sum() * p_sigma.sum()).sqrt()
}

/// Result of a scheduling run.
#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    /// One assignment per UT, indexed like the input power matrices.
    pub assignments: Vec<PilotAssignment>,
    /// Phase-scan iterations consumed per UT (summed over its group scans).
    pub iterations: Vec<usize>,
    /// Overlap of each UT against its group at assignment time; the sum is
    /// the total pairwise overlap of the final schedule.
    pub gammas: Vec<f64>,
    /// Per-group accumulated zero-padded power after all assignments.
    pub superpositions: Vec<RealMatrix>,
}

impl ScheduleOutcome {
    pub fn total_overlap(&self) -> f64 {
        self.gammas.iter().sum()
    }

    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }
}

/// Scan one group for the best shift of a candidate UT with the early-exit
/// threshold active. Returns the chosen shift, its overlap, and the
/// iterations consumed.
pub fn scan_shifts(
    p_k: &PowerMatrix,
    p_sigma: &RealMatrix,
    upsilon: f64,
    nc: usize,
) -> (usize, f64, usize) {
    scan_group(p_k, p_sigma, upsilon, nc, true)
}

fn scan_group(
    p_k: &PowerMatrix,
    p_sigma: &RealMatrix,
    upsilon: f64,
    nc: usize,
    early_exit: bool,
) -> (usize, f64, usize) {
    let gamma_threshold = threshold_value(p_k, 0, p_sigma, upsilon);
    let mut best_phi = 0usize;
    let mut best_gamma = f64::INFINITY;
    let mut iters = 0usize;
    for phi in 0..nc {
        iters += 1;
        let gamma = overlap_metric(p_k, phi, p_sigma);
        if early_exit && gamma <= gamma_threshold {
            return (phi, gamma, iters);
        }
        if gamma < best_gamma {
            best_gamma = gamma;
            best_phi = phi;
        }
    }
    (best_phi, best_gamma, iters)
}

fn run_schedule(
    uts: &[PowerMatrix],
    dims: SystemDims,
    groups: usize,
    caps: Option<&[usize]>,
    upsilon: f64,
    early_exit: bool,
    rng: &mut impl Rng,
) -> Result<ScheduleOutcome, Error> {
    assert!(groups >= 1, "at least one group");
    let k = uts.len();
    let default_caps;
    let caps: &[usize] = match caps {
        Some(c) => {
            assert_eq!(c.len(), groups, "one cap per group");
            c
        }
        None => {
            default_caps = vec![k.div_ceil(groups); groups];
            &default_caps
        }
    };
    let capacity: usize = caps.iter().sum();
    if capacity < k {
        return Err(Error::InfeasibleCaps { uts: k, capacity });
    }
    for p in uts {
        assert_eq!((p.rows(), p.cols()), (dims.m, dims.ng), "power shape");
    }

    let mut assignments = vec![PilotAssignment::new(0, 0, 1.0); k];
    let mut iterations = vec![0usize; k];
    let mut gammas = vec![0.0; k];
    let mut members = vec![0usize; groups];
    let mut superpositions = vec![RealMatrix::zeros(dims.m, dims.nc); groups];

    // The first UT of each group seeds it at shift zero.
    let seeds = groups.min(k);
    for (q, sp) in superpositions.iter_mut().enumerate().take(seeds) {
        assignments[q] = PilotAssignment::new(q, 0, 1.0);
        add_shifted(sp, &uts[q], 0);
        members[q] = 1;
    }

    let mut pending: Vec<usize> = (seeds..k).collect();
    pending.shuffle(rng);

    for &ut in &pending {
        let mut best: Option<(usize, usize, f64)> = None; // (group, phi, gamma)
        for q in 0..groups {
            if members[q] >= caps[q] {
                continue; // full groups never receive members
            }
            let (phi, gamma, iters) =
                scan_group(&uts[ut], &superpositions[q], upsilon, dims.nc, early_exit);
            iterations[ut] += iters;
            let better = match best {
                None => true,
                Some((_, _, g)) => gamma < g,
            };
            if better {
                best = Some((q, phi, gamma));
            }
        }
        let (q, phi, gamma) = best.ok_or(Error::InfeasibleCaps { uts: k, capacity })?;
        assignments[ut] = PilotAssignment::new(q, phi, 1.0);
        gammas[ut] = gamma;
        add_shifted(&mut superpositions[q], &uts[ut], phi);
        members[q] += 1;
    }

    Ok(ScheduleOutcome {
        assignments,
        iterations,
        gammas,
        superpositions,
    })
}

fn add_shifted(sigma: &mut RealMatrix, p: &PowerMatrix, phi: usize) {
    let nc = sigma.cols();
    for i in 0..p.rows() {
        let src = p.values().row(i);
        let dst = sigma.row_mut(i);
        for (n, &v) in src.iter().enumerate() {
            if v != 0.0 {
                dst[(n + phi) % nc] += v;
            }
        }
    }
}

/// Threshold-driven dual-layer scheduling. Each pending UT (visited in
/// random order after the per-group seeds) is scanned across all groups and
/// shifts with early exit once the overlap drops under the adaptive
/// threshold; the group with the smallest overlap wins, lowest index on
/// ties.
pub fn schedule(
    uts: &[PowerMatrix],
    dims: SystemDims,
    groups: usize,
    caps: Option<&[usize]>,
    upsilon: f64,
    rng: &mut impl Rng,
) -> Result<ScheduleOutcome, Error> {
    run_schedule(uts, dims, groups, caps, upsilon, true, rng)
}

/// Exhaustive greedy baseline: every group scan walks all shifts and keeps
/// the first minimum. Produces the same assignments as a zero threshold.
pub fn schedule_greedy_exhaustive(
    uts: &[PowerMatrix],
    dims: SystemDims,
    groups: usize,
    caps: Option<&[usize]>,
    rng: &mut impl Rng,
) -> Result<ScheduleOutcome, Error> {
    run_schedule(uts, dims, groups, caps, 0.0, false, rng)
}

/// Rebuild the per-group superposition matrices of a finished schedule from
/// scratch (consistency oracle for the incremental bookkeeping).
pub fn recompute_superpositions(
    uts: &[PowerMatrix],
    assignments: &[PilotAssignment],
    dims: SystemDims,
    groups: usize,
) -> Vec<RealMatrix> {
    let mut out = vec![RealMatrix::zeros(dims.m, dims.nc); groups];
    for (p, a) in uts.iter().zip(assignments.iter()) {
        add_shifted(&mut out[a.group], p, a.shift);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_power_matrix, ChannelParams, SupportSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_tap_ut(dims: SystemDims, tap: usize, beam: usize) -> PowerMatrix {
        let mut v = RealMatrix::zeros(dims.m, dims.ng);
        v.set(beam, tap, (dims.m * dims.nc) as f64);
        PowerMatrix::new(v)
    }

    fn uniform_uts(dims: SystemDims, taps: usize, count: usize, seed: u64) -> Vec<PowerMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ChannelParams::new(
            dims,
            0.0,
            0.01,
            SupportSpec {
                taps,
                beams: dims.m,
            },
        );
        (0..count)
            .map(|_| generate_power_matrix(&params, &mut rng).unwrap())
            .collect()
    }

    #[test]
    fn overlap_disjoint_is_zero_identical_is_power_sum() {
        let dims = SystemDims::new(2, 16, 4);
        let a = single_tap_ut(dims, 0, 0);
        let mut sigma = RealMatrix::zeros(2, 16);
        sigma.set(0, 2, 7.0);
        assert_eq!(overlap_metric(&a, 0, &sigma), 0.0);
        assert!(overlap_metric(&a, 2, &sigma) > 0.0);
        // Identical matrices at zero shift: sum of squares.
        let p = uniform_uts(dims, 3, 1, 1).remove(0);
        let padded = p.zero_padded(dims.nc);
        let expect: f64 = p.values().data().iter().map(|v| v * v).sum();
        assert!((overlap_metric(&p, 0, &padded) - expect).abs() < 1e-9);
    }

    #[test]
    fn overlap_matches_naive_double_loop() {
        let dims = SystemDims::new(3, 32, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let uts = uniform_uts(dims, 5, 2, 3);
        let sigma = uts[1].zero_padded(dims.nc);
        for _ in 0..10 {
            let phi = rng.gen_range(0..dims.nc);
            let fast = overlap_metric(&uts[0], phi, &sigma);
            let padded = uts[0].zero_padded(dims.nc);
            let mut slow = 0.0;
            for i in 0..dims.m {
                for j in 0..dims.nc {
                    slow += padded.get(i, (j + dims.nc - phi) % dims.nc) * sigma.get(i, j);
                }
            }
            assert!((fast - slow).abs() < 1e-9 * slow.max(1.0));
        }
    }

    #[test]
    fn threshold_zero_upsilon_and_normalized_algebra() {
        let dims = SystemDims::new(2, 16, 4);
        let p = uniform_uts(dims, 3, 1, 4).remove(0);
        let sigma = p.zero_padded(dims.nc);
        assert_eq!(threshold_value(&p, 0, &sigma, 0.0), 0.0);
        // Both sides normalized to M*Nc: the threshold is upsilon * M * Nc.
        let upsilon = 1e-7;
        let expect = upsilon * (dims.m * dims.nc) as f64;
        assert!((threshold_value(&p, 5, &sigma, upsilon) - expect).abs() < 1e-15);
    }

    #[test]
    fn identical_single_tap_uts_get_distinct_shifts() {
        let dims = SystemDims::new(2, 16, 4);
        let k = 16;
        let uts: Vec<PowerMatrix> = (0..k).map(|_| single_tap_ut(dims, 0, 0)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let out = schedule(&uts, dims, 1, Some(&[k]), 1e-7, &mut rng).unwrap();
        let mut shifts: Vec<usize> = out.assignments.iter().map(|a| a.shift).collect();
        shifts.sort_unstable();
        shifts.dedup();
        assert_eq!(shifts.len(), k, "shifts must be pairwise distinct");
        assert_eq!(out.total_overlap(), 0.0);
    }

    #[test]
    fn capacity_schedule_reaches_zero_overlap() {
        // K = Nc / taps full-window UTs fit a single group without overlap.
        let dims = SystemDims::new(2, 32, 8);
        let k = dims.nc / dims.ng;
        let uts = uniform_uts(dims, dims.ng, k, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let out = schedule(&uts, dims, 1, Some(&[k]), 1e-7, &mut rng).unwrap();
        assert_eq!(out.total_overlap(), 0.0);
    }

    #[test]
    fn zero_threshold_equals_exhaustive_greedy() {
        let dims = SystemDims::new(3, 32, 6);
        let uts = uniform_uts(dims, 5, 9, 8);
        for seed in 0..5u64 {
            let mut r1 = ChaCha8Rng::seed_from_u64(seed);
            let mut r2 = ChaCha8Rng::seed_from_u64(seed);
            let a = schedule(&uts, dims, 2, None, 0.0, &mut r1).unwrap();
            let b = schedule_greedy_exhaustive(&uts, dims, 2, None, &mut r2).unwrap();
            assert_eq!(a.assignments, b.assignments, "seed {seed}");
        }
    }

    #[test]
    fn greedy_overlap_never_above_thresholded() {
        let dims = SystemDims::new(3, 32, 6);
        let uts = uniform_uts(dims, 6, 10, 9);
        for seed in 0..10u64 {
            let mut r1 = ChaCha8Rng::seed_from_u64(seed);
            let mut r2 = ChaCha8Rng::seed_from_u64(seed);
            let greedy = schedule_greedy_exhaustive(&uts, dims, 2, None, &mut r1).unwrap();
            let thresholded = schedule(&uts, dims, 2, None, 1e-2, &mut r2).unwrap();
            assert!(
                greedy.total_overlap() <= thresholded.total_overlap() + 1e-9,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn incremental_superpositions_match_recomputation() {
        let dims = SystemDims::new(3, 32, 6);
        let uts = uniform_uts(dims, 5, 8, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let out = schedule(&uts, dims, 2, None, 1e-7, &mut rng).unwrap();
        let rebuilt = recompute_superpositions(&uts, &out.assignments, dims, 2);
        for (a, b) in out.superpositions.iter().zip(rebuilt.iter()) {
            for (x, y) in a.data().iter().zip(b.data().iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn assignment_completeness_and_caps() {
        let dims = SystemDims::new(2, 16, 4);
        let uts = uniform_uts(dims, 3, 7, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let caps = [4usize, 4];
        let out = schedule(&uts, dims, 2, Some(&caps), 1e-7, &mut rng).unwrap();
        assert_eq!(out.assignments.len(), 7);
        let mut counts = [0usize; 2];
        for a in &out.assignments {
            counts[a.group] += 1;
        }
        assert!(counts[0] <= 4 && counts[1] <= 4);
        assert_eq!(counts[0] + counts[1], 7);
    }

    #[test]
    fn infeasible_caps_error() {
        let dims = SystemDims::new(2, 16, 4);
        let uts = uniform_uts(dims, 3, 5, 14);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        assert!(matches!(
            schedule(&uts, dims, 2, Some(&[2, 2]), 1e-7, &mut rng),
            Err(Error::InfeasibleCaps { .. })
        ));
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let dims = SystemDims::new(3, 32, 6);
        let uts = uniform_uts(dims, 5, 9, 16);
        let mut r1 = ChaCha8Rng::seed_from_u64(17);
        let mut r2 = ChaCha8Rng::seed_from_u64(17);
        let a = schedule(&uts, dims, 3, None, 1e-7, &mut r1).unwrap();
        let b = schedule(&uts, dims, 3, None, 1e-7, &mut r2).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn upsilon_monotonicity_on_single_tap_corpus() {
        // Iterations never increase and total overlap never decreases as the
        // threshold grows, on a fixed seed.
        let dims = SystemDims::new(2, 32, 4);
        let uts: Vec<PowerMatrix> = (0..10).map(|_| single_tap_ut(dims, 0, 0)).collect();
        let mut last_iters = usize::MAX;
        let mut last_overlap = -1.0f64;
        for upsilon in [0.0, 1e-7, 1e-3, 1e-1, 1.0, 10.0] {
            let mut rng = ChaCha8Rng::seed_from_u64(18);
            let out = schedule(&uts, dims, 1, Some(&[10]), upsilon, &mut rng).unwrap();
            assert!(
                out.total_iterations() <= last_iters,
                "iterations grew at upsilon {upsilon}"
            );
            assert!(
                out.total_overlap() >= last_overlap - 1e-9,
                "overlap dropped at upsilon {upsilon}"
            );
            last_iters = out.total_iterations();
            last_overlap = out.total_overlap();
        }
    }

    #[test]
    fn scan_length_uniform_when_single_gap_is_uniform() {
        // A superposition covering everything except one uniformly random
        // window makes the early-exit position uniform, so the mean scan
        // length approaches (Nc + 1) / 2.
        let dims = SystemDims::new(1, 64, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let ut = {
            let mut v = RealMatrix::zeros(1, dims.ng);
            for j in 0..dims.ng {
                v.set(0, j, 1.0);
            }
            PowerMatrix::new(v)
        };
        let draws = 600;
        let mut total = 0usize;
        for _ in 0..draws {
            let gap = rng.gen_range(0..dims.nc);
            let mut sigma = RealMatrix::zeros(1, dims.nc);
            for j in 0..dims.nc {
                let in_gap = (j + dims.nc - gap) % dims.nc < dims.ng;
                if !in_gap {
                    sigma.set(0, j, 100.0);
                }
            }
            let (phi, gamma, iters) = scan_shifts(&ut, &sigma, 1e-7, dims.nc);
            assert_eq!(phi, gap);
            assert_eq!(gamma, 0.0);
            total += iters;
        }
        let mean = total as f64 / draws as f64;
        let expect = (dims.nc as f64 + 1.0) / 2.0;
        assert!(
            (mean - expect).abs() / expect < 0.20,
            "mean scan {mean} vs {expect}"
        );
    }
}
