//! Element-wise MMSE channel estimation, its closed-form error and lower
//! bound, the inter-group pre-processing step (return-to-zero rotation plus
//! imaginary-part cancellation), and channel prediction across OFDM symbols.

use crate::channel::{tcf, PowerMatrix};
use crate::transforms::{ComplexMatrix, Cplx, RealMatrix};
use crate::uplink::{interference_power, DecorrelatedSignal, UplinkScene};
use crate::Error;

/// Which interferers the estimator's denominator accounts for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceScope {
    /// Every scheduled UT, the plain decorrelated-signal statistics.
    AllGroups,
    /// Only the target's own group, the statistics after pre-processing has
    /// removed the other groups.
    SameGroup,
}

/// Aggregate interference statistics for one target UT.
#[derive(Debug, Clone)]
pub struct InterferenceProfile {
    /// Total interference-plus-signal power per element, all groups.
    pub p_sigma: RealMatrix,
    /// Same restricted to the target's own group (still includes the target).
    pub p_sigma_intra: RealMatrix,
    /// Equivalent argument of the inter-group interference per element,
    /// radians.
    pub theta_sigma: RealMatrix,
    /// Return-to-zero rotation of the target: `exp(-i mu)` per element.
    pub theta_zero: ComplexMatrix,
}

impl InterferenceProfile {
    pub fn p_sigma(&self, scope: InterferenceScope) -> &RealMatrix {
        match scope {
            InterferenceScope::AllGroups => &self.p_sigma,
            InterferenceScope::SameGroup => &self.p_sigma_intra,
        }
    }
}

/// Sum the per-UT interference powers seen by `target` over the whole scene
/// and compute the equivalent inter-group argument field. The power sum
/// includes the target's own contribution. The argument field combines each
/// foreign pair's deterministic pilot phase with the interferer's mean
/// argument at the element its interference actually lands on, minus the
/// target's own rotation: the argument of the conditional-mean interference
/// of the rotated signal, which is what the cancellation must aim at. With
/// all-zero mean arguments this is exactly the pair phase.
pub fn aggregate_interference_power(
    scene: &UplinkScene,
    target: usize,
) -> Result<InterferenceProfile, Error> {
    let dims = scene.dims;
    let tgt = &scene.uts[target];
    let mut p_sigma = RealMatrix::zeros(dims.m, dims.ng);
    let mut p_sigma_intra = RealMatrix::zeros(dims.m, dims.ng);
    let mut inter_acc = ComplexMatrix::zeros(dims.m, dims.ng);
    for ut in &scene.uts {
        let delta = ut.assignment.shift as i64 - tgt.assignment.shift as i64;
        let z = scene.group_pair_adpcm(ut.assignment.group, tgt.assignment.group)?;
        let power = interference_power(&ut.power, &z, delta, dims);
        let same_group = ut.assignment.group == tgt.assignment.group;
        let source = |j: usize| -> Option<usize> {
            // Element j receives the interferer's column j - (delta - offset)
            // when the single-offset structure applies.
            if let crate::pilot::AdpcmStructure::CyclicShiftScaled { offset, .. } = z.structure() {
                let src = (j as i64 - delta + offset as i64).rem_euclid(dims.nc as i64) as usize;
                if src < dims.ng {
                    return Some(src);
                }
            }
            None
        };
        for i in 0..dims.m {
            for j in 0..dims.ng {
                let p = power.get(i, j);
                p_sigma.set(i, j, p_sigma.get(i, j) + p);
                if same_group {
                    p_sigma_intra.set(i, j, p_sigma_intra.get(i, j) + p);
                } else if p > 0.0 {
                    if let (Some(theta), Some(src)) = (z.pai(), source(j)) {
                        let rot = Cplx::from_polar(1.0, theta + ut.args.mu.get(i, src));
                        inter_acc.set(i, j, inter_acc.get(i, j) + p * rot);
                    }
                }
            }
        }
    }
    let theta_sigma = RealMatrix::from_fn(dims.m, dims.ng, |i, j| {
        let acc = inter_acc.get(i, j);
        if acc.norm_sqr() == 0.0 {
            0.0
        } else {
            acc.arg() - tgt.args.mu.get(i, j)
        }
    });
    let theta_zero = ComplexMatrix::from_fn(dims.m, dims.ng, |i, j| {
        Cplx::from_polar(1.0, -tgt.args.mu.get(i, j))
    });
    Ok(InterferenceProfile {
        p_sigma,
        p_sigma_intra,
        theta_sigma,
        theta_zero,
    })
}

/// Element-wise Wiener estimate: `h_hat = P / (P_sigma + 1/eta) * y`.
/// Elements with zero prior power come back exactly zero.
pub fn mmse_estimate(
    y: &DecorrelatedSignal,
    p_target: &PowerMatrix,
    profile: &InterferenceProfile,
    eta_tr: f64,
    scope: InterferenceScope,
) -> ComplexMatrix {
    let p_sigma = profile.p_sigma(scope);
    ComplexMatrix::from_fn(y.rows(), y.cols(), |i, j| {
        let p = p_target.get(i, j);
        if p == 0.0 {
            return Cplx::new(0.0, 0.0);
        }
        let gain = p / (p_sigma.get(i, j) + 1.0 / eta_tr);
        gain * y.get(i, j)
    })
}

/// Closed-form estimation error of one UT:
/// `sum_ij P - P^2 / (P_sigma + 1/eta)`.
pub fn mmse_error_theoretical(
    p_target: &PowerMatrix,
    profile: &InterferenceProfile,
    eta_tr: f64,
    scope: InterferenceScope,
) -> f64 {
    let p_sigma = profile.p_sigma(scope);
    let mut acc = 0.0;
    for i in 0..p_target.rows() {
        for j in 0..p_target.cols() {
            let p = p_target.get(i, j);
            if p == 0.0 {
                continue;
            }
            acc += p - p * p / (p_sigma.get(i, j) + 1.0 / eta_tr);
        }
    }
    acc
}

/// Interference-free error floor summed over a set of UTs:
/// every profile collapses to the UT's own power.
pub fn mmse_error_lower_bound(powers: &[&PowerMatrix], eta_tr: f64) -> f64 {
    let mut acc = 0.0;
    for p in powers {
        for i in 0..p.rows() {
            for j in 0..p.cols() {
                let v = p.get(i, j);
                if v == 0.0 {
                    continue;
                }
                acc += v - v * v / (v + 1.0 / eta_tr);
            }
        }
    }
    acc
}

/// Below this |sin| of the equivalent argument the cancellation term is
/// skipped for the element: the division blows up where the inter-group
/// argument sits at 0 or pi.
pub const EPS_TAN: f64 = 1e-3;

/// Result of [`preprocess`]: the processed signal and how many elements fell
/// back to rotation only.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub signal: ComplexMatrix,
    pub bypassed: usize,
}

/// Inter-group interference cancellation: rotate the target's arguments to
/// zero, remove the component sitting at the equivalent inter-group argument
/// through the imaginary part, and rescale by `exp(sigma^2 / 2)` so the
/// surviving mean matches the unprocessed scale. Elements whose equivalent
/// argument is too close to 0 or pi keep their rotated complex value.
pub fn preprocess(
    y: &DecorrelatedSignal,
    profile: &InterferenceProfile,
    sigma_bar_sq: f64,
) -> Preprocessed {
    let rescale = (sigma_bar_sq / 2.0).exp();
    let mut bypassed = 0usize;
    let signal = ComplexMatrix::from_fn(y.rows(), y.cols(), |i, j| {
        let rotated = profile.theta_zero.get(i, j) * y.get(i, j);
        let theta = profile.theta_sigma.get(i, j);
        if theta.sin().abs() < EPS_TAN {
            bypassed += 1;
            return rotated * rescale;
        }
        let real = rotated.re - rotated.im / theta.tan();
        Cplx::new(real * rescale, 0.0)
    });
    Preprocessed { signal, bypassed }
}

/// Per-element statistics of the cancellation decision: predicted errors of
/// keeping the plain Wiener estimate versus cancelling through the
/// imaginary part, plus the effective denominator of the cancelled branch.
fn cancel_denominators(
    p: f64,
    p_all: f64,
    p_intra: f64,
    theta: f64,
    sigma_bar_sq: f64,
    eta_tr: f64,
) -> (bool, f64) {
    let p_inter = (p_all - p_intra).max(0.0);
    let s2 = theta.sin() * theta.sin();
    let d_keep = p_all + 1.0 / eta_tr;
    if p == 0.0 || p_inter <= 0.0 || s2 < EPS_TAN * EPS_TAN {
        return (false, d_keep);
    }
    // Residual variance of the cancelled interference plus the amplified
    // noise share, folded into the denominator of the cancelled branch.
    let d_cancel = p_intra + sigma_bar_sq * p_inter / s2 + 1.0 / eta_tr;
    // Cancelling trades the removed interference against the unobserved
    // quadrature component of the target; worthwhile only when the variance
    // reduction beats sigma^2 of own power.
    let gain = p * (d_keep - d_cancel) / (d_cancel * d_keep);
    let cancel = sigma_bar_sq < gain;
    (cancel, if cancel { d_cancel } else { d_keep })
}

/// Full pre-processed estimation chain: rotate the target's mean argument to
/// zero, cancel the other groups' conditional mean through the imaginary
/// part wherever that lowers the predicted element error, Wiener filter, and
/// rotate back. Falls back to the plain all-groups estimate elementwise when
/// cancellation cannot pay (no foreign power, degenerate argument, or a
/// residual that would exceed the interference it removes).
pub fn estimate_preprocessed(
    y: &DecorrelatedSignal,
    p_target: &PowerMatrix,
    profile: &InterferenceProfile,
    sigma_bar_sq: f64,
    eta_tr: f64,
) -> ComplexMatrix {
    let rescale = (sigma_bar_sq / 2.0).exp();
    ComplexMatrix::from_fn(y.rows(), y.cols(), |i, j| {
        let p = p_target.get(i, j);
        if p == 0.0 {
            return Cplx::new(0.0, 0.0);
        }
        let theta = profile.theta_sigma.get(i, j);
        let (cancel, denom) = cancel_denominators(
            p,
            profile.p_sigma.get(i, j),
            profile.p_sigma_intra.get(i, j),
            theta,
            sigma_bar_sq,
            eta_tr,
        );
        if cancel {
            let rotated = profile.theta_zero.get(i, j) * y.get(i, j);
            let real = (rotated.re - rotated.im / theta.tan()) * rescale;
            let gain = p / denom;
            profile.theta_zero.get(i, j).conj() * (gain * real)
        } else {
            let gain = p / denom;
            gain * y.get(i, j)
        }
    })
}

/// Predicted estimation error of [`estimate_preprocessed`], elementwise the
/// smaller of the plain closed form and the cancelled branch (which pays the
/// unobserved quadrature share of the target power).
pub fn preprocessed_error_theoretical(
    p_target: &PowerMatrix,
    profile: &InterferenceProfile,
    sigma_bar_sq: f64,
    eta_tr: f64,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..p_target.rows() {
        for j in 0..p_target.cols() {
            let p = p_target.get(i, j);
            if p == 0.0 {
                continue;
            }
            let (cancel, denom) = cancel_denominators(
                p,
                profile.p_sigma.get(i, j),
                profile.p_sigma_intra.get(i, j),
                profile.theta_sigma.get(i, j),
                sigma_bar_sq,
                eta_tr,
            );
            acc += p - p * p / denom;
            if cancel {
                acc += sigma_bar_sq * p;
            }
        }
    }
    acc
}

/// Predict the channel `delta_ell` symbols ahead from the current
/// decorrelated signal: the Wiener gain shrunk by the temporal correlation.
pub fn predict_channel(
    y: &DecorrelatedSignal,
    p_target: &PowerMatrix,
    profile: &InterferenceProfile,
    eta_tr: f64,
    delta_ell: i64,
    nu_tsym: f64,
    scope: InterferenceScope,
) -> ComplexMatrix {
    let rho = tcf(delta_ell, nu_tsym);
    let p_sigma = profile.p_sigma(scope);
    ComplexMatrix::from_fn(y.rows(), y.cols(), |i, j| {
        let p = p_target.get(i, j);
        if p == 0.0 {
            return Cplx::new(0.0, 0.0);
        }
        let gain = rho * p / (p_sigma.get(i, j) + 1.0 / eta_tr);
        gain * y.get(i, j)
    })
}

/// Closed-form prediction error: `sum_ij P - rho^2 P^2 / (P_sigma + 1/eta)`.
/// Coincides with the estimation error at zero lag.
pub fn prediction_error_theoretical(
    p_target: &PowerMatrix,
    profile: &InterferenceProfile,
    eta_tr: f64,
    delta_ell: i64,
    nu_tsym: f64,
    scope: InterferenceScope,
) -> f64 {
    let rho = tcf(delta_ell, nu_tsym);
    let p_sigma = profile.p_sigma(scope);
    let mut acc = 0.0;
    for i in 0..p_target.rows() {
        for j in 0..p_target.cols() {
            let p = p_target.get(i, j);
            if p == 0.0 {
                continue;
            }
            acc += p - rho * rho * p * p / (p_sigma.get(i, j) + 1.0 / eta_tr);
        }
    }
    acc
}
