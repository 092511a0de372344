//! Uplink pilot-segment simulation: received-signal synthesis across the
//! full space-frequency chain, least-squares decorrelation back to the
//! angle-delay domain, and the exact interference-term decomposition used by
//! the estimator and as a test oracle.

use crate::channel::{ArgumentModel, PowerMatrix};
use crate::pilot::{
    adpcm_fast, pilot_frequency_signal, sfpcm_diagonal, Adpcm, AdpcmStructure, BasicPilot,
    PilotAssignment,
};
use crate::transforms::{ad_to_sf, sf_to_ad, ComplexMatrix, Cplx, RealMatrix, SystemDims};
use crate::Error;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Decorrelated received signal for one target UT, shape `M x Ng`.
pub type DecorrelatedSignal = ComplexMatrix;

/// One UT inside an uplink scene.
#[derive(Debug, Clone)]
pub struct UtEntry {
    /// Current angle-delay channel realization, `M x Ng`.
    pub channel: ComplexMatrix,
    pub power: PowerMatrix,
    pub args: ArgumentModel,
    pub assignment: PilotAssignment,
}

/// Everything the BS sees during one uplink pilot symbol.
#[derive(Debug, Clone)]
pub struct UplinkScene {
    pub dims: SystemDims,
    /// Basic pilot per group, indexed by group id.
    pub basic: Vec<BasicPilot>,
    pub uts: Vec<UtEntry>,
    /// Noise power per received element.
    pub noise_power: f64,
}

impl UplinkScene {
    /// Training SNR of UT `k`: pilot power over noise power.
    pub fn eta_tr(&self, k: usize) -> f64 {
        self.uts[k].assignment.power / self.noise_power
    }

    /// Cross-correlation matrix of the basic pilots of two groups
    /// (interferer first, target second).
    pub fn group_pair_adpcm(&self, interferer: usize, target: usize) -> Result<Adpcm, Error> {
        if interferer == target {
            return Ok(Adpcm::identity(self.dims.nc));
        }
        let diag = sfpcm_diagonal(&self.basic[interferer], &self.basic[target], 0, 0)?;
        Ok(adpcm_fast(&diag))
    }

    fn check(&self) -> Result<(), Error> {
        for ut in &self.uts {
            if ut.channel.rows() != self.dims.m || ut.channel.cols() != self.dims.ng {
                return Err(Error::LengthMismatch {
                    left: ut.channel.rows() * ut.channel.cols(),
                    right: self.dims.m * self.dims.ng,
                });
            }
            if ut.assignment.group >= self.basic.len() {
                return Err(Error::InvalidConfig(format!(
                    "group {} has no basic pilot",
                    ut.assignment.group
                )));
            }
        }
        for b in &self.basic {
            if b.len() != self.dims.nc {
                return Err(Error::LengthMismatch {
                    left: b.len(),
                    right: self.dims.nc,
                });
            }
        }
        Ok(())
    }
}

/// Superpose every UT's space-frequency pilot transmission and add white
/// complex Gaussian noise: `Y = sum_k G_k diag(x_k) + N`, shape `M x Nc`.
pub fn synthesize_received(
    scene: &UplinkScene,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix, Error> {
    scene.check()?;
    let dims = scene.dims;
    let mut y = ComplexMatrix::zeros(dims.m, dims.nc);
    for ut in &scene.uts {
        let g = ad_to_sf(&ut.channel, dims);
        let x = pilot_frequency_signal(&ut.assignment, &scene.basic[ut.assignment.group]);
        for i in 0..dims.m {
            let src = g.row(i);
            let dst = y.row_mut(i);
            for ((d, s), xv) in dst.iter_mut().zip(src.iter()).zip(x.iter()) {
                *d += s * xv;
            }
        }
    }
    if scene.noise_power > 0.0 {
        let comp = Normal::new(0.0, (scene.noise_power / 2.0).sqrt()).expect("noise sigma");
        for i in 0..dims.m {
            for v in y.row_mut(i) {
                *v += Cplx::new(comp.sample(rng), comp.sample(rng));
            }
        }
    }
    Ok(y)
}

/// Least-squares decorrelation for one target pilot: scale the received
/// columns by the conjugated target pilot, transform to the angle-delay
/// domain, and normalize by the pilot power. The array/DFT transform pair
/// contributes a factor sqrt(Nc) which the transform normalization absorbs,
/// so a lone interference-free UT comes back exactly as its channel.
pub fn ls_decorrelate(
    y: &ComplexMatrix,
    target: &PilotAssignment,
    basic: &BasicPilot,
    dims: SystemDims,
) -> DecorrelatedSignal {
    assert_eq!((y.rows(), y.cols()), (dims.m, dims.nc), "received shape");
    let x = pilot_frequency_signal(target, basic);
    let mut scaled = ComplexMatrix::zeros(dims.m, dims.nc);
    for i in 0..dims.m {
        let src = y.row(i);
        let dst = scaled.row_mut(i);
        for ((d, s), xv) in dst.iter_mut().zip(src.iter()).zip(x.iter()) {
            *d = s * xv.conj();
        }
    }
    let mut out = sf_to_ad(&scaled, dims);
    out.scale(1.0 / target.power);
    out
}

#[inline]
fn wrap(n: i64, modulus: usize) -> usize {
    n.rem_euclid(modulus as i64) as usize
}

/// Interference that one same-group UT injects into a target decorrelated at
/// shift difference `delta_phi`: the zero-padded channel cyclically shifted
/// right and truncated to the capture window.
pub fn intra_interference(h: &ComplexMatrix, delta_phi: i64, dims: SystemDims) -> ComplexMatrix {
    assert_eq!((h.rows(), h.cols()), (dims.m, dims.ng), "channel shape");
    let shift = wrap(delta_phi, dims.nc);
    ComplexMatrix::from_fn(dims.m, dims.ng, |i, j| {
        let src = wrap(j as i64 - shift as i64, dims.nc);
        if src < dims.ng {
            h.get(i, src)
        } else {
            Cplx::new(0.0, 0.0)
        }
    })
}

/// Interference that a UT from another group injects into the target's
/// capture window, given the groups' cross-correlation matrix `z` and the
/// pilot shift difference. A single-offset `z` reduces to a phase-rotated
/// cyclic shift by `delta_phi - offset`; the general form convolves the
/// channel columns with the first column of `z`.
pub fn inter_interference(
    h: &ComplexMatrix,
    z: &Adpcm,
    delta_phi: i64,
    dims: SystemDims,
) -> ComplexMatrix {
    assert_eq!((h.rows(), h.cols()), (dims.m, dims.ng), "channel shape");
    assert_eq!(z.len(), dims.nc, "cross-correlation length");
    match z.structure() {
        AdpcmStructure::CyclicShiftScaled { offset, scale } => {
            let mut out = intra_interference(h, delta_phi - offset as i64, dims);
            for i in 0..dims.m {
                for v in out.row_mut(i) {
                    *v *= scale;
                }
            }
            out
        }
        AdpcmStructure::GeneralToeplitz => {
            let col = z.first_col();
            ComplexMatrix::from_fn(dims.m, dims.ng, |i, j| {
                let mut acc = Cplx::new(0.0, 0.0);
                for n in 0..dims.ng {
                    let d = wrap(n as i64 - j as i64 + delta_phi, dims.nc);
                    let c = col[d];
                    if c.norm_sqr() > 0.0 {
                        acc += h.get(i, n) * c;
                    }
                }
                acc
            })
        }
    }
}

/// Power matrix of a pure shift-and-truncate interference term.
pub fn shifted_power(p: &PowerMatrix, delta_phi: i64, dims: SystemDims) -> RealMatrix {
    assert_eq!((p.rows(), p.cols()), (dims.m, dims.ng), "power shape");
    let shift = wrap(delta_phi, dims.nc);
    RealMatrix::from_fn(dims.m, dims.ng, |i, j| {
        let src = wrap(j as i64 - shift as i64, dims.nc);
        if src < dims.ng {
            p.get(i, src)
        } else {
            0.0
        }
    })
}

/// Expected squared magnitude of the interference a UT with power matrix `p`
/// injects through cross-correlation `z` at shift difference `delta_phi`.
/// Matches the Monte Carlo second moment of [`inter_interference`] because
/// channel elements are independent.
pub fn interference_power(
    p: &PowerMatrix,
    z: &Adpcm,
    delta_phi: i64,
    dims: SystemDims,
) -> RealMatrix {
    assert_eq!((p.rows(), p.cols()), (dims.m, dims.ng), "power shape");
    assert_eq!(z.len(), dims.nc, "cross-correlation length");
    match z.structure() {
        AdpcmStructure::CyclicShiftScaled { offset, scale } => {
            let mut out = shifted_power(p, delta_phi - offset as i64, dims);
            let s2 = scale.norm_sqr();
            if (s2 - 1.0).abs() > 1e-12 {
                out.scale(s2);
            }
            out
        }
        AdpcmStructure::GeneralToeplitz => {
            let col = z.first_col();
            RealMatrix::from_fn(dims.m, dims.ng, |i, j| {
                let mut acc = 0.0;
                for n in 0..dims.ng {
                    let d = wrap(n as i64 - j as i64 + delta_phi, dims.nc);
                    acc += p.get(i, n) * col[d].norm_sqr();
                }
                acc
            })
        }
    }
}
