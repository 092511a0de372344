//! Synthetic sparse angle-delay channel generation: clustered power
//! matrices, wrapped-Gaussian channel arguments, temporal evolution through
//! the Bessel-J0 correlation function, and a ray-based space-frequency
//! generator used as an independent oracle for the transforms.

use crate::transforms::{ComplexMatrix, Cplx, RealMatrix, SystemDims};
use crate::Error;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use std::f64::consts::PI;

/// Per-UT sparsity descriptor: `taps` active contiguous delay columns and a
/// contiguous (cyclically wrapped) angular span of `beams` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportSpec {
    pub taps: usize,
    pub beams: usize,
}

/// Law of the per-element magnitude factor `g` in `|h| = sqrt(P) * g`.
///
/// `Deterministic` fixes `g = 1`, which makes the channel mean match the
/// wrapped-Gaussian argument model exactly. `NakagamiLike(m)` draws `g^2`
/// from Gamma(m, 1/m) so `E{g^2} = 1` with fluctuation shrinking as `m`
/// grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MagnitudeLaw {
    Deterministic,
    NakagamiLike(f64),
}

/// Channel generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub dims: SystemDims,
    /// Normalized Doppler: Doppler frequency times the OFDM symbol duration.
    pub nu_tsym: f64,
    /// Variance of the channel argument around its mean, in radians^2.
    pub sigma_bar_sq: f64,
    pub support: SupportSpec,
    pub magnitude: MagnitudeLaw,
    /// Power drop from the first to the last tap of a cluster, in dB.
    pub tap_decay_db: f64,
}

impl ChannelParams {
    pub fn new(dims: SystemDims, nu_tsym: f64, sigma_bar_sq: f64, support: SupportSpec) -> Self {
        assert!(
            support.taps >= 1 && support.taps <= dims.ng,
            "0 < taps <= ng"
        );
        assert!(
            support.beams >= 1 && support.beams <= dims.m,
            "0 < beams <= m"
        );
        assert!(sigma_bar_sq >= 0.0 && nu_tsym >= 0.0);
        Self {
            dims,
            nu_tsym,
            sigma_bar_sq,
            support,
            magnitude: MagnitudeLaw::Deterministic,
            tap_decay_db: 6.0,
        }
    }

    pub fn with_tap_decay_db(mut self, decay_db: f64) -> Self {
        assert!(decay_db >= 0.0);
        self.tap_decay_db = decay_db;
        self
    }
}

/// Nonnegative per-element channel variance matrix (statistical CSI),
/// normalized so the entries sum to `M * Nc`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMatrix {
    values: RealMatrix,
}

impl PowerMatrix {
    pub fn new(values: RealMatrix) -> Self {
        assert!(
            values.data().iter().all(|&v| v >= 0.0),
            "negative power entry"
        );
        Self { values }
    }

    pub fn values(&self) -> &RealMatrix {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn sum(&self) -> f64 {
        self.values.sum()
    }

    /// Zero-pad to `M x Nc` (support occupies the first `Ng` columns).
    pub fn zero_padded(&self, nc: usize) -> RealMatrix {
        assert!(nc >= self.cols());
        let mut out = RealMatrix::zeros(self.rows(), nc);
        for i in 0..self.rows() {
            out.row_mut(i)[..self.cols()].copy_from_slice(self.values.row(i));
        }
        out
    }
}

/// Mean-argument field and shared argument variance of one UT.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentModel {
    /// Mean argument per element, radians in [0, 2 pi).
    pub mu: RealMatrix,
    pub sigma_bar_sq: f64,
}

impl ArgumentModel {
    /// All-zero mean arguments.
    pub fn zero(m: usize, ng: usize, sigma_bar_sq: f64) -> Self {
        Self {
            mu: RealMatrix::zeros(m, ng),
            sigma_bar_sq,
        }
    }

    /// One constant mean argument for the whole UT plus independent
    /// per-element jitter of at most `jitter` radians.
    pub fn constant_with_jitter(
        m: usize,
        ng: usize,
        base: f64,
        jitter: f64,
        sigma_bar_sq: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let mu = RealMatrix::from_fn(m, ng, |_, _| {
            (base
                + if jitter > 0.0 {
                    rng.gen_range(-jitter..jitter)
                } else {
                    0.0
                })
            .rem_euclid(2.0 * PI)
        });
        Self { mu, sigma_bar_sq }
    }

    /// Independent uniform mean argument per element: the zero-mean channel
    /// ensemble with fully uncorrelated entries.
    pub fn uniform(m: usize, ng: usize, sigma_bar_sq: f64, rng: &mut impl Rng) -> Self {
        let mu = RealMatrix::from_fn(m, ng, |_, _| rng.gen_range(0.0..2.0 * PI));
        Self { mu, sigma_bar_sq }
    }
}

/// Draw a clustered sparse power matrix: contiguous delay taps with
/// exponentially decaying power, a raised-cosine profile across a contiguous
/// angular span, normalized so the total is `M * Nc`.
pub fn generate_power_matrix(
    params: &ChannelParams,
    rng: &mut impl Rng,
) -> Result<PowerMatrix, Error> {
    let dims = params.dims;
    let c = params.support.taps;
    if c > dims.ng {
        return Err(Error::TooManyTaps {
            taps: c,
            ng: dims.ng,
        });
    }
    let beams = params.support.beams.min(dims.m);
    let tap_start = if dims.ng > c {
        rng.gen_range(0..=dims.ng - c)
    } else {
        0
    };
    let beam_start = rng.gen_range(0..dims.m);

    // Exponential decay over taps, `tap_decay_db` across the cluster.
    let tap_decay = if c > 1 {
        (10f64.ln() * -params.tap_decay_db / (10.0 * (c - 1) as f64)).exp()
    } else {
        1.0
    };
    let mut values = RealMatrix::zeros(dims.m, dims.ng);
    let mut tap_gain = 1.0;
    for t in 0..c {
        let j = tap_start + t;
        for b in 0..beams {
            let i = (beam_start + b) % dims.m;
            // Raised cosine across the span, never exactly zero at the edges.
            let x = (b as f64 + 0.5) / beams as f64;
            let angular = 0.5 * (1.0 - (2.0 * PI * x).cos()) + 1e-3;
            values.set(i, j, tap_gain * angular);
        }
        tap_gain *= tap_decay;
    }
    let total = values.sum();
    let target = (dims.m * dims.nc) as f64;
    values.scale(target / total);
    Ok(PowerMatrix::new(values))
}

/// Realize one channel matrix: `h = sqrt(P) * g * exp(i theta)` with
/// `theta ~ N(mu, sigma_bar_sq)` wrapped to [0, 2 pi) and `g` per the
/// configured magnitude law, all elements independent.
pub fn realize_channel(
    power: &PowerMatrix,
    args: &ArgumentModel,
    magnitude: MagnitudeLaw,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix, Error> {
    assert_eq!(
        (power.rows(), power.cols()),
        (args.mu.rows(), args.mu.cols()),
        "power and argument shapes must match"
    );
    let sigma = args.sigma_bar_sq.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let gamma = match magnitude {
        MagnitudeLaw::Deterministic => None,
        MagnitudeLaw::NakagamiLike(m) => Some(Gamma::new(m, 1.0 / m).expect("gamma shape")),
    };
    let (rows, cols) = (power.rows(), power.cols());
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let p = power.get(i, j);
            if p == 0.0 {
                continue;
            }
            let theta = (args.mu.get(i, j) + sigma * normal.sample(rng)).rem_euclid(2.0 * PI);
            let g = match &gamma {
                None => 1.0,
                Some(dist) => dist.sample(rng).sqrt(),
            };
            out.set(i, j, Cplx::from_polar(p.sqrt() * g, theta));
        }
    }
    Ok(out)
}

/// Zeroth-order Bessel function of the first kind.
///
/// Power series below |x| = 8, asymptotic expansion above; absolute error
/// under 1e-8 over the real line.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        // sum_k (-1)^k (x^2/4)^k / (k!)^2
        let q = ax * ax / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= -q / (k * k);
            let next = sum + term;
            if next == sum {
                return sum;
            }
            sum = next;
            k += 1.0;
        }
    } else {
        // Hankel asymptotic form with the standard rational fits for the
        // modulus and phase corrections.
        let z = 8.0 / ax;
        let y = z * z;
        let p = 1.0
            + y * (-0.1098628627e-2
                + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let q = -0.1562499995e-1
            + y * (0.1430488765e-3
                + y * (-0.6911147651e-5 + y * (0.7621095161e-6 + y * -0.934935152e-7)));
        let xx = ax - 0.785398164;
        (2.0 / (PI * ax)).sqrt() * (xx.cos() * p - z * xx.sin() * q)
    }
}

/// Temporal correlation across a lag of `delta_ell` OFDM symbols.
pub fn tcf(delta_ell: i64, nu_tsym: f64) -> f64 {
    bessel_j0(2.0 * PI * nu_tsym * delta_ell as f64)
}

/// Advance a channel realization by `delta_ell` symbols:
/// `h' = rho h + sqrt(1 - rho^2) h_innov`. The innovation carries an
/// independent uniform argument per element (across symbols the dominant
/// path argument drifts through the mobility that produces the Doppler in
/// the first place), so E{h' h*} = rho P and E{|h'|^2} = P hold exactly.
pub fn evolve_channel(
    h: &ComplexMatrix,
    power: &PowerMatrix,
    args: &ArgumentModel,
    magnitude: MagnitudeLaw,
    delta_ell: i64,
    nu_tsym: f64,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix, Error> {
    let rho = tcf(delta_ell, nu_tsym);
    if delta_ell == 0 {
        return Ok(h.clone());
    }
    let innov_args = ArgumentModel::uniform(h.rows(), h.cols(), args.sigma_bar_sq, rng);
    let innov = realize_channel(power, &innov_args, magnitude, rng)?;
    let mix = (1.0 - rho * rho).max(0.0).sqrt();
    let mut out = ComplexMatrix::zeros(h.rows(), h.cols());
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            out.set(i, j, rho * h.get(i, j) + mix * innov.get(i, j));
        }
    }
    Ok(out)
}

/// One propagation path for the ray-based generator: complex gain,
/// directional cosine, delay in samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPath {
    pub gain: Cplx,
    pub cos_angle: f64,
    pub delay_samples: f64,
}

/// Complex gain of a line-of-sight path of real gain `beta` at a distance of
/// `distance_wavelengths` carrier wavelengths.
pub fn los_path_gain(beta: f64, distance_wavelengths: f64) -> Cplx {
    beta * Cplx::from_polar(1.0, -2.0 * PI * distance_wavelengths)
}

/// Space-frequency channel of a discrete multipath profile:
/// `G[m][n] = sum_p gain_p exp(-i pi m cos_p) exp(-i 2 pi n delay_p / Nc)`.
///
/// Every delay must fit inside the cyclic prefix window.
pub fn ray_channel(paths: &[RayPath], dims: SystemDims) -> Result<ComplexMatrix, Error> {
    for p in paths {
        if p.delay_samples < 0.0 || p.delay_samples >= dims.ng as f64 {
            return Err(Error::DelayOutOfRange {
                delay: p.delay_samples,
                ng: dims.ng,
            });
        }
    }
    let mut g = ComplexMatrix::zeros(dims.m, dims.nc);
    for p in paths {
        for m in 0..dims.m {
            let spatial = Cplx::from_polar(1.0, -PI * m as f64 * p.cos_angle);
            let row = g.row_mut(m);
            for (n, cell) in row.iter_mut().enumerate() {
                let freq =
                    Cplx::from_polar(1.0, -2.0 * PI * n as f64 * p.delay_samples / dims.nc as f64);
                *cell += p.gain * spatial * freq;
            }
        }
    }
    Ok(g)
}

/// Directional cosine that lands exactly on beam index `j` of the array
/// response grid: `cos a = (2 j - M) / M`.
pub fn on_grid_cosine(beam: usize, m: usize) -> f64 {
    (2.0 * beam as f64 - m as f64) / m as f64
}

/// Statistical description of one UT kept in a serialized ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct UtStatistics {
    pub power: PowerMatrix,
    pub args: ArgumentModel,
}

/// Write an ensemble of per-UT statistics (power matrices and mean
/// arguments) as CSV with columns `ut,row,col,power,mu`; one leading header
/// line carries the shape and argument variance.
pub fn save_ensemble<W: std::io::Write>(uts: &[UtStatistics], out: &mut W) -> Result<(), Error> {
    let (m, ng) = match uts.first() {
        Some(u) => (u.power.rows(), u.power.cols()),
        None => (0, 0),
    };
    let sigma = uts.first().map(|u| u.args.sigma_bar_sq).unwrap_or(0.0);
    writeln!(
        out,
        "# uts={} m={} ng={} sigma_bar_sq={:.12e}",
        uts.len(),
        m,
        ng,
        sigma
    )?;
    writeln!(out, "ut,row,col,power,mu")?;
    for (k, u) in uts.iter().enumerate() {
        for i in 0..m {
            for j in 0..ng {
                writeln!(
                    out,
                    "{},{},{},{:.12e},{:.12e}",
                    k,
                    i,
                    j,
                    u.power.get(i, j),
                    u.args.mu.get(i, j)
                )?;
            }
        }
    }
    Ok(())
}

/// Read an ensemble produced by [`save_ensemble`].
pub fn load_ensemble<R: std::io::BufRead>(input: R) -> Result<Vec<UtStatistics>, Error> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidConfig("empty ensemble file".into()))??;
    let mut uts_n = 0usize;
    let mut m = 0usize;
    let mut ng = 0usize;
    let mut sigma = 0.0f64;
    for tok in header.trim_start_matches('#').split_whitespace() {
        let mut kv = tok.splitn(2, '=');
        match (kv.next(), kv.next()) {
            (Some("uts"), Some(v)) => uts_n = v.parse().map_err(bad_header)?,
            (Some("m"), Some(v)) => m = v.parse().map_err(bad_header)?,
            (Some("ng"), Some(v)) => ng = v.parse().map_err(bad_header)?,
            (Some("sigma_bar_sq"), Some(v)) => sigma = v.parse().map_err(bad_header)?,
            _ => {}
        }
    }
    let mut powers = vec![RealMatrix::zeros(m, ng); uts_n];
    let mut mus = vec![RealMatrix::zeros(m, ng); uts_n];
    for line in lines {
        let line = line?;
        if line.starts_with("ut,") || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::InvalidConfig(format!("bad ensemble row: {line}")));
        }
        let k: usize = fields[0].parse().map_err(bad_header)?;
        let i: usize = fields[1].parse().map_err(bad_header)?;
        let j: usize = fields[2].parse().map_err(bad_header)?;
        let p: f64 = fields[3].parse().map_err(bad_header)?;
        let mu: f64 = fields[4].parse().map_err(bad_header)?;
        if k >= uts_n || i >= m || j >= ng {
            return Err(Error::InvalidConfig(format!("index out of range: {line}")));
        }
        powers[k].set(i, j, p);
        mus[k].set(i, j, mu);
    }
    Ok(powers
        .into_iter()
        .zip(mus)
        .map(|(p, mu)| UtStatistics {
            power: PowerMatrix::new(p),
            args: ArgumentModel {
                mu,
                sigma_bar_sq: sigma,
            },
        })
        .collect())
}

fn bad_header<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidConfig(format!("unparsable ensemble field: {e}"))
}
