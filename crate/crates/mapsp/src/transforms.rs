//! Unitary transforms and index machinery shared by the rest of the crate:
//! DFT/IDFT, the ULA array response, cyclic column shifts, and the conversion
//! between space-frequency and angle-delay channel matrices.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

pub type Cplx = Complex64;

/// System dimensions: `m` BS antennas, `nc` subcarriers, `ng` cyclic-prefix samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    pub m: usize,
    pub nc: usize,
    pub ng: usize,
}

impl SystemDims {
    pub fn new(m: usize, nc: usize, ng: usize) -> Self {
        assert!(m >= 1, "antenna count must be >= 1");
        assert!(ng >= 1 && ng <= nc, "cp length must satisfy 1 <= ng <= nc");
        Self { m, nc, ng }
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cplx>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cplx::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Cplx>) -> Self {
        assert_eq!(data.len(), rows * cols, "element count must be rows*cols");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cplx {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cplx) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Cplx] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Cplx] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[Cplx] {
        &self.data
    }

    /// Sum of squared magnitudes over all entries.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Sum of squared magnitudes of the elementwise difference.
    pub fn diff_energy(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `self * other` (plain dense product).
    pub fn mat_mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// `selfᴴ * other`.
    pub fn herm_mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.get(k, i).conj();
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }
}

/// Dense row-major real matrix (used for power matrices and their padded forms).
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward DFT: `out[k] = sum_n v[n] exp(-i 2 pi k n / N)`, no normalization.
///
/// Panics on empty input.
pub fn dft(v: &[Cplx]) -> Vec<Cplx> {
    assert!(!v.is_empty(), "dft of empty vector");
    let mut buf = v.to_vec();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(&mut buf);
    });
    buf
}

/// Inverse DFT, exact inverse of [`dft`] (carries the 1/N factor).
///
/// Panics on empty input.
pub fn idft(v: &[Cplx]) -> Vec<Cplx> {
    assert!(!v.is_empty(), "idft of empty vector");
    let mut buf = v.to_vec();
    let n = buf.len();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(n);
        fft.process(&mut buf);
    });
    let scale = 1.0 / n as f64;
    for z in &mut buf {
        *z *= scale;
    }
    buf
}

/// ULA array response matrix: `[A]_{i,j} = exp(-i 2 pi i (j - M/2) / M) / sqrt(M)`.
///
/// Unitary for every `M >= 1`.
pub fn array_response(m: usize) -> ComplexMatrix {
    assert!(m >= 1, "antenna count must be >= 1");
    let norm = 1.0 / (m as f64).sqrt();
    // Exponent i*(j - M/2) is a multiple of 1/2, so a table over half-steps is exact
    // for odd M as well.
    let table: Vec<Cplx> = (0..2 * m)
        .map(|t| Cplx::from_polar(norm, -PI * t as f64 / m as f64))
        .collect();
    ComplexMatrix::from_fn(m, m, |i, j| {
        let t = (i as i64 * (2 * j as i64 - m as i64)).rem_euclid(2 * m as i64) as usize;
        table[t]
    })
}

#[inline]
fn wrap(n: i64, modulus: usize) -> usize {
    n.rem_euclid(modulus as i64) as usize
}

/// Cyclically shift the columns of `x` to the right by `n` positions
/// (column `j` of the result is column `<j - n> mod cols` of the input).
pub fn cyclic_shift_right(x: &ComplexMatrix, n: i64) -> ComplexMatrix {
    let cols = x.cols();
    let shift = wrap(n, cols);
    ComplexMatrix::from_fn(x.rows(), cols, |i, j| x.get(i, (j + cols - shift) % cols))
}

/// Space-frequency to angle-delay conversion:
/// `H = Aᴴ G W*_{Nc x Ng} / sqrt(Nc)` for `G` of shape `M x Nc`.
pub fn sf_to_ad(g: &ComplexMatrix, dims: SystemDims) -> ComplexMatrix {
    assert_eq!(
        (g.rows(), g.cols()),
        (dims.m, dims.nc),
        "expected an M x Nc space-frequency matrix"
    );
    let a = array_response(dims.m);
    // Aᴴ G, then right-multiply by the conjugated truncated DFT matrix.
    let ag = a.herm_mul(g);
    let nc = dims.nc;
    let table: Vec<Cplx> = (0..nc)
        .map(|t| Cplx::from_polar(1.0, 2.0 * PI * t as f64 / nc as f64))
        .collect();
    let norm = 1.0 / (nc as f64).sqrt();
    ComplexMatrix::from_fn(dims.m, dims.ng, |i, j| {
        let mut acc = Cplx::new(0.0, 0.0);
        for (n, v) in ag.row(i).iter().enumerate() {
            acc += v * table[n * j % nc];
        }
        acc * norm
    })
}

/// Angle-delay to space-frequency conversion, inverse of [`sf_to_ad`]:
/// `G = A H Wᵀ_{Nc x Ng} / sqrt(Nc)` for `H` of shape `M x Ng`.
pub fn ad_to_sf(h: &ComplexMatrix, dims: SystemDims) -> ComplexMatrix {
    assert_eq!(
        (h.rows(), h.cols()),
        (dims.m, dims.ng),
        "expected an M x Ng angle-delay matrix"
    );
    let a = array_response(dims.m);
    let ah = a.mat_mul(h);
    let nc = dims.nc;
    let table: Vec<Cplx> = (0..nc)
        .map(|t| Cplx::from_polar(1.0, -2.0 * PI * t as f64 / nc as f64))
        .collect();
    let norm = 1.0 / (nc as f64).sqrt();
    ComplexMatrix::from_fn(dims.m, dims.nc, |i, j| {
        let mut acc = Cplx::new(0.0, 0.0);
        for (n, v) in ah.row(i).iter().enumerate() {
            acc += v * table[n * j % nc];
        }
        acc * norm
    })
}
