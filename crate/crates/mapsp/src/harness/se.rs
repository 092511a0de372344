//! Simplified spectral-efficiency proxy: per-UT Shannon rate under a linear
//! MMSE receive combiner built from estimated space-frequency channels on a
//! sampled subcarrier subset. A stand-in metric for trend comparisons, not a
//! full link-level rate.

use crate::transforms::{ComplexMatrix, Cplx};

/// Solve `A X = B` for a square complex system by Gaussian elimination with
/// partial pivoting. `a` and `b` are consumed as working storage.
fn solve_linear(mut a: Vec<Vec<Cplx>>, mut b: Vec<Vec<Cplx>>) -> Option<Vec<Vec<Cplx>>> {
    let n = a.len();
    let rhs = b[0].len();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r][col].norm_sqr() > a[pivot][col].norm_sqr() {
                pivot = r;
            }
        }
        if a[pivot][col].norm_sqr() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Cplx::new(1.0, 0.0) / a[col][col];
        for r in col + 1..n {
            let f = a[r][col] * inv;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            for c in 0..rhs {
                let v = b[col][c];
                b[r][c] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = Cplx::new(1.0, 0.0) / a[col][col];
        for c in 0..rhs {
            let mut v = b[col][c];
            for k in col + 1..n {
                v -= a[col][k] * b[k][c];
            }
            b[col][c] = v * inv;
        }
    }
    Some(b)
}

/// Aggregate proxy rate in bits/s/Hz: for each sampled subcarrier, build the
/// MMSE combiner from the estimated channels, score it against the true
/// channels, and sum `log2(1 + SINR)` over UTs; the subcarrier average is
/// scaled by the frame's data fraction.
pub fn se_proxy(
    true_g: &[ComplexMatrix],
    est_g: &[ComplexMatrix],
    eta: f64,
    subcarriers: &[usize],
    data_fraction: f64,
) -> f64 {
    assert_eq!(true_g.len(), est_g.len(), "UT sets must match");
    if true_g.is_empty() || subcarriers.is_empty() {
        return 0.0;
    }
    let m = true_g[0].rows();
    let k = true_g.len();
    let noise = 1.0 / eta;
    let mut total = 0.0;
    for &n in subcarriers {
        // Gram matrix of the estimates plus the noise floor.
        let mut a = vec![vec![Cplx::new(0.0, 0.0); m]; m];
        for g in est_g {
            for i in 0..m {
                let gi = g.get(i, n);
                for j in 0..m {
                    a[i][j] += gi * g.get(j, n).conj();
                }
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += Cplx::new(noise, 0.0);
        }
        let b: Vec<Vec<Cplx>> = (0..m)
            .map(|i| (0..k).map(|u| est_g[u].get(i, n)).collect())
            .collect();
        let w = match solve_linear(a, b) {
            Some(w) => w,
            None => continue,
        };
        for u in 0..k {
            let mut w_norm_sq = 0.0;
            for row in w.iter().take(m) {
                w_norm_sq += row[u].norm_sqr();
            }
            if w_norm_sq < 1e-30 {
                continue; // dead combiner, zero useful signal
            }
            let mut signal = Cplx::new(0.0, 0.0);
            let mut interference = 0.0;
            for (v, g) in true_g.iter().enumerate() {
                let mut dot = Cplx::new(0.0, 0.0);
                for (i, row) in w.iter().enumerate().take(m) {
                    dot += row[u].conj() * g.get(i, n);
                }
                if v == u {
                    signal = dot;
                } else {
                    interference += dot.norm_sqr();
                }
            }
            let sinr = signal.norm_sqr() / (interference + noise * w_norm_sq);
            total += (1.0 + sinr).log2();
        }
    }
    data_fraction * total / subcarriers.len() as f64
}

/// Evenly spaced subcarrier sample of size `count` out of `nc`.
pub fn sample_subcarriers(nc: usize, count: usize) -> Vec<usize> {
    let count = count.max(1).min(nc);
    (0..count).map(|i| i * nc / count).collect()
}
