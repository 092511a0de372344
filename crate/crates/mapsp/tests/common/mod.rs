//! Shared helpers for the integration suites: reference transforms evaluated
//! directly from their defining sums, independent of the library's fast
//! paths.

use mapsp::transforms::Cplx;
use std::f64::consts::PI;

/// Direct quadratic-time DFT, the oracle the fast transform is checked
/// against.
pub fn direct_dft(v: &[Cplx]) -> Vec<Cplx> {
    let n = v.len();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|j| v[j] * Cplx::from_polar(1.0, -2.0 * PI * ((k * j) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Random unit-modulus sequence.
pub fn random_phases(n: usize, rng: &mut impl rand::Rng) -> Vec<Cplx> {
    (0..n)
        .map(|_| Cplx::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))
        .collect()
}
