//! Quick oracle suite behind the `selftest` CLI subcommand: a compact
//! subset of the correctness checks that gate the full test suite.

use crate::channel::bessel_j0;
use crate::pilot::{
    adpcm_brute, adpcm_fast, adpcm_zc_closed_form, interference_score, sfpcm_diagonal, zc_sequence,
};
use crate::scheduler::schedule;
use crate::transforms::{ad_to_sf, array_response, dft, sf_to_ad, ComplexMatrix, Cplx, SystemDims};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn check_dft_against_direct() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 128;
    let v: Vec<Cplx> = (0..n)
        .map(|_| Cplx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let fast = dft(&v);
    (0..n).all(|k| {
        let direct: Cplx = (0..n)
            .map(|j| v[j] * Cplx::from_polar(1.0, -2.0 * PI * (k * j % n) as f64 / n as f64))
            .sum();
        (fast[k] - direct).norm() < 1e-9
    })
}

fn check_array_unitary() -> bool {
    let m = 16;
    let a = array_response(m);
    let prod = a.herm_mul(&a);
    (0..m).all(|i| {
        (0..m).all(|j| {
            let expect = if i == j { 1.0 } else { 0.0 };
            (prod.get(i, j) - Cplx::new(expect, 0.0)).norm() < 1e-12
        })
    })
}

fn check_round_trip() -> bool {
    let dims = SystemDims::new(8, 64, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = ComplexMatrix::from_fn(dims.m, dims.ng, |_, _| {
        Cplx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    sf_to_ad(&ad_to_sf(&h, dims), dims).max_abs_diff(&h) < 1e-10
}

fn check_adpcm_fast_vs_brute() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d: Vec<Cplx> = (0..64)
        .map(|_| Cplx::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let fast = adpcm_fast(&d);
    let brute = adpcm_brute(&d);
    fast.first_col()
        .iter()
        .zip(brute.first_col().iter())
        .all(|(a, b)| (a - b).norm() < 1e-10)
}

fn check_closed_form() -> bool {
    let (nc, root, phi) = (127usize, 2u64, 5usize);
    let a = match zc_sequence(nc, root, phi) {
        Ok(v) => v,
        Err(_) => return false,
    };
    let b = match zc_sequence(nc, root, 0) {
        Ok(v) => v,
        Err(_) => return false,
    };
    let diag = match sfpcm_diagonal(&a, &b, 0, 0) {
        Ok(v) => v,
        Err(_) => return false,
    };
    let brute = adpcm_brute(&diag);
    match adpcm_zc_closed_form(nc, root, phi) {
        Ok(closed) => closed
            .first_col()
            .iter()
            .zip(brute.first_col().iter())
            .all(|(x, y)| (x - y).norm() < 1e-9),
        Err(_) => false,
    }
}

fn check_autocorrelation_score() -> bool {
    let p = match zc_sequence(512, 1, 0) {
        Ok(v) => v,
        Err(_) => return false,
    };
    match interference_score(&p, &p) {
        Ok(s) => (s - 1.0).abs() < 1e-9,
        Err(_) => false,
    }
}

fn check_bessel() -> bool {
    (bessel_j0(0.0) - 1.0).abs() < 1e-12
        && (bessel_j0(1.0) - 0.7651976866).abs() < 1e-8
        && bessel_j0(2.404825557695773).abs() < 1e-8
}

fn check_scheduler_capacity() -> bool {
    use crate::channel::{generate_power_matrix, ChannelParams, SupportSpec};
    let dims = SystemDims::new(4, 64, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = ChannelParams::new(dims, 0.0, 0.01, SupportSpec { taps: 8, beams: 4 });
    let uts: Vec<_> = (0..8)
        .map(|_| generate_power_matrix(&params, &mut rng).unwrap())
        .collect();
    match schedule(&uts, dims, 1, Some(&[8]), 1e-7, &mut rng) {
        Ok(out) => out.total_overlap() == 0.0,
        Err(_) => false,
    }
}

/// Run the compact oracle suite; returns `(name, passed)` per check.
pub fn selftest() -> Vec<(&'static str, bool)> {
    vec![
        ("dft matches direct evaluation", check_dft_against_direct()),
        ("array response unitary", check_array_unitary()),
        ("angle-delay round trip", check_round_trip()),
        ("adpcm fast equals brute", check_adpcm_fast_vs_brute()),
        ("zc closed form equals brute", check_closed_form()),
        (
            "autocorrelation score is one",
            check_autocorrelation_score(),
        ),
        ("bessel j0 reference values", check_bessel()),
        (
            "scheduler reaches zero overlap at capacity",
            check_scheduler_capacity(),
        ),
    ]
}
