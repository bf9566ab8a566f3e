#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    normal(rng)
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(rng))
}

pub fn gaussian_mat<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| normal(rng))
}

/// Haar-distributed rotation with determinant one.
pub fn random_rotation<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_mat(rng, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = gaussian_mat(rng, n);
    (&a + a.transpose()) * 0.5
}

/// Uniform magnitude in `[lo, hi]` with a random sign.
pub fn signed_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let x = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        x
    } else {
        -x
    }
}
