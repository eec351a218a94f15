//! Seeded random points, directions and automorphisms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::automorphisms::{BallAutomorphism, PolydiskAutomorphism};
use crate::error::Result;
use crate::factors::FactorMetric;
use crate::linalg::CMatrix;
use crate::product::ProductManifold;

/// Largest radius of sampled points in bounded factors.
pub const SAMPLE_RADIUS: f64 = 0.7;

/// Largest norm of sampled automorphism centers.
pub const CENTER_RADIUS: f64 = 0.8;

/// Generator for one cell of a run: the same `(seed, stream)` always gives the same sequence.
pub fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian vector.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(normal(rng), normal(rng))).collect()
}

/// Uniform point of the ball of radius `r` in `C^m`.
pub fn ball_point<R: Rng + ?Sized>(rng: &mut R, m: usize, r: f64) -> Vec<Complex64> {
    let g = loop {
        let g = gaussian(rng, m);
        if g.iter().any(|c| c.norm() > 0.0) {
            break g;
        }
    };
    let len = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let rad = r * rng.random::<f64>().powf(1.0 / (2 * m) as f64);
    g.iter().map(|c| c * (rad / len)).collect()
}

fn factor_point<R: Rng + ?Sized>(rng: &mut R, f: &FactorMetric) -> Vec<Complex64> {
    if f.is_bounded() {
        ball_point(rng, f.dim(), SAMPLE_RADIUS)
    } else {
        gaussian(rng, f.dim())
    }
}

/// Random point: uniform in the `0.7`-ball of bounded factors, Gaussian otherwise.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R, mfd: &ProductManifold) -> Vec<Complex64> {
    mfd.factors().iter().flat_map(|f| factor_point(rng, f)).collect()
}

/// Random tangent vector with every factor block nonzero.
pub fn sample_vector<R: Rng + ?Sized>(rng: &mut R, mfd: &ProductManifold) -> Vec<Complex64> {
    loop {
        let v = gaussian(rng, mfd.dim());
        let ok = (0..mfd.factor_count()).all(|l| mfd.block(&v, l).iter().any(|c| c.norm() > 1e-3));
        if ok {
            return v;
        }
    }
}

pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R, mfd: &ProductManifold) -> (Vec<Complex64>, Vec<Complex64>) {
    let z = sample_point(rng, mfd);
    let v = sample_vector(rng, mfd);
    (z, v)
}

/// Haar-distributed unitary matrix (Gram-Schmidt on a Gaussian matrix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, m: usize) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    while cols.len() < m {
        let mut c = gaussian(rng, m);
        for q in &cols {
            let p: Complex64 = q.iter().zip(&c).map(|(a, b)| a.conj() * b).sum();
            for (ci, qi) in c.iter_mut().zip(q) {
                *ci -= p * qi;
            }
        }
        let len = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if len > 1e-8 {
            cols.push(c.iter().map(|x| x / len).collect());
        }
    }
    CMatrix::from_fn(m, m, |i, j| cols[j][i])
}

pub fn random_ball_automorphism<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<BallAutomorphism> {
    let a = ball_point(rng, m, CENTER_RADIUS);
    let u = random_unitary(rng, m);
    BallAutomorphism::new(a, u)
}

/// Uniform angles, centers uniform in the `0.8`-disk, uniform permutation.
pub fn random_polydisk_automorphism<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<PolydiskAutomorphism> {
    let thetas = (0..n).map(|_| rng.random::<f64>() * TAU).collect();
    let a = (0..n).map(|_| ball_point(rng, 1, CENTER_RADIUS)[0]).collect();
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    PolydiskAutomorphism::new(thetas, a, sigma)
}

/// Möbius map in one coordinate only.
pub fn random_single_mobius<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<PolydiskAutomorphism> {
    let l = rng.random_range(0..n);
    let mut thetas = vec![0.0; n];
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    thetas[l] = rng.random::<f64>() * TAU;
    a[l] = ball_point(rng, 1, CENTER_RADIUS)[0];
    PolydiskAutomorphism::new(thetas, a, (0..n).collect())
}
