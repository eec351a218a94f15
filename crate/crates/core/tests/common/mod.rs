#![allow(dead_code)]

use finslerlab::coords::RealLayout;
use finslerlab::linalg::{CMatrix, HermitianMatrix, RMatrix, SymmetricRealMatrix};
use finslerlab::{ComplexFinslerMetric, FactorMetric, MetricParams, ProductManifold, ProductMetric, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

pub const T_GRID: [f64; 4] = [0.0, 0.5, 1.0, 5.0];
pub const K_GRID: [u32; 3] = [2, 3, 4];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn params(t: f64, k: u32) -> MetricParams {
    MetricParams::new(t, k).unwrap()
}

pub fn polydisk(n: usize, t: f64, k: u32) -> ProductMetric {
    ProductMetric::new(ProductManifold::polydisk(n).unwrap(), params(t, k))
}

/// Factor mixes exercised by the grid-wide suites.
pub fn mixes() -> Vec<(&'static str, ProductManifold)> {
    let disk = FactorMetric::poincare_disk;
    vec![
        ("polydisk2", ProductManifold::polydisk(2).unwrap()),
        ("polydisk3", ProductManifold::polydisk(3).unwrap()),
        (
            "ball2_disk",
            ProductManifold::new(vec![FactorMetric::bergman_ball(2).unwrap(), disk()]).unwrap(),
        ),
        (
            "fs1_fs2",
            ProductManifold::new(vec![
                FactorMetric::fubini_study(1).unwrap(),
                FactorMetric::fubini_study(2).unwrap(),
            ])
            .unwrap(),
        ),
        (
            "flat2_disk",
            ProductManifold::new(vec![FactorMetric::euclidean_flat(2).unwrap(), disk()]).unwrap(),
        ),
    ]
}

pub fn flat_product(dims: &[usize]) -> ProductManifold {
    ProductManifold::new(dims.iter().map(|&d| FactorMetric::euclidean_flat(d).unwrap()).collect()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// A point of the open disk of radius `r`.
pub fn disk_point(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(rho, th)| Complex64::from_polar(rho, th))
}

pub fn polydisk_point(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(disk_point(0.7), n)
}

/// A complex vector whose entries all have modulus in `[0.1, 2]`.
pub fn generic_vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (0.1f64..2.0, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| Complex64::from_polar(r, th)),
        n,
    )
}

pub fn to_na(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn to_na_real(m: &RMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn na_vec(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &HermitianMatrix) -> f64 {
    to_na(h.matrix())
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn min_eigenvalue_real(s: &SymmetricRealMatrix) -> f64 {
    to_na_real(s.matrix()).symmetric_eigenvalues().min()
}

pub fn na_inverse(m: &CMatrix) -> DMatrix<Complex64> {
    to_na(m).try_inverse().expect("invertible")
}

pub fn max_abs_diff_na(a: &DMatrix<Complex64>, b: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// `e^{2σ(z)} F_{t,k}(v)²` on flat factors with a nonconstant `σ`: a complex
/// Berwald metric whose real spray is not quadratic when `t > 0`.
pub struct ConformalFixture {
    pub base: ProductMetric,
}

impl ConformalFixture {
    pub fn new(dims: &[usize], t: f64, k: u32) -> Self {
        Self {
            base: ProductMetric::new(flat_product(dims), params(t, k)),
        }
    }

    pub fn sigma(z: &[Complex64]) -> f64 {
        let lin: f64 = z
            .iter()
            .enumerate()
            .map(|(i, c)| (0.3 + 0.1 * i as f64) * c.re - 0.2 * c.im)
            .sum();
        lin + 0.1 * z.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    fn factor(z: &[Complex64]) -> f64 {
        (2.0 * Self::sigma(z)).exp()
    }
}

impl ComplexFinslerMetric for ConformalFixture {
    fn layout(&self) -> &RealLayout {
        self.base.layout()
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        self.base.check_point(z)
    }

    fn energy(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        Ok(Self::factor(z) * self.base.energy(z, v)?)
    }

    fn energy_dvbar(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        let s = Self::factor(z);
        Ok(self.base.energy_dvbar(z, v)?.into_iter().map(|d| d * s).collect())
    }

    fn complex_tensor(&self, z: &[Complex64], v: &[Complex64]) -> Result<HermitianMatrix> {
        let h = self.base.complex_tensor(z, v)?;
        HermitianMatrix::new(h.matrix().scale(c(Self::factor(z), 0.0)))
    }

    fn real_hessian(&self, x: &[f64], u: &[f64]) -> Result<SymmetricRealMatrix> {
        let z = self.layout().to_complex(x);
        let g = self.base.real_hessian(x, u)?;
        let s = Self::factor(&z);
        SymmetricRealMatrix::new(RMatrix::from_fn(g.dim(), g.dim(), |i, j| s * g.matrix()[(i, j)]))
    }
}

/// Second-order central-difference Hessian of `f` at `u`.
pub fn hessian_oracle(f: impl Fn(&[f64]) -> f64, u: &[f64], h: f64) -> DMatrix<f64> {
    let n = u.len();
    let at = |d: &[(usize, f64)]| {
        let mut w = u.to_vec();
        for &(i, s) in d {
            w[i] += s;
        }
        f(&w)
    };
    let f0 = at(&[]);
    DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            (at(&[(a, h)]) - 2.0 * f0 + at(&[(a, -h)])) / (h * h)
        } else {
            (at(&[(a, h), (b, h)]) - at(&[(a, h), (b, -h)]) - at(&[(a, -h), (b, h)]) + at(&[(a, -h), (b, -h)]))
                / (4.0 * h * h)
        }
    })
}

/// `∂²G/∂v^α∂v̄^β` assembled from a real Hessian in the layout's coordinates.
pub fn mixed_from_real(layout: &RealLayout, h: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = layout.complex_dim();
    DMatrix::from_fn(n, n, |a, b| {
        let (xa, ya, xb, yb) = (
            layout.re_index(a),
            layout.im_index(a),
            layout.re_index(b),
            layout.im_index(b),
        );
        c(h[(xa, xb)] + h[(ya, yb)], h[(xa, yb)] - h[(ya, xb)]) * 0.25
    })
}

pub fn rel_max(a: &DMatrix<Complex64>, b: &CMatrix) -> f64 {
    let scale = b.max_abs().max(1e-300);
    max_abs_diff_na(a, b) / scale
}

pub fn rel_max_real(a: &DMatrix<f64>, b: &RMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    worst / b.max_abs().max(1e-300)
}

/// `Γ^c_{ab}(x) u^a u^b` of one factor, with Christoffel symbols from
/// differences of the real metric `g_ab = Re [Q](e_a, e_b)`.
pub fn christoffel_spray_oracle(f: &FactorMetric, x: &[f64], u: &[f64]) -> Vec<f64> {
    let layout = RealLayout::single(f.dim());
    let n = x.len();
    let metric = |y: &[f64]| -> DMatrix<f64> {
        let z = layout.to_complex(y);
        let q = |w: &[f64]| f.q_value(&z, &layout.to_complex(w)).unwrap();
        DMatrix::from_fn(n, n, |a, b| {
            let mut p = vec![0.0; n];
            let mut m = vec![0.0; n];
            p[a] += 1.0;
            p[b] += 1.0;
            m[a] += 1.0;
            m[b] -= 1.0;
            (q(&p) - q(&m)) / 4.0
        })
    };
    let h = 1e-4;
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|d| {
            let (mut p, mut m) = (x.to_vec(), x.to_vec());
            p[d] += h;
            m[d] -= h;
            (metric(&p) - metric(&m)) / (2.0 * h)
        })
        .collect();
    let ginv = metric(x).try_inverse().unwrap();
    // Γ_{d,ab} u^a u^b = ½ (2 ∂_a g_{db} - ∂_d g_{ab}) u^a u^b
    let lowered: Vec<f64> = (0..n)
        .map(|d| {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += (dg[a][(d, b)] - 0.5 * dg[d][(a, b)]) * u[a] * u[b];
                }
            }
            s
        })
        .collect();
    (0..n)
        .map(|cc| (0..n).map(|d| ginv[(cc, d)] * lowered[d]).sum())
        .collect()
}

/// Holomorphic directional derivative `Df(z) v` by a fourth-order stencil.
pub fn pushforward_oracle(
    f: impl Fn(&[Complex64]) -> Vec<Complex64>,
    z: &[Complex64],
    v: &[Complex64],
) -> Vec<Complex64> {
    let h = 2.5e-4;
    let at = |s: f64| f(&z.iter().zip(v).map(|(a, b)| a + b * s).collect::<Vec<_>>());
    let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
    (0..z.len())
        .map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h))
        .collect()
}
