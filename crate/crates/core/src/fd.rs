//! Central finite differences, including Wirtinger derivatives.
//!
//! First derivatives use the five-point central stencil; second derivatives
//! use the standard three-point / four-corner central formulas.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{CMatrix, RMatrix};

/// Base step, taken relative to the magnitude of the perturbed coordinate.
pub const STEP: f64 = 1e-4;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Step for a coordinate of the given magnitude.
pub fn step_for(x: f64, base: f64) -> f64 {
    base * x.abs().max(1.0)
}

/// Values that finite differences can combine.
pub trait Linear: Sized {
    /// `Σ c_i x_i` over a nonempty list.
    fn lincomb(terms: &[(f64, &Self)]) -> Self;
}

/// Values that can also be multiplied by complex scalars.
pub trait ComplexLinear: Linear {
    fn cscale(&self, c: Complex64) -> Self;
    fn plus(&self, other: &Self) -> Self;
}

impl Linear for f64 {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(c, x)| c * **x).sum()
    }
}

impl Linear for Complex64 {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(c, x)| **x * *c).sum()
    }
}

impl ComplexLinear for Complex64 {
    fn cscale(&self, c: Complex64) -> Self {
        self * c
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
}

impl<T: Linear + Clone> Linear for Vec<T> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let n = terms[0].1.len();
        (0..n)
            .map(|i| {
                let parts: Vec<(f64, &T)> = terms.iter().map(|(c, x)| (*c, &x[i])).collect();
                T::lincomb(&parts)
            })
            .collect()
    }
}

impl<T: ComplexLinear + Clone> ComplexLinear for Vec<T> {
    fn cscale(&self, c: Complex64) -> Self {
        self.iter().map(|x| x.cscale(c)).collect()
    }
    fn plus(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a.plus(b)).collect()
    }
}

impl Linear for CMatrix {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let (r, c) = (terms[0].1.rows(), terms[0].1.cols());
        CMatrix::from_fn(r, c, |i, j| terms.iter().map(|(w, m)| m[(i, j)] * *w).sum())
    }
}

impl Linear for RMatrix {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let (r, c) = (terms[0].1.rows(), terms[0].1.cols());
        RMatrix::from_fn(r, c, |i, j| terms.iter().map(|(w, m)| m[(i, j)] * *w).sum())
    }
}

impl ComplexLinear for CMatrix {
    fn cscale(&self, c: Complex64) -> Self {
        self.scale(c)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
}

/// Derivative at 0 of a one-parameter family, five-point stencil.
pub fn derivative<V: Linear>(mut f: impl FnMut(f64) -> Result<V>, h: f64) -> Result<V> {
    let p2 = f(2.0 * h)?;
    let p1 = f(h)?;
    let m1 = f(-h)?;
    let m2 = f(-2.0 * h)?;
    let w = 1.0 / (12.0 * h);
    let d1 = V::lincomb(&[(1.0, &p1), (-1.0, &m1)]);
    let d2 = V::lincomb(&[(1.0, &p2), (-1.0, &m2)]);
    Ok(V::lincomb(&[(8.0 * w, &d1), (-w, &d2)]))
}

/// `(∂f/∂x, ∂f/∂y)` for the real and imaginary parts of coordinate `j`.
fn complex_partials<V: Linear>(
    f: &impl Fn(&[Complex64]) -> Result<V>,
    z: &[Complex64],
    j: usize,
    h: f64,
) -> Result<(V, V)> {
    let mut w = z.to_vec();
    let fx = derivative(
        |s| {
            w[j] = z[j] + s;
            f(&w)
        },
        h,
    )?;
    let mut w = z.to_vec();
    let fy = derivative(
        |s| {
            w[j] = z[j] + I * s;
            f(&w)
        },
        h,
    )?;
    Ok((fx, fy))
}

fn coord_step(z: &[Complex64], j: usize, base: f64) -> f64 {
    base * z[j].norm().max(1.0)
}

/// `∂f/∂z^j = ½(∂_x - i ∂_y) f`.
pub fn dz<V: ComplexLinear>(f: impl Fn(&[Complex64]) -> Result<V>, z: &[Complex64], j: usize, base: f64) -> Result<V> {
    let (fx, fy) = complex_partials(&f, z, j, coord_step(z, j, base))?;
    Ok(fx.plus(&fy.cscale(-I)).cscale(Complex64::new(0.5, 0.0)))
}

/// `∂f/∂z̄^j = ½(∂_x + i ∂_y) f`.
pub fn dzbar<V: ComplexLinear>(
    f: impl Fn(&[Complex64]) -> Result<V>,
    z: &[Complex64],
    j: usize,
    base: f64,
) -> Result<V> {
    let (fx, fy) = complex_partials(&f, z, j, coord_step(z, j, base))?;
    Ok(fx.plus(&fy.cscale(I)).cscale(Complex64::new(0.5, 0.0)))
}

/// Wirtinger `∂f/∂z^j` of a real-valued function.
pub fn dz_real(f: impl Fn(&[Complex64]) -> Result<f64>, z: &[Complex64], j: usize, base: f64) -> Result<Complex64> {
    let (fx, fy) = complex_partials(&f, z, j, coord_step(z, j, base))?;
    Ok(Complex64::new(0.5 * fx, -0.5 * fy))
}

/// Wirtinger `∂f/∂z̄^j` of a real-valued function.
pub fn dzbar_real(f: impl Fn(&[Complex64]) -> Result<f64>, z: &[Complex64], j: usize, base: f64) -> Result<Complex64> {
    Ok(dz_real(f, z, j, base)?.conj())
}

/// Real gradient by five-point differences.
pub fn gradient(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64], base: f64) -> Result<Vec<f64>> {
    let mut w = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step_for(x[i], base);
            let r = derivative(
                |s| {
                    w[i] = x[i] + s;
                    f(&w)
                },
                h,
            );
            w[i] = x[i];
            r
        })
        .collect()
}

/// Real Hessian by second-order central differences.
pub fn hessian(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64], base: f64) -> Result<RMatrix> {
    let n = x.len();
    let hs: Vec<f64> = x.iter().map(|&xi| step_for(xi, base)).collect();
    let f0 = f(x)?;
    let mut w = x.to_vec();
    let mut eval = |di: (usize, f64), dj: Option<(usize, f64)>| -> Result<f64> {
        w.copy_from_slice(x);
        w[di.0] += di.1;
        if let Some((j, s)) = dj {
            w[j] += s;
        }
        f(&w)
    };
    let mut hess = RMatrix::zeros(n, n);
    for i in 0..n {
        let h = hs[i];
        let fp = eval((i, h), None)?;
        let fm = eval((i, -h), None)?;
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (i + 1)..n {
            let k = hs[j];
            let fpp = eval((i, h), Some((j, k)))?;
            let fpm = eval((i, h), Some((j, -k)))?;
            let fmp = eval((i, -h), Some((j, k)))?;
            let fmm = eval((i, -h), Some((j, -k)))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * k);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}
