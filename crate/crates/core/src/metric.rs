//! The interface shared by every complex Finsler metric in the crate, with
//! finite-difference fallbacks for everything that is not known in closed form.

use num_complex::Complex64;

use crate::coords::RealLayout;
use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{CMatrix, HermitianMatrix, SymmetricRealMatrix};

/// A complex Finsler metric, accessed through `G = F²`.
///
/// Only [`energy`](Self::energy) is required; derivatives default to
/// central differences.
pub trait ComplexFinslerMetric: Sync {
    fn layout(&self) -> &RealLayout;

    fn dim(&self) -> usize {
        self.layout().complex_dim()
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()>;

    /// `G(z, v) = F(z, v)²`.
    fn energy(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64>;

    /// Relative step multiplier for differences in `z` (small near a boundary).
    fn z_step_scale(&self, _z: &[Complex64]) -> f64 {
        1.0
    }

    /// `∂G/∂v̄^α`.
    fn energy_dvbar(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        let (vn, r) = normalize(v)?;
        (0..vn.len())
            .map(|a| Ok(fd::dzbar_real(|w| self.energy(z, w), &vn, a, fd::STEP)? * r))
            .collect()
    }

    /// `∂²G/∂v^α∂v̄^β` as a Hermitian matrix `[α][β]`.
    fn complex_tensor(&self, z: &[Complex64], v: &[Complex64]) -> Result<HermitianMatrix> {
        Ok(fd_wirtinger_hessians(self, z, v)?.0)
    }

    /// Full real Hessian `∂²G/∂u^a∂u^b` in the real fiber coordinates.
    fn real_hessian(&self, x: &[f64], u: &[f64]) -> Result<SymmetricRealMatrix> {
        fd_real_hessian(self, x, u)
    }
}

/// Scales `v` to unit Euclidean length; returns the scaled vector and the old length.
pub fn normalize(v: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let r = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::ZeroSection);
    }
    Ok((v.iter().map(|c| c / r).collect(), r))
}

pub fn normalize_real(u: &[f64]) -> Result<(Vec<f64>, f64)> {
    let r = u.iter().map(|c| c * c).sum::<f64>().sqrt();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::ZeroSection);
    }
    Ok((u.iter().map(|c| c / r).collect(), r))
}

/// Real Hessian of `G` in `u` by central differences, at the unit-normalized `u`.
pub fn fd_real_hessian<M: ComplexFinslerMetric + ?Sized>(m: &M, x: &[f64], u: &[f64]) -> Result<SymmetricRealMatrix> {
    let layout = m.layout();
    let z = layout.to_complex(x);
    m.check_point(&z)?;
    let (un, _) = normalize_real(u)?;
    let h = fd::hessian(|w| m.energy(&z, &layout.to_complex(w)), &un, fd::STEP)?;
    SymmetricRealMatrix::new(h)
}

/// `(∂²G/∂v∂v̄, ∂²G/∂v∂v)` from the real finite-difference Hessian.
pub fn fd_wirtinger_hessians<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<(HermitianMatrix, CMatrix)> {
    let layout = m.layout();
    let hess = fd_real_hessian(m, &layout.to_real(z), &layout.to_real(v))?;
    let (mixed, holo) = layout.wirtinger_from_real_hessian(hess.matrix());
    Ok((HermitianMatrix::new(mixed)?, holo))
}

/// `∂G/∂v^α`.
pub fn energy_dv<M: ComplexFinslerMetric + ?Sized>(m: &M, z: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
    Ok(m.energy_dvbar(z, v)?.iter().map(|c| c.conj()).collect())
}

/// Real gradient `∂G/∂u`.
pub fn energy_du<M: ComplexFinslerMetric + ?Sized>(m: &M, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let layout = m.layout();
    let d = m.energy_dvbar(&layout.to_complex(x), &layout.to_complex(u))?;
    Ok(layout.real_gradient(&d))
}

/// `∂²G/∂v^α∂v̄^β` by differentiating the gradient `∂G/∂v̄` once, for
/// metrics whose gradient is exact.
pub fn tensor_from_gradient<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<HermitianMatrix> {
    let (vn, _) = normalize(v)?;
    let n = vn.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .map(|a| fd::dz(|w| m.energy_dvbar(z, w), &vn, a, fd::STEP))
        .collect::<Result<_>>()?;
    HermitianMatrix::new(CMatrix::from_fn(n, n, |a, b| rows[a][b]))
}

/// Holomorphic second derivatives `∂²G/∂v^α∂v^β`, differentiating the
/// gradient `∂G/∂v` once more.
pub fn holomorphic_hessian<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<CMatrix> {
    let (vn, _) = normalize(v)?;
    let n = vn.len();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|b| fd::dz(|w| energy_dv(m, z, w), &vn, b, fd::STEP))
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(n, n, |a, b| cols[b][a]))
}
