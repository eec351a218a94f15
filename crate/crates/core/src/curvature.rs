//! Holomorphic sectional curvature of `F_{t,k}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::nonlinear_connection;
use crate::error::{Error, Result};
use crate::fd;
use crate::metric::{energy_dv, normalize, ComplexFinslerMetric};
use crate::product::{MetricParams, ProductManifold, ProductMetric};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    pub lo: f64,
    pub hi: f64,
    pub c: f64,
    pub n: usize,
    pub t: f64,
    pub k: u32,
}

impl CurvatureBounds {
    pub fn contains(&self, value: f64, slack: f64) -> bool {
        value >= self.lo - slack && value <= self.hi + slack
    }

    /// Distance from `value` to the interval (0 inside).
    pub fn excess(&self, value: f64) -> f64 {
        (self.lo - value).max(value - self.hi).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureLimits {
    pub at_t0: f64,
    pub at_tinf: f64,
}

fn beta(n: usize, p: MetricParams) -> f64 {
    let nf = n as f64;
    (1.0 + p.t()) / (nf + p.t() * nf.powf(1.0 / p.k() as f64))
}

/// Range of the holomorphic sectional curvature when every factor has curvature `c`.
pub fn curvature_bounds(c: f64, n: usize, p: MetricParams) -> Result<CurvatureBounds> {
    if n < 1 {
        return Err(Error::invalid("curvature bounds need at least one factor"));
    }
    let other = beta(n, p) * c;
    let (lo, hi) = if c < 0.0 { (c, other) } else { (other, c) };
    Ok(CurvatureBounds {
        lo,
        hi,
        c,
        n,
        t: p.t(),
        k: p.k(),
    })
}

/// `(lo, hi)` for factors with possibly different curvatures `c_l`.
///
/// The curvature is `Σ w_l c_l` with `w_l ≥ 0` and `β ≤ Σ w_l ≤ 1`.
pub fn mixed_curvature_bounds(cs: &[f64], p: MetricParams) -> Result<(f64, f64)> {
    if cs.is_empty() {
        return Err(Error::invalid("curvature bounds need at least one factor"));
    }
    let b = beta(cs.len(), p);
    let cmin = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let cmax = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((cmin.min(b * cmin), cmax.max(b * cmax)))
}

/// Bounds for a product manifold: exact interval when the factors share a
/// curvature, the weighted-sum envelope otherwise.
pub fn bounds_for(mfd: &ProductManifold, p: MetricParams) -> Result<(f64, f64)> {
    match mfd.common_curvature() {
        Some(c) => {
            let b = curvature_bounds(c, mfd.factor_count(), p)?;
            Ok((b.lo, b.hi))
        }
        None => {
            let cs: Vec<f64> = mfd.factors().iter().map(|f| f.constant_curvature()).collect();
            mixed_curvature_bounds(&cs, p)
        }
    }
}

/// Closed-form holomorphic sectional curvature `K_{t,k}(z, v)`.
pub fn sectional_curvature(m: &ProductMetric, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
    let w = m.curvature_weights(z, v)?;
    Ok(m.manifold()
        .factors()
        .iter()
        .zip(&w)
        .map(|(f, wl)| wl * f.constant_curvature())
        .sum())
}

/// Holomorphic sectional curvature from the connection:
/// `K = -(2/G²) Re G_γ δ_{μ̄}(Γ^γ_{;α} v^α) v̄^μ`, with
/// `δ_{μ̄} = ∂/∂z̄^μ - conj(Γ^λ_{;μ}) ∂/∂v̄^λ`.
pub fn sectional_curvature_direct<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<f64> {
    let (vn, _) = normalize(v)?;
    let n = vn.len();
    let g = m.energy(z, &vn)?;
    let g_dv = energy_dv(m, z, &vn)?;
    let gamma = nonlinear_connection(m, z, &vn)?;
    let psi = |zz: &[Complex64], vv: &[Complex64]| -> Result<Vec<Complex64>> {
        Ok(nonlinear_connection(m, zz, vv)?.mul_vec(vv))
    };
    let base = fd::STEP * m.z_step_scale(z);
    let dz_bar: Vec<Vec<Complex64>> = (0..n)
        .map(|mu| fd::dzbar(|w| psi(w, &vn), z, mu, base))
        .collect::<Result<_>>()?;
    let dv_bar: Vec<Vec<Complex64>> = (0..n)
        .map(|l| fd::dzbar(|w| psi(z, w), &vn, l, fd::STEP))
        .collect::<Result<_>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for gm in 0..n {
        let mut inner = Complex64::new(0.0, 0.0);
        for mu in 0..n {
            let mut delta = dz_bar[mu][gm];
            for l in 0..n {
                delta -= gamma[(l, mu)].conj() * dv_bar[l][gm];
            }
            inner += delta * vn[mu].conj();
        }
        acc += g_dv[gm] * inner;
    }
    Ok(-2.0 / (g * g) * acc.re)
}

/// Limits of `K_{t,k}(z, v)` as `t → 0` and `t → ∞`.
pub fn curvature_limits(mfd: &ProductManifold, z: &[Complex64], v: &[Complex64], k: u32) -> Result<CurvatureLimits> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let (vn, _) = normalize(v)?;
    let q = mfd.q_values(z, &vn)?;
    let cs: Vec<f64> = mfd.factors().iter().map(|f| f.constant_curvature()).collect();
    let s: f64 = q.iter().sum();
    let at_t0 = q.iter().zip(&cs).map(|(q, c)| c * q * q).sum::<f64>() / (s * s);
    let kf = k as f64;
    let qmax = q.iter().copied().fold(0.0, f64::max);
    // scale by the largest Q to keep the powers in range
    let a: f64 = q.iter().map(|x| (x / qmax).powi(k as i32)).sum();
    let num: f64 = q.iter().zip(&cs).map(|(x, c)| c * (x / qmax).powi(k as i32 + 1)).sum();
    let at_tinf = num / a.powf(1.0 + 1.0 / kf);
    Ok(CurvatureLimits { at_t0, at_tinf })
}
