//! Chern-Finsler connection coefficients, geodesic sprays and the
//! Berwald / Kähler property checks.
//!
//! Everything here works on any [`ComplexFinslerMetric`]; derivatives that
//! the metric does not provide in closed form are taken by central differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{Array3, CMatrix};
use crate::metric::{energy_du, energy_dv, normalize, normalize_real, ComplexFinslerMetric};
use crate::product::ProductManifold;
use crate::report::{CheckReport, SampleRecord};

/// Default tolerance of the connection checks.
pub const CHECK_TOLERANCE: f64 = 1e-5;

/// Step for the outer difference when a quantity is already a second difference.
pub const COARSE_STEP: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct ConnectionData {
    /// `Γ^γ_{;α}` as `[γ][α]`.
    pub nonlinear: CMatrix,
    /// `Γ^γ_{β;α}` indexed `(γ, β, α)`.
    pub horizontal: Array3<Complex64>,
    /// `2𝐆^b` in the real view.
    pub real_spray: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ComplexSpray {
    /// `𝔾^α = ½ Γ^α_{;μ} v^μ`
    pub g_alpha: Vec<Complex64>,
    /// `𝔾^α_{νμ} = ∂²𝔾^α/∂v^ν∂v^μ`, indexed `(α, ν, μ)`.
    pub g_numu: Array3<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KahlerLevel {
    Strong,
    Kahler,
    Weak,
}

impl KahlerLevel {
    pub fn name(self) -> &'static str {
        match self {
            KahlerLevel::Strong => "strong",
            KahlerLevel::Kahler => "kahler",
            KahlerLevel::Weak => "weak",
        }
    }
}

fn inverse_tensor<M: ComplexFinslerMetric + ?Sized>(m: &M, z: &[Complex64], v: &[Complex64]) -> Result<CMatrix> {
    let h = m.complex_tensor(z, v)?;
    let pd = h.pd_check()?;
    if !pd.is_pd {
        return Err(Error::Singular(pd.min_pivot));
    }
    Ok(h.inverse()?.into_matrix())
}

/// `Γ^γ_{;α} = G^{τ̄γ} ∂²G/∂v̄^τ∂z^α`; the `z`-derivative is a central difference
/// of `∂G/∂v̄`.
pub fn nonlinear_connection<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<CMatrix> {
    m.check_point(z)?;
    let (vn, r) = normalize(v)?;
    let hinv = inverse_tensor(m, z, &vn)?;
    let n = vn.len();
    let base = fd::STEP * m.z_step_scale(z);
    let cols: Vec<Vec<Complex64>> = (0..n)
        .map(|mu| fd::dz(|w| m.energy_dvbar(w, &vn), z, mu, base))
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(n, n, |g, mu| {
        (0..n).map(|tau| hinv[(tau, g)] * cols[mu][tau]).sum::<Complex64>() * r
    }))
}

/// `Γ^γ_{β;α} = ∂Γ^γ_{;α}/∂v^β`, indexed `(γ, β, α)`.
pub fn horizontal_coefficients<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<Array3<Complex64>> {
    let (vn, _) = normalize(v)?;
    let n = vn.len();
    let d: Vec<CMatrix> = (0..n)
        .map(|b| fd::dz(|w| nonlinear_connection(m, z, w), &vn, b, COARSE_STEP))
        .collect::<Result<_>>()?;
    Ok(Array3::from_fn(n, n, n, |g, b, a| d[b][(g, a)]))
}

/// `2𝐆^b = G^{bc}(∂²G/∂u^c∂x^a u^a - ∂G/∂x^c)` with `G^{bc}` the inverse of the
/// full real Hessian of `G` in `u`.
pub fn real_spray<M: ComplexFinslerMetric + ?Sized>(m: &M, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let layout = m.layout();
    if x.len() != layout.real_dim() || u.len() != layout.real_dim() {
        return Err(Error::invalid("real point or vector has the wrong length"));
    }
    let z = layout.to_complex(x);
    m.check_point(&z)?;
    let (un, r) = normalize_real(u)?;
    let hess = m.real_hessian(x, &un)?;
    let pd = hess.pd_check()?;
    if !pd.is_pd {
        return Err(Error::Singular(pd.min_pivot));
    }
    let ginv = hess.inverse()?;
    let base = fd::STEP * m.z_step_scale(&z);
    let mut w = x.to_vec();
    let mixed = fd::derivative(
        |s| {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = x[i] + s * un[i];
            }
            energy_du(m, &w, &un)
        },
        base,
    )?;
    let dx = fd::gradient(|w| m.energy(&layout.to_complex(w), &layout.to_complex(&un)), x, base)?;
    let rhs: Vec<f64> = mixed.iter().zip(&dx).map(|(a, b)| a - b).collect();
    Ok(ginv.matrix().mul_vec(&rhs).iter().map(|s| s * r * r).collect())
}

/// The per-factor Levi-Civita quadratic form `Γ^c_{ab} u^a u^b`.
pub fn levi_civita_spray(mfd: &ProductManifold, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let layout = mfd.layout();
    if x.len() != layout.real_dim() || u.len() != layout.real_dim() {
        return Err(Error::invalid("real point or vector has the wrong length"));
    }
    let mut out = vec![0.0; x.len()];
    for (l, f) in mfd.factors().iter().enumerate() {
        let range = layout.real_range(l);
        let ul = &u[range.clone()];
        let lc = f.levi_civita(&x[range.clone()], ul)?;
        for (i, o) in out[range].iter_mut().enumerate() {
            *o = lc.row(i).iter().zip(ul).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

pub fn connection_data<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<ConnectionData> {
    let layout = m.layout();
    Ok(ConnectionData {
        nonlinear: nonlinear_connection(m, z, v)?,
        horizontal: horizontal_coefficients(m, z, v)?,
        real_spray: real_spray(m, &layout.to_real(z), &layout.to_real(v))?,
    })
}

/// `𝔾^α` and its second `v`-derivatives.
pub fn complex_spray<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<ComplexSpray> {
    let g_alpha = half_contract(&nonlinear_connection(m, z, v)?, v);
    let (vn, _) = normalize(v)?;
    let n = vn.len();
    // ∂𝔾^α/∂v^ν = ½(Γ^α_{ν;κ} v^κ + Γ^α_{;ν})
    let first = |w: &[Complex64]| -> Result<CMatrix> {
        let hc = horizontal_coefficients(m, z, w)?;
        let nl = nonlinear_connection(m, z, w)?;
        Ok(CMatrix::from_fn(n, n, |a, nu| {
            0.5 * ((0..n).map(|k| hc[(a, nu, k)] * w[k]).sum::<Complex64>() + nl[(a, nu)])
        }))
    };
    let d: Vec<CMatrix> = (0..n)
        .map(|mu| fd::dz(first, &vn, mu, COARSE_STEP))
        .collect::<Result<_>>()?;
    Ok(ComplexSpray {
        g_alpha,
        g_numu: Array3::from_fn(n, n, n, |a, nu, mu| d[mu][(a, nu)]),
    })
}

fn half_contract(gamma: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    gamma.mul_vec(v).iter().map(|c| c * 0.5).collect()
}

fn sample(z: &[Complex64], v: &[Complex64]) -> impl FnOnce() -> SampleRecord {
    let (z, v) = (z.to_vec(), v.to_vec());
    move || SampleRecord { z, v }
}

fn rel_diff3(a: &Array3<Complex64>, b: &Array3<Complex64>) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

/// Largest pairwise deviation of the horizontal coefficients over `v_samples` at `z`.
pub fn check_berwald<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v_samples: &[Vec<Complex64>],
) -> Result<CheckReport> {
    if v_samples.len() < 2 {
        return Err(Error::invalid("the Berwald check needs at least two fiber samples"));
    }
    let coeffs: Vec<Array3<Complex64>> = v_samples
        .iter()
        .map(|v| horizontal_coefficients(m, z, v))
        .collect::<Result<_>>()?;
    let mut report = CheckReport::new("berwald", CHECK_TOLERANCE);
    for i in 0..coeffs.len() {
        for j in (i + 1)..coeffs.len() {
            report.record(rel_diff3(&coeffs[i], &coeffs[j]), sample(z, &v_samples[j]));
        }
    }
    report.samples = v_samples.len();
    Ok(report)
}

/// Residual of one of the three Kähler conditions from given horizontal coefficients.
pub fn kahler_residual(horizontal: &Array3<Complex64>, v: &[Complex64], g_dv: &[Complex64], level: KahlerLevel) -> f64 {
    let (n, _, _) = horizontal.dims();
    let torsion = |g: usize, b: usize, a: usize| horizontal[(g, b, a)] - horizontal[(g, a, b)];
    let contracted = |g: usize, a: usize| (0..n).map(|b| torsion(g, b, a) * v[b]).sum::<Complex64>();
    let mut worst: f64 = 0.0;
    match level {
        KahlerLevel::Strong => {
            for g in 0..n {
                for b in 0..n {
                    for a in 0..n {
                        worst = worst.max(torsion(g, b, a).norm());
                    }
                }
            }
        }
        KahlerLevel::Kahler => {
            for g in 0..n {
                for a in 0..n {
                    worst = worst.max(contracted(g, a).norm());
                }
            }
        }
        KahlerLevel::Weak => {
            for a in 0..n {
                let s: Complex64 = (0..n).map(|g| g_dv[g] * contracted(g, a)).sum();
                worst = worst.max(s.norm());
            }
        }
    }
    worst
}

/// Kähler residual at the unit-normalized `v`; `G_γ = ∂G/∂v^γ` in the weak form.
pub fn check_kahler<M: ComplexFinslerMetric + ?Sized>(
    m: &M,
    z: &[Complex64],
    v: &[Complex64],
    level: KahlerLevel,
) -> Result<CheckReport> {
    let (vn, _) = normalize(v)?;
    let hc = horizontal_coefficients(m, z, &vn)?;
    let g_dv = energy_dv(m, z, &vn)?;
    let mut report = CheckReport::new(format!("kahler_{}", level.name()), CHECK_TOLERANCE);
    report.record(kahler_residual(&hc, &vn, &g_dv, level), sample(z, v));
    Ok(report)
}

/// Departure of `u ↦ 2𝐆(x, u)` from a quadratic form, probed with three
/// vectors: the parallelogram law and the third-order polarization
/// identity, relative to `max(1, max|2𝐆|)`.
pub fn spray_polarization_residual<M: ComplexFinslerMetric + ?Sized>(m: &M, x: &[f64], us: [&[f64]; 3]) -> Result<f64> {
    let comb = |c: [f64; 3]| -> Vec<f64> {
        (0..x.len())
            .map(|i| c[0] * us[0][i] + c[1] * us[1][i] + c[2] * us[2][i])
            .collect()
    };
    let spray = |c: [f64; 3]| real_spray(m, x, &comb(c));
    let s1 = spray([1.0, 0.0, 0.0])?;
    let s2 = spray([0.0, 1.0, 0.0])?;
    let s3 = spray([0.0, 0.0, 1.0])?;
    let s12 = spray([1.0, 1.0, 0.0])?;
    let s13 = spray([1.0, 0.0, 1.0])?;
    let s23 = spray([0.0, 1.0, 1.0])?;
    let s123 = spray([1.0, 1.0, 1.0])?;
    let s1m2 = spray([1.0, -1.0, 0.0])?;
    let scale = [&s1, &s2, &s3, &s12, &s13, &s23, &s123]
        .iter()
        .flat_map(|s| s.iter())
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let cubic = s123[i] - s12[i] - s13[i] - s23[i] + s1[i] + s2[i] + s3[i];
        let parallelogram = s12[i] + s1m2[i] - 2.0 * s1[i] - 2.0 * s2[i];
        worst = worst.max(cubic.abs()).max(parallelogram.abs());
    }
    Ok(worst / scale)
}

/// Relative deviation between two real vectors, scaled by `max(1, max|b|)`.
pub fn vec_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Largest entry of the cross-factor blocks of `Γ^γ_{β;α}`.
pub fn cross_block_magnitude(mfd: &ProductManifold, horizontal: &Array3<Complex64>) -> f64 {
    let n = mfd.dim();
    let owner = |i: usize| mfd.layout().block_of(i);
    let mut worst: f64 = 0.0;
    for g in 0..n {
        for b in 0..n {
            for a in 0..n {
                if owner(g) != owner(b) || owner(g) != owner(a) {
                    worst = worst.max(horizontal[(g, b, a)].norm());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::FactorMetric;
    use crate::product::{MetricParams, ProductMetric};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn polydisk(t: f64, k: u32) -> ProductMetric {
        ProductMetric::new(ProductManifold::polydisk(2).unwrap(), MetricParams::new(t, k).unwrap())
    }

    fn flat(t: f64, k: u32) -> ProductMetric {
        let mfd = ProductManifold::new(vec![
            FactorMetric::euclidean_flat(2).unwrap(),
            FactorMetric::euclidean_flat(1).unwrap(),
        ])
        .unwrap();
        ProductMetric::new(mfd, MetricParams::new(t, k).unwrap())
    }

    #[test]
    fn nonlinear_connection_polydisk_example() {
        let z = [c(0.5, 0.0), c(0.0, 0.0)];
        let v = [c(1.0, 0.0), c(1.0, 0.0)];
        for (t, k) in [(0.0, 2), (1.0, 2), (5.0, 3)] {
            let m = polydisk(t, k);
            let g = nonlinear_connection(&m, &z, &v).unwrap();
            assert!((g[(0, 0)] - 4.0 / 3.0).norm() < 1e-8, "{:?}", g[(0, 0)]);
            assert!(g[(1, 0)].norm() < 1e-8);
            assert!(g[(0, 1)].norm() < 1e-8);
            let closed = m.hermitian_connection(&z, &v).unwrap();
            assert!(g.max_abs_diff(&closed) < 1e-5);
        }
    }

    #[test]
    fn nonlinear_connection_flat_and_scaling() {
        let m = flat(1.0, 3);
        let z = [c(0.3, 1.0), c(-2.0, 0.5), c(0.0, 0.1)];
        let v = [c(1.0, 0.2), c(0.5, -0.5), c(0.3, 0.0)];
        assert!(nonlinear_connection(&m, &z, &v).unwrap().max_abs() < 1e-9);

        let m = polydisk(1.0, 2);
        let z = [c(0.3, -0.2), c(0.1, 0.4)];
        let v = [c(0.7, 0.1), c(-0.2, 0.9)];
        let v2: Vec<_> = v.iter().map(|x| x * 2.0).collect();
        let g1 = nonlinear_connection(&m, &z, &v).unwrap();
        let g2 = nonlinear_connection(&m, &z, &v2).unwrap();
        assert!(g2.max_abs_diff(&g1.scale(c(2.0, 0.0))) < 1e-8 * g1.max_abs().max(1.0));
    }

    #[test]
    fn horizontal_polydisk_example() {
        let m = polydisk(1.0, 2);
        let z = [c(0.5, 0.0), c(0.0, 0.0)];
        let h = horizontal_coefficients(&m, &z, &[c(1.0, 0.0), c(0.5, 0.2)]).unwrap();
        assert!((h[(0, 0, 0)] - 4.0 / 3.0).norm() < 1e-6);
        assert!(cross_block_magnitude(m.manifold(), &h) < 1e-6);
        let h2 = horizontal_coefficients(&m, &z, &[c(-0.3, 1.0), c(0.8, 0.0)]).unwrap();
        assert!(h.max_abs_diff(&h2) < 1e-6);
        let closed = m.hermitian_horizontal(&z).unwrap();
        assert!(h.max_abs_diff(&closed) < 1e-6);
    }

    #[test]
    fn horizontal_contracts_to_nonlinear() {
        let m = polydisk(0.5, 3);
        let z = [c(0.2, 0.3), c(-0.4, 0.1)];
        let v = [c(0.6, -0.2), c(0.3, 0.5)];
        let h = horizontal_coefficients(&m, &z, &v).unwrap();
        let g = nonlinear_connection(&m, &z, &v).unwrap();
        for gm in 0..2 {
            for a in 0..2 {
                let s: Complex64 = (0..2).map(|b| h[(gm, b, a)] * v[b]).sum();
                assert!((s - g[(gm, a)]).norm() < 1e-8 * g.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn real_spray_examples() {
        let m = flat(1.0, 2);
        let x = vec![0.3, -1.0, 0.5, 0.2, 0.0, 1.0];
        let u = vec![1.0, 0.5, -0.2, 0.3, 0.7, 0.1];
        assert!(real_spray(&m, &x, &u).unwrap().iter().all(|s| s.abs() < 1e-8));

        let m = polydisk(1.0, 2);
        let s = real_spray(&m, &[0.0; 4], &[0.3, -0.7, 1.1, 0.2]).unwrap();
        assert!(s.iter().all(|s| s.abs() < 1e-8), "{s:?}");

        let layout = m.manifold().layout();
        let x = layout.to_real(&[c(0.5, 0.0), c(0.0, 0.0)]);
        let u = layout.to_real(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = real_spray(&m, &x, &u).unwrap();
        assert!((s[0] - 4.0 / 3.0).abs() < 1e-6, "{s:?}");
        let lc = levi_civita_spray(m.manifold(), &x, &u).unwrap();
        assert!(vec_rel_diff(&s, &lc) < 1e-4);
    }

    #[test]
    fn berwald_and_kahler_checks_pass_on_polydisk() {
        let m = polydisk(1.0, 3);
        let z = [c(0.3, -0.1), c(-0.2, 0.4)];
        let vs = vec![
            vec![c(1.0, 0.0), c(0.2, 0.3)],
            vec![c(-0.4, 0.7), c(0.9, -0.1)],
            vec![c(0.1, 0.1), c(-1.0, 0.5)],
        ];
        let r = check_berwald(&m, &z, &vs).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(check_berwald(&m, &z, &vs[..1]).is_err());
        for level in [KahlerLevel::Strong, KahlerLevel::Kahler, KahlerLevel::Weak] {
            let r = check_kahler(&m, &z, &vs[1], level).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn flat_checks_have_zero_deviation() {
        let m = flat(1.0, 2);
        let z = [c(0.3, 1.0), c(-2.0, 0.5), c(0.0, 0.1)];
        let vs = vec![
            vec![c(1.0, 0.0), c(0.2, 0.3), c(0.0, 1.0)],
            vec![c(-0.4, 0.7), c(0.9, -0.1), c(0.5, 0.5)],
        ];
        let r = check_berwald(&m, &z, &vs).unwrap();
        assert!(r.max_deviation < 1e-9, "{r:?}");
        let r = check_kahler(&m, &z, &vs[0], KahlerLevel::Strong).unwrap();
        assert!(r.max_deviation < 1e-9);
    }

    #[test]
    fn complex_spray_examples() {
        let m = polydisk(1.0, 2);
        let z = [c(0.5, 0.0), c(0.0, 0.0)];
        let s = complex_spray(&m, &z, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((s.g_alpha[0] - 2.0 / 3.0).norm() < 1e-8);

        let v = [c(0.4, 0.3), c(-0.2, 0.6)];
        let lam = c(0.0, 2.0);
        let vl: Vec<_> = v.iter().map(|x| x * lam).collect();
        let s1 = complex_spray(&m, &z, &v).unwrap();
        let s2 = complex_spray(&m, &z, &vl).unwrap();
        for a in 0..2 {
            assert!((s2.g_alpha[a] - s1.g_alpha[a] * lam * lam).norm() < 1e-8);
        }
        // Berwald: second derivatives are the v-independent horizontal coefficients.
        let closed = m.hermitian_horizontal(&z).unwrap();
        for a in 0..2 {
            for nu in 0..2 {
                for mu in 0..2 {
                    let sym = 0.5 * (closed[(a, nu, mu)] + closed[(a, mu, nu)]);
                    assert!((s1.g_numu[(a, nu, mu)] - sym).norm() < 1e-5);
                }
            }
        }

        let m = flat(1.0, 3);
        let s = complex_spray(&m, &[c(0.0, 0.0); 3], &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(s.g_alpha.iter().all(|g| g.norm() < 1e-9));
    }

    #[test]
    fn polarization_accepts_quadratic_spray() {
        let m = polydisk(1.0, 2);
        let x = vec![0.2, -0.3, 0.1, 0.4];
        let r = spray_polarization_residual(
            &m,
            &x,
            [&[1.0, 0.2, -0.3, 0.5], &[-0.2, 0.8, 0.4, 0.1], &[0.3, -0.1, 0.9, -0.6]],
        )
        .unwrap();
        assert!(r < 1e-4, "{r}");
    }
}
