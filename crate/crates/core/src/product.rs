//! The metric family `F_{t,k}` on a product of model factors:
//!
//! `F_{t,k}(z, v) = (1+t)^{-1/2} sqrt(Σ Q_l + t (Σ Q_l^k)^{1/k})`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coords::RealLayout;
use crate::error::{Error, Result};
use crate::factors::{FactorKind, FactorMetric, QDerivatives};
use crate::linalg::{
    block_diag_inverse, rank1_update_inverse_with_denominator, CMatrix, HermitianMatrix, RMatrix, SymmetricRealMatrix,
};
use crate::metric::{self, normalize, normalize_real, ComplexFinslerMetric};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    t: f64,
    k: u32,
}

impl MetricParams {
    pub fn new(t: f64, k: u32) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("t must be finite and nonnegative, got {t}")));
        }
        if k < 2 {
            return Err(Error::invalid(format!("k must be at least 2, got {k}")));
        }
        Ok(Self { t, k })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// An ordered product `M_1 × ⋯ × M_n` of model factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductManifold {
    factors: Vec<FactorMetric>,
    layout: RealLayout,
}

impl ProductManifold {
    pub fn new(factors: Vec<FactorMetric>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a product manifold needs at least one factor"));
        }
        let layout = RealLayout::new(factors.iter().map(FactorMetric::dim).collect())?;
        Ok(Self { factors, layout })
    }

    /// The unit polydisk in `C^n`.
    pub fn polydisk(n: usize) -> Result<Self> {
        Self::new(vec![FactorMetric::poincare_disk(); n])
    }

    pub fn factors(&self) -> &[FactorMetric] {
        &self.factors
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    /// Total complex dimension `N = Σ m_l`.
    pub fn dim(&self) -> usize {
        self.layout.complex_dim()
    }

    pub fn layout(&self) -> &RealLayout {
        &self.layout
    }

    pub fn is_polydisk(&self) -> bool {
        self.factors.iter().all(|f| f.kind() == FactorKind::PoincareDisk)
    }

    /// Common constant curvature of the factors, if they share one.
    pub fn common_curvature(&self) -> Option<f64> {
        let c = self.factors[0].constant_curvature();
        self.factors.iter().all(|f| f.constant_curvature() == c).then_some(c)
    }

    /// Coordinate range of factor `l`.
    pub fn block_range(&self, l: usize) -> std::ops::Range<usize> {
        let off = self.layout.offset(l);
        off..off + self.factors[l].dim()
    }

    pub fn block<'a, T>(&self, x: &'a [T], l: usize) -> &'a [T] {
        &x[self.block_range(l)]
    }

    fn check_len(&self, x: &[Complex64], what: &str) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "{what} has {} coordinates, expected {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn check_point(&self, z: &[Complex64]) -> Result<()> {
        self.check_len(z, "point")?;
        for (l, f) in self.factors.iter().enumerate() {
            f.check_point(self.block(z, l))?;
        }
        Ok(())
    }

    /// Per-factor values `Q_l(z_l, v_l)`.
    pub fn q_values(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<f64>> {
        self.check_len(z, "point")?;
        self.check_len(v, "vector")?;
        self.factors
            .iter()
            .enumerate()
            .map(|(l, f)| f.q_value(self.block(z, l), self.block(v, l)))
            .collect()
    }

    fn q_derivatives(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<QDerivatives>> {
        self.check_len(z, "point")?;
        self.check_len(v, "vector")?;
        self.factors
            .iter()
            .enumerate()
            .map(|(l, f)| f.q_derivatives(self.block(z, l), self.block(v, l)))
            .collect()
    }

    pub fn z_step_scale(&self, z: &[Complex64]) -> f64 {
        self.factors
            .iter()
            .enumerate()
            .map(|(l, f)| f.z_step_scale(self.block(z, l)))
            .fold(1.0, f64::min)
    }
}

/// Scalar building blocks shared by the tensor formulas.
#[derive(Debug, Clone)]
struct Scalars {
    t: f64,
    k: i32,
    q: Vec<f64>,
    ln_a: f64,
    /// `E_l = 1 + t A^{1/k-1} Q_l^{k-1}`
    e: Vec<f64>,
}

impl Scalars {
    fn new(p: MetricParams, q: Vec<f64>) -> Result<Self> {
        let k = p.k as i32;
        let kf = k as f64;
        let logs: Vec<f64> = q.iter().map(|&x| kf * x.ln()).collect();
        let mx = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if mx == f64::NEG_INFINITY {
            return Err(Error::ZeroSection);
        }
        let ln_a = mx + logs.iter().map(|&l| (l - mx).exp()).sum::<f64>().ln();
        let e = q
            .iter()
            .map(|&x| {
                if x > 0.0 {
                    1.0 + p.t * ((1.0 / kf - 1.0) * ln_a + (kf - 1.0) * x.ln()).exp()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { t: p.t, k, q, ln_a, e })
    }

    fn a_pow(&self, p: f64) -> f64 {
        (p * self.ln_a).exp()
    }

    /// `t(k-1) A^{1/k-1} Q_l^{k-2}`, with `0^0 = 1`.
    fn c(&self, l: usize) -> f64 {
        let kf = self.k as f64;
        self.t * (kf - 1.0) * self.a_pow(1.0 / kf - 1.0) * self.q[l].powi(self.k - 2)
    }

    /// `λ = t(k-1) A^{1/k-2}`
    fn lambda(&self) -> f64 {
        let kf = self.k as f64;
        self.t * (kf - 1.0) * self.a_pow(1.0 / kf - 2.0)
    }

    fn qk1(&self, l: usize) -> f64 {
        self.q[l].powi(self.k - 1)
    }

    fn energy(&self) -> f64 {
        let s: f64 = self.q.iter().sum();
        (s + self.t * self.a_pow(1.0 / self.k as f64)) / (1.0 + self.t)
    }
}

/// Auxiliary scalars of the complex tensor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexTensorAux {
    /// `A = Σ Q_l^k` at the evaluation point.
    pub a: f64,
    /// `E_l = 1 + t A^{1/k-1} Q_l^{k-1}`.
    pub e: Vec<f64>,
    /// `𝓔 = 1 - λ Y* C⁻¹ Y`, the rank-one denominator of the inverse.
    pub c_det_guard: f64,
}

#[derive(Debug, Clone)]
pub struct ComplexFundamentalTensor {
    pub h: HermitianMatrix,
    pub h_inv: HermitianMatrix,
    pub g_value: f64,
    pub aux: ComplexTensorAux,
}

/// Auxiliary quantities of the real tensor, evaluated at the unit-normalized `u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealTensorAux {
    /// `𝓒 = (1/A) Σ E_l Q_l^k / D_l` with `D_l = 1 + t(2k-1) A^{1/k-1} Q_l^{k-1}`.
    pub c: f64,
    /// `W_s = Q_s^{k-1} u_s / D_s`, one real block per factor.
    pub w: Vec<Vec<f64>>,
}

/// Real fundamental tensor: the full Hessian `∂²G/∂u^a∂u^b` and its inverse.
#[derive(Debug, Clone)]
pub struct RealFundamentalTensor {
    pub g: SymmetricRealMatrix,
    pub g_inv: SymmetricRealMatrix,
    pub aux: RealTensorAux,
}

impl RealFundamentalTensor {
    /// `½ ∂²G/∂u^a∂u^b`, the normalization under which strong convexity is usually stated.
    pub fn half_hessian(&self) -> SymmetricRealMatrix {
        SymmetricRealMatrix::new(self.g.matrix().scale(0.5)).expect("square")
    }
}

/// Both sides of the real-complex Hessian identity for a vertical vector `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BridgeCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BridgeCheck {
    pub fn deviation(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs().max(1.0)
    }
}

/// `F_{t,k}` on a fixed product manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMetric {
    manifold: ProductManifold,
    params: MetricParams,
}

impl ProductMetric {
    pub fn new(manifold: ProductManifold, params: MetricParams) -> Self {
        Self { manifold, params }
    }

    pub fn manifold(&self) -> &ProductManifold {
        &self.manifold
    }

    pub fn params(&self) -> MetricParams {
        self.params
    }

    fn scalars(&self, z: &[Complex64], v: &[Complex64]) -> Result<Scalars> {
        Scalars::new(self.params, self.manifold.q_values(z, v)?)
    }

    /// `F_{t,k}(z, v)`.
    pub fn metric_value(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        Ok(self.energy(z, v)?.sqrt())
    }

    /// `∂G/∂v^α` in closed form.
    pub fn energy_dv(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        let (vn, norm) = match normalize(v) {
            Ok(x) => x,
            Err(Error::ZeroSection) => {
                self.manifold.check_point(z)?;
                return Ok(vec![Complex64::new(0.0, 0.0); v.len()]);
            }
            Err(e) => return Err(e),
        };
        let d = self.manifold.q_derivatives(z, &vn)?;
        let s = self.scalars(z, &vn)?;
        let scale = norm / (1.0 + self.params.t);
        let mut out = Vec::with_capacity(v.len());
        for (l, dl) in d.iter().enumerate() {
            out.extend(dl.dv.iter().map(|c| c * (s.e[l] * scale)));
        }
        Ok(out)
    }

    /// Complex fundamental tensor `G_{αβ̄}` and its inverse, in closed form.
    pub fn complex_fundamental_tensor(&self, z: &[Complex64], v: &[Complex64]) -> Result<ComplexFundamentalTensor> {
        let (vn, norm) = normalize(v)?;
        let mfd = &self.manifold;
        let d = mfd.q_derivatives(z, &vn)?;
        let s = self.scalars(z, &vn)?;
        let t = self.params.t;
        let kf = self.params.k as f64;
        let n = mfd.dim();
        let lambda = s.lambda();

        let mut big = CMatrix::zeros(n, n);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        let mut cinv_blocks = Vec::with_capacity(d.len());
        for (l, dl) in d.iter().enumerate() {
            let range = mfd.block_range(l);
            let (e, c) = (s.e[l], s.c(l));
            let cl = &dl.tensor.matrix().scale(Complex64::new(e, 0.0))
                + &CMatrix::outer(&dl.dv, &dl.dv).scale(Complex64::new(c, 0.0));
            for (i, a) in range.clone().enumerate() {
                for (j, b) in range.clone().enumerate() {
                    big[(a, b)] = cl[(i, j)];
                }
                y[a] = dl.dv[i] * s.qk1(l);
            }
            // C_l⁻¹ = (H⁻¹ - c v̄ v̄* / (E + cQ)) / E
            let vbar: Vec<Complex64> = vn[range].iter().map(|x| x.conj()).collect();
            let denom = 1.0 + t * kf * s.a_pow(1.0 / kf - 1.0) * s.qk1(l);
            let hinv = dl.tensor.inverse()?;
            let corr = CMatrix::outer(&vbar, &vbar).scale(Complex64::new(c / denom, 0.0));
            cinv_blocks.push(HermitianMatrix::new(
                (hinv.matrix() - &corr).scale(Complex64::new(1.0 / e, 0.0)),
            )?);
        }
        let yy = CMatrix::outer(&y, &y).scale(Complex64::new(lambda, 0.0));
        let h = HermitianMatrix::new((&big - &yy).scale(Complex64::new(1.0 / (1.0 + t), 0.0)))?;

        let cinv = block_diag_inverse(&cinv_blocks)?;
        let (minv, guard) = rank1_update_inverse_with_denominator(cinv.matrix(), &y, lambda)?;
        let h_inv = HermitianMatrix::new(minv.scale(Complex64::new(1.0 + t, 0.0)))?;

        let a = (s.ln_a + 2.0 * kf * norm.ln()).exp();
        Ok(ComplexFundamentalTensor {
            h,
            h_inv,
            g_value: s.energy() * norm * norm,
            aux: ComplexTensorAux {
                a,
                e: s.e.clone(),
                c_det_guard: guard,
            },
        })
    }

    /// Real fundamental tensor `∂²G/∂u^a∂u^b` and its inverse, in closed form.
    pub fn real_fundamental_tensor(&self, x: &[f64], u: &[f64]) -> Result<RealFundamentalTensor> {
        let mfd = &self.manifold;
        let layout = mfd.layout();
        if x.len() != layout.real_dim() || u.len() != layout.real_dim() {
            return Err(Error::invalid("real point or vector has the wrong length"));
        }
        let (un, _) = normalize_real(u)?;
        let z = layout.to_complex(x);
        let vn = layout.to_complex(&un);
        let d = mfd.q_derivatives(&z, &vn)?;
        let s = self.scalars(&z, &vn)?;
        let t = self.params.t;
        let kf = self.params.k as f64;
        let n2 = layout.real_dim();
        let lambda = s.lambda();

        let mut b = RMatrix::zeros(n2, n2);
        let mut binv = RMatrix::zeros(n2, n2);
        let mut zvec = vec![0.0; n2];
        let mut wvec = vec![0.0; n2];
        let mut w_blocks = Vec::with_capacity(d.len());
        let mut c_sum = 0.0;
        for (l, dl) in d.iter().enumerate() {
            let m = mfd.factors()[l].dim();
            let local = RealLayout::single(m);
            let sl = local.real_representation(&dl.tensor);
            let sinv = local.real_representation(&dl.tensor.inverse()?);
            let range = layout.real_range(l);
            let ul = &un[range.clone()];
            // ∂Q/∂u = 2 S u, ∂²Q/∂u∂u = 2 S
            let q_u = sl.matrix().mul_vec(ul).iter().map(|x| 2.0 * x).collect::<Vec<_>>();
            let (e, c) = (s.e[l], s.c(l));
            let dl_den = 1.0 + t * (2.0 * kf - 1.0) * s.a_pow(1.0 / kf - 1.0) * s.qk1(l);
            let mut wl = Vec::with_capacity(2 * m);
            for (i, a) in range.clone().enumerate() {
                for (j, bb) in range.clone().enumerate() {
                    b[(a, bb)] = 2.0 * e * sl[(i, j)] + c * q_u[i] * q_u[j];
                    binv[(a, bb)] = (0.5 * sinv[(i, j)] - c / dl_den * ul[i] * ul[j]) / e;
                }
                zvec[a] = s.qk1(l) * q_u[i];
                wvec[a] = s.qk1(l) * ul[i] / dl_den;
                wl.push(wvec[a]);
            }
            w_blocks.push(wl);
            c_sum += e * s.q[l].powi(s.k) / dl_den;
        }
        let c_cal = c_sum * (-s.ln_a).exp();

        let zz = RMatrix::outer(&zvec, &zvec).scale(lambda);
        let g = SymmetricRealMatrix::new((&b - &zz).scale(1.0 / (1.0 + t)))?;
        if c_cal.abs() <= crate::linalg::SINGULAR_UPDATE_THRESHOLD {
            return Err(Error::SingularUpdate(c_cal));
        }
        let ww = RMatrix::outer(&wvec, &wvec).scale(lambda / c_cal);
        let g_inv = SymmetricRealMatrix::new((&binv + &ww).scale(1.0 + t))?;
        Ok(RealFundamentalTensor {
            g,
            g_inv,
            aux: RealTensorAux { c: c_cal, w: w_blocks },
        })
    }

    /// Compares `Σ ∂²G/∂u^a∂u^b U^a U^b` with
    /// `2 Re{Σ G_{αβ̄} V^α V̄^β + Σ G_{αβ} V^α V^β}`.
    pub fn real_complex_bridge_check(
        &self,
        z: &[Complex64],
        v: &[Complex64],
        big_v: &[Complex64],
    ) -> Result<BridgeCheck> {
        let layout = self.manifold.layout();
        if big_v.len() != layout.complex_dim() {
            return Err(Error::invalid("vertical vector has the wrong length"));
        }
        let real = self.real_fundamental_tensor(&layout.to_real(z), &layout.to_real(v))?;
        let lhs = real.g.quadratic_form(&layout.to_real(big_v));
        let h = self.complex_fundamental_tensor(z, v)?.h;
        let holo = metric::holomorphic_hessian(self, z, v)?;
        let rhs = 2.0 * (h.form(big_v, big_v) + holo.bilinear(big_v, big_v)).re;
        Ok(BridgeCheck { lhs, rhs })
    }

    /// Weights `w_l = (1+t) E_l Q_l² / (Σ Q + t A^{1/k})²`; the holomorphic
    /// sectional curvature is `Σ w_l c_l`.
    pub fn curvature_weights(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<f64>> {
        let (vn, _) = normalize(v)?;
        let s = self.scalars(z, &vn)?;
        let t = self.params.t;
        let denom = (1.0 + t) * s.energy();
        Ok((0..s.q.len())
            .map(|l| (1.0 + t) * s.e[l] * s.q[l] * s.q[l] / (denom * denom))
            .collect())
    }

    /// Block-diagonal Hermitian connection `Γ̂^γ_{;α}` of the factors.
    pub fn hermitian_connection(&self, z: &[Complex64], v: &[Complex64]) -> Result<CMatrix> {
        let mfd = &self.manifold;
        mfd.check_len(v, "vector")?;
        let n = mfd.dim();
        let mut out = CMatrix::zeros(n, n);
        for (l, f) in mfd.factors().iter().enumerate() {
            let g = f.hermitian_connection(mfd.block(z, l), mfd.block(v, l))?;
            let r = mfd.block_range(l);
            for (i, a) in r.clone().enumerate() {
                for (j, b) in r.clone().enumerate() {
                    out[(a, b)] = g[(i, j)];
                }
            }
        }
        Ok(out)
    }

    /// Block-diagonal horizontal coefficients `Γ̂^γ_{β;α}(z)`, indexed `(γ, β, α)`.
    pub fn hermitian_horizontal(&self, z: &[Complex64]) -> Result<crate::linalg::Array3<Complex64>> {
        let mfd = &self.manifold;
        mfd.check_point(z)?;
        let n = mfd.dim();
        let mut out = crate::linalg::Array3::zeros(n, n, n);
        for (l, f) in mfd.factors().iter().enumerate() {
            let h = f.hermitian_horizontal(mfd.block(z, l))?;
            let r = mfd.block_range(l);
            let off = r.start;
            for g in r.clone() {
                for b in r.clone() {
                    for a in r.clone() {
                        out[(g, b, a)] = h[(g - off, b - off, a - off)];
                    }
                }
            }
        }
        Ok(out)
    }
}

impl ComplexFinslerMetric for ProductMetric {
    fn layout(&self) -> &RealLayout {
        self.manifold.layout()
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        self.manifold.check_point(z)
    }

    fn energy(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        let q = self.manifold.q_values(z, v)?;
        if q.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        Ok(Scalars::new(self.params, q)?.energy())
    }

    fn z_step_scale(&self, z: &[Complex64]) -> f64 {
        self.manifold.z_step_scale(z)
    }

    fn energy_dvbar(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.energy_dv(z, v)?.iter().map(|c| c.conj()).collect())
    }

    fn complex_tensor(&self, z: &[Complex64], v: &[Complex64]) -> Result<HermitianMatrix> {
        Ok(self.complex_fundamental_tensor(z, v)?.h)
    }

    fn real_hessian(&self, x: &[f64], u: &[f64]) -> Result<SymmetricRealMatrix> {
        Ok(self.real_fundamental_tensor(x, u)?.g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky_pd_check;
    use crate::metric::{fd_real_hessian, fd_wirtinger_hessians};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn polydisk(n: usize, t: f64, k: u32) -> ProductMetric {
        ProductMetric::new(ProductManifold::polydisk(n).unwrap(), MetricParams::new(t, k).unwrap())
    }

    fn mixed(t: f64, k: u32) -> ProductMetric {
        let mfd = ProductManifold::new(vec![
            FactorMetric::bergman_ball(2).unwrap(),
            FactorMetric::poincare_disk(),
            FactorMetric::fubini_study(1).unwrap(),
        ])
        .unwrap();
        ProductMetric::new(mfd, MetricParams::new(t, k).unwrap())
    }

    fn mixed_sample() -> (Vec<Complex64>, Vec<Complex64>) {
        (
            vec![c(0.2, -0.3), c(0.1, 0.4), c(-0.5, 0.2), c(1.3, -0.7)],
            vec![c(0.6, 0.2), c(-0.4, 0.9), c(0.3, -0.5), c(0.8, 0.1)],
        )
    }

    #[test]
    fn params_are_validated() {
        assert!(MetricParams::new(-0.1, 2).is_err());
        assert!(MetricParams::new(1.0, 1).is_err());
        assert!(MetricParams::new(f64::NAN, 2).is_err());
        assert!(ProductManifold::new(vec![]).is_err());
    }

    #[test]
    fn metric_value_examples() {
        let m = polydisk(2, 1.0, 2);
        let z = [c(0.0, 0.0); 2];
        let f = m.metric_value(&z, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        let f = m.metric_value(&z, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((f - (1.0 + 0.5f64.sqrt()).sqrt()).abs() < 1e-14);
        assert!((f - 1.30656).abs() < 1e-5);

        let z = [c(0.3, -0.1), c(-0.2, 0.5)];
        let v = [c(0.7, 0.2), c(-1.1, 0.4)];
        let v2: Vec<_> = v.iter().map(|x| x * c(0.0, 2.0)).collect();
        let f1 = m.metric_value(&z, &v).unwrap();
        let f2 = m.metric_value(&z, &v2).unwrap();
        assert!((f2 - 2.0 * f1).abs() < 1e-12 * f1);
        assert_eq!(m.metric_value(&z, &[c(0.0, 0.0); 2]).unwrap(), 0.0);
    }

    #[test]
    fn complex_tensor_example_matches_fd() {
        let m = polydisk(2, 1.0, 2);
        let z = [c(0.0, 0.0); 2];
        let v = [c(1.0, 0.0), c(0.0, 0.0)];
        let ct = m.complex_fundamental_tensor(&z, &v).unwrap();
        let want = CMatrix::diag(&[c(1.0, 0.0), c(0.5, 0.0)]);
        assert!(ct.h.matrix().max_abs_diff(&want) < 1e-14);
        let (oracle, _) = fd_wirtinger_hessians(&m, &z, &v).unwrap();
        assert!(oracle.matrix().max_abs_diff(&want) < 1e-6);
    }

    #[test]
    fn complex_tensor_at_t0_is_block_diagonal() {
        let m = mixed(0.0, 3);
        let (z, v) = mixed_sample();
        let ct = m.complex_fundamental_tensor(&z, &v).unwrap();
        let mfd = m.manifold();
        let blocks: Vec<CMatrix> = mfd
            .factors()
            .iter()
            .enumerate()
            .map(|(l, f)| f.tensor(mfd.block(&z, l)).unwrap().into_matrix())
            .collect();
        let want = CMatrix::block_diag(&blocks).unwrap();
        assert!(ct.h.matrix().max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn complex_tensor_invariants() {
        for (t, k) in [(0.5, 2), (1.0, 3), (5.0, 4)] {
            let m = mixed(t, k);
            let (z, v) = mixed_sample();
            let ct = m.complex_fundamental_tensor(&z, &v).unwrap();
            let g = m.energy(&z, &v).unwrap();
            assert!((ct.h.form(&v, &v).re - g).abs() < 1e-10 * g);
            assert!((ct.g_value - g).abs() < 1e-12 * g);
            let id = ct.h.matrix() * ct.h_inv.matrix();
            assert!(id.max_abs_diff(&CMatrix::identity(4)) < 1e-9);
            assert!(cholesky_pd_check(&ct.h).unwrap().is_pd);
            assert!(ct.aux.c_det_guard > 0.0);
            let (oracle, _) = fd_wirtinger_hessians(&m, &z, &v).unwrap();
            assert!(ct.h.matrix().rel_diff(oracle.matrix()) < 1e-5);
        }
    }

    #[test]
    fn real_tensor_at_t0_is_block_diagonal() {
        let m = mixed(0.0, 2);
        let (z, v) = mixed_sample();
        let layout = m.manifold().layout();
        let x = layout.to_real(&z);
        let rt = m.real_fundamental_tensor(&x, &layout.to_real(&v)).unwrap();
        let mfd = m.manifold();
        let blocks: Vec<RMatrix> = mfd
            .factors()
            .iter()
            .enumerate()
            .map(|(l, f)| f.real_tensor(&x[layout.real_range(l)]).unwrap().into_matrix())
            .collect();
        let want = RMatrix::block_diag(&blocks).unwrap();
        assert!(rt.g.matrix().max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn real_tensor_example() {
        let m = polydisk(2, 1.0, 2);
        let layout = m.manifold().layout();
        let x = vec![0.0; 4];
        let u = layout.to_real(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let rt = m.real_fundamental_tensor(&x, &u).unwrap();
        let dir = layout.to_real(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((rt.g.quadratic_form(&dir) - 1.0).abs() < 1e-14);
        let oracle = fd_real_hessian(&m, &x, &u).unwrap();
        assert!((oracle.quadratic_form(&dir) - 1.0).abs() < 1e-6);
        assert!((rt.half_hessian().quadratic_form(&dir) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn real_tensor_invariants() {
        for (t, k) in [(0.5, 2), (1.0, 3), (5.0, 4)] {
            let m = mixed(t, k);
            let (z, v) = mixed_sample();
            let layout = m.manifold().layout();
            let (x, u) = (layout.to_real(&z), layout.to_real(&v));
            let rt = m.real_fundamental_tensor(&x, &u).unwrap();
            let id = rt.g.matrix() * rt.g_inv.matrix();
            assert!(id.max_abs_diff(&RMatrix::identity(8)) < 1e-9);
            let dense = rt.g.inverse().unwrap();
            assert!(rt.g_inv.matrix().rel_diff(dense.matrix()) < 1e-8);
            assert!(cholesky_pd_check(&rt.g).unwrap().is_pd);
            assert!(rt.aux.c > 0.0);
            let oracle = fd_real_hessian(&m, &x, &u).unwrap();
            assert!(rt.g.matrix().rel_diff(oracle.matrix()) < 1e-5);
        }
    }

    #[test]
    fn bridge_examples() {
        let m = polydisk(2, 1.0, 2);
        let z = [c(0.0, 0.0); 2];
        let v = [c(1.0, 0.0), c(0.0, 0.0)];
        let b = m.real_complex_bridge_check(&z, &v, &[c(0.0, 0.0); 2]).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        let b = m
            .real_complex_bridge_check(&z, &v, &[c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        assert!((b.lhs - 1.0).abs() < 1e-12);
        assert!((b.rhs - 1.0).abs() < 1e-6);

        let m = mixed(0.0, 2);
        let (z, v) = mixed_sample();
        let big_v = [c(0.1, 0.2), c(-0.3, 0.4), c(0.5, 0.0), c(0.0, -0.6)];
        let holo = metric::holomorphic_hessian(&m, &z, &v).unwrap();
        assert!(holo.max_abs() < 1e-6);
        let b = m.real_complex_bridge_check(&z, &v, &big_v).unwrap();
        let herm = m.complex_fundamental_tensor(&z, &v).unwrap().h.form(&big_v, &big_v).re;
        assert!((b.lhs - 2.0 * herm).abs() < 1e-12);
        assert!(b.deviation() < 1e-5);

        let m = mixed(1.0, 3);
        let b = m.real_complex_bridge_check(&z, &v, &big_v).unwrap();
        assert!(b.deviation() < 1e-5, "{b:?}");
    }

    #[test]
    fn zero_section_is_rejected() {
        let m = polydisk(2, 1.0, 2);
        let z = [c(0.1, 0.0); 2];
        let zero = [c(0.0, 0.0); 2];
        assert_eq!(m.complex_fundamental_tensor(&z, &zero).unwrap_err(), Error::ZeroSection);
        assert_eq!(
            m.real_fundamental_tensor(&[0.1, 0.0, 0.1, 0.0], &[0.0; 4]).unwrap_err(),
            Error::ZeroSection
        );
    }

    #[test]
    fn closed_form_gradient_matches_fd() {
        let m = mixed(1.0, 3);
        let (z, v) = mixed_sample();
        let d = m.energy_dvbar(&z, &v).unwrap();
        let (vn, r) = normalize(&v).unwrap();
        for (a, da) in d.iter().enumerate() {
            let fdv = crate::fd::dzbar_real(|w| m.energy(&z, w), &vn, a, crate::fd::STEP).unwrap() * r;
            assert!((da - fdv).norm() < 1e-8);
        }
    }
}
