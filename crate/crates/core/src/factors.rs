//! Model Hermitian factors: the Poincaré disk, the unit ball with its
//! Bergman-type metric, complex projective space in an affine chart with the
//! Fubini-Study metric, and flat complex space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coords::RealLayout;
use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{Array3, CMatrix, HermitianMatrix, RMatrix, SymmetricRealMatrix};

/// Points closer than this to the unit sphere are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    PoincareDisk,
    BergmanBall,
    FubiniStudy,
    EuclideanFlat,
}

impl FactorKind {
    pub fn name(self) -> &'static str {
        match self {
            FactorKind::PoincareDisk => "poincare_disk",
            FactorKind::BergmanBall => "bergman_ball",
            FactorKind::FubiniStudy => "fubini_study",
            FactorKind::EuclideanFlat => "euclidean_flat",
        }
    }
}

impl std::fmt::Display for FactorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FactorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poincare_disk" | "disk" => Ok(FactorKind::PoincareDisk),
            "bergman_ball" | "ball" => Ok(FactorKind::BergmanBall),
            "fubini_study" | "projective" => Ok(FactorKind::FubiniStudy),
            "euclidean_flat" | "flat" => Ok(FactorKind::EuclideanFlat),
            other => Err(Error::invalid(format!("unknown factor kind `{other}`"))),
        }
    }
}

/// Closed-form derivatives of a factor metric at `(z, v)`.
#[derive(Debug, Clone)]
pub struct QDerivatives {
    /// `[Q]_{αβ̄}(z)`
    pub tensor: HermitianMatrix,
    /// `∂Q/∂v^α`
    pub dv: Vec<Complex64>,
    /// `∂Q/∂z^μ`
    pub dz: Vec<Complex64>,
}

/// One factor `(M_l, Q_l)` of a product manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorMetric {
    kind: FactorKind,
    dim: usize,
}

impl FactorMetric {
    pub fn new(kind: FactorKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("factor dimension must be positive"));
        }
        if kind == FactorKind::PoincareDisk && dim != 1 {
            return Err(Error::invalid("the Poincaré disk has dimension 1"));
        }
        Ok(Self { kind, dim })
    }

    pub fn poincare_disk() -> Self {
        Self {
            kind: FactorKind::PoincareDisk,
            dim: 1,
        }
    }

    pub fn bergman_ball(dim: usize) -> Result<Self> {
        Self::new(FactorKind::BergmanBall, dim)
    }

    pub fn fubini_study(dim: usize) -> Result<Self> {
        Self::new(FactorKind::FubiniStudy, dim)
    }

    pub fn euclidean_flat(dim: usize) -> Result<Self> {
        Self::new(FactorKind::EuclideanFlat, dim)
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Constant holomorphic sectional curvature.
    pub fn constant_curvature(&self) -> f64 {
        match self.kind {
            FactorKind::PoincareDisk | FactorKind::BergmanBall => -4.0,
            FactorKind::FubiniStudy => 4.0,
            FactorKind::EuclideanFlat => 0.0,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self.kind, FactorKind::PoincareDisk | FactorKind::BergmanBall)
    }

    // sign s in 1 + s|z|^2
    fn sign(&self) -> f64 {
        match self.kind {
            FactorKind::PoincareDisk | FactorKind::BergmanBall => -1.0,
            FactorKind::FubiniStudy => 1.0,
            FactorKind::EuclideanFlat => 0.0,
        }
    }

    pub fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::invalid(format!(
                "{} point has {} coordinates, expected {}",
                self.kind,
                z.len(),
                self.dim
            )));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        if self.is_bounded() {
            let r = norm(z);
            if r >= 1.0 - BOUNDARY_MARGIN {
                return Err(Error::domain(
                    self.kind.name(),
                    format!("|z| = {r} is not inside the unit ball"),
                ));
            }
        }
        Ok(())
    }

    fn check_vector(&self, v: &[Complex64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::invalid(format!(
                "{} vector has {} coordinates, expected {}",
                self.kind,
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Relative finite-difference step scale in `z`: shrinks near the boundary.
    pub fn z_step_scale(&self, z: &[Complex64]) -> f64 {
        if self.is_bounded() {
            (1.0 - norm(z)).clamp(BOUNDARY_MARGIN, 1.0)
        } else {
            1.0
        }
    }

    /// `Q(z, v)`.
    pub fn q_value(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        self.check_point(z)?;
        self.check_vector(v)?;
        let r = norm_sqr(z);
        let vv = norm_sqr(v);
        let zv = pairing(z, v).norm_sqr();
        Ok(match self.kind {
            FactorKind::PoincareDisk => vv / ((1.0 - r) * (1.0 - r)),
            FactorKind::BergmanBall => ((1.0 - r) * vv + zv) / ((1.0 - r) * (1.0 - r)),
            FactorKind::FubiniStudy => ((1.0 + r) * vv - zv) / ((1.0 + r) * (1.0 + r)),
            FactorKind::EuclideanFlat => vv,
        })
    }

    /// `[Q]_{αβ̄}(z)`.
    pub fn tensor(&self, z: &[Complex64]) -> Result<HermitianMatrix> {
        self.check_point(z)?;
        Ok(HermitianMatrix::new(self.tensor_unchecked(z)).expect("square"))
    }

    fn tensor_unchecked(&self, z: &[Complex64]) -> CMatrix {
        let m = self.dim;
        let s = self.sign();
        if s == 0.0 {
            return CMatrix::identity(m);
        }
        let d = 1.0 + s * norm_sqr(z);
        CMatrix::from_fn(m, m, |a, b| {
            let delta = if a == b { 1.0 / d } else { 0.0 };
            Complex64::new(delta, 0.0) - z[a].conj() * z[b] * (s / (d * d))
        })
    }

    /// `∂[Q]_{αβ̄}/∂z^μ`, one matrix per `μ`.
    pub fn tensor_dz(&self, z: &[Complex64]) -> Result<Vec<CMatrix>> {
        self.check_point(z)?;
        let m = self.dim;
        let s = self.sign();
        if s == 0.0 {
            return Ok(vec![CMatrix::zeros(m, m); m]);
        }
        let d = 1.0 + s * norm_sqr(z);
        let (d2, d3) = (d * d, d * d * d);
        Ok((0..m)
            .map(|mu| {
                CMatrix::from_fn(m, m, |a, b| {
                    let mut e = z[a].conj() * z[b] * z[mu].conj() * (2.0 / d3);
                    if a == b {
                        e -= z[mu].conj() * (s / d2);
                    }
                    if b == mu {
                        e -= z[a].conj() * (s / d2);
                    }
                    e
                })
            })
            .collect())
    }

    /// Tensor, `∂Q/∂v` and `∂Q/∂z` at `(z, v)`.
    pub fn q_derivatives(&self, z: &[Complex64], v: &[Complex64]) -> Result<QDerivatives> {
        self.check_vector(v)?;
        let tensor = self.tensor(z)?;
        let vbar: Vec<Complex64> = v.iter().map(|c| c.conj()).collect();
        let dv = tensor.matrix().mul_vec(&vbar);
        let dz = self.tensor_dz(z)?.iter().map(|dh| dh.bilinear(v, &vbar)).collect();
        Ok(QDerivatives { tensor, dv, dz })
    }

    /// Horizontal Hermitian connection coefficients, indexed `(γ, β, α)`:
    /// `Σ_λ [Q]^{λ̄γ} ∂[Q]_{βλ̄}/∂z^α`.
    pub fn hermitian_horizontal(&self, z: &[Complex64]) -> Result<Array3<Complex64>> {
        let m = self.dim;
        if self.kind == FactorKind::EuclideanFlat {
            self.check_point(z)?;
            return Ok(Array3::zeros(m, m, m));
        }
        let hinv = self.tensor(z)?.inverse()?;
        let dh = self.tensor_dz(z)?;
        Ok(Array3::from_fn(m, m, m, |g, b, a| {
            (0..m).map(|l| hinv[(l, g)] * dh[a][(b, l)]).sum()
        }))
    }

    /// Hermitian connection `Γ̂^γ_{;α}(z, v)` as a matrix `[γ][α]`.
    pub fn hermitian_connection(&self, z: &[Complex64], v: &[Complex64]) -> Result<CMatrix> {
        self.check_vector(v)?;
        let h = self.hermitian_horizontal(z)?;
        let m = self.dim;
        Ok(CMatrix::from_fn(m, m, |g, a| (0..m).map(|b| h[(g, b, a)] * v[b]).sum()))
    }

    /// Real tensor `∂²Q/∂u^a∂u^b` at `x`, in the layout `[Re z; Im z]`.
    pub fn real_tensor(&self, x: &[f64]) -> Result<SymmetricRealMatrix> {
        let layout = RealLayout::single(self.dim);
        if x.len() != layout.real_dim() {
            return Err(Error::invalid("real point has the wrong length"));
        }
        let z = layout.to_complex(x);
        let s = layout.real_representation(&self.tensor(&z)?);
        SymmetricRealMatrix::new(s.matrix().scale(2.0))
    }

    /// Christoffel symbols of the real tensor, indexed `(c, a, b)`.
    pub fn levi_civita_symbols(&self, x: &[f64]) -> Result<Array3<f64>> {
        let n = 2 * self.dim;
        let s = self.real_tensor(x)?;
        if self.kind == FactorKind::EuclideanFlat {
            return Ok(Array3::zeros(n, n, n));
        }
        let sinv = s.inverse()?;
        let layout = RealLayout::single(self.dim);
        let base = fd::STEP * self.z_step_scale(&layout.to_complex(x));
        let mut w = x.to_vec();
        let ds: Vec<RMatrix> = (0..n)
            .map(|a| {
                let h = fd::step_for(x[a], base);
                let r = fd::derivative(
                    |t| {
                        w[a] = x[a] + t;
                        Ok(self.real_tensor(&w)?.into_matrix())
                    },
                    h,
                );
                w[a] = x[a];
                r
            })
            .collect::<Result<_>>()?;
        Ok(Array3::from_fn(n, n, n, |c, a, b| {
            0.5 * (0..n)
                .map(|d| sinv[(c, d)] * (ds[a][(d, b)] + ds[b][(d, a)] - ds[d][(a, b)]))
                .sum::<f64>()
        }))
    }

    /// Levi-Civita connection contracted with `u`: `L[c][b] = Σ_a Γ^c_{ab} u^a`.
    pub fn levi_civita(&self, x: &[f64], u: &[f64]) -> Result<RMatrix> {
        let n = 2 * self.dim;
        if u.len() != n {
            return Err(Error::invalid("real vector has the wrong length"));
        }
        let g = self.levi_civita_symbols(x)?;
        Ok(RMatrix::from_fn(n, n, |c, b| (0..n).map(|a| g[(c, a, b)] * u[a]).sum()))
    }

    /// Holomorphic sectional curvature of `Q` from its Hermitian connection,
    /// with `∂/∂z̄` taken by finite differences.
    pub fn holomorphic_curvature_fd(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        let d = self.q_derivatives(z, v)?;
        let q = d.tensor.form(v, v).re;
        if q <= 0.0 {
            return Err(Error::ZeroSection);
        }
        let psi = |w: &[Complex64]| -> Result<Vec<Complex64>> { Ok(self.hermitian_connection(w, v)?.mul_vec(v)) };
        let base = fd::STEP * self.z_step_scale(z);
        let mut acc = Complex64::new(0.0, 0.0);
        for (mu, vm) in v.iter().enumerate() {
            let dpsi = fd::dzbar(psi, z, mu, base)?;
            acc += d.dv.iter().zip(&dpsi).map(|(a, b)| a * b).sum::<Complex64>() * vm.conj();
        }
        Ok(-2.0 / (q * q) * acc.re)
    }
}

pub(crate) fn norm_sqr(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn norm(z: &[Complex64]) -> f64 {
    norm_sqr(z).sqrt()
}

/// `⟨z, v⟩ = Σ z^α conj(v^α)`.
pub fn pairing(z: &[Complex64], v: &[Complex64]) -> Complex64 {
    z.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}
