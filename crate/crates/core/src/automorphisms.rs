//! Biholomorphisms of the ball and polydisk, and pullbacks of metrics along them.

use num_complex::Complex64;

use crate::connection::horizontal_coefficients;
use crate::coords::RealLayout;
use crate::error::{Error, Result};
use crate::factors::pairing;
use crate::fd;
use crate::linalg::{Array3, CMatrix, HermitianMatrix};
use crate::metric::{energy_du, normalize, normalize_real, tensor_from_gradient, ComplexFinslerMetric};
use crate::product::ProductMetric;
use crate::report::{CheckReport, SampleRecord};

/// Tolerance for the pullback transformation laws.
pub const PULLBACK_TOLERANCE: f64 = 1e-4;

const UNITARY_TOLERANCE: f64 = 1e-12;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// A holomorphic map with holomorphic inverse.
pub trait Biholomorphism: Sync {
    fn dim(&self) -> usize;

    fn check_domain(&self, z: &[Complex64]) -> Result<()>;

    fn forward(&self, z: &[Complex64]) -> Result<Vec<Complex64>>;

    fn inverse(&self, w: &[Complex64]) -> Result<Vec<Complex64>>;

    /// `J[i][j] = ∂f^i/∂z^j`.
    fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        fd_jacobian(|w| self.forward(w), z, fd::STEP * self.step_scale(z))
    }

    /// Jacobian of the inverse map at `w`.
    fn inverse_jacobian(&self, w: &[Complex64]) -> Result<CMatrix> {
        self.jacobian(&self.inverse(w)?)?.inverse()
    }

    /// `H[i][(j, k)] = ∂²f^i/∂z^j∂z^k`.
    fn second_derivatives(&self, z: &[Complex64]) -> Result<Vec<CMatrix>> {
        let n = self.dim();
        let cols: Vec<CMatrix> = (0..n)
            .map(|k| fd::dz(|w| self.jacobian(w), z, k, fd::STEP * self.step_scale(z)))
            .collect::<Result<_>>()?;
        Ok((0..n).map(|i| CMatrix::from_fn(n, n, |j, k| cols[k][(i, j)])).collect())
    }

    /// Relative step multiplier for differences near the boundary.
    fn step_scale(&self, _z: &[Complex64]) -> f64 {
        1.0
    }
}

/// Holomorphic Jacobian of `f` by Wirtinger differences.
pub fn fd_jacobian(f: impl Fn(&[Complex64]) -> Result<Vec<Complex64>>, z: &[Complex64], base: f64) -> Result<CMatrix> {
    let n = z.len();
    let cols: Vec<Vec<Complex64>> = (0..n).map(|j| fd::dz(&f, z, j, base)).collect::<Result<_>>()?;
    let m = cols.first().map_or(0, Vec::len);
    Ok(CMatrix::from_fn(m, n, |i, j| cols[j][i]))
}

/// `(f(z), f_*(z) v)`.
pub fn apply_with_differential<B: Biholomorphism + ?Sized>(
    map: &B,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if v.len() != map.dim() {
        return Err(Error::invalid("vector has the wrong dimension"));
    }
    let w = map.forward(z)?;
    let j = map.jacobian(z)?;
    Ok((w, j.mul_vec(v)))
}

fn check_len(z: &[Complex64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::invalid(format!("expected {n} coordinates, got {}", z.len())));
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::invalid("non-finite coordinate"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity(pub usize);

impl Biholomorphism for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn check_domain(&self, z: &[Complex64]) -> Result<()> {
        check_len(z, self.0)
    }

    fn forward(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_domain(z)?;
        Ok(z.to_vec())
    }

    fn inverse(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        self.forward(w)
    }

    fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.check_domain(z)?;
        Ok(CMatrix::identity(self.0))
    }

    fn second_derivatives(&self, z: &[Complex64]) -> Result<Vec<CMatrix>> {
        self.check_domain(z)?;
        Ok(vec![CMatrix::zeros(self.0, self.0); self.0])
    }
}

/// `z ↦ A z + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    a: CMatrix,
    a_inv: CMatrix,
    b: Vec<Complex64>,
}

impl LinearMap {
    pub fn new(a: CMatrix, b: Vec<Complex64>) -> Result<Self> {
        if !a.is_square() || a.rows() != b.len() {
            return Err(Error::invalid("affine map needs a square matrix and a matching shift"));
        }
        let a_inv = a.inverse()?;
        Ok(Self { a, a_inv, b })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }
}

impl Biholomorphism for LinearMap {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn check_domain(&self, z: &[Complex64]) -> Result<()> {
        check_len(z, self.dim())
    }

    fn forward(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_domain(z)?;
        Ok(self.a.mul_vec(z).iter().zip(&self.b).map(|(x, y)| x + y).collect())
    }

    fn inverse(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_domain(w)?;
        let shifted: Vec<Complex64> = w.iter().zip(&self.b).map(|(x, y)| x - y).collect();
        Ok(self.a_inv.mul_vec(&shifted))
    }

    fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.check_domain(z)?;
        Ok(self.a.clone())
    }

    fn inverse_jacobian(&self, w: &[Complex64]) -> Result<CMatrix> {
        self.check_domain(w)?;
        Ok(self.a_inv.clone())
    }

    fn second_derivatives(&self, z: &[Complex64]) -> Result<Vec<CMatrix>> {
        self.check_domain(z)?;
        let n = self.dim();
        Ok(vec![CMatrix::zeros(n, n); n])
    }
}

/// `U φ_a`, where `φ_a` is the involutive automorphism of the unit ball
/// exchanging `a` and `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallAutomorphism {
    a: Vec<Complex64>,
    u: CMatrix,
    // φ_a(z) = (a - L z) / (1 - ⟨z, a⟩) with L = P_a + s_a Q_a
    l: CMatrix,
}

impl BallAutomorphism {
    pub fn new(a: Vec<Complex64>, u: CMatrix) -> Result<Self> {
        let m = a.len();
        if m == 0 || !u.is_square() || u.rows() != m {
            return Err(Error::invalid("ball automorphism needs an m-vector and an m×m unitary"));
        }
        let r2: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        if r2 >= 1.0 || !r2.is_finite() {
            return Err(Error::domain(
                "bergman_ball",
                format!("|a| = {} is not inside the unit ball", r2.sqrt()),
            ));
        }
        let uu = &u * &u.adjoint();
        if uu.max_abs_diff(&CMatrix::identity(m)) > UNITARY_TOLERANCE {
            return Err(Error::invalid("U is not unitary"));
        }
        let s = (1.0 - r2).sqrt();
        let l = if r2 == 0.0 {
            CMatrix::identity(m)
        } else {
            let p = CMatrix::outer(&a, &a).scale(Complex64::new(1.0 / r2, 0.0));
            let q = &CMatrix::identity(m) - &p;
            &p + &q.scale(Complex64::new(s, 0.0))
        };
        Ok(Self { a, u, l })
    }

    /// `φ_a` alone.
    pub fn involution(a: Vec<Complex64>) -> Result<Self> {
        let m = a.len();
        Self::new(a, CMatrix::identity(m))
    }

    pub fn center(&self) -> &[Complex64] {
        &self.a
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    fn denominator(&self, z: &[Complex64]) -> Complex64 {
        one() - pairing(z, &self.a)
    }

    fn phi(&self, z: &[Complex64]) -> Vec<Complex64> {
        let d = self.denominator(z);
        self.l
            .mul_vec(z)
            .iter()
            .zip(&self.a)
            .map(|(lz, a)| (a - lz) / d)
            .collect()
    }

    fn numerator(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.l.mul_vec(z).iter().zip(&self.a).map(|(lz, a)| a - lz).collect()
    }
}

impl Biholomorphism for BallAutomorphism {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn check_domain(&self, z: &[Complex64]) -> Result<()> {
        check_len(z, self.dim())?;
        let r: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if r >= 1.0 {
            return Err(Error::domain(
                "bergman_ball",
                format!("|z| = {r} is not inside the unit ball"),
            ));
        }
        Ok(())
    }

    fn forward(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_domain(z)?;
        Ok(self.u.mul_vec(&self.phi(z)))
    }

    fn inverse(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_domain(w)?;
        Ok(self.phi(&self.u.adjoint().mul_vec(w)))
    }

    fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.check_domain(z)?;
        let d = self.denominator(z);
        let nz = self.numerator(z);
        let m = self.dim();
        // ∂φ^i/∂z^j = (-L_ij D + N_i ā_j) / D²
        let dphi = CMatrix::from_fn(m, m, |i, j| (-self.l[(i, j)] * d + nz[i] * self.a[j].conj()) / (d * d));
        Ok(&self.u * &dphi)
    }

    fn second_derivatives(&self, z: &[Complex64]) -> Result<Vec<CMatrix>> {
        self.check_domain(z)?;
        let d = self.denominator(z);
        let nz = self.numerator(z);
        let m = self.dim();
        let ab: Vec<Complex64> = self.a.iter().map(|c| c.conj()).collect();
        let phi2: Vec<CMatrix> = (0..m)
            .map(|i| {
                CMatrix::from_fn(m, m, |j, k| {
                    -(self.l[(i, j)] * ab[k] + self.l[(i, k)] * ab[j]) / (d * d)
                        + nz[i] * ab[j] * ab[k] * 2.0 / (d * d * d)
                })
            })
            .collect();
        Ok((0..m)
            .map(|i| CMatrix::from_fn(m, m, |j, k| (0..m).map(|p| self.u[(i, p)] * phi2[p][(j, k)]).sum()))
            .collect())
    }

    fn step_scale(&self, z: &[Complex64]) -> f64 {
        let r: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        (1.0 - r).clamp(1e-3, 1.0)
    }
}

/// `w^l = e^{iθ_l} (z^{σ(l)} - a_l) / (1 - ā_l z^{σ(l)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolydiskAutomorphism {
    thetas: Vec<f64>,
    a: Vec<Complex64>,
    sigma: Vec<usize>,
}

impl PolydiskAutomorphism {
    pub fn new(thetas: Vec<f64>, a: Vec<Complex64>, sigma: Vec<usize>) -> Result<Self> {
        let n = thetas.len();
        if n == 0 || a.len() != n || sigma.len() != n {
            return Err(Error::invalid(
                "angles, centers and permutation must have the same positive length",
            ));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("non-finite rotation angle"));
        }
        if let Some(c) = a.iter().find(|c| c.norm().is_nan() || c.norm() >= 1.0) {
            return Err(Error::domain(
                "poincare_disk",
                format!("center {c} is not inside the unit disk"),
            ));
        }
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return Err(Error::invalid("sigma is not a permutation"));
            }
            seen[s] = true;
        }
        Ok(Self { thetas, a, sigma })
    }

    pub fn rotation(thetas: Vec<f64>) -> Result<Self> {
        let n = thetas.len();
        Self::new(thetas, vec![Complex64::new(0.0, 0.0); n], (0..n).collect())
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn centers(&self) -> &[Complex64] {
        &self.a
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    fn phase(&self, l: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.thetas[l])
    }
}

impl Biholomorphism for PolydiskAutomorphism {
    fn dim(&self) -> usize {
        self.thetas.len()
    }

    fn check_domain(&self, z: &[Complex64]) -> Result<()> {
        check_len(z, self.dim())?;
        if let Some(c) = z.iter().find(|c| c.norm() >= 1.0) {
            return Err(Error::domain(
                "poincare_disk",
                format!("|z| = {} is not inside the unit disk", c.norm()),
            ));
        }
        Ok(())
    }

    fn forward(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_domain(z)?;
        Ok((0..self.dim())
            .map(|l| {
                let (x, a) = (z[self.sigma[l]], self.a[l]);
                self.phase(l) * (x - a) / (one() - a.conj() * x)
            })
            .collect())
    }

    fn inverse(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_domain(w)?;
        let mut z = vec![Complex64::new(0.0, 0.0); self.dim()];
        for l in 0..self.dim() {
            let u = w[l] / self.phase(l);
            let a = self.a[l];
            z[self.sigma[l]] = (u + a) / (one() + a.conj() * u);
        }
        Ok(z)
    }

    fn jacobian(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.check_domain(z)?;
        let n = self.dim();
        let mut j = CMatrix::zeros(n, n);
        for l in 0..n {
            let (x, a) = (z[self.sigma[l]], self.a[l]);
            let d = one() - a.conj() * x;
            j[(l, self.sigma[l])] = self.phase(l) * (1.0 - a.norm_sqr()) / (d * d);
        }
        Ok(j)
    }

    fn second_derivatives(&self, z: &[Complex64]) -> Result<Vec<CMatrix>> {
        self.check_domain(z)?;
        let n = self.dim();
        Ok((0..n)
            .map(|l| {
                let mut h = CMatrix::zeros(n, n);
                let (x, a) = (z[self.sigma[l]], self.a[l]);
                let d = one() - a.conj() * x;
                h[(self.sigma[l], self.sigma[l])] = self.phase(l) * (1.0 - a.norm_sqr()) * 2.0 * a.conj() / (d * d * d);
                h
            })
            .collect())
    }

    fn step_scale(&self, z: &[Complex64]) -> f64 {
        z.iter().map(|c| (1.0 - c.norm()).clamp(1e-3, 1.0)).fold(1.0, f64::min)
    }
}

/// `F₂(z, v) = F₁(g(z), g_*(z) v)` for a metric `F₁` and a biholomorphism `g`.
pub struct PullbackMetric<'a, M: ?Sized, B: ?Sized> {
    upstream: &'a M,
    map: &'a B,
}

impl<'a, M: ComplexFinslerMetric + ?Sized, B: Biholomorphism + ?Sized> PullbackMetric<'a, M, B> {
    pub fn new(upstream: &'a M, map: &'a B) -> Result<Self> {
        if upstream.dim() != map.dim() {
            return Err(Error::invalid("metric and map have different dimensions"));
        }
        Ok(Self { upstream, map })
    }

    pub fn upstream(&self) -> &M {
        self.upstream
    }

    pub fn map(&self) -> &B {
        self.map
    }
}

impl<M: ComplexFinslerMetric + ?Sized, B: Biholomorphism + ?Sized> ComplexFinslerMetric for PullbackMetric<'_, M, B> {
    fn layout(&self) -> &RealLayout {
        self.upstream.layout()
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        self.map.check_domain(z)?;
        self.upstream.check_point(&self.map.forward(z)?)
    }

    fn energy(&self, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
        let (w, wv) = apply_with_differential(self.map, z, v)?;
        self.upstream.energy(&w, &wv)
    }

    fn z_step_scale(&self, z: &[Complex64]) -> f64 {
        let up = self.map.forward(z).map_or(1.0, |w| self.upstream.z_step_scale(&w));
        up.min(self.map.step_scale(z))
    }

    // ∂G₂/∂v̄^τ = Σ_α ∂G₁/∂w̄^α conj(J[α][τ])
    fn energy_dvbar(&self, z: &[Complex64], v: &[Complex64]) -> Result<Vec<Complex64>> {
        let w = self.map.forward(z)?;
        let j = self.map.jacobian(z)?;
        let d1 = self.upstream.energy_dvbar(&w, &j.mul_vec(v))?;
        let n = self.dim();
        Ok((0..n)
            .map(|tau| (0..n).map(|a| d1[a] * j[(a, tau)].conj()).sum())
            .collect())
    }

    fn complex_tensor(&self, z: &[Complex64], v: &[Complex64]) -> Result<HermitianMatrix> {
        tensor_from_gradient(self, z, v)
    }
}

/// `h₂ = Jᵀ h₁(g(z), J v) J̄`.
pub fn transformed_tensor<M: ComplexFinslerMetric + ?Sized, B: Biholomorphism + ?Sized>(
    upstream: &M,
    map: &B,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<CMatrix> {
    let (w, wv) = apply_with_differential(map, z, v)?;
    let h1 = upstream.complex_tensor(&w, &wv)?;
    let j = map.jacobian(z)?;
    Ok(&(&j.transpose() * h1.matrix()) * &j.conjugate())
}

/// `J⁻¹ (Γ₁(g(z)) J J + ∂²g)`, the horizontal coefficients of the pullback
/// predicted from the upstream closed form.
pub fn transformed_horizontal<B: Biholomorphism + ?Sized>(
    upstream: &ProductMetric,
    map: &B,
    z: &[Complex64],
) -> Result<Array3<Complex64>> {
    let w = map.forward(z)?;
    let j = map.jacobian(z)?;
    let j_inv = j.inverse()?;
    let hess = map.second_derivatives(z)?;
    let g1 = upstream.hermitian_horizontal(&w)?;
    let n = map.dim();
    let mut inner = Array3::zeros(n, n, n);
    for s in 0..n {
        for b in 0..n {
            for a in 0..n {
                let mut acc = hess[s][(b, a)];
                for mu in 0..n {
                    for la in 0..n {
                        acc += g1[(s, mu, la)] * j[(la, a)] * j[(mu, b)];
                    }
                }
                inner[(s, b, a)] = acc;
            }
        }
    }
    Ok(Array3::from_fn(n, n, n, |g, b, a| {
        (0..n).map(|s| j_inv[(g, s)] * inner[(s, b, a)]).sum()
    }))
}

fn relative(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

/// Horizontal coefficients of the pulled-back metric by differences, against
/// the transformed upstream coefficients.
pub fn pullback_connection_check<B: Biholomorphism + ?Sized>(
    upstream: &ProductMetric,
    map: &B,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<CheckReport> {
    normalize(v)?;
    let pb = PullbackMetric::new(upstream, map)?;
    let lhs = horizontal_coefficients(&pb, z, v)?;
    let rhs = transformed_horizontal(upstream, map, z)?;
    let p = upstream.params();
    let mut report = CheckReport::new("pullback_connection", PULLBACK_TOLERANCE).with_params(p.t(), p.k());
    report.record(relative(lhs.max_abs_diff(&rhs), rhs.max_abs()), || SampleRecord {
        z: z.to_vec(),
        v: v.to_vec(),
    });
    Ok(report)
}

/// Complex fundamental tensor of the pulled-back metric by differences,
/// against the transformed upstream tensor.
pub fn pullback_tensor_check<B: Biholomorphism + ?Sized>(
    upstream: &ProductMetric,
    map: &B,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<CheckReport> {
    let (vn, _) = normalize(v)?;
    let pb = PullbackMetric::new(upstream, map)?;
    let lhs = pb.complex_tensor(z, &vn)?;
    let rhs = transformed_tensor(upstream, map, z, &vn)?;
    let p = upstream.params();
    let mut report = CheckReport::new("pullback_tensor", PULLBACK_TOLERANCE).with_params(p.t(), p.k());
    report.record(relative(lhs.matrix().max_abs_diff(&rhs), rhs.max_abs()), || {
        SampleRecord {
            z: z.to_vec(),
            v: v.to_vec(),
        }
    });
    Ok(report)
}

/// `c((1 - |z|²)|v|² + |⟨z, v⟩|²) / (1 - |z|²)²`.
pub fn ball_rigidity_metric(c: f64, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid("c must be positive"));
    }
    if z.len() != v.len() || z.is_empty() {
        return Err(Error::invalid("point and vector must have the same positive dimension"));
    }
    let r2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
    if r2 >= 1.0 {
        return Err(Error::domain(
            "bergman_ball",
            format!("|z| = {} is not inside the unit ball", r2.sqrt()),
        ));
    }
    let v2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let d = 1.0 - r2;
    Ok(c * (d * v2 + pairing(z, v).norm_sqr()) / (d * d))
}

/// `c |(φ_z)_*(z) v|²`: the norm `c|v|²` at the origin carried to `z` by `φ_z`.
pub fn ball_rigidity_pullback(c: f64, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
    let phi = BallAutomorphism::involution(z.to_vec())?;
    let (_, w) = apply_with_differential(&phi, z, v)?;
    Ok(c * w.iter().map(|x| x.norm_sqr()).sum::<f64>())
}

/// Outer step for the third derivative in [`cartan_tensor`].
pub const CARTAN_STEP: f64 = 1e-2;

/// `∂³G/∂u^a∂u^b∂u^c` at the unit-normalized real view of `v`, by second
/// differences of the gradient. Zero exactly when `G` is quadratic in `v`.
pub fn cartan_tensor<M: ComplexFinslerMetric + ?Sized>(m: &M, z: &[Complex64], v: &[Complex64]) -> Result<Array3<f64>> {
    let layout = m.layout();
    let x = layout.to_real(z);
    let (u, _) = normalize_real(&layout.to_real(v))?;
    let n = u.len();
    let h = CARTAN_STEP;
    let grad = |d: &[(usize, f64)]| -> Result<Vec<f64>> {
        let mut w = u.clone();
        for &(i, s) in d {
            w[i] += s;
        }
        energy_du(m, &x, &w)
    };
    let g0 = grad(&[])?;
    let mut out = Array3::zeros(n, n, n);
    for b in 0..n {
        for c in b..n {
            let d2: Vec<f64> = if b == c {
                let p = grad(&[(b, h)])?;
                let q = grad(&[(b, -h)])?;
                (0..n).map(|a| (p[a] - g0[a] - (g0[a] - q[a])) / (h * h)).collect()
            } else {
                let pp = grad(&[(b, h), (c, h)])?;
                let pm = grad(&[(b, h), (c, -h)])?;
                let mp = grad(&[(b, -h), (c, h)])?;
                let mm = grad(&[(b, -h), (c, -h)])?;
                (0..n)
                    .map(|a| ((pp[a] - pm[a]) - (mp[a] - mm[a])) / (4.0 * h * h))
                    .collect()
            };
            for a in 0..n {
                out[(a, b, c)] = d2[a];
                out[(a, c, b)] = d2[a];
            }
        }
    }
    Ok(out)
}

/// First sample at which two metrics differ by more than `threshold`.
pub fn non_isometry_witness<M1, M2, I>(
    m1: &M1,
    m2: &M2,
    samples: I,
    threshold: f64,
) -> Result<Option<(SampleRecord, f64)>>
where
    M1: ComplexFinslerMetric + ?Sized,
    M2: ComplexFinslerMetric + ?Sized,
    I: IntoIterator<Item = (Vec<Complex64>, Vec<Complex64>)>,
{
    for (z, v) in samples {
        let d = (m1.energy(&z, &v)?.sqrt() - m2.energy(&z, &v)?.sqrt()).abs();
        if d > threshold {
            return Ok(Some((SampleRecord { z, v }, d)));
        }
    }
    Ok(None)
}

/// `h` as a Hermitian matrix, for positive-definiteness checks on pullbacks.
pub fn pullback_complex_tensor<M: ComplexFinslerMetric + ?Sized, B: Biholomorphism + ?Sized>(
    upstream: &M,
    map: &B,
    z: &[Complex64],
    v: &[Complex64],
) -> Result<HermitianMatrix> {
    PullbackMetric::new(upstream, map)?.complex_tensor(z, v)
}
