//! Geodesics of `F_{t,k}` and the invariant distance on the polydisk.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connection::levi_civita_spray;
use crate::error::{Error, Result};
use crate::metric::ComplexFinslerMetric;
use crate::product::{MetricParams, ProductManifold, ProductMetric};

/// Absolute local error allowed per unit of parameter.
pub const GEODESIC_TOLERANCE: f64 = 1e-9;

pub const MIN_STEPS: usize = 16;

const MAX_DEPTH: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSample {
    pub s: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

/// An affinely parametrized geodesic, sampled on a uniform grid in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GeodesicPath {
    pub samples: Vec<GeodesicSample>,
}

impl GeodesicPath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&GeodesicSample> {
        self.samples.last()
    }

    /// Final point in complex coordinates.
    pub fn endpoint(&self, mfd: &ProductManifold) -> Option<Vec<Complex64>> {
        self.last().map(|s| mfd.layout().to_complex(&s.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    ClosedForm,
    PathIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub method: DistanceMethod,
}

type State = (Vec<f64>, Vec<f64>);

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

fn rk4_step<S>(spray: &S, (x, u): &State, h: f64) -> Result<State>
where
    S: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    // x'' = -2G(x, x')
    let acc = |x: &[f64], u: &[f64]| -> Result<Vec<f64>> { Ok(spray(x, u)?.into_iter().map(|a| -a).collect()) };
    let k1x = u.clone();
    let k1u = acc(x, u)?;
    let x2 = axpy(x, 0.5 * h, &k1x);
    let u2 = axpy(u, 0.5 * h, &k1u);
    let k2u = acc(&x2, &u2)?;
    let x3 = axpy(x, 0.5 * h, &u2);
    let u3 = axpy(u, 0.5 * h, &k2u);
    let k3u = acc(&x3, &u3)?;
    let x4 = axpy(x, h, &u3);
    let u4 = axpy(u, h, &k3u);
    let k4u = acc(&x4, &u4)?;
    let nx = (0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1x[i] + 2.0 * u2[i] + 2.0 * u3[i] + u4[i]))
        .collect();
    let nu = (0..u.len())
        .map(|i| u[i] + h / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]))
        .collect();
    Ok((nx, nu))
}

fn max_diff(a: &State, b: &State) -> f64 {
    a.0.iter()
        .zip(&b.0)
        .chain(a.1.iter().zip(&b.1))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

/// One step of length `h`, halved until the step-doubling estimate is below tolerance.
fn adaptive_step<S, C>(spray: &S, check: &C, state: &State, h: f64, depth: u32) -> Result<State>
where
    S: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    C: Fn(&[f64]) -> Result<()>,
{
    let full = rk4_step(spray, state, h);
    let half = rk4_step(spray, state, 0.5 * h).and_then(|mid| {
        check(&mid.0)?;
        Ok((rk4_step(spray, &mid, 0.5 * h)?, mid))
    });
    match (full, half) {
        (Ok(full), Ok((fine, _))) => {
            let err = max_diff(&full, &fine) / 15.0;
            if err <= GEODESIC_TOLERANCE * h.abs() || depth >= MAX_DEPTH {
                // Richardson extrapolation of the two estimates
                let ex =
                    |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(f, c)| f + (f - c) / 15.0).collect() };
                return Ok((ex(&fine.0, &full.0), ex(&fine.1, &full.1)));
            }
        }
        (Err(e), _) | (_, Err(e)) if depth >= MAX_DEPTH => return Err(e),
        _ => {}
    }
    let mid = adaptive_step(spray, check, state, 0.5 * h, depth + 1)?;
    check(&mid.0)?;
    adaptive_step(spray, check, &mid, 0.5 * h, depth + 1)
}

/// Integrates `x'' = -2G(x, x')` for an arbitrary spray, sampling `steps + 1`
/// uniformly spaced parameters in `[0, s_max]` (`s_max` may be negative).
pub fn integrate_spray<S, C>(
    spray: S,
    check: C,
    x0: &[f64],
    u0: &[f64],
    s_max: f64,
    steps: usize,
) -> Result<GeodesicPath>
where
    S: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    C: Fn(&[f64]) -> Result<()>,
{
    if steps < MIN_STEPS {
        return Err(Error::invalid(format!("at least {MIN_STEPS} steps are required")));
    }
    if x0.len() != u0.len() {
        return Err(Error::invalid("point and velocity have different lengths"));
    }
    if !s_max.is_finite() {
        return Err(Error::invalid("s_max must be finite"));
    }
    if u0.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroSection);
    }
    check(x0)?;
    let h = s_max / steps as f64;
    let mut state: State = (x0.to_vec(), u0.to_vec());
    let mut samples = vec![GeodesicSample {
        s: 0.0,
        x: state.0.clone(),
        u: state.1.clone(),
    }];
    for i in 1..=steps {
        let next = adaptive_step(&spray, &check, &state, h, 0).and_then(|n| {
            check(&n.0)?;
            Ok(n)
        });
        match next {
            Ok(n) => state = n,
            Err(Error::Domain { .. }) | Err(Error::Singular(_)) => {
                let last = samples.last().expect("nonempty");
                return Err(Error::BoundaryExit {
                    s: last.s,
                    last_x: last.x.clone(),
                    last_u: last.u.clone(),
                });
            }
            Err(e) => return Err(e),
        }
        samples.push(GeodesicSample {
            s: h * i as f64,
            x: state.0.clone(),
            u: state.1.clone(),
        });
    }
    Ok(GeodesicPath { samples })
}

/// Geodesic of `F_{t,k}` with initial point `x0` and velocity `u0` in real coordinates.
///
/// The spray of `F_{t,k}` is the per-factor Levi-Civita spray, so the
/// quadratic form is used directly; [`real_spray`](crate::connection::real_spray)
/// reproduces it by differentiation.
pub fn integrate_geodesic(m: &ProductMetric, x0: &[f64], u0: &[f64], s_max: f64, steps: usize) -> Result<GeodesicPath> {
    let mfd = m.manifold();
    let n = mfd.layout().real_dim();
    if x0.len() != n || u0.len() != n {
        return Err(Error::invalid("real point or velocity has the wrong length"));
    }
    integrate_spray(
        |x, u| levi_civita_spray(mfd, x, u),
        |x| mfd.check_point(&mfd.layout().to_complex(x)),
        x0,
        u0,
        s_max,
        steps,
    )
}

/// `F(x, u)` for real coordinates, zero on the zero section.
pub fn speed<M: ComplexFinslerMetric + ?Sized>(m: &M, x: &[f64], u: &[f64]) -> Result<f64> {
    if u.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let layout = m.layout();
    Ok(m.energy(&layout.to_complex(x), &layout.to_complex(u))?.sqrt())
}

/// Integral of `F(x(s), x'(s))` over the sampled path: composite Simpson,
/// with the quadratic through the last three samples closing an odd interval count.
pub fn path_length<M: ComplexFinslerMetric + ?Sized>(m: &M, path: &GeodesicPath) -> Result<f64> {
    let n = path.samples.len();
    if n < 2 {
        return Err(Error::invalid("a path needs at least two samples"));
    }
    let dim = m.layout().real_dim();
    let mut f = Vec::with_capacity(n);
    for (i, smp) in path.samples.iter().enumerate() {
        if smp.x.len() != dim || smp.u.len() != dim || !smp.s.is_finite() {
            return Err(Error::invalid(format!("path sample {i} is malformed")));
        }
        if i > 0 && (smp.s - path.samples[i - 1].s) * (path.samples[1].s - path.samples[0].s) < 0.0 {
            return Err(Error::invalid("path parameter is not monotone"));
        }
        f.push(speed(m, &smp.x, &smp.u)?);
    }
    let s: Vec<f64> = path.samples.iter().map(|p| p.s).collect();
    if s[n - 1] == s[0] {
        return Ok(0.0);
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("path has repeated parameter values"));
    }
    let intervals = n - 1;
    if intervals == 1 {
        return Ok(((s[1] - s[0]) * 0.5 * (f[0] + f[1])).abs());
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        total += simpson(&s[i..i + 3], &f[i..i + 3], 0);
        i += 2;
    }
    if i + 1 < n {
        // one interval left: integrate the quadratic through the last three samples over it
        total += simpson(&s[n - 3..], &f[n - 3..], 1);
    }
    Ok(total.abs())
}

/// Integral of the quadratic through three samples over both intervals
/// (`part = 0`) or over the second only (`part = 1`).
fn simpson(s: &[f64], f: &[f64], part: u8) -> f64 {
    let (h0, h1) = (s[1] - s[0], s[2] - s[1]);
    if part == 0 {
        let h = h0 + h1;
        h / 6.0 * ((2.0 - h1 / h0) * f[0] + h * h / (h0 * h1) * f[1] + (2.0 - h0 / h1) * f[2])
    } else {
        // ∫_{s1}^{s2} of the interpolant
        let a = -h1 * h1 / (6.0 * h0 * (h0 + h1));
        let b = h1 * (3.0 * h0 + h1) / (6.0 * h0);
        let c = h1 * (3.0 * h0 + 2.0 * h1) / (6.0 * (h0 + h1));
        a * f[0] + b * f[1] + c * f[2]
    }
}

fn check_polydisk_point(z: &[Complex64]) -> Result<()> {
    for c in z {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::invalid("non-finite coordinate"));
        }
        if c.norm() >= 1.0 {
            return Err(Error::domain(
                "polydisk",
                format!("|z| = {} is not inside the unit disk", c.norm()),
            ));
        }
    }
    Ok(())
}

/// Möbius quotient `(w - z)/(1 - z̄ w)` per coordinate.
pub fn mobius_quotient(z: Complex64, w: Complex64) -> Complex64 {
    (w - z) / (Complex64::new(1.0, 0.0) - z.conj() * w)
}

/// Invariant distance of `F_{t,k}` on the polydisk in closed form.
pub fn polydisk_distance(p: MetricParams, z1: &[Complex64], z2: &[Complex64]) -> Result<DistanceResult> {
    if z1.len() != z2.len() || z1.is_empty() {
        return Err(Error::invalid("endpoints must have the same positive dimension"));
    }
    check_polydisk_point(z1)?;
    check_polydisk_point(z2)?;
    // log Λ = 2 artanh |m|
    let one = Complex64::new(1.0, 0.0);
    let logs: Vec<f64> = z1
        .iter()
        .zip(z2)
        .map(|(&a, &b)| 2.0 * ((b - a).norm() / (one - a.conj() * b).norm()).min(1.0).atanh())
        .collect();
    let (t, k) = (p.t(), p.k() as i32);
    let sq: f64 = logs.iter().map(|l| l * l).sum();
    let mx = logs.iter().copied().fold(0.0, f64::max);
    let hi = if mx > 0.0 {
        let ratio: f64 = logs.iter().map(|l| (l / mx).powi(2 * k)).sum();
        mx * mx * ratio.powf(1.0 / k as f64)
    } else {
        0.0
    };
    let value = (sq + t * hi).sqrt() / (2.0 * (1.0 + t).sqrt());
    Ok(DistanceResult {
        value,
        method: DistanceMethod::ClosedForm,
    })
}

/// `z^l(s) = e^{iθ_l} tanh(|a_l| s / 2)` where `a_l = |a_l| e^{iθ_l}`: the
/// polydisk geodesic leaving the origin with velocity `a / 2`.
pub fn polydisk_geodesic_from_origin(a: &[Complex64], s: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    a.iter()
        .map(|&al| {
            let r = al.norm();
            if r == 0.0 {
                return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            }
            let ph = al / r;
            let th = (0.5 * r * s).tanh();
            (ph * th, ph * (0.5 * r * (1.0 - th * th)))
        })
        .unzip()
}

/// Initial velocity at `z1` of the polydisk geodesic reaching `z2` at `s = 1`.
pub fn polydisk_initial_velocity(z1: &[Complex64], z2: &[Complex64]) -> Result<Vec<Complex64>> {
    if z1.len() != z2.len() {
        return Err(Error::invalid("endpoints must have the same dimension"));
    }
    check_polydisk_point(z1)?;
    check_polydisk_point(z2)?;
    Ok(z1
        .iter()
        .zip(z2)
        .map(|(&a, &b)| {
            let w = mobius_quotient(a, b);
            let r = w.norm();
            if r == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // velocity r.atanh() * w/|w| at the origin, pushed back by the inverse Möbius map
            w / r * r.atanh() * (1.0 - a.norm_sqr())
        })
        .collect())
}

/// The closed-form polydisk geodesic from `z1` to `z2`, sampled at `steps + 1` points of `[0, 1]`.
pub fn polydisk_geodesic(z1: &[Complex64], z2: &[Complex64], steps: usize) -> Result<GeodesicPath> {
    if steps == 0 {
        return Err(Error::invalid("at least one step is required"));
    }
    let n = z1.len();
    check_polydisk_point(z1)?;
    check_polydisk_point(z2)?;
    if z2.len() != n {
        return Err(Error::invalid("endpoints must have the same dimension"));
    }
    let a: Vec<Complex64> = z1
        .iter()
        .zip(z2)
        .map(|(&p, &q)| {
            let w = mobius_quotient(p, q);
            let r = w.norm();
            if r == 0.0 {
                w
            } else {
                w / r * 2.0 * r.atanh()
            }
        })
        .collect();
    let layout = crate::coords::RealLayout::new(vec![1; n])?;
    let one = Complex64::new(1.0, 0.0);
    let samples = (0..=steps)
        .map(|i| {
            let s = i as f64 / steps as f64;
            let (w, dw) = polydisk_geodesic_from_origin(&a, s);
            // push through w ↦ (w + z1)/(1 + z̄1 w)
            let (z, dz): (Vec<Complex64>, Vec<Complex64>) = w
                .iter()
                .zip(&dw)
                .zip(z1)
                .map(|((&w, &dw), &p)| {
                    let den = one + p.conj() * w;
                    ((w + p) / den, dw * (1.0 - p.norm_sqr()) / (den * den))
                })
                .unzip();
            GeodesicSample {
                s,
                x: layout.to_real(&z),
                u: layout.to_real(&dz),
            }
        })
        .collect();
    Ok(GeodesicPath { samples })
}

/// Distance from the length of the integrated geodesic from `z1` towards `z2`.
pub fn polydisk_distance_by_integration(
    m: &ProductMetric,
    z1: &[Complex64],
    z2: &[Complex64],
    steps: usize,
) -> Result<DistanceResult> {
    if !m.manifold().is_polydisk() {
        return Err(Error::invalid("the closed-form initial velocity needs a polydisk"));
    }
    let u0 = polydisk_initial_velocity(z1, z2)?;
    let value = if u0.iter().all(|c| c.norm() == 0.0) {
        0.0
    } else {
        let layout = m.manifold().layout();
        let path = integrate_geodesic(m, &layout.to_real(z1), &layout.to_real(&u0), 1.0, steps)?;
        path_length(m, &path)?
    };
    Ok(DistanceResult {
        value,
        method: DistanceMethod::PathIntegral,
    })
}
