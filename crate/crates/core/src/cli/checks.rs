//! Named checks runnable from a manifest.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::automorphisms::{apply_with_differential, pullback_connection_check, PULLBACK_TOLERANCE};
use crate::connection::{
    check_berwald, check_kahler, levi_civita_spray, real_spray, vec_rel_diff, KahlerLevel, CHECK_TOLERANCE,
};
use crate::curvature::{bounds_for, sectional_curvature, sectional_curvature_direct};
use crate::error::Result;
use crate::geodesics::{polydisk_distance, polydisk_distance_by_integration};
use crate::metric::{fd_real_hessian, fd_wirtinger_hessians};
use crate::product::ProductMetric;
use crate::report::{CheckReport, SampleRecord};
use crate::sampling::{random_polydisk_automorphism, random_single_mobius, sample_pair, sample_point, sample_vector};

/// Registered check names with their default tolerances.
pub const REGISTRY: &[(&str, f64)] = &[
    ("strong_convexity", 1e-5),
    ("bridge", 1e-5),
    ("berwald", CHECK_TOLERANCE),
    ("kahler", CHECK_TOLERANCE),
    ("real_spray", 1e-4),
    ("curvature_bounds", 1e-9),
    ("curvature_oracle", 1e-4),
    ("isometry", 1e-9),
    ("distance", 1e-6),
    ("pullback", PULLBACK_TOLERANCE),
];

/// Fiber directions drawn per base point in the Berwald check.
pub const BERWALD_FIBERS: usize = 10;

const GEODESIC_STEPS: usize = 32;

pub fn is_registered(name: &str) -> bool {
    REGISTRY.iter().any(|(n, _)| *n == name)
}

pub fn default_tolerance(name: &str) -> f64 {
    REGISTRY.iter().find(|(n, _)| *n == name).map_or(f64::NAN, |(_, t)| *t)
}

fn rec(z: &[Complex64], v: &[Complex64]) -> impl FnOnce() -> SampleRecord {
    let (z, v) = (z.to_vec(), v.to_vec());
    move || SampleRecord { z, v }
}

fn record(report: &mut CheckReport, dev: Result<f64>, z: &[Complex64], v: &[Complex64]) {
    match dev {
        Ok(d) => report.record(d, rec(z, v)),
        Err(e) => report.fail_with(e.to_string()),
    }
}

/// Runs one named check for one `(t, k)` cell.
pub fn run_check(name: &str, m: &ProductMetric, samples: usize, tolerance: f64, rng: &mut ChaCha8Rng) -> CheckReport {
    let p = m.params();
    let mut report = CheckReport::new(name, tolerance).with_params(p.t(), p.k());
    let mfd = m.manifold();
    let polydisk_only = matches!(name, "isometry" | "distance" | "pullback");
    if polydisk_only && !mfd.is_polydisk() {
        let mut r = CheckReport::skipped(name, tolerance, "defined for polydisks only");
        r.t = Some(p.t());
        r.k = Some(p.k());
        return r;
    }
    let layout = mfd.layout();
    for _ in 0..samples {
        let (z, v) = sample_pair(rng, mfd);
        let dev = match name {
            "strong_convexity" => strong_convexity(m, &z, &v),
            "bridge" => {
                let big_v = sample_vector(rng, mfd);
                m.real_complex_bridge_check(&z, &v, &big_v).map(|b| b.deviation())
            }
            "berwald" => {
                let vs: Vec<Vec<Complex64>> = (0..BERWALD_FIBERS).map(|_| sample_vector(rng, mfd)).collect();
                match check_berwald(m, &z, &vs) {
                    Ok(r) => Ok(r.max_deviation),
                    Err(e) => Err(e),
                }
            }
            "kahler" => [KahlerLevel::Strong, KahlerLevel::Kahler, KahlerLevel::Weak]
                .iter()
                .try_fold(0.0f64, |acc, &lvl| {
                    Ok(acc.max(check_kahler(m, &z, &v, lvl)?.max_deviation))
                }),
            "real_spray" => {
                let (x, u) = (layout.to_real(&z), layout.to_real(&v));
                real_spray(m, &x, &u).and_then(|s| Ok(vec_rel_diff(&s, &levi_civita_spray(mfd, &x, &u)?)))
            }
            "curvature_bounds" => bounds_for(mfd, p).and_then(|(lo, hi)| {
                let k = sectional_curvature(m, &z, &v)?;
                Ok((lo - k).max(k - hi).max(0.0))
            }),
            "curvature_oracle" => sectional_curvature(m, &z, &v).and_then(|k| {
                let d = sectional_curvature_direct(m, &z, &v)?;
                Ok((k - d).abs() / k.abs().max(1.0))
            }),
            "isometry" => random_polydisk_automorphism(rng, mfd.dim()).and_then(|g| {
                let (w, wv) = apply_with_differential(&g, &z, &v)?;
                let f0 = m.metric_value(&z, &v)?;
                Ok((m.metric_value(&w, &wv)? - f0).abs() / f0)
            }),
            "distance" => {
                let z2 = sample_point(rng, mfd);
                polydisk_distance(p, &z, &z2).and_then(|d| {
                    let i = polydisk_distance_by_integration(m, &z, &z2, GEODESIC_STEPS)?;
                    Ok((d.value - i.value).abs())
                })
            }
            "pullback" => random_single_mobius(rng, mfd.dim())
                .and_then(|g| pullback_connection_check(m, &g, &z, &v))
                .map(|r| r.max_deviation),
            other => unreachable!("unregistered check {other}"),
        };
        record(&mut report, dev, &z, &v);
    }
    report
}

/// Worst of: Cholesky failure of either tensor (infinite), and the relative
/// gap between closed forms and difference Hessians.
fn strong_convexity(m: &ProductMetric, z: &[Complex64], v: &[Complex64]) -> Result<f64> {
    let layout = m.manifold().layout();
    let ct = m.complex_fundamental_tensor(z, v)?;
    let (x, u) = (layout.to_real(z), layout.to_real(v));
    let rt = m.real_fundamental_tensor(&x, &u)?;
    if !ct.h.pd_check()?.is_pd || !rt.g.pd_check()?.is_pd {
        return Ok(f64::INFINITY);
    }
    let fd_c = fd_wirtinger_hessians(m, z, v)?.0;
    let fd_r = fd_real_hessian(m, &x, &u)?;
    Ok(ct
        .h
        .matrix()
        .rel_diff(fd_c.matrix())
        .max(rt.g.matrix().rel_diff(fd_r.matrix())))
}
