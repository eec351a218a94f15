//! Manifest-driven batch runs and report emission, shared by the command-line tool.

pub mod checks;
pub mod manifest;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::curvature::{bounds_for, sectional_curvature};
use crate::error::{Error, Result};
use crate::factors::{FactorKind, FactorMetric};
use crate::geodesics::GeodesicPath;
use crate::product::{MetricParams, ProductManifold, ProductMetric};
use crate::report::{CheckReport, CheckStatus};
use crate::sampling::cell_rng;

pub use manifest::{FactorSpec, RunManifest};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FINSLERLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Summary {
    pub fn of(checks: &[CheckReport]) -> Self {
        let mut s = Summary::default();
        for c in checks {
            match c.status {
                CheckStatus::Pass => s.passed += 1,
                CheckStatus::Fail => s.failed += 1,
                CheckStatus::Skipped => s.skipped += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    /// Seconds.
    pub wall_time: f64,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format `{other}`"))),
        }
    }
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every requested check over the `(t, k)` grid. Each cell draws from
/// its own generator seeded by `(seed, cell index)`, so results do not depend
/// on scheduling.
pub fn run_checks(manifest: &RunManifest) -> Result<RunReport> {
    manifest.validate()?;
    let start = Instant::now();
    let mfd = manifest.manifold()?;
    let grid = manifest.grid()?;
    let g = grid.len();
    let cells: Vec<(usize, &str, usize)> = manifest
        .checks
        .iter()
        .enumerate()
        .flat_map(|(ci, name)| (0..g).map(move |gi| (ci * g + gi, name.as_str(), gi)))
        .collect();
    let run = || -> Vec<CheckReport> {
        cells
            .par_iter()
            .map(|&(idx, name, gi)| {
                let m = ProductMetric::new(mfd.clone(), grid[gi]);
                let mut rng = cell_rng(manifest.seed, idx as u64);
                checks::run_check(name, &m, manifest.samples, manifest.tolerance(name), &mut rng)
            })
            .collect()
    };
    let checks = match thread_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run),
        None => run(),
    };
    let summary = Summary::of(&checks);
    Ok(RunReport {
        manifest: manifest.clone(),
        checks,
        summary,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub check: String,
    pub t: Option<f64>,
    pub k: Option<u32>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn csv_rows(report: &RunReport) -> Vec<CsvRow> {
    report
        .checks
        .iter()
        .map(|c| CsvRow {
            check: c.name.clone(),
            t: c.t,
            k: c.k,
            max_deviation: c.max_deviation,
            tolerance: c.tolerance,
            pass: c.passed(),
        })
        .collect()
}

/// Serializes `report` as pretty JSON or as one CSV row per check.
pub fn emit<W: Write>(report: &RunReport, format: Format, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Config(e.to_string());
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(|e| Error::Config(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
        Format::Csv => write_csv(&csv_rows(report), out)?,
    }
    Ok(())
}

/// Writes serializable rows as CSV with a header, even when there are no rows.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let err = |e: csv::Error| Error::Config(e.to_string());
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn emit_to_string(report: &RunReport, format: Format) -> Result<String> {
    let mut buf = Vec::new();
    emit(report, format, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
}

/// Parses `"1,0.5-0.2i,3i"` into complex numbers.
pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<Complex64>()
                .map_err(|_| Error::Config(format!("cannot parse `{tok}` as a complex number")))
        })
        .collect()
}

/// Parses `"disk,ball:2,flat:3"` into factor metrics (dimension defaults to 1).
pub fn parse_factor_list(s: &str) -> Result<ProductManifold> {
    let factors = s
        .split(',')
        .map(|tok| {
            let (kind, dim) = match tok.trim().split_once(':') {
                Some((k, d)) => (
                    k,
                    d.parse()
                        .map_err(|_| Error::Config(format!("bad dimension in `{tok}`")))?,
                ),
                None => (tok.trim(), 1),
            };
            let kind: FactorKind = kind.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
            FactorMetric::new(kind, dim).map_err(|e| Error::Config(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    ProductManifold::new(factors).map_err(|e| Error::Config(e.to_string()))
}

/// Parses a `name=value` tolerance override.
pub fn parse_tolerance(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected name=value, got `{s}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad tolerance value in `{s}`")))?;
    Ok((name.trim().to_string(), value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRow {
    pub t: f64,
    pub k: u32,
    pub curvature: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Holomorphic sectional curvature at fixed `(z, v)` for `steps + 1` evenly spaced `t`.
pub fn curvature_sweep(
    mfd: &ProductManifold,
    z: &[Complex64],
    v: &[Complex64],
    k: u32,
    t_min: f64,
    t_max: f64,
    steps: usize,
) -> Result<Vec<CurvatureRow>> {
    if steps == 0 || t_min.is_nan() || t_max.is_nan() || t_min > t_max {
        return Err(Error::Config("need t_min <= t_max and at least one step".into()));
    }
    (0..=steps)
        .map(|i| {
            let t = t_min + (t_max - t_min) * i as f64 / steps as f64;
            let p = MetricParams::new(t, k)?;
            let m = ProductMetric::new(mfd.clone(), p);
            let (lo, hi) = bounds_for(mfd, p)?;
            Ok(CurvatureRow {
                t,
                k,
                curvature: sectional_curvature(&m, z, v)?,
                lo,
                hi,
            })
        })
        .collect()
}

/// Writes a geodesic as CSV: `s`, the real coordinates `x*`, then the velocity `u*`.
pub fn write_geodesic_csv<W: Write>(path: &GeodesicPath, out: W) -> Result<()> {
    let err = |e: csv::Error| Error::Config(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let n = path.samples.first().map_or(0, |s| s.x.len());
    let mut header = vec!["s".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..n).map(|i| format!("u{i}")));
    w.write_record(&header).map_err(err)?;
    for smp in &path.samples {
        let row: Vec<String> = std::iter::once(smp.s)
            .chain(smp.x.iter().copied())
            .chain(smp.u.iter().copied())
            .map(|x| x.to_string())
            .collect();
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(checks: &str) -> RunManifest {
        RunManifest::from_toml(&format!(
            "t_grid = [0.0, 1.0]\nk_grid = [2]\nsamples = 3\nseed = 11\nchecks = {checks}\n[[factors]]\nkind = \"poincare_disk\"\ncount = 2\n"
        ))
        .unwrap()
    }

    #[test]
    fn argument_parsers() {
        let v = parse_complex_list("1, 0.5-0.2i,3i").unwrap();
        assert_eq!(
            v,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, -0.2),
                Complex64::new(0.0, 3.0)
            ]
        );
        assert!(parse_complex_list("1,x").is_err());
        let m = parse_factor_list("disk,ball:2,flat:3").unwrap();
        assert_eq!(m.dim(), 6);
        assert!(parse_factor_list("torus").is_err());
        assert_eq!(parse_tolerance("berwald=1e-3").unwrap(), ("berwald".into(), 1e-3));
        assert!(parse_tolerance("berwald").is_err());
    }

    #[test]
    fn sweep_stays_in_bounds() {
        let mfd = ProductManifold::polydisk(2).unwrap();
        let z = [Complex64::new(0.0, 0.0); 2];
        let v = [Complex64::new(1.0, 0.0); 2];
        let rows = curvature_sweep(&mfd, &z, &v, 2, 0.0, 4.0, 8).unwrap();
        assert_eq!(rows.len(), 9);
        assert!((rows[0].curvature + 2.0).abs() < 1e-12);
        assert!(rows
            .iter()
            .all(|r| r.curvature >= r.lo - 1e-9 && r.curvature <= r.hi + 1e-9));
    }

    #[test]
    fn empty_run() {
        let r = run_checks(&manifest("[]")).unwrap();
        assert_eq!(r.summary, Summary::default());
        let json: serde_json::Value = serde_json::from_str(&emit_to_string(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(json["checks"].as_array().unwrap().len(), 0);
        let csv = emit_to_string(&r, Format::Csv).unwrap();
        assert!(csv.is_empty() || csv.lines().count() <= 1);
    }

    #[test]
    fn berwald_grid_and_round_trip() {
        let r = run_checks(&manifest("[\"berwald\", \"kahler\", \"curvature_bounds\"]")).unwrap();
        assert_eq!(r.checks.len(), 6);
        assert_eq!(r.summary.passed, 6);
        assert_eq!(r.exit_code(), 0);
        let json = emit_to_string(&r, Format::Json).unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let csv = emit_to_string(&r, Format::Csv).unwrap();
        let mut rd = csv::Reader::from_reader(csv.as_bytes());
        let rows: Vec<CsvRow> = rd.deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(rows, csv_rows(&r));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn deterministic_apart_from_wall_time() {
        let m = manifest("[\"strong_convexity\", \"real_spray\"]");
        let mut a = run_checks(&m).unwrap();
        let mut b = run_checks(&m).unwrap();
        a.wall_time = 0.0;
        b.wall_time = 0.0;
        assert_eq!(
            emit_to_string(&a, Format::Json).unwrap(),
            emit_to_string(&b, Format::Json).unwrap()
        );
    }
}
