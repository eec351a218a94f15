use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finslerlab::cli::{
    curvature_sweep, emit, parse_complex_list, parse_factor_list, parse_tolerance, run_checks, write_csv,
    write_geodesic_csv, Format, RunManifest,
};
use finslerlab::geodesics::{integrate_geodesic, polydisk_distance};
use finslerlab::{Error, MetricParams, ProductManifold, ProductMetric};

#[derive(Parser)]
#[command(
    name = "finslerlab",
    version,
    about = "Checks and computations for F_{t,k} product metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv"])]
    format: String,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the manifest seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", global = true)]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in a TOML manifest.
    Check { manifest: PathBuf },
    /// Holomorphic sectional curvature along a sweep of t.
    Curvature {
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Comma-separated complex direction, e.g. `1,1`.
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        /// Base point; the origin when omitted.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Factors, e.g. `disk,disk` or `ball:2,disk`; defaults to a polydisk.
        #[arg(long)]
        factors: Option<String>,
    },
    /// Invariant distance between two polydisk points.
    Distance {
        #[arg(long, allow_hyphen_values = true)]
        z1: String,
        #[arg(long, allow_hyphen_values = true)]
        z2: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Integrate a geodesic from a point and initial velocity.
    Geodesic {
        #[arg(long = "from", allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        velocity: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        s_max: f64,
        #[arg(long, default_value_t = 32)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long)]
        factors: Option<String>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn manifold(factors: &Option<String>, dim: usize) -> Result<ProductManifold, Error> {
    match factors {
        Some(f) => parse_factor_list(f),
        None => ProductManifold::polydisk(dim).map_err(|e| Error::Config(e.to_string())),
    }
}

fn json<T: serde::Serialize>(value: &T, out: &mut dyn Write) -> Result<(), Error> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(out).map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, Error> {
    let format: Format = cli.format.parse()?;
    match cli.command {
        Command::Check { manifest } => {
            let mut m = RunManifest::load(&manifest)?;
            if let Some(seed) = cli.seed {
                m.seed = seed;
            }
            for t in &cli.tol {
                let (name, value) = parse_tolerance(t)?;
                m.tolerances.insert(name, value);
            }
            let report = run_checks(&m)?;
            let mut out = output(&cli.out)?;
            emit(&report, format, &mut out)?;
            out.flush().map_err(|e| Error::Config(e.to_string()))?;
            Ok(report.all_passed())
        }
        Command::Curvature {
            t_min,
            t_max,
            steps,
            k,
            direction,
            point,
            factors,
        } => {
            let v = parse_complex_list(&direction)?;
            let mfd = manifold(&factors, v.len())?;
            let z = match point {
                Some(p) => parse_complex_list(&p)?,
                None => vec![Default::default(); mfd.dim()],
            };
            let rows = curvature_sweep(&mfd, &z, &v, k, t_min, t_max, steps)?;
            let mut out = output(&cli.out)?;
            match format {
                Format::Json => json(&rows, &mut out)?,
                Format::Csv => write_csv(&rows, &mut out)?,
            }
            Ok(true)
        }
        Command::Distance { z1, z2, t, k } => {
            let (z1, z2) = (parse_complex_list(&z1)?, parse_complex_list(&z2)?);
            let d = polydisk_distance(MetricParams::new(t, k)?, &z1, &z2)?;
            let mut out = output(&cli.out)?;
            match format {
                Format::Json => json(&d, &mut out)?,
                Format::Csv => write_csv(&[d], &mut out)?,
            }
            Ok(true)
        }
        Command::Geodesic {
            from,
            velocity,
            s_max,
            steps,
            t,
            k,
            factors,
        } => {
            let (z, v) = (parse_complex_list(&from)?, parse_complex_list(&velocity)?);
            let mfd = manifold(&factors, z.len())?;
            let m = ProductMetric::new(mfd, MetricParams::new(t, k)?);
            let layout = m.manifold().layout();
            if z.len() != layout.complex_dim() || v.len() != layout.complex_dim() {
                return Err(Error::Config(
                    "point and velocity must match the manifold dimension".into(),
                ));
            }
            let path = integrate_geodesic(&m, &layout.to_real(&z), &layout.to_real(&v), s_max, steps)?;
            let mut out = output(&cli.out)?;
            match format {
                Format::Json => json(&path, &mut out)?,
                Format::Csv => write_geodesic_csv(&path, &mut out)?,
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
