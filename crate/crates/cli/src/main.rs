#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use mincurv::catenoid::CatenoidProfile;
use mincurv::end_model::EndData;
use mincurv::ledger::{gauss_bonnet_from_polygon, total_curvature_formula};
use mincurv::lift::{close_polygon, lift, LiftConfig};
use mincurv::metric::WarpSpec;
use mincurv::sinh_gordon::{solve_xi, AnnulusGrid, CurvatureField, InnerBoundary, SolverConfig};
use mincurv_cli::config::{CompareSpec, MetricSpec};
use mincurv_cli::pipeline::{compare_scan, metric_scan, write_compare};
use mincurv_cli::svg::{emit_svg, Layer};
use mincurv_cli::{run_pipeline, table, ExperimentConfig};
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "mincurv", version, about = "Total curvature experiments for minimal ends in M x R")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check curvature pinching of a conformal disc metric.
    MetricCheck {
        /// JSON `{"alpha": {...}, "bounds": {"a": .., "b": ..}}`.
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the sinh-Gordon equation on an annulus of an end.
    EndSolve {
        #[arg(long)]
        end: PathBuf,
        /// `n_r,n_theta`.
        #[arg(long)]
        grid: String,
        #[arg(long = "Rout")]
        r_out: f64,
        /// A constant or a CSV file with columns `theta,xi`.
        #[arg(long)]
        bc_inner: String,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        k_m: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lift the square of half-side C and close the polygon P(C).
    Lift {
        #[arg(long)]
        end: PathBuf,
        #[arg(long = "C")]
        c: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Gauss-Bonnet ledger of an end truncated by P(C).
    GaussBonnet {
        #[arg(long)]
        end: PathBuf,
        #[arg(long)]
        xi: PathBuf,
        #[arg(long = "C")]
        c: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact total curvature 2 pi (2 - 2g - 2n - sum m).
    Formula {
        #[arg(long)]
        genus: u32,
        /// Comma-separated end degrees.
        #[arg(long, value_delimiter = ',')]
        ends: Vec<u32>,
    },
    /// Height profile of a catenoid in H^2(-k^2) x R.
    Catenoid {
        #[arg(long = "A")]
        a: f64,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        smax: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean-curvature signs of the model catenoids over a warped metric.
    Compare {
        /// JSON warp spec, e.g. `{"kind": "sinh_squared", "k": 1.0}`.
        #[arg(long = "G")]
        g: PathBuf,
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        k2: f64,
        #[arg(long = "A")]
        a: f64,
        #[arg(long, default_value_t = 5.0)]
        smax: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_grid(s: &str) -> anyhow::Result<(usize, usize)> {
    let Some((a, b)) = s.split_once(',') else { bail!("grid must be n_r,n_theta, got {s:?}") };
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn run(cmd: Cmd) -> anyhow::Result<bool> {
    match cmd {
        Cmd::MetricCheck { metric, seed, out } => {
            let spec: MetricSpec = read_json(&metric)?;
            let rep = metric_scan(&spec, seed)?;
            table::write_pinching(&out, &rep)?;
            println!(
                "samples={} violations={} excluded={} tol={:e}",
                rep.samples.len(),
                rep.violations.len(),
                rep.excluded,
                rep.tol
            );
            Ok(rep.pass())
        }
        Cmd::EndSolve { end, grid, r_out, bc_inner, k_m, tol, out } => {
            let end: EndData = read_json(&end)?;
            let (n_r, n_theta) = parse_grid(&grid)?;
            let g = AnnulusGrid::new(end.r, r_out, n_r, n_theta)?;
            let bc = match bc_inner.parse::<f64>() {
                Ok(v) => InnerBoundary::Constant(v),
                Err(_) => table::read_boundary(Path::new(&bc_inner), n_theta)?,
            };
            let cfg = SolverConfig { tol, bc_inner: bc, ..SolverConfig::default() };
            let xi = solve_xi(&end, &CurvatureField::Constant(k_m), &g, &cfg)?;
            table::write_xi(&out, &xi)?;
            println!("iterations={} residual={:e} max|xi|={:e}", xi.iterations, xi.residual_norm, xi.max_abs());
            Ok(true)
        }
        Cmd::Lift { end, c, step, out, svg } => {
            let end: EndData = read_json(&end)?;
            let cfg = LiftConfig::with_step(step);
            let l = lift(&end, c, &cfg)?;
            let p = close_polygon(&l, &end, &cfg)?;
            table::write_polygon(&out, &p)?;
            if let Some(svg) = svg {
                emit_svg(&[Layer::Polygon(&p)], &svg)?;
            }
            println!(
                "points={} vertices={} reflex={} forward_residual={:e} min|z|={}",
                p.points.len(),
                p.vertices.len(),
                p.reflex_count(),
                l.forward_residual()?,
                p.min_abs()
            );
            Ok(true)
        }
        Cmd::GaussBonnet { end, xi, c, step, out } => {
            let end: EndData = read_json(&end)?;
            let xi = table::read_xi(&xi)?;
            if (xi.grid.r_in - end.r).abs() > 1e-9 * end.r {
                bail!("xi grid starts at {} but the end radius is {}", xi.grid.r_in, end.r);
            }
            let cfg = LiftConfig::with_step(step);
            let p = close_polygon(&lift(&end, c, &cfg)?, &end, &cfg)?;
            let rep = gauss_bonnet_from_polygon(&end, &xi, &p)?;
            std::fs::write(&out, serde_json::to_string_pretty(&rep)?)?;
            println!(
                "interior={:e} polygon={:e} circle={:e} defect={:e} closure={:e}",
                rep.interior_integral, rep.polygon_smooth, rep.inner_circle, rep.defect, rep.closure
            );
            Ok(true)
        }
        Cmd::Formula { genus, ends } => {
            let t = total_curvature_formula(genus, &ends)?;
            println!("{t}");
            Ok(true)
        }
        Cmd::Catenoid { a, k, smax, samples, out } => {
            let p = CatenoidProfile::new(a, k)?;
            if !(smax > p.r_neck) || samples < 2 {
                bail!("need smax beyond the neck at {} and at least 2 samples", p.r_neck);
            }
            let worst = table::write_profile(&out, &p, smax, samples)?;
            println!("neck={} max_ode_residual={worst:e}", p.r_neck);
            Ok(worst < mincurv_cli::pipeline::ODE_TOL)
        }
        Cmd::Compare { g, k1, k2, a, smax, samples, out } => {
            let g: WarpSpec = read_json(&g)?;
            let spec = CompareSpec { g, k1, k2, a, s_max: smax, samples };
            let (signs, ratio) = compare_scan(&spec)?;
            if let Some(out) = out {
                write_compare(&out, &signs, &ratio)?;
            }
            println!(
                "signs={:?} ratio_pass={} upper_margin={:e} lower_margin={:e}",
                signs.status, ratio.pass, ratio.upper_margin, ratio.lower_margin
            );
            Ok(signs.status == mincurv::catenoid::ComparisonStatus::Pass && ratio.pass)
        }
        Cmd::Run { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let man = run_pipeline(&cfg)?;
            for s in &man.stages {
                let cause = s.cause.as_deref().map(|c| format!(" ({c})")).unwrap_or_default();
                println!("stage {} {:?} {:.3}s{cause}", s.name, s.status, s.wall_time_s);
            }
            print!("{}", man.acceptance_table());
            Ok(man.all_pass())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
