//! End-to-end experiment runs: metric check, then per end
//! trace -> solve -> lift -> ledger, then the catenoid comparisons.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mincurv::catenoid::{
    comparison_signs, ratio_inequality, CatenoidProfile, ComparisonReport, ComparisonStatus, RatioReport,
};
use mincurv::end_model::{trace_level_curves, EndData, LevelCurve, TraceConfig};
use mincurv::ledger::{
    gauss_bonnet_from_polygon, intrinsic_curvature, metric_from_xi, polygon_curvature, subharmonicity_check,
    total_curvature_formula,
};
use mincurv::lift::{close_polygon, lift, LiftConfig, PolygonP};
use mincurv::metric::{ConformalDiscMetric, CurvatureBounds, PinchingConfig, WarpedPolarMetric};
use mincurv::sinh_gordon::{solve_xi, AnnulusGrid, CurvatureField, InnerBoundary, SolverConfig, XiField};
use mincurv::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{BoundarySpec, CompareSpec, ExperimentConfig, MetricSpec, SolverSpec};
use crate::error::{HarnessError, Result};
use crate::manifest::{RunManifest, StageRecord, StageStatus};
use crate::svg::{emit_svg, Layer};
use crate::table;

pub const K_SIGMA_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-14;
pub const ODDNESS_TOL: f64 = 1e-12;
pub const FORWARD_TOL: f64 = 1e-7;
pub const ODE_TOL: f64 = 1e-8;

/// Worker pool for fan-out stages, capped by `MINCURV_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MINCURV_THREADS") {
        let n: usize =
            v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                HarnessError::config(format!("MINCURV_THREADS must be a positive integer, got {v:?}"))
            })?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| HarnessError::stage("thread pool", e))
}

pub fn solver_config(spec: &SolverSpec, n_theta: usize) -> Result<Option<(f64, SolverConfig)>> {
    match spec {
        SolverSpec::Flat => Ok(None),
        SolverSpec::SinhGordon { k_m, bc_inner, tol, max_iter } => {
            let bc = match bc_inner {
                BoundarySpec::Value(v) => InnerBoundary::Constant(*v),
                BoundarySpec::File(p) => table::read_boundary(p, n_theta)?,
            };
            let cfg = SolverConfig { tol: *tol, max_iter: *max_iter, bc_inner: bc, ..SolverConfig::default() };
            Ok(Some((*k_m, cfg)))
        }
    }
}

pub fn zero_field(grid: AnnulusGrid) -> XiField {
    XiField { grid, values: vec![0.0; grid.len()], residual: vec![0.0; grid.len()], residual_norm: 0.0, iterations: 0 }
}

/// Pinching scan at `spec.samples` points drawn uniformly from the disc of radius `r_max`.
pub fn metric_scan(spec: &MetricSpec, seed: u64) -> Result<mincurv::metric::PinchingReport> {
    let metric = ConformalDiscMetric::from_spec(&spec.alpha)?;
    let bounds = CurvatureBounds::new(spec.bounds.a, spec.bounds.b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Complex> = (0..spec.samples)
        .map(|_| {
            let r = spec.r_max * rng.gen::<f64>().sqrt();
            Complex::from_polar(r, 2.0 * PI * rng.gen::<f64>())
        })
        .collect();
    let cfg = PinchingConfig { h: spec.h, tol: spec.tol, r_max: spec.r_max };
    Ok(mincurv::metric::verify_pinching(&metric, &bounds, &pts, &cfg))
}

/// Sign and ratio scans for the pair of model catenoids over `G`, sampled
/// from just past the outer neck to `s_max`.
pub fn compare_scan(spec: &CompareSpec) -> Result<(ComparisonReport, RatioReport)> {
    let g = WarpedPolarMetric::from(&spec.g);
    let neck = CatenoidProfile::new(spec.a, spec.k2)?.r_neck;
    let lo = (neck + 0.05).max(0.05);
    if !(spec.s_max > lo) || spec.samples < 2 {
        return Err(HarnessError::config(format!("compare needs s_max > {lo} and >= 2 samples")));
    }
    let n = spec.samples;
    let s: Vec<f64> = (0..n).map(|i| lo + (spec.s_max - lo) * i as f64 / (n - 1) as f64).collect();
    Ok((comparison_signs(&g, spec.k1, spec.k2, spec.a, &s)?, ratio_inequality(&g, spec.k1, spec.k2, &s)?))
}

pub fn write_compare(path: &Path, signs: &ComparisonReport, ratio: &RatioReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["s", "h2_k1", "h2_k2", "sign_k1", "sign_k2", "ratio_lower", "ratio", "ratio_upper"])?;
    for (c, r) in signs.samples.iter().zip(&ratio.samples) {
        let f = table::fmt_num;
        w.write_record([
            f(c.s),
            f(c.h2_k1),
            f(c.h2_k2),
            c.sign_k1.to_string(),
            c.sign_k2.to_string(),
            f(r.lower),
            f(r.ratio),
            f(r.upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    root: PathBuf,
    man: RunManifest,
    pool: rayon::ThreadPool,
}

impl Run<'_> {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Option<T> {
        let t0 = Instant::now();
        let out = f(self);
        let wall_time_s = t0.elapsed().as_secs_f64();
        let (status, cause) = match &out {
            Ok(_) => (StageStatus::Ok, None),
            Err(e) => (StageStatus::Failed, Some(e.to_string())),
        };
        self.man.stages.push(StageRecord { name: name.into(), status, cause, wall_time_s });
        if status == StageStatus::Failed {
            self.man.check(format!("{name} completed"), f64::NAN, f64::NAN, false);
        }
        out.ok()
    }

    fn skip(&mut self, name: &str, because: &str) {
        self.man.stages.push(StageRecord {
            name: name.into(),
            status: StageStatus::Skipped,
            cause: Some(format!("{because} failed")),
            wall_time_s: 0.0,
        });
        self.man.check(format!("{name} completed"), f64::NAN, f64::NAN, false);
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn artifact(&mut self, path: &Path) -> Result<()> {
        let root = self.root.clone();
        self.man.add_artifact(&root, path)
    }

    fn formula(&mut self) -> Result<()> {
        for f in &self.cfg.checks.formula {
            let t = total_curvature_formula(f.genus, &f.ms)?;
            let name = format!("formula genus={} n={} ms={:?}: {t}", f.genus, f.n, f.ms);
            self.man.check(name, t.multiple as f64, f.expect as f64, t.multiple == f.expect);
        }
        Ok(())
    }

    fn metric(&mut self, spec: &MetricSpec) -> Result<()> {
        let rep = metric_scan(spec, self.cfg.seed)?;
        let path = self.path("metric_check.csv");
        table::write_pinching(&path, &rep)?;
        self.artifact(&path)?;
        self.man.check("metric pinching violations", rep.violations.len() as f64, 0.0, rep.pass());
        Ok(())
    }

    fn trace(&mut self, i: usize, end: &EndData) -> Result<Vec<LevelCurve>> {
        let curves = trace_level_curves(end, &TraceConfig::default())?;
        let path = self.path(&format!("level_curves_{i}.csv"));
        table::write_level_curves(&path, &curves)?;
        self.artifact(&path)?;
        Ok(curves)
    }

    fn solve(&mut self, i: usize, end: &EndData) -> Result<XiField> {
        let g = self.cfg.grid.expect("validated");
        let spec = self.cfg.solver.as_ref().expect("validated");
        let grid = AnnulusGrid::new(end.r, g.r_out, g.n_r, g.n_theta)?;
        let xi = match solver_config(spec, g.n_theta)? {
            None => zero_field(grid),
            Some((k_m, sc)) => {
                let k = CurvatureField::Constant(k_m);
                let xi = solve_xi(end, &k, &grid, &sc)?;
                let neg = SolverConfig { bc_inner: sc.bc_inner.negated(), ..sc.clone() };
                let odd = solve_xi(end, &k, &grid, &neg)?;
                let oddness = xi.values.iter().zip(&odd.values).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
                let sub = subharmonicity_check(&xi, end, &k);
                let metric = metric_from_xi(&xi, end);
                let k_max = intrinsic_curvature(&metric).max;
                let id = metric.identity_error();
                self.man.check(format!("end[{i}] subharmonicity min lap u"), sub.min_lap_u, sub.threshold, sub.pass);
                self.man.check(format!("end[{i}] max K_Sigma"), k_max, K_SIGMA_TOL, k_max <= K_SIGMA_TOL);
                self.man.check(format!("end[{i}] oddness"), oddness, ODDNESS_TOL, oddness <= ODDNESS_TOL);
                self.man.check(format!("end[{i}] metric identity"), id, IDENTITY_TOL, id <= IDENTITY_TOL);
                xi
            }
        };
        let path = self.path(&format!("xi_{i}.csv"));
        table::write_xi(&path, &xi)?;
        self.artifact(&path)?;
        Ok(xi)
    }

    fn lift(&mut self, i: usize, end: &EndData, curves: Option<&[LevelCurve]>) -> Result<Vec<PolygonP>> {
        let cfg = LiftConfig::with_step(self.cfg.lift_step);
        let cs = self.cfg.c_schedule.clone();
        let polys: Vec<mincurv::Result<(f64, PolygonP)>> = self.pool.install(|| {
            cs.par_iter()
                .map(|&c| {
                    let l = lift(end, c, &cfg)?;
                    let res = l.forward_residual()?;
                    Ok((res, close_polygon(&l, end, &cfg)?))
                })
                .collect()
        });
        let mut out = Vec::with_capacity(polys.len());
        let expect = 4 * (end.m as usize + 1) + if end.c == 0.0 { 0 } else { 2 };
        for (j, p) in polys.into_iter().enumerate() {
            let (res, p) = p?;
            let c = cs[j];
            let tol = FORWARD_TOL * (1.0 + c);
            self.man.check(format!("end[{i}] C={c} forward residual"), res, tol, res < tol);
            let nv = p.vertices.len();
            self.man.check(format!("end[{i}] C={c} vertex count"), nv as f64, expect as f64, nv == expect);
            let want_reflex = usize::from(end.c != 0.0);
            let nr = p.reflex_count();
            self.man.check(format!("end[{i}] C={c} reflex vertices"), nr as f64, want_reflex as f64, nr == want_reflex);
            let csv = self.path(&format!("polygon_{i}_{j}.csv"));
            table::write_polygon(&csv, &p)?;
            self.artifact(&csv)?;
            let svg = self.path(&format!("polygon_{i}_{j}.svg"));
            let mut layers = Vec::new();
            if let Some(cv) = curves {
                layers.push(Layer::LevelCurves(cv));
            }
            layers.push(Layer::Polygon(&p));
            emit_svg(&layers, &svg)?;
            self.artifact(&svg)?;
            out.push(p);
        }
        Ok(out)
    }

    fn ledger(&mut self, i: usize, end: &EndData, xi: &XiField, polys: &[PolygonP]) -> Result<()> {
        let reports: Vec<mincurv::Result<_>> = self.pool.install(|| {
            polys
                .par_iter()
                .map(|p| {
                    let rep = gauss_bonnet_from_polygon(end, xi, p)?;
                    let abs: f64 = polygon_curvature(xi, p)?.iter().map(|t| t.abs_integral).sum();
                    Ok((rep, abs))
                })
                .collect()
        });
        let tol = self.cfg.checks.defect_tol.unwrap_or(0.02 * 2.0 * PI);
        let mut decay = Vec::new();
        for (j, r) in reports.into_iter().enumerate() {
            let (rep, abs) = r?;
            let path = self.path(&format!("gauss_bonnet_{i}_{j}.json"));
            std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
            self.artifact(&path)?;
            self.man.check(format!("end[{i}] C={} defect", rep.c), rep.defect.abs(), tol, rep.defect.abs() < tol);
            decay.push(abs);
        }
        if let Some(d) = self.cfg.checks.boundary_decay {
            let decreasing = decay.windows(2).all(|w| w[1] < w[0]);
            let last = *decay.last().expect("schedule has two entries");
            self.man.check(
                format!("end[{i}] boundary curvature decreasing"),
                last,
                d.final_below,
                decreasing && last < d.final_below,
            );
        }
        Ok(())
    }
}

/// Runs every configured stage and writes `manifest.json` to the output directory.
/// Stage failures are recorded in the manifest rather than returned.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut run = Run {
        cfg,
        root: cfg.output_dir.clone(),
        man: RunManifest::new(&cfg.canonical_json(), cfg.seed),
        pool: thread_pool()?,
    };
    if !cfg.checks.formula.is_empty() {
        run.stage("formula", Run::formula);
    }
    if let Some(m) = &cfg.metric {
        run.stage("metric", |r| r.metric(m));
    }
    for (i, end) in cfg.ends.iter().enumerate() {
        let curves = run.stage(&format!("trace[{i}]"), |r| r.trace(i, end));
        let xi = if cfg.solver.is_some() { run.stage(&format!("solve[{i}]"), |r| r.solve(i, end)) } else { None };
        if cfg.c_schedule.is_empty() {
            continue;
        }
        // Lifting needs the same radius invariant as tracing.
        let polys = if curves.is_some() {
            run.stage(&format!("lift[{i}]"), |r| r.lift(i, end, curves.as_deref()))
        } else {
            run.skip(&format!("lift[{i}]"), &format!("trace[{i}]"));
            None
        };
        if cfg.solver.is_some() {
            match (&xi, &polys) {
                (Some(x), Some(p)) => {
                    run.stage(&format!("ledger[{i}]"), |r| r.ledger(i, end, x, p));
                }
                (None, _) => run.skip(&format!("ledger[{i}]"), &format!("solve[{i}]")),
                (_, None) => run.skip(&format!("ledger[{i}]"), &format!("lift[{i}]")),
            }
        }
    }
    if let Some(c) = &cfg.catenoid {
        run.stage("catenoid", |r| {
            let p = CatenoidProfile::new(c.a, c.k)?;
            let path = r.path("profile.csv");
            let worst = table::write_profile(&path, &p, c.s_max, c.samples)?;
            r.artifact(&path)?;
            r.man.check("catenoid ODE residual", worst, ODE_TOL, worst < ODE_TOL);
            Ok(())
        });
    }
    if let Some(c) = &cfg.compare {
        run.stage("compare", |r| {
            let (signs, ratio) = compare_scan(c)?;
            let path = r.path("compare.csv");
            write_compare(&path, &signs, &ratio)?;
            r.artifact(&path)?;
            let bad = signs.samples.iter().filter(|s| s.sign_k1 != -1 || s.sign_k2 != 1).count();
            r.man.check("compare numerator signs", bad as f64, 0.0, signs.status == ComparisonStatus::Pass);
            r.man.check("compare ratio upper margin", ratio.upper_margin, 0.0, ratio.upper_margin > 0.0);
            r.man.check("compare ratio lower margin", ratio.lower_margin, 0.0, ratio.lower_margin > 0.0);
            Ok(())
        });
    }
    let man = run.man;
    std::fs::write(cfg.output_dir.join("manifest.json"), serde_json::to_string_pretty(&man)?)?;
    Ok(man)
}
