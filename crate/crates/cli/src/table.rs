//! CSV artifacts. Floats are printed with 12 significant digits.

use std::path::Path;

use mincurv::catenoid::CatenoidProfile;
use mincurv::end_model::LevelCurve;
use mincurv::lift::PolygonP;
use mincurv::metric::PinchingReport;
use mincurv::sinh_gordon::{AnnulusGrid, InnerBoundary, XiField};

use crate::error::{HarnessError, Result};

pub const SIG_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits, shortest form, `-0` printed as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    // Round-trip through the rounded value so the shortest repr is used.
    let rounded: f64 = sci.parse().expect("formatted float parses");
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{rounded}")
    } else {
        let (mant, e) = sci.split_once('e').expect("scientific format");
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    }
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<std::fs::File>> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

pub fn write_pinching(path: &Path, rep: &PinchingReport) -> Result<()> {
    let mut w = writer(path, &["z_re", "z_im", "K", "pass"])?;
    for s in &rep.samples {
        w.write_record([fmt_num(s.z_re), fmt_num(s.z_im), fmt_num(s.k), s.pass.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_level_curves(path: &Path, curves: &[LevelCurve]) -> Result<()> {
    let mut w = writer(path, &["k", "z_re", "z_im"])?;
    for l in curves {
        for z in &l.samples {
            w.write_record([l.k.to_string(), fmt_num(z.re), fmt_num(z.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_polygon(path: &Path, p: &PolygonP) -> Result<()> {
    let mut w = writer(path, &["t", "z_re", "z_im", "sector_k", "arc_class"])?;
    for q in &p.points {
        w.write_record([fmt_num(q.t), fmt_num(q.z.re), fmt_num(q.z.im), q.sector.to_string(), q.arc.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_xi(path: &Path, xi: &XiField) -> Result<()> {
    let g = &xi.grid;
    let mut w = writer(path, &["r", "theta", "xi", "residual"])?;
    for i in 0..g.n_r {
        for j in 0..g.n_theta {
            let p = g.idx(i, j);
            w.write_record([
                fmt_num(g.radius(i)),
                fmt_num(g.theta(j)),
                fmt_num(xi.values[p]),
                fmt_num(xi.residual[p]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile(path: &Path, p: &CatenoidProfile, s_max: f64, samples: usize) -> Result<f64> {
    let mut w = writer(path, &["s", "h", "h_prime", "ode_residual"])?;
    let mut worst = 0.0f64;
    // The slope is infinite at the neck itself, so sampling starts one step out.
    let ds = (s_max - p.r_neck) / samples as f64;
    for i in 1..=samples {
        let s = p.r_neck + ds * i as f64;
        let res = p.ode_residual(s)?;
        worst = worst.max(res.abs());
        w.write_record([fmt_num(s), fmt_num(p.height(s)?), fmt_num(p.h_prime(s)?), fmt_num(res)])?;
    }
    w.flush()?;
    Ok(worst)
}

fn input_err(path: &Path, message: impl Into<String>) -> HarnessError {
    HarnessError::Input { path: path.display().to_string(), message: message.into() }
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(input_err(path, format!("expected columns {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| input_err(path, format!("line {}: {e}", rows.len() + 2)))?);
    }
    Ok(rows)
}

/// Reads `xi.csv` back into a field on the grid it was written from.
pub fn read_xi(path: &Path) -> Result<XiField> {
    let rows = read_rows(path, &["r", "theta", "xi", "residual"])?;
    let n_theta = rows.iter().take_while(|row| row[0] == rows[0][0]).count();
    if n_theta == 0 || rows.len() % n_theta != 0 {
        return Err(input_err(path, "rows do not form a polar grid"));
    }
    let n_r = rows.len() / n_theta;
    let grid = AnnulusGrid::new(rows[0][0], rows[rows.len() - 1][0], n_r, n_theta)?;
    for i in 0..n_r {
        for j in 0..n_theta {
            let row = &rows[grid.idx(i, j)];
            let tol = 1e-10 * (1.0 + grid.radius(i));
            if (row[0] - grid.radius(i)).abs() > tol || (row[1] - grid.theta(j)).abs() > 1e-10 {
                return Err(input_err(path, format!("node ({i}, {j}) is off the log-polar grid")));
            }
        }
    }
    let values: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let residual: Vec<f64> = rows.iter().map(|r| r[3]).collect();
    let residual_norm = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(XiField { grid, values, residual, residual_norm, iterations: 0 })
}

/// Inner boundary data `(theta, xi)`, one row per angular node.
pub fn read_boundary(path: &Path, n_theta: usize) -> Result<InnerBoundary> {
    let rows = read_rows(path, &["theta", "xi"])?;
    if rows.len() != n_theta {
        return Err(input_err(path, format!("{} rows for {n_theta} angular nodes", rows.len())));
    }
    let step = 2.0 * std::f64::consts::PI / n_theta as f64;
    for (j, row) in rows.iter().enumerate() {
        if (row[0] - step * j as f64).abs() > 1e-10 {
            return Err(input_err(path, format!("row {j}: theta {} is not node {j}", row[0])));
        }
    }
    Ok(InnerBoundary::Nodal(rows.iter().map(|r| r[1]).collect()))
}
