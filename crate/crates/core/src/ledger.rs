//! Induced metric `ds^2 = 4 cosh^2(xi) |phi| |dz|^2`, intrinsic and geodesic
//! curvature, and the Gauss-Bonnet accounting of an end.
//!
//! Sign conventions: `P(C)` is traversed counter-clockwise with the end region
//! on its left, and the inner circle `|z| = R` counter-clockwise. For a curve
//! in the conformal metric `e^(2u) g_0`,
//! `kappa ds = kappa_0 ds_0 + d_n u ds_0` with `n` the right-hand normal.
//! The arcs of `P(C)` are straight in natural coordinates, so along them only
//! the `d_n u` term survives, with `u = log(2 cosh xi)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::end_model::EndData;
use crate::lift::{close_polygon, lift, LiftConfig, PolygonP};
use crate::sinh_gordon::{CurvatureField, NaturalField, XiField};
use crate::{Complex, Error, Result};

/// Conformal factor `lambda = 2 cosh(xi) sqrt|phi|` on the nodes of a solved annulus.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    pub lambda: Vec<f64>,
    pub xi: XiField,
    pub end: EndData,
}

pub fn metric_from_xi(xi: &XiField, end: &EndData) -> MetricField {
    let g = &xi.grid;
    let mut lambda = vec![0.0; g.len()];
    for i in 0..g.n_r {
        for j in 0..g.n_theta {
            let p = g.idx(i, j);
            lambda[p] = 2.0 * xi.values[p].cosh() * end.abs_phi(g.z(i, j)).sqrt();
        }
    }
    MetricField { lambda, xi: xi.clone(), end: *end }
}

impl MetricField {
    /// Largest relative deviation of `lambda^2` from `4 cosh^2(xi) |phi|`.
    pub fn identity_error(&self) -> f64 {
        let g = &self.xi.grid;
        let mut worst = 0.0f64;
        for i in 0..g.n_r {
            for j in 0..g.n_theta {
                let p = g.idx(i, j);
                let ch = self.xi.values[p].cosh();
                let rhs = 4.0 * ch * ch * self.end.abs_phi(g.z(i, j));
                worst = worst.max((self.lambda[p] * self.lambda[p] - rhs).abs() / rhs);
            }
        }
        worst
    }
}

fn lncosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Log-polar five-point Laplacian `(d_rho^2 + d_theta^2) f` at an interior node.
fn log_polar_lap(xi: &XiField, f: &[f64], i: usize, j: usize) -> f64 {
    let g = &xi.grid;
    let nt = g.n_theta;
    let (hr, ht) = (g.rho_step(), g.theta_step());
    let c = f[g.idx(i, j)];
    (f[g.idx(i + 1, j)] - 2.0 * c + f[g.idx(i - 1, j)]) / (hr * hr)
        + (f[g.idx(i, (j + 1) % nt)] - 2.0 * c + f[g.idx(i, (j + nt - 1) % nt)]) / (ht * ht)
}

/// Intrinsic curvature `K = -(Lap_0 log lambda) / lambda^2` on interior rings
/// `1..n_r-1`. The harmonic part `log 2 + log|phi| / 2` of `log lambda` is
/// dropped before differencing.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicCurvature {
    pub n_rows: usize,
    pub n_theta: usize,
    /// Row-major over rings `1..n_r-1`.
    pub values: Vec<f64>,
    pub max: f64,
    pub min: f64,
}

pub fn intrinsic_curvature(metric: &MetricField) -> IntrinsicCurvature {
    let xi = &metric.xi;
    let g = &xi.grid;
    let v: Vec<f64> = xi.values.iter().map(|&x| lncosh(x)).collect();
    let mut values = Vec::with_capacity((g.n_r - 2) * g.n_theta);
    for i in 1..g.n_r - 1 {
        let r = g.radius(i);
        for j in 0..g.n_theta {
            let lam = metric.lambda[g.idx(i, j)];
            values.push(-log_polar_lap(xi, &v, i, j) / (r * r * lam * lam));
        }
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    IntrinsicCurvature { n_rows: g.n_r - 2, n_theta: g.n_theta, values, max, min }
}

/// `K` at a single node; boundary rings have no centered stencil.
pub fn intrinsic_curvature_at(metric: &MetricField, i: usize, j: usize) -> Result<f64> {
    let g = &metric.xi.grid;
    if i == 0 || i + 1 >= g.n_r || j >= g.n_theta {
        return Err(Error::Stencil(format!("node ({i}, {j}) has no interior stencil")));
    }
    let v: Vec<f64> = [(i - 1, j), (i, j), (i + 1, j)].iter().map(|&(a, b)| metric.xi.at(a, b)).collect();
    let nt = g.n_theta;
    let (hr, ht) = (g.rho_step(), g.theta_step());
    let vp = lncosh(metric.xi.at(i, (j + 1) % nt));
    let vm = lncosh(metric.xi.at(i, (j + nt - 1) % nt));
    let c = lncosh(v[1]);
    let lap = (lncosh(v[2]) - 2.0 * c + lncosh(v[0])) / (hr * hr) + (vp - 2.0 * c + vm) / (ht * ht);
    let r = g.radius(i);
    let lam = metric.lambda[g.idx(i, j)];
    Ok(-lap / (r * r * lam * lam))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubharmonicityReport {
    /// Minimum over interior nodes of the discrete `Lap_0 u`, `u = log cosh^2 xi`.
    pub min_lap_u: f64,
    /// Acceptance threshold `-10 h^2` with `h` the log-radial step.
    pub threshold: f64,
    pub pass: bool,
    /// Largest `|Lap_0 u - (2 |grad xi|^2 / cosh^2 xi - 8 K_M sinh^2 xi |phi|)|`.
    pub identity_max_error: f64,
    /// The same error relative to the largest right-hand side value.
    pub identity_rel_error: f64,
}

pub fn subharmonicity_check(xi: &XiField, end: &EndData, k_m: &CurvatureField) -> SubharmonicityReport {
    let g = &xi.grid;
    let u: Vec<f64> = xi.values.iter().map(|&x| 2.0 * lncosh(x)).collect();
    let mut min_lap_u = f64::INFINITY;
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for i in 1..g.n_r - 1 {
        let r = g.radius(i);
        for j in 0..g.n_theta {
            let lap = log_polar_lap(xi, &u, i, j) / (r * r);
            min_lap_u = min_lap_u.min(lap);
            let x = xi.at(i, j);
            let z = g.z(i, j);
            let grad2 = xi.grad_z(i, j).norm_sqr();
            let (ch, sh) = (x.cosh(), x.sinh());
            let rhs = 2.0 * grad2 / (ch * ch) - 8.0 * k_m.at(z) * sh * sh * end.abs_phi(z);
            err = err.max((lap - rhs).abs());
            scale = scale.max(rhs.abs());
        }
    }
    let h = g.rho_step();
    let threshold = -10.0 * h * h;
    SubharmonicityReport {
        min_lap_u,
        threshold,
        pass: min_lap_u >= threshold,
        identity_max_error: err,
        identity_rel_error: if scale > 0.0 { err / scale } else { err },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineSample {
    /// Coordinate along the line (`x` on `Im w = C`, `y` on `Re w = C`).
    pub t: f64,
    pub xi: f64,
    pub value: f64,
    /// `||grad xi|| / (2 cosh xi)`, the outer bound of the inequality chain.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineCurvature {
    pub c: f64,
    pub samples: Vec<LineSample>,
    /// `int |value| ds` with `ds = 2 cosh(xi) |dw|`.
    pub integral: f64,
}

fn bracket(lo: f64, h: f64, n: usize, c: f64) -> Result<(usize, f64)> {
    let hi = lo + h * (n - 1) as f64;
    let tol = 1e-12 * (1.0 + c.abs());
    if c < lo - tol || c > hi + tol {
        return Err(Error::OutOfStrip(c));
    }
    let s = ((c - lo) / h).clamp(0.0, (n - 1) as f64);
    let k = (s.floor() as usize).min(n - 2);
    Ok((k, s - k as f64))
}

fn trapezoid(samples: &[LineSample], f: impl Fn(&LineSample) -> f64) -> f64 {
    samples.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1]))).sum()
}

/// Ambient curvature `-xi_y / (2 cosh xi)` of the horizontal line `Im w = C`.
pub fn kappa_horizontal(field: &NaturalField, c: f64) -> Result<LineCurvature> {
    let g = &field.grid;
    let (j, s) = bracket(g.y0, g.hy, g.ny, c)?;
    let samples: Vec<LineSample> = (0..g.nx)
        .map(|i| {
            let (gx0, gy0) = field.gradient(i, j);
            let (gx1, gy1) = field.gradient(i, j + 1);
            let xi = (1.0 - s) * field.at(i, j) + s * field.at(i, j + 1);
            let (xi_x, xi_y) = ((1.0 - s) * gx0 + s * gx1, (1.0 - s) * gy0 + s * gy1);
            let ch = xi.cosh();
            LineSample { t: g.x(i), xi, value: -xi_y / (2.0 * ch), upper: xi_x.hypot(xi_y) / (2.0 * ch) }
        })
        .collect();
    let integral = trapezoid(&samples, |p| p.value.abs() * 2.0 * p.xi.cosh());
    Ok(LineCurvature { c, samples, integral })
}

/// Middle bound `(xi_x^2 sinh^2 xi + xi_y^2)^(1/2) / (2 cosh^2 xi)` for the
/// curvature of the vertical section over `Re w = C`.
pub fn kappa_vertical(field: &NaturalField, c: f64) -> Result<LineCurvature> {
    let g = &field.grid;
    let (i, s) = bracket(g.x0, g.hx, g.nx, c)?;
    let samples: Vec<LineSample> = (0..g.ny)
        .map(|j| {
            let (gx0, gy0) = field.gradient(i, j);
            let (gx1, gy1) = field.gradient(i + 1, j);
            let xi = (1.0 - s) * field.at(i, j) + s * field.at(i + 1, j);
            let (xi_x, xi_y) = ((1.0 - s) * gx0 + s * gx1, (1.0 - s) * gy0 + s * gy1);
            let (ch, sh) = (xi.cosh(), xi.sinh());
            let value = (xi_x * xi_x * sh * sh + xi_y * xi_y).sqrt() / (2.0 * ch * ch);
            LineSample { t: g.y(j), xi, value, upper: xi_x.hypot(xi_y) / (2.0 * ch) }
        })
        .collect();
    let integral = trapezoid(&samples, |p| p.value * 2.0 * p.xi.cosh());
    Ok(LineCurvature { c, samples, integral })
}

/// Geodesic curvature integrated over one arc of `P(C)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTerm {
    pub curve: String,
    pub integral: f64,
    pub abs_integral: f64,
}

/// Smooth geodesic curvature of every arc of `P(C)`, by the midpoint rule on
/// the polygon's edges.
pub fn polygon_curvature(xi: &XiField, polygon: &PolygonP) -> Result<Vec<BoundaryTerm>> {
    let pts = polygon.zs();
    let n = pts.len();
    let mids: Vec<Complex> = (0..n).map(|i| 0.5 * (pts[i] + pts[(i + 1) % n])).collect();
    let field = xi.sample_many(&mids)?;
    let mut terms: Vec<BoundaryTerm> = Vec::new();
    for (i, s) in field.iter().enumerate() {
        let d = pts[(i + 1) % n] - pts[i];
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        // Right-hand normal of the edge.
        let nrm = Complex::new(d.im, -d.re) / len;
        let dn = s.grad.re * nrm.re + s.grad.im * nrm.im;
        let k = s.xi.tanh() * dn * len;
        let name = polygon.points[i].arc.to_string();
        match terms.last_mut() {
            Some(t) if t.curve == name => {
                t.integral += k;
                t.abs_integral += k.abs();
            }
            _ => terms.push(BoundaryTerm { curve: name, integral: k, abs_integral: k.abs() }),
        }
    }
    Ok(terms)
}

/// `int_{|z|=R} kappa_g ds`, counter-clockwise, in the induced metric.
pub fn inner_circle_curvature(xi: &XiField, end: &EndData) -> f64 {
    let g = &xi.grid;
    let ht = g.theta_step();
    (0..g.n_theta)
        .map(|j| {
            let z = g.z(0, j);
            let f = end.sqrt_phi(z);
            let log_deriv = (z * end.sqrt_phi_prime(z) / f).re;
            ht * (1.0 + log_deriv + xi.at(0, j).tanh() * xi.d_rho(0, j))
        })
        .sum()
}

fn cross(a: Complex, b: Complex) -> f64 {
    a.re * b.im - a.im * b.re
}

/// `int K dA` over the part of the annulus inside `P(C)`.
///
/// The integrand `-(v_rho_rho + v_theta_theta)` with `v = log cosh xi` is
/// linear in `rho` between nodes; each angular row is clipped exactly against
/// the polygon along its ray and the rows are summed by the midpoint rule.
pub fn interior_curvature(xi: &XiField, polygon: &[Complex]) -> Result<f64> {
    let g = &xi.grid;
    let (hr, ht) = (g.rho_step(), g.theta_step());
    let nt = g.n_theta;
    let n_r = g.n_r;
    let v: Vec<f64> = xi.values.iter().map(|&x| lncosh(x)).collect();
    let mut dens = vec![0.0; g.len()];
    for i in 0..n_r {
        for j in 0..nt {
            let at = |a: usize| v[g.idx(a, j)];
            let v_rr = if i == 0 {
                (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (hr * hr)
            } else if i + 1 == n_r {
                (2.0 * at(i) - 5.0 * at(i - 1) + 4.0 * at(i - 2) - at(i - 3)) / (hr * hr)
            } else {
                (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (hr * hr)
            };
            let c = v[g.idx(i, j)];
            let v_tt = (v[g.idx(i, (j + 1) % nt)] - 2.0 * c + v[g.idx(i, (j + nt - 1) % nt)]) / (ht * ht);
            dens[g.idx(i, j)] = -(v_rr + v_tt);
        }
    }
    let rho0 = g.rho(0);
    let rho_max = g.r_out.ln();
    let m = polygon.len();
    let mut total = 0.0;
    for j in 0..nt {
        let e = Complex::from_polar(1.0, g.theta(j));
        let mut hits: Vec<f64> = Vec::new();
        for k in 0..m {
            let a = polygon[k];
            let d = polygon[(k + 1) % m] - a;
            let den = cross(e, d);
            if den == 0.0 {
                continue;
            }
            let s = cross(a, d) / den;
            let u = cross(a, e) / den;
            if s > 0.0 && (0.0..1.0).contains(&u) {
                hits.push(s);
            }
        }
        hits.sort_by(f64::total_cmp);
        if hits.len().is_multiple_of(2) {
            return Err(Error::Meshing(format!(
                "ray at theta = {} leaves the polygon an even number of times",
                g.theta(j)
            )));
        }
        let mut inside = true;
        let mut start = 0.0;
        let mut row = 0.0;
        for &s in &hits {
            if inside {
                if start < g.r_in || s < g.r_in {
                    if s < g.r_in * (1.0 + 1e-12) {
                        return Err(Error::Meshing("polygon enters the inner disc".into()));
                    }
                    start = g.r_in;
                }
                if s > g.r_out * (1.0 + 1e-12) {
                    return Err(Error::Meshing(format!("polygon reaches |z| = {s} beyond the grid")));
                }
                let (a, b) = (start.ln().max(rho0), s.ln().min(rho_max));
                row += integrate_row(&dens, g, j, a, b, rho0, hr);
            }
            start = s;
            inside = !inside;
        }
        total += ht * row;
    }
    Ok(total)
}

/// Exact integral over `[a, b]` of the piecewise-linear interpolant of a row.
fn integrate_row(
    dens: &[f64],
    g: &crate::sinh_gordon::AnnulusGrid,
    j: usize,
    a: f64,
    b: f64,
    rho0: f64,
    hr: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let val = |x: f64| {
        let s = ((x - rho0) / hr).clamp(0.0, (g.n_r - 1) as f64);
        let k = (s.floor() as usize).min(g.n_r - 2);
        let u = s - k as f64;
        (1.0 - u) * dens[g.idx(k, j)] + u * dens[g.idx(k + 1, j)]
    };
    let first = (((a - rho0) / hr).floor() as usize).min(g.n_r - 2);
    let last = (((b - rho0) / hr).ceil() as usize).clamp(first + 1, g.n_r - 1);
    let mut acc = 0.0;
    for k in first..last {
        let lo = (rho0 + k as f64 * hr).max(a);
        let hi = (rho0 + (k + 1) as f64 * hr).min(b);
        if hi > lo {
            acc += 0.5 * (hi - lo) * (val(lo) + val(hi));
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexTerm {
    pub index: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub interior_angle: f64,
    pub turning: f64,
    pub reflex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerData {
    pub m: u32,
    /// `-(m + 1)`, the target in units of `2 pi`.
    pub target_multiple: i64,
    pub target: f64,
}

/// The end identity `int_Omega K dA + int_P kappa_g - int_{|z|=R} kappa_g = -2 pi (m+1)`,
/// where the `P` term is the smooth part and vertex turning is listed apart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussBonnetReport {
    pub c: f64,
    pub interior_integral: f64,
    /// Per-arc smooth terms of `P(C)` followed by the inner circle.
    pub boundary_terms: Vec<BoundaryTerm>,
    pub polygon_smooth: f64,
    /// `sum over arcs of int |kappa_g| ds`.
    pub polygon_abs: f64,
    pub inner_circle: f64,
    pub vertices: Vec<VertexTerm>,
    pub vertex_turning: f64,
    pub euler_data: EulerData,
    /// `interior + polygon_smooth - inner_circle + 2 pi (m + 1)`.
    pub defect: f64,
    /// `interior + polygon_smooth + vertex_turning - inner_circle`, zero by Gauss-Bonnet.
    pub closure: f64,
}

pub fn gauss_bonnet_from_polygon(end: &EndData, xi: &XiField, polygon: &PolygonP) -> Result<GaussBonnetReport> {
    if polygon.self_intersections() > 0 {
        return Err(Error::Meshing("polygon is not simple".into()));
    }
    if polygon.winding_number(Complex::new(0.0, 0.0)) != 1 {
        return Err(Error::Meshing("polygon does not wind once around the end".into()));
    }
    let zs = polygon.zs();
    let interior_integral = interior_curvature(xi, &zs)?;
    let mut boundary_terms = polygon_curvature(xi, polygon)?;
    let polygon_smooth: f64 = boundary_terms.iter().map(|t| t.integral).sum();
    let polygon_abs: f64 = boundary_terms.iter().map(|t| t.abs_integral).sum();
    let inner_circle = inner_circle_curvature(xi, end);
    boundary_terms.push(BoundaryTerm {
        curve: "inner_circle".into(),
        integral: inner_circle,
        abs_integral: inner_circle.abs(),
    });
    let vertices: Vec<VertexTerm> = polygon
        .vertices
        .iter()
        .map(|v| VertexTerm {
            index: v.index,
            z_re: v.z.re,
            z_im: v.z.im,
            interior_angle: v.interior_angle,
            turning: v.turning,
            reflex: v.is_reflex(),
        })
        .collect();
    let vertex_turning: f64 = vertices.iter().map(|v| v.turning).sum();
    let target_multiple = -(i64::from(end.m) + 1);
    let target = 2.0 * PI * target_multiple as f64;
    let lhs = interior_integral + polygon_smooth - inner_circle;
    Ok(GaussBonnetReport {
        c: polygon.c(),
        interior_integral,
        boundary_terms,
        polygon_smooth,
        polygon_abs,
        inner_circle,
        vertices,
        vertex_turning,
        euler_data: EulerData { m: end.m, target_multiple, target },
        defect: lhs - target,
        closure: lhs + vertex_turning,
    })
}

/// Lifts the square of half-side `C`, closes `P(C)` and runs the ledger.
pub fn gauss_bonnet_end(end: &EndData, xi: &XiField, c: f64, cfg: &LiftConfig) -> Result<GaussBonnetReport> {
    if (xi.grid.r_in - end.r).abs() > 1e-9 * end.r {
        return Err(Error::Meshing(format!(
            "field starts at |z| = {} but the end circle is |z| = {}",
            xi.grid.r_in, end.r
        )));
    }
    let l = lift(end, c, cfg)?;
    let polygon = close_polygon(&l, end, cfg)?;
    gauss_bonnet_from_polygon(end, xi, &polygon)
}

/// `sum_arcs int_{P(C)} |kappa_g| ds` for each `C` of a schedule.
pub fn boundary_decay(end: &EndData, xi: &XiField, cs: &[f64], cfg: &LiftConfig) -> Result<Vec<(f64, f64)>> {
    cs.iter()
        .map(|&c| {
            let l = lift(end, c, cfg)?;
            let polygon = close_polygon(&l, end, cfg)?;
            let terms = polygon_curvature(xi, &polygon)?;
            Ok((c, terms.iter().map(|t| t.abs_integral).sum()))
        })
        .collect()
}

/// Exact total curvature `2 pi (2 - 2g - 2n - sum m_k)` as a multiple of `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TotalCurvature {
    pub multiple: i64,
}

impl TotalCurvature {
    pub fn radians(&self) -> f64 {
        2.0 * PI * self.multiple as f64
    }
}

impl std::fmt::Display for TotalCurvature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.multiple {
            0 => write!(f, "0"),
            1 => write!(f, "2*pi"),
            -1 => write!(f, "-2*pi"),
            k => write!(f, "{k}*2*pi"),
        }
    }
}

pub fn total_curvature_formula(genus: u32, ms: &[u32]) -> Result<TotalCurvature> {
    if ms.is_empty() {
        return Err(Error::Invalid("a surface of finite total curvature has at least one end".into()));
    }
    let n = ms.len() as i64;
    let sum: i64 = ms.iter().map(|&m| i64::from(m)).sum();
    Ok(TotalCurvature { multiple: 2 - 2 * i64::from(genus) - 2 * n - sum })
}
