//! The field `xi = log|g|` of a minimal end, solving the sinh-Gordon equation
//! `Lap_0 xi = -2 K_M sinh(2 xi) |phi|` on an annulus `R_in <= |z| <= R_out`
//! of the `z`-plane, or `Lap xi = -2 K_M sinh(2 xi)` in natural coordinates
//! `w = F(z)` where `|phi| = 1`.
//!
//! Annuli are discretized on a log-polar lattice `(rho, theta)` with
//! `rho = ln r`, where `Lap_0 = r^-2 (d_rho^2 + d_theta^2)` and the five-point
//! stencil is symmetric.

mod newton;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::end_model::EndData;
use crate::stats::{fit_line, LineFit};
use crate::{Complex, Error, Result};

use newton::{NewtonSettings, StencilProblem};

/// Log-radial by uniform-angular lattice on `R_in <= |z| <= R_out`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusGrid {
    pub r_in: f64,
    pub r_out: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl AnnulusGrid {
    pub fn new(r_in: f64, r_out: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
            return Err(Error::Invalid(format!("need 0 < R_in < R_out, got {r_in}, {r_out}")));
        }
        if n_r < 8 || n_theta < 8 {
            return Err(Error::Invalid(format!("need n_r, n_theta >= 8, got {n_r}, {n_theta}")));
        }
        if n_theta % 2 == 1 {
            return Err(Error::Invalid("n_theta must be even for red-black sweeps".into()));
        }
        Ok(Self { r_in, r_out, n_r, n_theta })
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rho_step(&self) -> f64 {
        (self.r_out / self.r_in).ln() / (self.n_r - 1) as f64
    }

    pub fn theta_step(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.r_in.ln() + i as f64 * self.rho_step()
    }

    pub fn radius(&self, i: usize) -> f64 {
        if i + 1 == self.n_r {
            self.r_out
        } else {
            self.rho(i).exp()
        }
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.theta_step()
    }

    pub fn z(&self, i: usize, j: usize) -> Complex {
        Complex::from_polar(self.radius(i), self.theta(j))
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }
}

/// The ambient curvature `K_M` seen by the solver.
#[derive(Clone)]
pub enum CurvatureField {
    Constant(f64),
    Field(Arc<dyn Fn(Complex) -> f64 + Send + Sync>),
}

impl CurvatureField {
    pub fn at(&self, z: Complex) -> f64 {
        match self {
            CurvatureField::Constant(k) => *k,
            CurvatureField::Field(f) => f(z),
        }
    }
}

impl fmt::Debug for CurvatureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureField::Constant(k) => write!(f, "Constant({k})"),
            CurvatureField::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Dirichlet data on the inner circle.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerBoundary {
    Constant(f64),
    /// One value per angular node.
    Nodal(Vec<f64>),
}

impl InnerBoundary {
    fn value(&self, j: usize) -> f64 {
        match self {
            InnerBoundary::Constant(v) => *v,
            InnerBoundary::Nodal(v) => v[j],
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            InnerBoundary::Constant(v) => InnerBoundary::Constant(-v),
            InnerBoundary::Nodal(v) => InnerBoundary::Nodal(v.iter().map(|x| -x).collect()),
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            InnerBoundary::Constant(v) => v.abs(),
            InnerBoundary::Nodal(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Bound on the sup norm of the residual `Lap_0 xi + 2 K_M sinh(2 xi) |phi|`.
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub bc_inner: InnerBoundary,
    pub bc_outer: f64,
    /// `|xi|` above this aborts the solve as unstable.
    pub xi_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100,
            damping: 0.7,
            bc_inner: InnerBoundary::Constant(0.0),
            bc_outer: 0.0,
            xi_cap: 50.0,
        }
    }
}

impl SolverConfig {
    pub fn with_inner(value: f64) -> Self {
        Self { bc_inner: InnerBoundary::Constant(value), ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Invalid("solver tolerance must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Invalid(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        Ok(())
    }

    fn settings(&self) -> NewtonSettings {
        NewtonSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            xi_cap: self.xi_cap,
            cg_rtol: 1e-8,
            cg_max_iter: 5000,
        }
    }
}

/// Solved `xi` on an annulus, in `z`-coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct XiField {
    pub grid: AnnulusGrid,
    pub values: Vec<f64>,
    /// Pointwise residual of the discrete equation (zero on Dirichlet nodes).
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

fn check_curvature(k: f64) -> Result<()> {
    if !(k < 0.0 && k.is_finite()) {
        return Err(Error::PreconditionFail(format!("K_M must be negative, got {k}")));
    }
    Ok(())
}

/// Solves the sinh-Gordon equation for `xi` on an annulus of the end.
pub fn solve_xi(end: &EndData, k_m: &CurvatureField, grid: &AnnulusGrid, cfg: &SolverConfig) -> Result<XiField> {
    end.validate()?;
    cfg.validate()?;
    if grid.r_in < end.r * (1.0 - 1e-12) {
        return Err(Error::PreconditionFail(format!(
            "annulus starts at {} inside the end radius {}",
            grid.r_in, end.r
        )));
    }
    if let InnerBoundary::Nodal(v) = &cfg.bc_inner {
        if v.len() != grid.n_theta {
            return Err(Error::Invalid(format!(
                "inner boundary has {} values for {} angular nodes",
                v.len(),
                grid.n_theta
            )));
        }
    }
    let n = grid.len();
    let mut fixed = vec![false; n];
    let mut q = vec![0.0; n];
    let mut scale = vec![1.0; n];
    let mut init = vec![0.0; n];
    for i in 0..grid.n_r {
        let r = grid.radius(i);
        for j in 0..grid.n_theta {
            let p = grid.idx(i, j);
            let z = grid.z(i, j);
            let k = k_m.at(z);
            check_curvature(k)?;
            q[p] = r * r * (-2.0 * k) * end.abs_phi(z);
            scale[p] = r * r;
            if i == 0 {
                fixed[p] = true;
                init[p] = cfg.bc_inner.value(j);
            } else if i + 1 == grid.n_r {
                fixed[p] = true;
                init[p] = cfg.bc_outer;
            }
        }
    }
    let problem = StencilProblem {
        n1: grid.n_r,
        n2: grid.n_theta,
        h1: grid.rho_step(),
        h2: grid.theta_step(),
        periodic2: true,
        fixed,
        q,
        scale,
    };
    let out = problem.solve(init, &cfg.settings())?;
    Ok(XiField {
        grid: *grid,
        values: out.values,
        residual: out.residual,
        residual_norm: out.residual_norm,
        iterations: out.iterations,
    })
}

/// Catmull-Rom weights for offsets -1, 0, 1, 2 at fraction `u`.
fn cubic_weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [0.5 * (-u3 + 2.0 * u2 - u), 0.5 * (3.0 * u3 - 5.0 * u2 + 2.0), 0.5 * (-3.0 * u3 + 4.0 * u2 + u), 0.5 * (u3 - u2)]
}

/// `xi` with its `z`-gradient at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub xi: f64,
    /// `xi_x + i xi_y`.
    pub grad: Complex,
}

impl XiField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `d xi / d rho` at a node: central inside, second-order one-sided at the ends.
    pub fn d_rho(&self, i: usize, j: usize) -> f64 {
        let h = self.grid.rho_step();
        let n = self.grid.n_r;
        let v = |ii: usize| self.at(ii, j);
        if i == 0 {
            (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
        } else if i + 1 == n {
            (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h)
        } else {
            (v(i + 1) - v(i - 1)) / (2.0 * h)
        }
    }

    pub fn d_theta(&self, i: usize, j: usize) -> f64 {
        let nt = self.grid.n_theta;
        (self.at(i, (j + 1) % nt) - self.at(i, (j + nt - 1) % nt)) / (2.0 * self.grid.theta_step())
    }

    /// Euclidean gradient `xi_x + i xi_y` at a node.
    pub fn grad_z(&self, i: usize, j: usize) -> Complex {
        let r = self.grid.radius(i);
        let e = Complex::from_polar(1.0, self.grid.theta(j));
        (self.d_rho(i, j) + Complex::new(0.0, 1.0) * self.d_theta(i, j)) * e / r
    }

    fn interp_array(&self, data: &[f64], rho: f64, theta: f64) -> f64 {
        let g = &self.grid;
        let s = (rho - g.rho(0)) / g.rho_step();
        let i0 = (s.floor() as isize).clamp(0, g.n_r as isize - 2);
        let u = s - i0 as f64;
        let t = theta.rem_euclid(2.0 * PI) / g.theta_step();
        let j0 = t.floor() as isize;
        let v = t - j0 as f64;
        let wr = cubic_weights(u);
        let wt = cubic_weights(v);
        let nt = g.n_theta as isize;
        let mut acc = 0.0;
        for (a, wa) in wr.iter().enumerate() {
            // Clamp the radial stencil at the lattice ends by linear extension.
            let ii = i0 + a as isize - 1;
            for (b, wb) in wt.iter().enumerate() {
                let jj = (j0 + b as isize - 1).rem_euclid(nt) as usize;
                let val = if ii < 0 {
                    2.0 * data[g.idx(0, jj)] - data[g.idx(1, jj)]
                } else if ii >= g.n_r as isize {
                    let last = g.n_r - 1;
                    2.0 * data[g.idx(last, jj)] - data[g.idx(last - 1, jj)]
                } else {
                    data[g.idx(ii as usize, jj)]
                };
                acc += wa * wb * val;
            }
        }
        acc
    }

    /// Interpolated `xi` and gradient at `z` (bicubic in `(rho, theta)`).
    pub fn sample(&self, z: Complex) -> Result<FieldSample> {
        let r = z.norm();
        let tol = 1e-12 * self.grid.r_out;
        if r < self.grid.r_in - tol || r > self.grid.r_out + tol {
            return Err(Error::Domain(format!("|z| = {r} lies outside the solved annulus")));
        }
        let (d_rho, d_theta) = self.derivative_arrays();
        let (rho, theta) = (r.ln(), z.arg());
        let xi = self.interp_array(&self.values, rho, theta);
        let dr = self.interp_array(&d_rho, rho, theta);
        let dt = self.interp_array(&d_theta, rho, theta);
        let grad = (dr + Complex::new(0.0, 1.0) * dt) * Complex::from_polar(1.0, theta) / r;
        Ok(FieldSample { xi, grad })
    }

    /// Batch version of [`XiField::sample`] sharing the derivative arrays.
    pub fn sample_many(&self, zs: &[Complex]) -> Result<Vec<FieldSample>> {
        let (d_rho, d_theta) = self.derivative_arrays();
        let tol = 1e-12 * self.grid.r_out;
        zs.iter()
            .map(|&z| {
                let r = z.norm();
                if r < self.grid.r_in - tol || r > self.grid.r_out + tol {
                    return Err(Error::Domain(format!("|z| = {r} lies outside the solved annulus")));
                }
                let (rho, theta) = (r.ln(), z.arg());
                let xi = self.interp_array(&self.values, rho, theta);
                let dr = self.interp_array(&d_rho, rho, theta);
                let dt = self.interp_array(&d_theta, rho, theta);
                let grad = (dr + Complex::new(0.0, 1.0) * dt) * Complex::from_polar(1.0, theta) / r;
                Ok(FieldSample { xi, grad })
            })
            .collect()
    }

    fn derivative_arrays(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let mut d_rho = vec![0.0; g.len()];
        let mut d_theta = vec![0.0; g.len()];
        for i in 0..g.n_r {
            for j in 0..g.n_theta {
                d_rho[g.idx(i, j)] = self.d_rho(i, j);
                d_theta[g.idx(i, j)] = self.d_theta(i, j);
            }
        }
        (d_rho, d_theta)
    }

    /// `(|w|, ||grad_w xi||)` per ring, with `|w|^(1/(m+1))` averaged over the
    /// ring and the gradient norm its supremum. `grad_w = grad_z / |sqrt(phi)|`.
    pub fn natural_gradient_samples(&self, end: &EndData) -> Vec<GradientSample> {
        let g = &self.grid;
        (1..g.n_r - 1)
            .map(|i| {
                let mut w_sum = 0.0;
                let mut sup = 0.0f64;
                for j in 0..g.n_theta {
                    let z = g.z(i, j);
                    let w = z.powu(end.m + 1) + Complex::new(0.0, end.c) * z.ln();
                    w_sum += w.norm();
                    sup = sup.max(self.grad_z(i, j).norm() / end.sqrt_phi(z).norm());
                }
                GradientSample { abs_w: w_sum / g.n_theta as f64, grad_norm: sup }
            })
            .collect()
    }
}

/// Rectangular lattice in natural coordinates `w = x + i y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NaturalGrid {
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    pub nx: usize,
    pub ny: usize,
}

impl NaturalGrid {
    /// Square `[-half, half]^2` around the origin of a unit `|phi|`-disc chart.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::rect(-half, half, -half, half, n, n)
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || nx < 8 || ny < 8 {
            return Err(Error::Invalid("natural grid needs a nondegenerate box and >= 8 nodes".into()));
        }
        Ok(Self { x0, y0, hx: (x1 - x0) / (nx - 1) as f64, hy: (y1 - y0) / (ny - 1) as f64, nx, ny })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }
}

/// `xi` in natural coordinates, where the `|phi|`-metric is `|dw|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalField {
    pub grid: NaturalGrid,
    pub values: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl NaturalField {
    /// Wraps prescribed values, e.g. a closed-form test field.
    pub fn from_fn(grid: NaturalGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = vec![0.0; grid.nx * grid.ny];
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                values[grid.idx(i, j)] = f(grid.x(i), grid.y(j));
            }
        }
        Self { grid, values, residual_norm: 0.0, iterations: 0 }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nearest node to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let g = &self.grid;
        let i = (((x - g.x0) / g.hx).round().max(0.0) as usize).min(g.nx - 1);
        let j = (((y - g.y0) / g.hy).round().max(0.0) as usize).min(g.ny - 1);
        (i, j)
    }

    /// Second-order gradient `(xi_x, xi_y)` at a node, one-sided on edges.
    pub fn gradient(&self, i: usize, j: usize) -> (f64, f64) {
        let g = &self.grid;
        let d = |a: usize, b: usize, n: usize, h: f64, get: &dyn Fn(usize) -> f64| {
            let _ = b;
            if a == 0 {
                (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h)
            } else if a + 1 == n {
                (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2.0 * h)
            } else {
                (get(a + 1) - get(a - 1)) / (2.0 * h)
            }
        };
        let gx = d(i, j, g.nx, g.hx, &|ii| self.at(ii, j));
        let gy = d(j, i, g.ny, g.hy, &|jj| self.at(i, jj));
        (gx, gy)
    }

    /// Fourth-order central gradient; `None` within two nodes of the edge.
    pub fn gradient4(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let g = &self.grid;
        if i < 2 || j < 2 || i + 2 >= g.nx || j + 2 >= g.ny {
            return None;
        }
        let gx =
            (self.at(i - 2, j) - 8.0 * self.at(i - 1, j) + 8.0 * self.at(i + 1, j) - self.at(i + 2, j)) / (12.0 * g.hx);
        let gy =
            (self.at(i, j - 2) - 8.0 * self.at(i, j - 1) + 8.0 * self.at(i, j + 1) - self.at(i, j + 2)) / (12.0 * g.hy);
        Some((gx, gy))
    }

    /// Supremum of `||grad xi||` over nodes binned by `|w|`.
    pub fn gradient_samples(&self, bins: usize) -> Vec<GradientSample> {
        let g = &self.grid;
        let mut pts = Vec::with_capacity(g.nx * g.ny);
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (gx, gy) = self.gradient(i, j);
                pts.push((Complex::new(g.x(i), g.y(j)).norm(), gx.hypot(gy)));
            }
        }
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        let bins = bins.max(1);
        let width = (hi - lo) / bins as f64;
        let mut sup = vec![0.0f64; bins];
        let mut filled = vec![false; bins];
        for (w, gn) in pts {
            let b = (((w - lo) / width) as usize).min(bins - 1);
            sup[b] = sup[b].max(gn);
            filled[b] = true;
        }
        (0..bins)
            .filter(|&b| filled[b])
            .map(|b| GradientSample { abs_w: lo + (b as f64 + 0.5) * width, grad_norm: sup[b] })
            .collect()
    }
}

/// Solves `Lap xi = -2 K_M sinh(2 xi)` on a natural-coordinate box with
/// Dirichlet data `bc(x, y)` on its edges.
pub fn solve_xi_natural(
    k_m: f64,
    grid: &NaturalGrid,
    bc: impl Fn(f64, f64) -> f64,
    cfg: &SolverConfig,
) -> Result<NaturalField> {
    cfg.validate()?;
    check_curvature(k_m)?;
    let n = grid.nx * grid.ny;
    let mut fixed = vec![false; n];
    let mut init = vec![0.0; n];
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            if grid.is_boundary(i, j) {
                let p = grid.idx(i, j);
                fixed[p] = true;
                init[p] = bc(grid.x(i), grid.y(j));
            }
        }
    }
    let problem = StencilProblem {
        n1: grid.nx,
        n2: grid.ny,
        h1: grid.hx,
        h2: grid.hy,
        periodic2: false,
        fixed,
        q: vec![-2.0 * k_m; n],
        scale: vec![1.0; n],
    };
    let out = problem.solve(init, &cfg.settings())?;
    Ok(NaturalField { grid: *grid, values: out.values, residual_norm: out.residual_norm, iterations: out.iterations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientSample {
    pub abs_w: f64,
    pub grad_norm: f64,
}

/// Which part of the radial range a decay fit uses, and the magnitude floor
/// below which samples are treated as round-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitBand {
    pub lo_frac: f64,
    pub hi_frac: f64,
    pub floor: f64,
}

impl Default for FitBand {
    fn default() -> Self {
        Self { lo_frac: 0.2, hi_frac: 0.6, floor: 1e-12 }
    }
}

/// Fit `log sup_{|z|=r} |xi| ~ log(2 C2) - c1 r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub c1_hat: f64,
    pub c2_hat: f64,
    pub r2: f64,
    pub line: LineFit,
}

pub fn decay_fit(xi: &XiField, band: &FitBand) -> Result<DecayFit> {
    let g = &xi.grid;
    let peak = xi.max_abs();
    if !(peak > f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("xi vanishes identically; decay holds trivially".into()));
    }
    let span = g.r_out - g.r_in;
    let (lo, hi) = (g.r_in + band.lo_frac * span, g.r_in + band.hi_frac * span);
    let mut rs = Vec::new();
    let mut logs = Vec::new();
    for i in 0..g.n_r {
        let r = g.radius(i);
        if r < lo || r > hi {
            continue;
        }
        let sup = (0..g.n_theta).map(|j| xi.at(i, j).abs()).fold(0.0, f64::max);
        if sup > band.floor * peak {
            rs.push(r);
            logs.push(sup.ln());
        }
    }
    if rs.len() < 3 {
        return Err(Error::Degenerate(format!("only {} rings above the floor", rs.len())));
    }
    let line = fit_line(&rs, &logs).ok_or_else(|| Error::Degenerate("singular fit".into()))?;
    Ok(DecayFit { c1_hat: -line.slope, c2_hat: 0.5 * line.intercept.exp(), r2: line.r2, line })
}

/// Fit `log ||grad xi|| ~ a - c |w|^(1/(m+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientDecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn gradient_decay_check(samples: &[GradientSample], m: u32, floor: f64) -> Result<GradientDecayFit> {
    let peak = samples.iter().map(|s| s.grad_norm).fold(0.0, f64::max);
    if !(peak > f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("gradient vanishes identically".into()));
    }
    let expo = 1.0 / (m + 1) as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        samples.iter().filter(|s| s.grad_norm > floor * peak).map(|s| (s.abs_w.powf(expo), s.grad_norm.ln())).unzip();
    let line = fit_line(&xs, &ys).ok_or_else(|| Error::Degenerate("too few gradient samples".into()))?;
    Ok(GradientDecayFit { slope: line.slope, intercept: line.intercept, r2: line.r2, n: line.n })
}

/// Restricts gradient samples to a band of `|w|`.
pub fn gradient_band(samples: &[GradientSample], lo: f64, hi: f64) -> Vec<GradientSample> {
    samples.iter().copied().filter(|s| s.abs_w >= lo && s.abs_w <= hi).collect()
}

/// Barrier `Psi(x, y) = C2 cosh(sqrt2 x) cosh(sqrt2 y) / cosh r`, with `Lap Psi = 4 Psi`.
pub fn barrier_psi(c2: f64, r: f64, x: f64, y: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("barrier radius must be positive, got {r}")));
    }
    let s2 = std::f64::consts::SQRT_2;
    Ok(c2 / r.cosh() * (s2 * x).cosh() * (s2 * y).cosh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiLaplacianCheck {
    pub psi: f64,
    /// `|Psi_xx + Psi_yy - 4 Psi|` from the closed-form second derivatives.
    pub exact_residual: f64,
    /// Same with a five-point stencil of step `h`.
    pub fd_residual: f64,
}

pub fn barrier_laplacian_check(c2: f64, r: f64, x: f64, y: f64, h: f64) -> Result<PsiLaplacianCheck> {
    let psi = barrier_psi(c2, r, x, y)?;
    let s2 = std::f64::consts::SQRT_2;
    let a = c2 / r.cosh();
    let psi_xx = 2.0 * a * (s2 * x).cosh() * (s2 * y).cosh();
    let psi_yy = 2.0 * a * (s2 * x).cosh() * (s2 * y).cosh();
    let exact_residual = (psi_xx + psi_yy - 4.0 * psi).abs();
    let f = |dx: f64, dy: f64| barrier_psi(c2, r, x + dx, y + dy).expect("r checked");
    let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * psi) / (h * h);
    Ok(PsiLaplacianCheck { psi, exact_residual, fd_residual: (lap - 4.0 * psi).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn end0() -> EndData {
        EndData::new(0, 0.0, 2.0).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let grid = AnnulusGrid::new(2.0, 6.0, 16, 16).unwrap();
        let xi = solve_xi(&end0(), &CurvatureField::Constant(-1.0), &grid, &SolverConfig::default()).unwrap();
        assert!(xi.values.iter().all(|&v| v == 0.0));
        assert_eq!(xi.residual_norm, 0.0);
        assert!(matches!(decay_fit(&xi, &FitBand::default()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn grid_validation() {
        assert!(AnnulusGrid::new(2.0, 1.0, 16, 16).is_err());
        assert!(AnnulusGrid::new(1.0, 2.0, 4, 16).is_err());
        assert!(AnnulusGrid::new(1.0, 2.0, 16, 15).is_err());
        let g = AnnulusGrid::new(1.0, 8.0, 16, 16).unwrap();
        assert!((g.radius(15) - 8.0).abs() < 1e-15);
        assert!((g.radius(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn preconditions() {
        let grid = AnnulusGrid::new(1.0, 6.0, 16, 16).unwrap();
        let cfg = SolverConfig::default();
        assert!(matches!(
            solve_xi(&end0(), &CurvatureField::Constant(-1.0), &grid, &cfg),
            Err(Error::PreconditionFail(_))
        ));
        let grid = AnnulusGrid::new(2.0, 6.0, 16, 16).unwrap();
        assert!(matches!(
            solve_xi(&end0(), &CurvatureField::Constant(0.5), &grid, &cfg),
            Err(Error::PreconditionFail(_))
        ));
        let bad = SolverConfig { damping: 1.5, ..SolverConfig::default() };
        assert!(solve_xi(&end0(), &CurvatureField::Constant(-1.0), &grid, &bad).is_err());
    }

    #[test]
    fn iteration_budget_and_cap() {
        let grid = AnnulusGrid::new(2.0, 6.0, 24, 16).unwrap();
        let k = CurvatureField::Constant(-1.0);
        let cfg = SolverConfig { max_iter: 1, ..SolverConfig::with_inner(1.0) };
        assert!(matches!(solve_xi(&end0(), &k, &grid, &cfg), Err(Error::NoConvergence { .. })));
        let cfg = SolverConfig { xi_cap: 0.5, ..SolverConfig::with_inner(1.0) };
        assert!(matches!(solve_xi(&end0(), &k, &grid, &cfg), Err(Error::Unstable { .. })));
    }

    #[test]
    fn accepted_solution_meets_tolerance() {
        let grid = AnnulusGrid::new(2.0, 8.0, 48, 32).unwrap();
        let cfg = SolverConfig::with_inner(0.8);
        let xi = solve_xi(&end0(), &CurvatureField::Constant(-1.0), &grid, &cfg).unwrap();
        assert!(xi.residual_norm < cfg.tol);
        assert!(xi.residual.iter().all(|r| r.abs() < cfg.tol));
        assert!(xi.values.iter().all(|v| v.tanh().abs() < 1.0));
    }

    #[test]
    fn psi_examples() {
        assert!((barrier_psi(2.0, 1.5, 0.0, 0.0).unwrap() - 2.0 / 1.5f64.cosh()).abs() < 1e-15);
        let edge = barrier_psi(2.0, 1.5, 1.5, 0.0).unwrap();
        assert!(edge >= 2.0);
        assert!(barrier_psi(1.0, 0.0, 0.0, 0.0).is_err());
        let chk = barrier_laplacian_check(1.0, 1.0, 0.3, 0.4, 1e-3).unwrap();
        assert!(chk.exact_residual < 1e-14);
        assert!(chk.fd_residual < 1e-5 * 4.0 * chk.psi);
    }

    #[test]
    fn cubic_weights_partition_unity() {
        for u in [0.0, 0.25, 0.5, 0.9] {
            let w = cubic_weights(u);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert_eq!(cubic_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
    }
}
