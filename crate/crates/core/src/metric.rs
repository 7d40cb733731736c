//! Conformal disc models `(D, 4 alpha^2 / (1 - |z|^2)^2 |dz|^2)` of a Hadamard
//! surface and warped polar metrics `ds^2 + G(s, theta) dtheta^2`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Complex, Error, Result};

/// Radius beyond which samples are dropped from curvature scans.
pub const DEFAULT_SAMPLE_RADIUS: f64 = 0.95;

/// The conformal factor component `alpha` on the open unit disc.
#[derive(Clone)]
pub enum AlphaField {
    Const(f64),
    /// `alpha(z) = sum_i coeffs[i] * |z|^(2 i)`.
    PolyR2(Vec<f64>),
    Sampled(Arc<dyn Fn(Complex) -> f64 + Send + Sync>),
}

impl AlphaField {
    pub fn eval(&self, z: Complex) -> f64 {
        match self {
            AlphaField::Const(a) => *a,
            AlphaField::PolyR2(coeffs) => {
                let r2 = z.norm_sqr();
                coeffs.iter().rev().fold(0.0, |acc, c| acc * r2 + c)
            }
            AlphaField::Sampled(f) => f(z),
        }
    }
}

impl fmt::Debug for AlphaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaField::Const(a) => write!(f, "Const({a})"),
            AlphaField::PolyR2(c) => write!(f, "PolyR2({c:?})"),
            AlphaField::Sampled(_) => write!(f, "Sampled(..)"),
        }
    }
}

/// Serializable description of a closed-form alpha, as read from configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaSpec {
    Const { value: f64 },
    PolyR2 { coeffs: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct ConformalDiscMetric {
    alpha: AlphaField,
    alpha_min: f64,
    alpha_max: f64,
}

impl ConformalDiscMetric {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Invalid(format!("alpha must be positive, got {value}")));
        }
        Ok(Self { alpha: AlphaField::Const(value), alpha_min: value, alpha_max: value })
    }

    /// Polynomial in `|z|^2`. Bounds come from a dense scan of `[0, 1]` in `|z|^2`.
    pub fn poly_r2(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("empty alpha polynomial".into()));
        }
        let alpha = AlphaField::PolyR2(coeffs);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=4096 {
            let r = (i as f64 / 4096.0).sqrt();
            let v = alpha.eval(Complex::new(r, 0.0));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(lo > 0.0) {
            return Err(Error::Invalid(format!("alpha is not positive on the disc (min {lo})")));
        }
        Ok(Self { alpha, alpha_min: lo, alpha_max: hi })
    }

    /// Callable alpha with caller-declared bounds, checked on a sample grid.
    pub fn sampled(f: Arc<dyn Fn(Complex) -> f64 + Send + Sync>, alpha_min: f64, alpha_max: f64) -> Result<Self> {
        if !(alpha_min > 0.0 && alpha_min <= alpha_max) {
            return Err(Error::Invalid("need 0 < alpha_min <= alpha_max".into()));
        }
        let metric = Self { alpha: AlphaField::Sampled(f), alpha_min, alpha_max };
        for z in disc_grid(41, 0.999) {
            let a = metric.alpha.eval(z);
            if !(a >= alpha_min && a <= alpha_max) {
                return Err(Error::Invalid(format!("alpha({z}) = {a} outside declared bounds")));
            }
        }
        Ok(metric)
    }

    pub fn from_spec(spec: &AlphaSpec) -> Result<Self> {
        match spec {
            AlphaSpec::Const { value } => Self::constant(*value),
            AlphaSpec::PolyR2 { coeffs } => Self::poly_r2(coeffs.clone()),
        }
    }

    pub fn alpha(&self, z: Complex) -> f64 {
        self.alpha.eval(z)
    }

    pub fn alpha_bounds(&self) -> (f64, f64) {
        (self.alpha_min, self.alpha_max)
    }

    /// `sigma(z) = 2 alpha(z) / (1 - |z|^2)`.
    pub fn sigma_at(&self, z: Complex) -> Result<f64> {
        let r2 = z.norm_sqr();
        if !(r2 < 1.0) {
            return Err(Error::Domain(format!("|z| = {} is not inside the unit disc", r2.sqrt())));
        }
        Ok(2.0 * self.alpha.eval(z) / (1.0 - r2))
    }

    fn log_sigma(&self, z: Complex) -> f64 {
        (2.0 * self.alpha.eval(z)).ln() - (1.0 - z.norm_sqr()).ln()
    }

    /// Gaussian curvature `-Lap(log sigma) / sigma^2` with a five-point stencil of step `h`.
    pub fn gauss_curvature(&self, z: Complex, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::Invalid(format!("step must be positive, got {h}")));
        }
        if z.norm() + 2.0 * h >= 1.0 {
            return Err(Error::Stencil(format!("|z| + 2h = {} >= 1", z.norm() + 2.0 * h)));
        }
        let f = |dx: f64, dy: f64| self.log_sigma(z + Complex::new(dx, dy));
        let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
        let sigma = self.sigma_at(z)?;
        Ok(-lap / (sigma * sigma))
    }
}

/// Pinching constants `-a^2 <= K <= -b^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    pub a: f64,
    pub b: f64,
}

impl CurvatureBounds {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(b > 0.0 && b <= a && a.is_finite()) {
            return Err(Error::Invalid(format!("need 0 < b <= a, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn lower(&self) -> f64 {
        -self.a * self.a
    }

    pub fn upper(&self) -> f64 {
        -self.b * self.b
    }
}

/// Square grid of `n x n` points on `[-r_max, r_max]^2` restricted to `|z| <= r_max`.
pub fn disc_grid(n: usize, r_max: f64) -> Vec<Complex> {
    let mut out = Vec::new();
    if n < 2 {
        out.push(Complex::new(0.0, 0.0));
        return out;
    }
    for i in 0..n {
        for j in 0..n {
            let x = -r_max + 2.0 * r_max * i as f64 / (n - 1) as f64;
            let y = -r_max + 2.0 * r_max * j as f64 / (n - 1) as f64;
            let z = Complex::new(x, y);
            if z.norm() <= r_max {
                out.push(z);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchingConfig {
    pub h: f64,
    /// Defaults to `10 h^2` when unset.
    pub tol: Option<f64>,
    pub r_max: f64,
}

impl Default for PinchingConfig {
    fn default() -> Self {
        Self { h: 1e-3, tol: None, r_max: DEFAULT_SAMPLE_RADIUS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchingSample {
    pub z_re: f64,
    pub z_im: f64,
    pub k: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchingReport {
    pub tol: f64,
    pub samples: Vec<PinchingSample>,
    /// Indices into `samples` that violate the bounds.
    pub violations: Vec<usize>,
    /// Samples dropped for lying beyond `r_max` or too close to the ideal boundary.
    pub excluded: usize,
}

impl PinchingReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `-a^2 - tol <= K(z) <= -b^2 + tol` at every sample.
pub fn verify_pinching(
    metric: &ConformalDiscMetric,
    bounds: &CurvatureBounds,
    samples: &[Complex],
    cfg: &PinchingConfig,
) -> PinchingReport {
    let tol = cfg.tol.unwrap_or(10.0 * cfg.h * cfg.h);
    let mut report = PinchingReport { tol, samples: Vec::new(), violations: Vec::new(), excluded: 0 };
    for &z in samples {
        if z.norm() > cfg.r_max {
            report.excluded += 1;
            continue;
        }
        let Ok(k) = metric.gauss_curvature(z, cfg.h) else {
            report.excluded += 1;
            continue;
        };
        let pass = k >= bounds.lower() - tol && k <= bounds.upper() + tol;
        if !pass {
            report.violations.push(report.samples.len());
        }
        report.samples.push(PinchingSample { z_re: z.re, z_im: z.im, k, pass });
    }
    report
}

/// Warping function `G` of a polar metric `ds^2 + G(s, theta) dtheta^2`.
#[derive(Clone)]
pub enum WarpedPolarMetric {
    /// `G = sinh^2(k s)`, the hyperbolic plane of curvature `-k^2`.
    SinhSquared { k: f64 },
    /// `G = sinh^2(k s) (1 + eps sin(freq s))`.
    PerturbedSinhSquared { k: f64, eps: f64, freq: f64 },
    /// Arbitrary positive warping; derivatives by finite differences.
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for WarpedPolarMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SinhSquared { k } => write!(f, "SinhSquared {{ k: {k} }}"),
            Self::PerturbedSinhSquared { k, eps, freq } => {
                write!(f, "PerturbedSinhSquared {{ k: {k}, eps: {eps}, freq: {freq} }}")
            }
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WarpSpec {
    SinhSquared { k: f64 },
    PerturbedSinhSquared { k: f64, eps: f64, freq: f64 },
}

impl From<&WarpSpec> for WarpedPolarMetric {
    fn from(spec: &WarpSpec) -> Self {
        match *spec {
            WarpSpec::SinhSquared { k } => Self::SinhSquared { k },
            WarpSpec::PerturbedSinhSquared { k, eps, freq } => Self::PerturbedSinhSquared { k, eps, freq },
        }
    }
}

impl WarpedPolarMetric {
    pub fn is_closed_form(&self) -> bool {
        matches!(self, Self::SinhSquared { .. })
    }

    pub fn g(&self, s: f64, theta: f64) -> f64 {
        match *self {
            Self::SinhSquared { k } => (k * s).sinh().powi(2),
            Self::PerturbedSinhSquared { k, eps, freq } => (k * s).sinh().powi(2) * (1.0 + eps * (freq * s).sin()),
            Self::Custom(ref f) => f(s, theta),
        }
    }

    /// `dG/ds`.
    pub fn g_s(&self, s: f64, theta: f64) -> f64 {
        match *self {
            Self::SinhSquared { k } => k * (2.0 * k * s).sinh(),
            Self::PerturbedSinhSquared { k, eps, freq } => {
                let sh = (k * s).sinh();
                let p = 1.0 + eps * (freq * s).sin();
                k * (2.0 * k * s).sinh() * p + sh * sh * eps * freq * (freq * s).cos()
            }
            Self::Custom(ref f) => {
                let h = 1e-4 * s.abs().max(1.0);
                (f(s - 2.0 * h, theta) - 8.0 * f(s - h, theta) + 8.0 * f(s + h, theta) - f(s + 2.0 * h, theta))
                    / (12.0 * h)
            }
        }
    }

    /// Gaussian curvature `-(sqrt G)_ss / sqrt G` of the polar metric.
    pub fn curvature(&self, s: f64, theta: f64) -> f64 {
        match *self {
            Self::SinhSquared { k } => -k * k,
            Self::PerturbedSinhSquared { k, eps, freq } => {
                // sqrt G = S P with S = sinh(k s), P = sqrt(1 + eps sin(freq s)).
                let (sn, cs) = (freq * s).sin_cos();
                let p = (1.0 + eps * sn).sqrt();
                let dp = eps * freq * cs / (2.0 * p);
                let ddp = -eps * freq * freq * sn / (2.0 * p) - eps * freq * cs * dp / (2.0 * p * p);
                let coth = 1.0 / (k * s).tanh();
                -(k * k) - 2.0 * k * coth * dp / p - ddp / p
            }
            Self::Custom(ref f) => {
                let root = |x: f64| f(x, theta).max(0.0).sqrt();
                let h = 1e-3 * s.abs().max(1e-2);
                let d2 = (-root(s - 2.0 * h) + 16.0 * root(s - h) - 30.0 * root(s) + 16.0 * root(s + h)
                    - root(s + 2.0 * h))
                    / (12.0 * h * h);
                -d2 / root(s)
            }
        }
    }
}
