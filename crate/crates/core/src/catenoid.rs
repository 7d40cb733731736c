//! Rotational minimal catenoids in `H^2(-k^2) x R`, the mean curvature of
//! rotational graphs `(s, theta) -> (s, theta, h(s))` over a warped polar
//! metric `ds^2 + G dtheta^2`, and the Fermi-coordinate barrier.

use serde::{Deserialize, Serialize};

use crate::metric::WarpedPolarMetric;
use crate::quad::{integrate, QuadResult};
use crate::{Error, Result};

/// The catenoid `h_{A,k}` with neck radius `R = arcsinh(A) / k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatenoidProfile {
    #[serde(rename = "A")]
    pub a: f64,
    pub k: f64,
    pub r_neck: f64,
}

/// `sqrt(sinh(x))` for `x > 0`, without overflow for large `x`.
fn sqrt_sinh(x: f64) -> f64 {
    if x < 300.0 {
        x.sinh().sqrt()
    } else {
        (0.5 * (x - std::f64::consts::LN_2)).exp()
    }
}

impl CatenoidProfile {
    pub fn new(a: f64, k: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && k > 0.0 && k.is_finite()) {
            return Err(Error::Invalid(format!("need A > 0 and k > 0, got A = {a}, k = {k}")));
        }
        Ok(Self { a, k, r_neck: a.asinh() / k })
    }

    fn check(&self, s: f64) -> Result<()> {
        if !(s >= self.r_neck) || !s.is_finite() {
            return Err(Error::Domain(format!("s = {s} lies below the neck {}", self.r_neck)));
        }
        Ok(())
    }

    /// `sinh^2(k s) - A^2`, written as `sinh(k(s - R)) sinh(k(s + R))`.
    fn gap(&self, s: f64) -> f64 {
        (self.k * (s - self.r_neck)).sinh() * (self.k * (s + self.r_neck)).sinh()
    }

    /// `h'(s) = A / sqrt(sinh^2(k s) - A^2)`; infinite at the neck.
    pub fn h_prime(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(self.a / self.gap(s).sqrt())
    }

    /// `h''(s) = -A k sinh(k s) cosh(k s) / (sinh^2(k s) - A^2)^(3/2)`.
    pub fn h_second(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        let d = self.gap(s);
        let ks = self.k * s;
        Ok(-self.a * self.k * ks.sinh() * ks.cosh() / (d * d.sqrt()))
    }

    /// Residual of `sinh(k s) h'' + k cosh(k s) (1 + h'^2) h' = 0`.
    pub fn ode_residual(&self, s: f64) -> Result<f64> {
        let (h1, h2) = (self.h_prime(s)?, self.h_second(s)?);
        let ks = self.k * s;
        Ok(ks.sinh() * h2 + self.k * ks.cosh() * (1.0 + h1 * h1) * h1)
    }

    /// `h(s)` with its quadrature error estimate.
    pub fn height_with_error(&self, s: f64) -> Result<QuadResult> {
        self.check(s)?;
        let (a, k, r) = (self.a, self.k, self.r_neck);
        // r = R + t^2 removes the inverse square root at the neck.
        let f = |t: f64| {
            let u = k * t * t;
            let head = if u < 1e-8 { 2.0 / k.sqrt() } else { 2.0 * t / sqrt_sinh(u) };
            a * head / sqrt_sinh(k * (2.0 * r + t * t))
        };
        integrate(f, 0.0, (s - r).sqrt(), 1e-13, 1e-14, 4000)
    }

    pub fn height(&self, s: f64) -> Result<f64> {
        Ok(self.height_with_error(s)?.value)
    }
}

/// `h_{A,k}(s)`.
pub fn height_profile(p: &CatenoidProfile, s: f64) -> Result<f64> {
    p.height(s)
}

/// Value of `2H` for a rotational graph, with its sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCurvatureSample {
    pub s: f64,
    #[serde(rename = "H2")]
    pub h2: f64,
    pub sign: i8,
}

pub const SIGN_DEAD_BAND: f64 = 1e-10;

fn sign_of(x: f64) -> i8 {
    if x > SIGN_DEAD_BAND {
        1
    } else if x < -SIGN_DEAD_BAND {
        -1
    } else {
        0
    }
}

/// `2H = (2 G h'' + (1 + h'^2) h' G_s) / (2 G (1 + h'^2)^(3/2))` at `theta = 0`,
/// with the normal `(1 + h'^2)^(-1/2) (-h' d_s + d_t)`.
pub fn mean_curvature(g: &WarpedPolarMetric, s: f64, h_prime: f64, h_second: f64) -> MeanCurvatureSample {
    let (gv, gs) = (g.g(s, 0.0), g.g_s(s, 0.0));
    let q = 1.0 + h_prime * h_prime;
    let h2 = h_second / (q * q.sqrt()) + h_prime * gs / (2.0 * gv * q.sqrt());
    MeanCurvatureSample { s, h2, sign: sign_of(h2) }
}

/// `2H` of the graph of `h_{A,k}` over `G`.
pub fn catenoid_mean_curvature(g: &WarpedPolarMetric, p: &CatenoidProfile, s: f64) -> Result<MeanCurvatureSample> {
    Ok(mean_curvature(g, s, p.h_prime(s)?, p.h_second(s)?))
}

/// Pinching `-k1^2 <= K_G <= -k2^2` within this tolerance.
pub const PINCHING_TOL: f64 = 1e-8;

/// Checks `-k1^2 - tol <= K_G(s) <= -k2^2 + tol` at every sample.
pub fn check_pinching(g: &WarpedPolarMetric, k1: f64, k2: f64, samples: &[f64]) -> Result<()> {
    if !(k1 > k2 && k2 > 0.0 && k1.is_finite()) {
        return Err(Error::Invalid(format!("need k1 > k2 > 0, got {k1}, {k2}")));
    }
    for &s in samples {
        let k = g.curvature(s, 0.0);
        if !(k >= -k1 * k1 - PINCHING_TOL && k <= -k2 * k2 + PINCHING_TOL) {
            return Err(Error::PreconditionFail(format!(
                "curvature {k} at s = {s} outside [-{}, -{}]",
                k1 * k1,
                k2 * k2
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonStatus {
    Pass,
    /// Some sample sits on the dead band, e.g. `G` equals one of the model warps.
    Boundary,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonSample {
    pub s: f64,
    /// `2H` of `h_{A,k1}`; negative means the mean curvature vector points outwards.
    pub h2_k1: f64,
    /// `2H` of `h_{A,k2}`; positive means it points inwards.
    pub h2_k2: f64,
    pub sign_k1: i8,
    pub sign_k2: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub a: f64,
    pub k1: f64,
    pub k2: f64,
    pub samples: Vec<ComparisonSample>,
    pub status: ComparisonStatus,
}

/// Signs of `2H` for the two model catenoids over `G`, assuming
/// `-k1^2 <= K_G <= -k2^2` on the samples.
pub fn comparison_signs(g: &WarpedPolarMetric, k1: f64, k2: f64, a: f64, samples: &[f64]) -> Result<ComparisonReport> {
    check_pinching(g, k1, k2, samples)?;
    let (p1, p2) = (CatenoidProfile::new(a, k1)?, CatenoidProfile::new(a, k2)?);
    let mut out = Vec::with_capacity(samples.len());
    for &s in samples {
        if s <= p2.r_neck {
            return Err(Error::Domain(format!("s = {s} is not past both necks ({})", p2.r_neck)));
        }
        let m1 = catenoid_mean_curvature(g, &p1, s)?;
        let m2 = catenoid_mean_curvature(g, &p2, s)?;
        out.push(ComparisonSample { s, h2_k1: m1.h2, h2_k2: m2.h2, sign_k1: m1.sign, sign_k2: m2.sign });
    }
    let status = if out.iter().any(|c| c.sign_k1 > 0 || c.sign_k2 < 0) {
        ComparisonStatus::Fail
    } else if out.iter().any(|c| c.sign_k1 == 0 || c.sign_k2 == 0) {
        ComparisonStatus::Boundary
    } else {
        ComparisonStatus::Pass
    };
    Ok(ComparisonReport { a, k1, k2, samples: out, status })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSample {
    pub s: f64,
    pub upper: f64,
    pub ratio: f64,
    pub lower: f64,
}

impl RatioSample {
    pub fn holds(&self) -> bool {
        self.upper > self.ratio && self.ratio > self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub samples: Vec<RatioSample>,
    /// `min (2 k1 coth(k1 s) - G_s / G)`.
    pub upper_margin: f64,
    /// `min (G_s / G - 2 k2 coth(k2 s))`.
    pub lower_margin: f64,
    pub pass: bool,
}

/// `G_s^(k1) / G^(k1) > G_s / G > G_s^(k2) / G^(k2)` on the samples.
pub fn ratio_inequality(g: &WarpedPolarMetric, k1: f64, k2: f64, samples: &[f64]) -> Result<RatioReport> {
    check_pinching(g, k1, k2, samples)?;
    let mut out = Vec::with_capacity(samples.len());
    for &s in samples {
        if s < 0.05 {
            return Err(Error::Domain(format!("s = {s} is too close to the axis")));
        }
        out.push(RatioSample {
            s,
            upper: 2.0 * k1 / (k1 * s).tanh(),
            ratio: g.g_s(s, 0.0) / g.g(s, 0.0),
            lower: 2.0 * k2 / (k2 * s).tanh(),
        });
    }
    let upper_margin = out.iter().map(|r| r.upper - r.ratio).fold(f64::INFINITY, f64::min);
    let lower_margin = out.iter().map(|r| r.ratio - r.lower).fold(f64::INFINITY, f64::min);
    Ok(RatioReport { pass: out.iter().all(RatioSample::holds), samples: out, upper_margin, lower_margin })
}

/// `f(s) = log(tanh(k s / 2)) / k`, defined for `s > 0`.
pub fn fermi_barrier(k: f64, s: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Invalid(format!("k must be positive, got {k}")));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("barrier needs s > 0, got {s}")));
    }
    // log tanh x = log1p(-e^-2x) - log1p(e^-2x), accurate as x grows.
    let e = (-k * s).exp();
    Ok(((-e).ln_1p() - e.ln_1p()) / k)
}

/// The barrier for an ambient curvature bound `-b^2`, requiring `0 < k < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FermiBarrier {
    pub k: f64,
    pub b: f64,
}

impl FermiBarrier {
    pub fn new(k: f64, b: f64) -> Result<Self> {
        if !(k > 0.0 && k < b) {
            return Err(Error::Invalid(format!("need 0 < k < b, got k = {k}, b = {b}")));
        }
        Ok(Self { k, b })
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        fermi_barrier(self.k, s)
    }

    /// `f'(s) = 1 / sinh(k s)`.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("barrier needs s > 0, got {s}")));
        }
        Ok(1.0 / (self.k * s).sinh())
    }

    pub fn second_derivative(&self, s: f64) -> Result<f64> {
        let d = self.derivative(s)?;
        Ok(-self.k * (self.k * s).cosh() * d * d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neck_examples() {
        let p = CatenoidProfile::new(1.0, 1.0).unwrap();
        assert!((p.r_neck - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15);
        assert_eq!(p.height(p.r_neck).unwrap(), 0.0);
        assert!(matches!(p.height(0.5), Err(Error::Domain(_))));
        assert!(p.h_prime(p.r_neck + 1e-6).unwrap() > 1e2);
        assert!(CatenoidProfile::new(0.0, 1.0).is_err());
    }

    #[test]
    fn horizontal_slices_are_minimal() {
        let g = WarpedPolarMetric::SinhSquared { k: 1.0 };
        let m = mean_curvature(&g, 1.3, 0.0, 0.0);
        assert_eq!((m.h2, m.sign), (0.0, 0));
    }

    #[test]
    fn fermi_examples() {
        let f = |s| fermi_barrier(1.0, s).unwrap();
        assert!(f(20.5).abs() < 1e-8 && f(20.5) < 0.0);
        let s = 2.0 * (-1f64).exp().atanh();
        assert!((f(s) + 1.0).abs() < 1e-14);
        assert!(matches!(fermi_barrier(1.0, 0.0), Err(Error::Domain(_))));
        assert!(FermiBarrier::new(1.0, 0.5).is_err());
        let b = FermiBarrier::new(0.5, 1.0).unwrap();
        assert!(b.second_derivative(1.0).unwrap() < 0.0);
    }

    #[test]
    fn boundary_case_is_flagged() {
        let (k1, k2, a) = (1.5, 0.5, 0.2);
        let g = WarpedPolarMetric::SinhSquared { k: k1 };
        let s: Vec<f64> = (0..50).map(|i| 1.0 + 0.08 * i as f64).collect();
        let rep = comparison_signs(&g, k1, k2, a, &s).unwrap();
        assert_eq!(rep.status, ComparisonStatus::Boundary);
        assert!(rep.samples.iter().all(|c| c.sign_k1 == 0 && c.sign_k2 == 1));
        let outside = WarpedPolarMetric::SinhSquared { k: 2.0 };
        assert!(matches!(comparison_signs(&outside, k1, k2, a, &s), Err(Error::PreconditionFail(_))));
        assert!(matches!(ratio_inequality(&outside, k1, k2, &s), Err(Error::PreconditionFail(_))));
    }
}
