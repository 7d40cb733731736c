//! Normal form of the Hopf differential at a puncture,
//! `Q = ((m+1) z^m + c i / z)^2 dz^2` on the exterior annulus `|z| > R`,
//! together with its branch integrals `F_k = int sqrt(phi) dz` and the
//! components `l_0, ..., l_{2m+1}` of `{Im F = 0}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Complex, Error, Result};

/// A model end: degree `m`, residue coefficient `c`, inner radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndData {
    pub m: u32,
    pub c: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl EndData {
    /// Checks only that `R` is positive and `c` finite. The radius inequality
    /// `R^(m+1) > 1 + 4 pi |c| / cos(pi/10)` is enforced by the operations that
    /// depend on it (level-curve tracing, lifting).
    pub fn new(m: u32, c: f64, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid(format!("end radius must be positive, got {r}")));
        }
        if !c.is_finite() {
            return Err(Error::Invalid(format!("residue coefficient must be finite, got {c}")));
        }
        Ok(Self { m, c, r })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.m, self.c, self.r).map(|_| ())
    }

    /// `m + 1` as a float.
    pub fn order(&self) -> f64 {
        (self.m + 1) as f64
    }

    /// Number of components of `{Im F = 0}` and of branch domains: `2(m+1)`.
    pub fn sector_count(&self) -> usize {
        2 * (self.m as usize + 1)
    }

    /// Smallest admissible `R^(m+1)`: `1 + 4 pi |c| / cos(pi/10)`.
    pub fn radius_bound(&self) -> f64 {
        1.0 + 4.0 * PI * self.c.abs() / (PI / 10.0).cos()
    }

    pub fn satisfies_radius_invariant(&self) -> bool {
        self.r.powf(self.order()) > self.radius_bound()
    }

    pub fn require_radius_invariant(&self) -> Result<()> {
        if self.satisfies_radius_invariant() {
            Ok(())
        } else {
            Err(Error::PreconditionFail(format!(
                "R^(m+1) = {} must exceed {}",
                self.r.powf(self.order()),
                self.radius_bound()
            )))
        }
    }

    /// `sqrt(phi) = (m+1) z^m + c i / z`, the branch asymptotic to `(m+1) z^m`.
    pub fn sqrt_phi(&self, z: Complex) -> Complex {
        self.order() * z.powu(self.m) + Complex::new(0.0, self.c) / z
    }

    /// Derivative of `sqrt(phi)`.
    pub fn sqrt_phi_prime(&self, z: Complex) -> Complex {
        let m = self.m as f64;
        let lead = if self.m == 0 { Complex::new(0.0, 0.0) } else { (m + 1.0) * m * z.powu(self.m - 1) };
        lead - Complex::new(0.0, self.c) / (z * z)
    }

    /// `|phi(z)|`.
    pub fn abs_phi(&self, z: Complex) -> f64 {
        self.sqrt_phi(z).norm_sqr()
    }

    /// `F` evaluated with an explicit (continuous) argument `theta` of `z`:
    /// `z^(m+1) + c i (ln|z| + i theta)`.
    pub fn f_with_arg(&self, z: Complex, theta: f64) -> Complex {
        let r = z.norm();
        let lead = Complex::from_polar(r.powf(self.order()), self.order() * theta);
        lead + Complex::new(-self.c * theta, self.c * r.ln())
    }

    /// `Im F`, which is single valued on the annulus.
    pub fn im_f(&self, z: Complex) -> f64 {
        self.c * z.norm().ln() + z.norm().powf(self.order()) * (self.order() * z.arg()).sin()
    }
}

/// `Q`'s coefficient `phi(z) = ((m+1) z^m + c i / z)^2`.
pub fn hopf_phi(end: &EndData, z: Complex) -> Result<Complex> {
    if z == Complex::new(0.0, 0.0) {
        return Err(Error::Singularity);
    }
    let s = end.sqrt_phi(z);
    Ok(s * s)
}

/// Sector `Delta_k` of the annulus, an angular window slightly wider than
/// `[k pi/(m+1), (k+1) pi/(m+1)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BranchDomain {
    pub m: u32,
    pub k: usize,
}

impl BranchDomain {
    pub fn new(m: u32, k: usize) -> Result<Self> {
        if k > 2 * m as usize + 1 {
            return Err(Error::Invalid(format!("sector index {k} exceeds 2m+1 = {}", 2 * m + 1)));
        }
        Ok(Self { m, k })
    }

    fn unit(&self) -> f64 {
        PI / (self.m + 1) as f64
    }

    pub fn arg_lo(&self) -> f64 {
        self.k as f64 * self.unit() - self.unit() / 10.0
    }

    pub fn arg_hi(&self) -> f64 {
        (self.k + 1) as f64 * self.unit() + self.unit() / 10.0
    }

    /// The representative of `arg z` inside `[arg_lo, arg_hi]`.
    pub fn argument(&self, z: Complex) -> Result<f64> {
        let (lo, hi) = (self.arg_lo(), self.arg_hi());
        let a = z.arg();
        // Slack so that points built on an edge of the window survive `arg` round-off.
        let eps = 1e-12;
        let n = ((lo - eps - a) / (2.0 * PI)).ceil();
        let theta = a + 2.0 * PI * n;
        if theta <= hi + eps {
            Ok(theta)
        } else {
            Err(Error::Branch { arg: a, lo, hi })
        }
    }
}

/// The branch `F_k` on `Delta_k`.
pub fn branch_f(end: &EndData, dom: &BranchDomain, z: Complex) -> Result<Complex> {
    if z.norm() < end.r * (1.0 - 1e-12) {
        return Err(Error::Domain(format!("|z| = {} is inside the disc of radius {}", z.norm(), end.r)));
    }
    let theta = dom.argument(z)?;
    Ok(end.f_with_arg(z, theta))
}

/// One component `l_k` of `{Im F = 0}`, sampled from `|z| = R` outwards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCurve {
    pub k: usize,
    pub samples: Vec<Complex>,
}

impl LevelCurve {
    /// Centre of the angular band containing `l_k`.
    pub fn band_center(m: u32, k: usize) -> f64 {
        k as f64 * PI / (m + 1) as f64
    }

    pub fn band_halfwidth(m: u32) -> f64 {
        PI / (10.0 * (m + 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    /// Outer radius as a multiple of `R`.
    pub r_max_factor: f64,
    /// Arclength step as a fraction of `|z|`.
    pub step_factor: f64,
    pub newton_tol: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { r_max_factor: 8.0, step_factor: 0.01, newton_tol: 1e-10 }
    }
}

/// Distance of `theta` from `center` modulo `2 pi`.
fn angular_gap(theta: f64, center: f64) -> f64 {
    let d = (theta - center).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Roots of `theta -> Im F(R e^{i theta})` in `[0, 2 pi)`.
fn circle_roots(end: &EndData, radius: f64) -> Vec<f64> {
    let n = 1440 * (end.m as usize + 1);
    let g = |t: f64| end.c * radius.ln() + radius.powf(end.order()) * (end.order() * t).sin();
    // Start slightly off a band centre so that roots at exact multiples of
    // pi/(m+1) (the c = 0 case) fall strictly inside a bracket.
    let offset = -PI / (7.0 * n as f64);
    let mut roots = Vec::new();
    for i in 0..n {
        let a = offset + 2.0 * PI * i as f64 / n as f64;
        let b = offset + 2.0 * PI * (i + 1) as f64 / n as f64;
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            roots.push(a.rem_euclid(2.0 * PI));
            continue;
        }
        if ga * gb < 0.0 {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm == 0.0 || hi - lo < 1e-15 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm * glo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push((0.5 * (lo + hi)).rem_euclid(2.0 * PI));
        }
    }
    roots
}

/// Newton projection onto `{Im F = 0}` along `grad Im F`.
fn project_to_level(end: &EndData, mut z: Complex, tol: f64) -> Option<Complex> {
    for _ in 0..50 {
        let v = end.im_f(z);
        let fp = end.sqrt_phi(z);
        let scale = 1.0 + z.norm().powf(end.order());
        if v.abs() <= tol * scale {
            return Some(z);
        }
        // grad Im F = (Im F', Re F') = i conj(F').
        let grad = Complex::new(0.0, 1.0) * fp.conj();
        z -= grad * (v / grad.norm_sqr());
    }
    None
}

/// Traces the `2(m+1)` components of `{Im F = 0}` from `|z| = R` out to
/// `|z| = r_max_factor * R`.
pub fn trace_level_curves(end: &EndData, cfg: &TraceConfig) -> Result<Vec<LevelCurve>> {
    end.validate()?;
    end.require_radius_invariant()?;
    let n = end.sector_count();
    let r_max = cfg.r_max_factor * end.r;
    let half = LevelCurve::band_halfwidth(end.m);

    if end.c == 0.0 {
        let mut radii = vec![end.r];
        while *radii.last().unwrap() < r_max {
            let next = (radii.last().unwrap() * (1.0 + cfg.step_factor)).min(r_max);
            radii.push(next);
        }
        return Ok((0..n)
            .map(|k| {
                let theta = LevelCurve::band_center(end.m, k);
                LevelCurve { k, samples: radii.iter().map(|&r| Complex::from_polar(r, theta)).collect() }
            })
            .collect());
    }

    let roots = circle_roots(end, end.r);
    if roots.len() != n {
        return Err(Error::RootCountMismatch { expected: n, found: roots.len() });
    }
    let mut curves = Vec::with_capacity(n);
    for k in 0..n {
        let center = LevelCurve::band_center(end.m, k);
        let matches: Vec<f64> = roots.iter().copied().filter(|&t| angular_gap(t, center) < half).collect();
        if matches.len() != 1 {
            return Err(Error::RootCountMismatch { expected: n, found: roots.len() });
        }
        let mut z = Complex::from_polar(end.r, matches[0]);
        let mut samples = vec![z];
        while z.norm() < r_max {
            let fp = end.sqrt_phi(z);
            let mut tangent = fp.conj() / fp.norm();
            if (z.conj() * tangent).re < 0.0 {
                tangent = -tangent;
            }
            let step = cfg.step_factor * z.norm();
            let next = project_to_level(end, z + tangent * step, cfg.newton_tol)
                .ok_or(Error::NoConvergence { iterations: 50, residual: end.im_f(z + tangent * step) })?;
            if next.norm() <= z.norm() {
                return Err(Error::Domain(format!("level curve l_{k} stopped moving outward")));
            }
            if angular_gap(next.arg(), center) >= half {
                return Err(Error::Domain(format!("level curve l_{k} left its angular band")));
            }
            z = next;
            samples.push(z);
        }
        curves.push(LevelCurve { k, samples });
    }
    Ok(curves)
}

/// Asymptotic profile of an end: `m+1` geodesics at `+inf`, `m+1` at `-inf`
/// and `2(m+1)` vertical lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProfileCounts {
    pub top_geodesics: u32,
    pub bottom_geodesics: u32,
    pub vertical_lines: u32,
}

pub fn profile_counts(end: &EndData) -> ProfileCounts {
    ProfileCounts { top_geodesics: end.m + 1, bottom_geodesics: end.m + 1, vertical_lines: 2 * (end.m + 1) }
}

/// Empirical constant `C*` with `C* |z|^(m+1) > |F_k(z)| > |z|^(m+1) / C*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub c_star: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub samples: usize,
}

/// Scans `|F_k(z)| / |z|^(m+1)` over every sector for `r_star <= |z| <= r_max`.
pub fn fit_growth_constant(end: &EndData, r_star: f64, r_max: f64) -> Result<GrowthFit> {
    if !(r_star >= end.r && r_max > r_star) {
        return Err(Error::Invalid("need R <= r_star < r_max".into()));
    }
    let (mut lo, mut hi, mut count) = (f64::INFINITY, 0.0f64, 0usize);
    for k in 0..end.sector_count() {
        let dom = BranchDomain::new(end.m, k)?;
        for i in 0..=32 {
            let r = r_star * (r_max / r_star).powf(i as f64 / 32.0);
            for j in 0..=32 {
                let theta = dom.arg_lo() + (dom.arg_hi() - dom.arg_lo()) * j as f64 / 32.0;
                let z = Complex::from_polar(r, theta);
                let ratio = branch_f(end, &dom, z)?.norm() / r.powf(end.order());
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                count += 1;
            }
        }
    }
    if !(lo > 0.0) {
        return Err(Error::Degenerate("F_k vanishes in the scanned region".into()));
    }
    // Strict inequalities: pad the observed extremes.
    let c_star = hi.max(1.0 / lo) * (1.0 + 1e-9);
    Ok(GrowthFit { c_star, min_ratio: lo, max_ratio: hi, samples: count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn hopf_phi_examples() {
        let e = EndData::new(0, 0.0, 2.0).unwrap();
        assert_eq!(hopf_phi(&e, c(2.0, 0.0)).unwrap(), c(1.0, 0.0));
        let e = EndData::new(1, 0.0, 2.0).unwrap();
        let v = hopf_phi(&e, c(0.0, 3.0)).unwrap();
        assert!((v - c(-36.0, 0.0)).norm() < 1e-12);
        let e = EndData::new(1, 1.0, 4.0).unwrap();
        let v = hopf_phi(&e, c(0.0, 1.0)).unwrap();
        assert!((v - c(-3.0, 4.0)).norm() < 1e-12);
        assert_eq!(hopf_phi(&e, c(0.0, 0.0)), Err(Error::Singularity));
    }

    #[test]
    fn branch_f_examples() {
        let e = EndData::new(0, 0.0, 2.0).unwrap();
        let d0 = BranchDomain::new(0, 0).unwrap();
        assert!((branch_f(&e, &d0, c(5.0, 0.0)).unwrap() - c(5.0, 0.0)).norm() < 1e-14);
        let e = EndData::new(1, 0.0, 1.5).unwrap();
        let d0 = BranchDomain::new(1, 0).unwrap();
        let z = Complex::from_polar(2.0, PI / 6.0);
        let w = branch_f(&e, &d0, z).unwrap();
        assert!((w - Complex::from_polar(4.0, PI / 3.0)).norm() < 1e-13);
    }

    #[test]
    fn branch_errors() {
        let e = EndData::new(1, 0.0, 1.0).unwrap();
        let d0 = BranchDomain::new(1, 0).unwrap();
        // Delta_0 for m = 1 spans [-pi/20, 11 pi/20].
        assert!(matches!(branch_f(&e, &d0, c(-3.0, 0.0)), Err(Error::Branch { .. })));
        assert!(matches!(branch_f(&e, &d0, c(0.5, 0.0)), Err(Error::Domain(_))));
        assert!(BranchDomain::new(1, 4).is_err());
    }

    #[test]
    fn branch_windows() {
        for m in 0..4u32 {
            for k in 0..=(2 * m as usize + 1) {
                let d = BranchDomain::new(m, k).unwrap();
                let u = PI / (m + 1) as f64;
                assert!((d.arg_hi() - d.arg_lo() - (u + u / 5.0)).abs() < 1e-14);
                if k > 0 {
                    let prev = BranchDomain::new(m, k - 1).unwrap();
                    assert!(prev.arg_hi() > d.arg_lo());
                }
            }
        }
    }

    #[test]
    fn argument_picks_representative() {
        let d = BranchDomain::new(0, 1).unwrap();
        // Delta_1 for m = 0 spans [9 pi/10, 21 pi/10].
        let t = d.argument(c(1.0, -0.1)).unwrap();
        assert!((t - (2.0 * PI - 0.1f64.atan())).abs() < 1e-14);
    }

    #[test]
    fn profile_count_examples() {
        let counts = |m| {
            let p = profile_counts(&EndData::new(m, 0.0, 2.0).unwrap());
            (p.top_geodesics, p.bottom_geodesics, p.vertical_lines)
        };
        assert_eq!(counts(0), (1, 1, 2));
        assert_eq!(counts(1), (2, 2, 4));
        assert_eq!(counts(3), (4, 4, 8));
    }

    #[test]
    fn rays_for_c_zero() {
        let e = EndData::new(1, 0.0, 1.5).unwrap();
        let curves = trace_level_curves(&e, &TraceConfig::default()).unwrap();
        assert_eq!(curves.len(), 4);
        for (k, cv) in curves.iter().enumerate() {
            let theta = k as f64 * PI / 2.0;
            for z in &cv.samples {
                assert!(angular_gap(z.arg(), theta) < 1e-14);
                assert!(e.im_f(*z).abs() < 1e-8 * (1.0 + z.norm_sqr()));
            }
            assert!((cv.samples.last().unwrap().norm() - 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn radius_invariant_required() {
        let e = EndData::new(0, 1.0, 3.0).unwrap();
        assert!(!e.satisfies_radius_invariant());
        assert!(matches!(trace_level_curves(&e, &TraceConfig::default()), Err(Error::PreconditionFail(_))));
    }

    #[test]
    fn derivative_identity() {
        let e = EndData::new(2, -0.7, 3.0).unwrap();
        let d = BranchDomain::new(2, 3).unwrap();
        let z = Complex::from_polar(4.0, 1.1 * PI);
        let h = 1e-4;
        let fd = (branch_f(&e, &d, z + h).unwrap() - branch_f(&e, &d, z - h).unwrap()) / (2.0 * h);
        assert!((fd - e.sqrt_phi(z)).norm() < 1e-6 * e.sqrt_phi(z).norm());
        let fdp = (e.sqrt_phi(z + h) - e.sqrt_phi(z - h)) / (2.0 * h);
        assert!((fdp - e.sqrt_phi_prime(z)).norm() < 1e-6 * fdp.norm());
    }
}
