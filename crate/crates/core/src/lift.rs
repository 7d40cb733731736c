//! Generalized lift of the square curve `gamma^C` through the branches `F_k`
//! and the closed polygon `P(C)` obtained by joining its endpoints along `l_0`.
//!
//! The lift is realised by predictor-corrector continuation: an RK4 step of
//! `dz/dt = gamma'(t) / sqrt(phi(z))` followed by Newton on
//! `F(z) = gamma(t)`, where `F` is evaluated with a continuously tracked
//! argument so that crossing `l_k` moves the point from `Delta_{k-1}` to
//! `Delta_k` without a jump.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::Serialize;

use crate::end_model::{branch_f, BranchDomain, EndData};
use crate::{Complex, Error, Result};

/// `gamma^C`: the boundary of the square `|Re w|, |Im w| <= C`, starting at
/// `C`, traversed counterclockwise `m + 1` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectanglePath {
    pub c: f64,
    pub m: u32,
}

pub fn build_gamma(c: f64, m: u32) -> Result<RectanglePath> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Invalid(format!("square half-side must be positive, got {c}")));
    }
    Ok(RectanglePath { c, m })
}

impl RectanglePath {
    pub fn length(&self) -> f64 {
        8.0 * (self.m + 1) as f64 * self.c
    }

    fn local(&self, t: f64) -> f64 {
        let period = 8.0 * self.c;
        if t >= self.length() {
            return 0.0;
        }
        t - period * (t / period).floor()
    }

    pub fn eval(&self, t: f64) -> Complex {
        let c = self.c;
        let s = self.local(t);
        if s <= c {
            Complex::new(c, s)
        } else if s <= 3.0 * c {
            Complex::new(2.0 * c - s, c)
        } else if s <= 5.0 * c {
            Complex::new(-c, 4.0 * c - s)
        } else if s <= 7.0 * c {
            Complex::new(s - 6.0 * c, -c)
        } else {
            Complex::new(c, s - 8.0 * c)
        }
    }

    /// Velocity on the open piece containing `t`; at a corner, the velocity
    /// of the piece that starts there.
    pub fn velocity(&self, t: f64) -> Complex {
        let s = self.local(t) / self.c;
        match s {
            s if s < 1.0 => Complex::new(0.0, 1.0),
            s if s < 3.0 => Complex::new(-1.0, 0.0),
            s if s < 5.0 => Complex::new(0.0, -1.0),
            s if s < 7.0 => Complex::new(1.0, 0.0),
            _ => Complex::new(0.0, 1.0),
        }
    }

    /// Parameters of the `4(m+1)` corners.
    pub fn corner_params(&self) -> Vec<f64> {
        (0..4 * (self.m as usize + 1)).map(|j| (2 * j + 1) as f64 * self.c).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftConfig {
    /// Largest parameter step.
    pub step: f64,
    /// Step halvings allowed before giving up.
    pub max_halvings: u32,
    /// Newton stops when `|F(z) - gamma(t)| <= newton_tol * (1 + C)`.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl LiftConfig {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self { step: 0.01, max_halvings: 10, newton_tol: 1e-13, max_newton: 30 }
    }
}

/// Point on a lifted curve, with the continuous argument used to evaluate `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftSample {
    pub t: f64,
    pub z: Complex,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftSegment {
    /// Sector index: this piece lifts through `F_k` on `Delta_k`.
    pub k: usize,
    pub samples: Vec<LiftSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedLift {
    pub end: EndData,
    pub c: f64,
    pub segments: Vec<LiftSegment>,
    pub start_point: Complex,
    pub end_point: Complex,
}

impl GeneralizedLift {
    pub fn path(&self) -> RectanglePath {
        RectanglePath { c: self.c, m: self.end.m }
    }

    /// Every sample in parameter order, without the repeated segment joints.
    pub fn samples(&self) -> Vec<LiftSample> {
        let mut out: Vec<LiftSample> = Vec::new();
        for seg in &self.segments {
            let skip = usize::from(!out.is_empty());
            out.extend(seg.samples.iter().skip(skip).copied());
        }
        out
    }

    /// Largest `|F_k(z) - gamma(t)|` with `F_k` evaluated independently
    /// through the sector's own argument function.
    pub fn forward_residual(&self) -> Result<f64> {
        let path = self.path();
        let mut worst = 0.0f64;
        for seg in &self.segments {
            let dom = BranchDomain::new(self.end.m, seg.k)?;
            for s in &seg.samples {
                let w = branch_f(&self.end, &dom, s.z)?;
                worst = worst.max((w - path.eval(s.t)).norm());
            }
        }
        Ok(worst)
    }
}

/// `M_0 = R^(m+1) + 4 pi |c|` and `M_1 = max |Im F|` on `|z| = R`.
pub fn lift_threshold(end: &EndData) -> (f64, f64) {
    let m0 = end.r.powf(end.order()) + 4.0 * PI * end.c.abs();
    let m1 =
        (0..4096).map(|i| end.im_f(Complex::from_polar(end.r, 2.0 * PI * i as f64 / 4096.0)).abs()).fold(0.0, f64::max);
    (m0, m1)
}

fn unwrap_arg(prev_z: Complex, prev_theta: f64, z: Complex) -> f64 {
    prev_theta + (z / prev_z).arg()
}

/// Newton for `F(z) = target` starting from `z`, tracking the argument.
fn correct(
    end: &EndData,
    mut z: Complex,
    mut theta: f64,
    target: Complex,
    tol: f64,
    max_iter: usize,
) -> Option<(Complex, f64)> {
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        let res = end.f_with_arg(z, theta) - target;
        let r = res.norm();
        if r <= tol {
            return Some((z, theta));
        }
        if !(r < last) && last.is_finite() && r > 10.0 * tol {
            return None;
        }
        last = r;
        let dz = res / end.sqrt_phi(z);
        let next = z - dz;
        if !(next.norm() > 0.0) || dz.norm() > 0.5 * z.norm() {
            return None;
        }
        theta = unwrap_arg(z, theta, next);
        z = next;
    }
    let r = (end.f_with_arg(z, theta) - target).norm();
    (r <= tol).then_some((z, theta))
}

/// Continues a lift of the straight target `w(t) = w0 + (t - t0) v` over
/// `[t0, t1]` from `(z, theta)`, appending accepted samples (not the start).
#[allow(clippy::too_many_arguments)]
fn march_line(
    end: &EndData,
    w0: Complex,
    v: Complex,
    t0: f64,
    t1: f64,
    mut z: Complex,
    mut theta: f64,
    cfg: &LiftConfig,
    tol: f64,
    out: &mut Vec<LiftSample>,
) -> Result<(Complex, f64)> {
    let span = t1 - t0;
    let pieces = ((span / cfg.step).ceil() as usize).max(2);
    let pieces = pieces + pieces % 2;
    let base = span / pieces as f64;
    let min_step = base / f64::from(1u32 << cfg.max_halvings.min(30));
    let mut t = t0;
    let mut dt = base;
    let rhs = |z: Complex| v / end.sqrt_phi(z);
    while t < t1 - 1e-12 * span.max(1.0) {
        let h = dt.min(t1 - t);
        // Keep samples landing on the regular lattice where possible.
        let t_next = if (t1 - t - h).abs() < 1e-9 * base { t1 } else { t + h };
        let h = t_next - t;
        let k1 = rhs(z);
        let k2 = rhs(z + 0.5 * h * k1);
        let k3 = rhs(z + 0.5 * h * k2);
        let k4 = rhs(z + h * k3);
        let pred = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let pred_theta = unwrap_arg(z, theta, pred);
        let target = w0 + (t_next - t0) * v;
        match correct(end, pred, pred_theta, target, tol, cfg.max_newton) {
            Some((zn, thn)) if (zn - pred).norm() < 0.1 * h * k1.norm() + tol => {
                z = zn;
                theta = thn;
                t = t_next;
                out.push(LiftSample { t, z, theta });
                dt = (2.0 * dt).min(base);
            }
            _ => {
                dt *= 0.5;
                if dt < min_step {
                    return Err(Error::ContinuationDiverged { t });
                }
            }
        }
    }
    Ok((z, theta))
}

/// Lifts `gamma^C` starting from the point `p` of `l_0` with `F_0(p) = C`.
pub fn lift(end: &EndData, c: f64, cfg: &LiftConfig) -> Result<GeneralizedLift> {
    end.validate()?;
    end.require_radius_invariant()?;
    if !(cfg.step > 0.0) {
        return Err(Error::Invalid(format!("lift step must be positive, got {}", cfg.step)));
    }
    let (m0, m1) = lift_threshold(end);
    let required = m0.max(m1);
    if !(c > required) {
        return Err(Error::CTooSmall { c, required });
    }
    let path = build_gamma(c, end.m)?;
    let tol = cfg.newton_tol * (1.0 + c);

    let guess = Complex::new(c.powf(1.0 / end.order()), 0.0);
    let (p, theta_p) =
        correct(end, guess, 0.0, Complex::new(c, 0.0), tol, 100).ok_or(Error::ContinuationDiverged { t: 0.0 })?;

    let n_sectors = end.sector_count();
    let mut segments = Vec::with_capacity(n_sectors);
    let (mut z, mut theta) = (p, theta_p);
    for k in 0..n_sectors {
        let dom = BranchDomain::new(end.m, k)?;
        let mut samples = vec![LiftSample { t: 4.0 * k as f64 * c, z, theta }];
        for piece in 0..4 {
            let t0 = (4 * k + piece) as f64 * c;
            let t1 = t0 + c;
            // Midpoint velocity: t0 itself may round onto the previous piece.
            let v = path.velocity(t0 + 0.5 * c);
            let w0 = path.eval(t0);
            let before = samples.len();
            (z, theta) = march_line(end, w0, v, t0, t1, z, theta, cfg, tol, &mut samples)?;
            let slack = 1e-9;
            for s in &samples[before..] {
                if s.theta < dom.arg_lo() - slack || s.theta > dom.arg_hi() + slack {
                    return Err(Error::SectorMismatch { k, t: s.t });
                }
            }
        }
        segments.push(LiftSegment { k, samples });
    }

    let end_point = z;
    let scale = 1.0 + c;
    for q in [p, end_point] {
        if end.im_f(q).abs() > 1e-8 * scale {
            return Err(Error::NotOnL0 { residual: end.im_f(q).abs() });
        }
    }
    debug_assert!((theta - 2.0 * PI).abs() < PI / (end.order() * 10.0) + 1e-9);
    Ok(GeneralizedLift { end: *end, c, segments, start_point: p, end_point })
}

/// Arc classes of `P(C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ArcClass {
    /// Mapped by `F_{2k+l}` into `{|Im w| = C}`.
    A { l: u8, k: u32 },
    /// Mapped by `F_{2k+l}` into `{|Re w| = C}`.
    B { l: u8, k: u32 },
    /// Closing arc along `l_0`.
    BStar,
}

impl ArcClass {
    /// Class of the lift at parameter `t` (interior of a window).
    pub fn at(t: f64, c: f64) -> ArcClass {
        let s = t / c;
        let loop_idx = (s / 8.0).floor().max(0.0);
        let within = s - 8.0 * loop_idx;
        let l = if within < 4.0 { 0u8 } else { 1u8 };
        let u = within - 4.0 * f64::from(l);
        let k = loop_idx as u32;
        if (1.0..3.0).contains(&u) {
            ArcClass::A { l, k }
        } else {
            ArcClass::B { l, k }
        }
    }

    pub fn family(&self) -> char {
        match self {
            ArcClass::A { .. } => 'A',
            ArcClass::B { .. } => 'B',
            ArcClass::BStar => '*',
        }
    }

    /// Sector whose branch maps the arc onto a side of the square.
    pub fn sector(&self) -> usize {
        match *self {
            ArcClass::A { l, k } | ArcClass::B { l, k } => 2 * k as usize + l as usize,
            ArcClass::BStar => 0,
        }
    }
}

impl fmt::Display for ArcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArcClass::A { l, k } => write!(f, "A{l}_{k}"),
            ArcClass::B { l, k } => write!(f, "B{l}_{k}"),
            ArcClass::BStar => write!(f, "Bstar"),
        }
    }
}

/// A polygon vertex. `turning` is the signed exterior angle used by
/// Gauss-Bonnet: `pi/2` for a convex right angle, `-pi/2` for a reflex one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vertex {
    pub index: usize,
    pub z: Complex,
    pub t: f64,
    pub measured_angle: f64,
    pub interior_angle: f64,
    pub turning: f64,
}

impl Vertex {
    pub fn is_reflex(&self) -> bool {
        self.interior_angle > PI
    }
}

/// A sample of `P(C)`. `arc` classifies the edge from this point to the next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolygonPoint {
    pub t: f64,
    pub z: Complex,
    pub sector: usize,
    pub arc: ArcClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonP {
    pub lift: GeneralizedLift,
    /// Samples of the closing arc from the lift's end point back to its start,
    /// empty when degenerate.
    pub closing_arc: Vec<Complex>,
    pub points: Vec<PolygonPoint>,
    pub vertices: Vec<Vertex>,
}

/// One-sided derivative from three samples `z0` (at the vertex), `z1`, `z2`
/// at parameters `t0`, `t1`, `t2` (quadratic extrapolation).
fn one_sided_tangent(z0: Complex, z1: Complex, z2: Complex, t0: f64, t1: f64, t2: f64) -> Complex {
    let (h1, h2) = (t1 - t0, t2 - t0);
    // Derivative at t0 of the interpolating quadratic.
    let d = h1 * h2 * (h2 - h1);
    (z1 - z0) * (h2 * h2 / d) - (z2 - z0) * (h1 * h1 / d)
}

/// Closes the lift along `l_0` and classifies arcs and vertices.
pub fn close_polygon(lift: &GeneralizedLift, end: &EndData, cfg: &LiftConfig) -> Result<PolygonP> {
    let c = lift.c;
    let scale = 1.0 + c;
    let (p, q) = (lift.start_point, lift.end_point);
    for z in [p, q] {
        let r = end.im_f(z).abs();
        if r > 1e-8 * scale {
            return Err(Error::NotOnL0 { residual: r });
        }
    }
    let samples = lift.samples();
    let t_end = samples.last().map(|s| s.t).unwrap_or(0.0);
    let degenerate = (p - q).norm() < 1e-9;

    let mut closing = Vec::new();
    let mut closing_t = Vec::new();
    if !degenerate {
        // In the chart of F_0 the end point sits at C + 2 pi c on the real axis.
        let last = samples.last().expect("lift has samples");
        let theta0 = last.theta - 2.0 * PI;
        let w_start = end.f_with_arg(q, theta0);
        let tol = cfg.newton_tol * scale;
        let span = (w_start.re - c).abs();
        let v = Complex::new((c - w_start.re).signum(), 0.0);
        let mut arc = Vec::new();
        march_line(end, Complex::new(w_start.re, 0.0), v, 0.0, span, q, theta0, cfg, tol, &mut arc)?;
        // Drop the final sample, which coincides with p.
        arc.pop();
        for s in arc {
            closing.push(s.z);
            closing_t.push(t_end + s.t);
        }
    }

    let mut points: Vec<PolygonPoint> = Vec::with_capacity(samples.len() + closing.len());
    let n_lift = if degenerate { samples.len() - 1 } else { samples.len() };
    for i in 0..n_lift {
        let s = samples[i];
        let t_mid = if i + 1 < samples.len() { 0.5 * (s.t + samples[i + 1].t) } else { s.t };
        let arc = if i + 1 < samples.len() { ArcClass::at(t_mid, c) } else { ArcClass::BStar };
        let sector = ((t_mid / (4.0 * c)).floor() as usize).min(end.sector_count() - 1);
        points.push(PolygonPoint { t: s.t, z: s.z, sector, arc });
    }
    for (z, t) in closing.iter().zip(&closing_t) {
        points.push(PolygonPoint { t: *t, z: *z, sector: 0, arc: ArcClass::BStar });
    }

    let n = points.len();
    let path = lift.path();
    let mut vertex_idx: Vec<usize> = Vec::new();
    let corners = path.corner_params();
    for (i, pt) in points.iter().enumerate().take(n_lift) {
        if corners.iter().any(|tc| (pt.t - tc).abs() < 1e-9 * c) {
            vertex_idx.push(i);
        }
    }
    if !degenerate {
        vertex_idx.insert(0, 0);
        vertex_idx.push(samples.len() - 1);
    }

    let mut vertices = Vec::with_capacity(vertex_idx.len());
    for &i in &vertex_idx {
        let at = |j: isize| {
            let idx = (i as isize + j).rem_euclid(n as isize) as usize;
            points[idx].z
        };
        // Tangents are estimated in the polygon's own index parameter with a
        // chord-length parametrization on each side.
        let (z0, zm1, zm2, zp1, zp2) = (at(0), at(-1), at(-2), at(1), at(2));
        let tm1 = -(z0 - zm1).norm();
        let tm2 = tm1 - (zm1 - zm2).norm();
        let tp1 = (zp1 - z0).norm();
        let tp2 = tp1 + (zp2 - zp1).norm();
        let d_in = one_sided_tangent(z0, zm1, zm2, 0.0, tm1, tm2);
        let d_out = one_sided_tangent(z0, zp1, zp2, 0.0, tp1, tp2);
        let turn_measured = (d_out / d_in).arg();
        let measured_angle = PI - turn_measured;
        let interior_angle = if (measured_angle - FRAC_PI_2).abs() <= (measured_angle - 3.0 * FRAC_PI_2).abs() {
            FRAC_PI_2
        } else {
            3.0 * FRAC_PI_2
        };
        vertices.push(Vertex {
            index: i,
            z: z0,
            t: points[i].t,
            measured_angle,
            interior_angle,
            turning: PI - interior_angle,
        });
    }

    Ok(PolygonP { lift: lift.clone(), closing_arc: closing, points, vertices })
}

impl PolygonP {
    pub fn c(&self) -> f64 {
        self.lift.c
    }

    pub fn zs(&self) -> Vec<Complex> {
        self.points.iter().map(|p| p.z).collect()
    }

    pub fn min_abs(&self) -> f64 {
        self.points.iter().map(|p| p.z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().map(|p| p.z.norm()).fold(0.0, f64::max)
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let a = self.points[i].z;
                let b = self.points[(i + 1) % n].z;
                a.re * b.im - a.im * b.re
            })
            .sum::<f64>()
            * 0.5
    }

    /// Winding number of the polygon around `z0`.
    pub fn winding_number(&self, z0: Complex) -> i64 {
        let n = self.points.len();
        let total: f64 = (0..n).map(|i| ((self.points[(i + 1) % n].z - z0) / (self.points[i].z - z0)).arg()).sum();
        (total / (2.0 * PI)).round() as i64
    }

    /// Number of properly crossing pairs of non-adjacent edges.
    pub fn self_intersections(&self) -> usize {
        count_self_intersections(&self.zs())
    }

    /// Sum of vertex turning angles; `2 pi (m+1)` for a correctly classified polygon.
    pub fn total_turning(&self) -> f64 {
        self.vertices.iter().map(|v| v.turning).sum()
    }

    pub fn reflex_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_reflex()).count()
    }

    pub fn is_closing_degenerate(&self) -> bool {
        self.closing_arc.is_empty() && (self.lift.start_point - self.lift.end_point).norm() < 1e-9
    }

    /// Point indices of every maximal run of edges with the same arc class.
    pub fn arcs(&self) -> Vec<(ArcClass, Vec<usize>)> {
        let mut out: Vec<(ArcClass, Vec<usize>)> = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            match out.last_mut() {
                Some((cls, idx)) if *cls == p.arc => idx.push(i),
                _ => out.push((p.arc, vec![i])),
            }
        }
        out
    }
}

fn orient(a: Complex, b: Complex, c: Complex) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_cross(a: Complex, b: Complex, c: Complex, d: Complex) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Sweep along `x` over the edges of a closed polyline, counting proper
/// crossings between non-adjacent edges.
pub fn count_self_intersections(pts: &[Complex]) -> usize {
    let n = pts.len();
    if n < 4 {
        return 0;
    }
    let mut edges: Vec<(f64, f64, usize)> = (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            (a.re.min(b.re), a.re.max(b.re), i)
        })
        .collect();
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut active: Vec<(f64, f64, usize)> = Vec::new();
    let mut count = 0;
    for e in edges {
        active.retain(|a| a.1 >= e.0);
        let (a, b) = (pts[e.2], pts[(e.2 + 1) % n]);
        for other in &active {
            let j = other.2;
            let adjacent = j == e.2 || (j + 1) % n == e.2 || (e.2 + 1) % n == j;
            if adjacent {
                continue;
            }
            if segments_cross(a, b, pts[j], pts[(j + 1) % n]) {
                count += 1;
            }
        }
        active.push(e);
    }
    count
}

/// Result of scanning a schedule of `C` values for escape from `D(0, K)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeReport {
    /// `(C, min |z| over P(C))` for each scanned `C`.
    pub min_abs: Vec<(f64, f64)>,
    /// Least listed `C` with `min |z| > K`, if any.
    pub first_escape: Option<f64>,
}

pub fn polygon_escape_check(end: &EndData, k_box: f64, cs: &[f64], cfg: &LiftConfig) -> Result<EscapeReport> {
    if cs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("C schedule must be strictly increasing".into()));
    }
    let mut report = EscapeReport { min_abs: Vec::new(), first_escape: None };
    for &c in cs {
        let lifted = lift(end, c, cfg)?;
        let poly = close_polygon(&lifted, end, cfg)?;
        let m = poly.min_abs();
        report.min_abs.push((c, m));
        if report.first_escape.is_none() && m > k_box {
            report.first_escape = Some(c);
        }
    }
    Ok(report)
}
