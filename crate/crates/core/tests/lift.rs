use std::f64::consts::PI;

use mincurv::end_model::EndData;
use mincurv::lift::*;
use mincurv::Complex;
use proptest::prelude::*;

fn polygon(end: &EndData, c: f64, step: f64) -> PolygonP {
    let cfg = LiftConfig::with_step(step);
    let l = lift(end, c, &cfg).unwrap();
    close_polygon(&l, end, &cfg).unwrap()
}

/// Distance from `z` to the nearest `(m+1)`-th root of `w`.
fn preimage_distance(z: Complex, w: Complex, m: u32) -> f64 {
    let n = m + 1;
    let base = w.powf(1.0 / n as f64);
    (0..n)
        .map(|k| (z - base * Complex::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).norm())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn untwisted_lift_is_the_analytic_preimage() {
    for (m, r, c) in [(0u32, 2.0, 3.0), (1, 2.0, 6.0), (2, 1.5, 5.0)] {
        let end = EndData::new(m, 0.0, r).unwrap();
        let l = lift(&end, c, &LiftConfig::default()).unwrap();
        let gamma = l.path();
        let worst = l.samples().iter().map(|s| preimage_distance(s.z, gamma.eval(s.t), m)).fold(0.0, f64::max);
        assert!(worst < 1e-8, "m = {m}: {worst:e}");
        assert!(l.forward_residual().unwrap() < 1e-10 * (1.0 + c));
    }
}

#[test]
fn untwisted_polygon_shape() {
    for m in 0..3u32 {
        let end = EndData::new(m, 0.0, 1.5).unwrap();
        let p = polygon(&end, 8.0, 0.01);
        assert!(p.is_closing_degenerate());
        assert_eq!(p.vertices.len(), 4 * (m as usize + 1));
        assert_eq!(p.reflex_count(), 0);
        assert_eq!(p.self_intersections(), 0);
        assert_eq!(p.winding_number(Complex::new(0.0, 0.0)), 1);
        assert!((p.total_turning() - 2.0 * PI * (m + 1) as f64).abs() < 1e-12);
        // The nearest points are the midpoints of the square's sides.
        assert!((p.min_abs() - 8f64.powf(1.0 / (m + 1) as f64)).abs() < 1e-8);
        for v in &p.vertices {
            assert!((v.measured_angle - v.interior_angle).abs() < 1e-3);
        }
    }
}

fn twisted_cases() -> Vec<(EndData, f64)> {
    vec![
        (EndData::new(0, 0.5, 8.0).unwrap(), 16.0),
        (EndData::new(0, -0.5, 8.0).unwrap(), 16.0),
        (EndData::new(1, 1.0, 4.0).unwrap(), 30.0),
        (EndData::new(2, 0.3, 2.5).unwrap(), 25.0),
    ]
}

#[test]
fn twisted_lift_is_forward_consistent() {
    for (end, c) in twisted_cases() {
        let (m0, m1) = lift_threshold(&end);
        assert!(c > m0.max(m1));
        let l = lift(&end, c, &LiftConfig::default()).unwrap();
        let res = l.forward_residual().unwrap();
        assert!(res < 1e-7, "{end:?}: {res:e}");
        // In the chart of F_0 the end point sits at C + 2 pi c.
        let q = l.end_point;
        let theta = l.samples().last().unwrap().theta - 2.0 * PI;
        let w = end.f_with_arg(q, theta);
        assert!((w - Complex::new(c + 2.0 * PI * end.c, 0.0)).norm() < 1e-8 * (1.0 + c));
        assert!(end.im_f(q).abs() < 1e-8 * (1.0 + c));
        assert!(end.im_f(l.start_point).abs() < 1e-8 * (1.0 + c));
    }
}

#[test]
fn twisted_polygon_shape() {
    for (end, c) in twisted_cases() {
        let p = polygon(&end, c, 0.01);
        let m = end.m as usize;
        assert!(!p.is_closing_degenerate());
        assert_eq!(p.vertices.len(), 4 * (m + 1) + 2, "{end:?}");
        assert_eq!(p.reflex_count(), 1);
        assert_eq!(p.self_intersections(), 0);
        assert_eq!(p.winding_number(Complex::new(0.0, 0.0)), 1);
        assert!(p.min_abs() > end.r);
        assert!((p.total_turning() - 2.0 * PI * (m + 1) as f64).abs() < 1e-12);
        let reflex = p.vertices.iter().find(|v| v.is_reflex()).unwrap();
        assert!((reflex.measured_angle - 1.5 * PI).abs() < 0.05, "{reflex:?}");
        // The reflex corner sits at an end of the closing arc.
        let ends = [p.lift.start_point, p.lift.end_point];
        assert!(ends.iter().any(|e| (*e - reflex.z).norm() < 1e-12));
        assert!(p.points.iter().any(|q| q.arc == ArcClass::BStar));
    }
}

#[test]
fn arcs_cover_every_window() {
    let end = EndData::new(1, 1.0, 4.0).unwrap();
    let p = polygon(&end, 30.0, 0.02);
    let arcs = p.arcs();
    let a = arcs.iter().filter(|(cls, _)| cls.family() == 'A').count();
    let b = arcs.iter().filter(|(cls, _)| cls.family() == 'B').count();
    // Per loop: B (start), A, B, A, B (end) for l = 0 and l = 1.
    assert_eq!(a, 2 * (end.m as usize + 1));
    assert!(b >= 2 * (end.m as usize + 1));
    assert_eq!(arcs.last().unwrap().0, ArcClass::BStar);
}

#[test]
fn escape_examples() {
    let cfg = LiftConfig::with_step(0.05);
    let e0 = EndData::new(0, 0.0, 1.5).unwrap();
    let rep = polygon_escape_check(&e0, 4.5, &[2.0, 4.0, 6.0, 8.0], &cfg).unwrap();
    assert_eq!(rep.first_escape, Some(6.0));
    let e1 = EndData::new(1, 0.0, 1.5).unwrap();
    let rep = polygon_escape_check(&e1, 2.5, &[4.0, 6.0, 7.0, 9.0], &cfg).unwrap();
    assert_eq!(rep.first_escape, Some(7.0));
}

#[test]
fn twisted_min_radius_grows_with_c() {
    let end = EndData::new(0, 1.0, 15.0).unwrap();
    let cs = [30.0, 34.0, 38.0, 42.0, 46.0];
    let rep = polygon_escape_check(&end, 1e9, &cs, &LiftConfig::with_step(0.05)).unwrap();
    assert!(rep.first_escape.is_none());
    for w in rep.min_abs.windows(2) {
        assert!(w[1].1 > w[0].1, "{:?}", rep.min_abs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_twisted_ends_close_up(m in 0u32..3, c in -1.0f64..1.0, extra in 1.0f64..10.0) {
        prop_assume!(c.abs() > 0.05);
        let bound = (1.0 + 4.0 * PI * c.abs() / (PI / 10.0).cos()).powf(1.0 / (m + 1) as f64);
        let end = EndData::new(m, c, bound * 1.05).unwrap();
        let (m0, m1) = lift_threshold(&end);
        let big_c = m0.max(m1) + extra;
        let cfg = LiftConfig::with_step(0.05);
        let l = lift(&end, big_c, &cfg).unwrap();
        prop_assert!(l.forward_residual().unwrap() < 1e-7 * (1.0 + big_c));
        let p = close_polygon(&l, &end, &cfg).unwrap();
        prop_assert_eq!(p.vertices.len(), 4 * (m as usize + 1) + 2);
        prop_assert_eq!(p.reflex_count(), 1);
        prop_assert_eq!(p.self_intersections(), 0);
        prop_assert!(p.min_abs() > end.r);
    }
}
