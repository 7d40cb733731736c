mod common;

use common::CATENOID_HEIGHT_ORACLE as ORACLE;
use mincurv::catenoid::*;
use mincurv::metric::WarpedPolarMetric;
use mincurv::Error;
use proptest::prelude::*;

fn scan(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn height_matches_high_precision_oracle() {
    for (a, k, s, expect) in ORACLE {
        let p = CatenoidProfile::new(a, k).unwrap();
        let q = p.height_with_error(s).unwrap();
        assert!((q.value - expect).abs() < 1e-10, "A={a} k={k} s={s}: {}", q.value);
        assert!(q.abs_error < 1e-10);
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let p = CatenoidProfile::new(1.0, 1.0).unwrap();
    let err = |h: f64| {
        scan(p.r_neck + 0.1, 5.0, 40)
            .into_iter()
            .map(|s| {
                let fd = (p.height(s + h).unwrap() - p.height(s - h).unwrap()) / (2.0 * h);
                (fd - p.h_prime(s).unwrap()).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(1e-2), err(5e-3));
    assert!(e1 < 2e-2, "{e1:e}");
    // Second order: halving h divides the error by about four.
    assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "{e1:e} {e2:e}");
}

#[test]
fn closed_form_pair_solves_the_profile_ode() {
    for (a, k) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.7)] {
        let p = CatenoidProfile::new(a, k).unwrap();
        for s in scan(p.r_neck + 0.05, 5.0, 1000) {
            assert!(p.ode_residual(s).unwrap().abs() < 1e-8, "A={a} k={k} s={s}");
            let g = WarpedPolarMetric::SinhSquared { k };
            assert!(catenoid_mean_curvature(&g, &p, s).unwrap().h2.abs() < 1e-6);
        }
    }
}

#[test]
fn slope_blows_up_at_the_neck() {
    let p = CatenoidProfile::new(1.0, 1.0).unwrap();
    assert!(p.h_prime(p.r_neck + 1e-6).unwrap() > 1e2);
    assert!(p.h_prime(p.r_neck).unwrap().is_infinite());
    assert!(matches!(p.h_prime(p.r_neck - 1e-3), Err(Error::Domain(_))));
}

#[test]
fn stronger_curvature_catenoid_over_weaker_warp_is_positive() {
    let (k1, k2, a) = (1.5, 1.0, 0.5);
    let g = WarpedPolarMetric::SinhSquared { k: k1 };
    let p = CatenoidProfile::new(a, k2).unwrap();
    for s in scan(p.r_neck + 0.01, 6.0, 200) {
        assert_eq!(catenoid_mean_curvature(&g, &p, s).unwrap().sign, 1);
    }
}

fn pinched_models() -> Vec<WarpedPolarMetric> {
    vec![
        WarpedPolarMetric::SinhSquared { k: 1.0 },
        WarpedPolarMetric::PerturbedSinhSquared { k: 1.0, eps: 0.01, freq: 1.0 },
    ]
}

#[test]
fn comparison_signs_under_pinching() {
    let (k1, k2, a) = (1.5, 0.5, 0.1);
    let neck = CatenoidProfile::new(a, k2).unwrap().r_neck;
    let samples = scan(neck + 0.05, 5.0, 1000);
    for g in pinched_models() {
        let rep = comparison_signs(&g, k1, k2, a, &samples).unwrap();
        assert_eq!(rep.status, ComparisonStatus::Pass, "{g:?}");
        assert!(rep.samples.iter().all(|c| c.sign_k1 == -1 && c.sign_k2 == 1));
    }
}

#[test]
fn ratio_inequality_under_pinching() {
    let (k1, k2) = (1.5, 0.5);
    for g in pinched_models() {
        let rep = ratio_inequality(&g, k1, k2, &scan(0.05, 5.0, 1000)).unwrap();
        assert!(rep.pass && rep.upper_margin > 0.0 && rep.lower_margin > 0.0, "{g:?}");
        // Margins shrink toward the axis but stay positive.
        let near = ratio_inequality(&g, k1, k2, &scan(0.05, 0.06, 20)).unwrap();
        let far = ratio_inequality(&g, k1, k2, &scan(2.0, 2.1, 20)).unwrap();
        assert!(near.upper_margin > 0.0 && near.upper_margin < far.upper_margin);
    }
    assert!(matches!(
        ratio_inequality(&WarpedPolarMetric::SinhSquared { k: 1.0 }, 1.5, 0.5, &[0.01]),
        Err(Error::Domain(_))
    ));
}

#[test]
fn ratio_inequality_implies_signs() {
    let (k1, k2, a) = (1.2, 0.8, 0.3);
    let g = WarpedPolarMetric::PerturbedSinhSquared { k: 1.0, eps: 0.01, freq: 1.0 };
    let neck = CatenoidProfile::new(a, k2).unwrap().r_neck;
    let samples = scan(neck + 0.01, 8.0, 500);
    let ratio = ratio_inequality(&g, k1, k2, &samples).unwrap();
    let signs = comparison_signs(&g, k1, k2, a, &samples).unwrap();
    for (r, c) in ratio.samples.iter().zip(&signs.samples) {
        if r.holds() {
            assert!(c.sign_k1 == -1 && c.sign_k2 == 1, "s = {}", r.s);
        }
    }
}

#[test]
fn perturbation_beyond_pinching_is_rejected() {
    let g = WarpedPolarMetric::PerturbedSinhSquared { k: 1.0, eps: 0.5, freq: 3.0 };
    let samples = scan(0.5, 5.0, 100);
    assert!(matches!(comparison_signs(&g, 1.2, 0.8, 0.1, &samples), Err(Error::PreconditionFail(_))));
}

#[test]
fn fermi_derivative_matches_finite_differences() {
    let b = FermiBarrier::new(0.8, 1.0).unwrap();
    let err = |h: f64| {
        scan(0.3, 6.0, 50)
            .into_iter()
            .map(|s| {
                let fd = (b.value(s + h).unwrap() - b.value(s - h).unwrap()) / (2.0 * h);
                (fd - b.derivative(s).unwrap()).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(1e-3), err(5e-4));
    assert!(e1 < 1e-4 && e1 / e2 > 3.5, "{e1:e} {e2:e}");
}

proptest! {
    #[test]
    fn height_is_monotone(a in 0.1f64..3.0, k in 0.2f64..3.0, d1 in 0.0f64..2.0, d2 in 0.0f64..2.0) {
        let p = CatenoidProfile::new(a, k).unwrap();
        let (lo, hi) = (p.r_neck + d1.min(d2), p.r_neck + d1.max(d2) + 1e-3);
        prop_assert!(p.height(hi).unwrap() > p.height(lo).unwrap());
        prop_assert!(p.h_prime(hi).unwrap() > 0.0);
    }

    #[test]
    fn fermi_barrier_is_negative_increasing_concave(k in 0.1f64..3.0, s in 0.01f64..15.0, ds in 1e-3f64..0.5) {
        let f = |x: f64| fermi_barrier(k, x).unwrap();
        prop_assert!(f(s) < 0.0);
        prop_assert!(f(s + ds) > f(s));
        prop_assert!(f(s + 2.0 * ds) - 2.0 * f(s + ds) + f(s) <= 1e-15);
    }

    #[test]
    fn model_warps_satisfy_both_comparisons(k0 in 0.6f64..1.4, a in 0.05f64..1.0) {
        let (k1, k2) = (1.5, 0.5);
        let g = WarpedPolarMetric::SinhSquared { k: k0 };
        let neck = CatenoidProfile::new(a, k2).unwrap().r_neck;
        let samples = scan(neck + 0.05, 5.0, 64);
        prop_assert_eq!(comparison_signs(&g, k1, k2, a, &samples).unwrap().status, ComparisonStatus::Pass);
        prop_assert!(ratio_inequality(&g, k1, k2, &samples).unwrap().pass);
    }
}
