use std::f64::consts::PI;

use kdv_rough::spectral::{FLNormParams, SpectralCoeffs};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit_pm1() -> SpectralCoeffs {
    SpectralCoeffs::from_positive(vec![c(1.0, 0.0)])
}

fn params(alpha: f64, p: f64) -> FLNormParams {
    FLNormParams::new(alpha, p).unwrap()
}

#[test]
fn fl_norm_sup_of_single_mode() {
    assert_eq!(unit_pm1().fl_norm(params(0.0, f64::INFINITY)), 1.0);
}

#[test]
fn fl_norm_weighted_two_modes() {
    // <1> = sqrt 2, two modes: (2 * 2)^{1/2}
    assert!((unit_pm1().fl_norm(params(1.0, 2.0)) - 2.0).abs() < 1e-15);
}

#[test]
fn fl_norm_of_zero() {
    for p in [1.0, 2.0, 3.5, f64::INFINITY] {
        assert_eq!(SpectralCoeffs::zeros(5).fl_norm(params(-0.4, p)), 0.0);
    }
}

#[test]
fn airy_identity_at_zero() {
    let f = SpectralCoeffs::from_positive(vec![c(0.3, 1.0), c(-2.0, 0.1)]);
    assert_eq!(f.airy_evolve(0.0), f);
}

#[test]
fn airy_full_period() {
    let f = unit_pm1().airy_evolve(2.0 * PI);
    assert!((f.get(1) - c(1.0, 0.0)).norm() < 1e-15);
    assert!((f.get(-1) - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn project_keeps_low_modes() {
    let f = SpectralCoeffs::from_positive(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let g = f.project(2);
    assert_eq!(g.get(1), c(1.0, 0.0));
    assert_eq!(g.get(-1), c(1.0, 0.0));
    assert_eq!(g.get(3), c(0.0, 0.0));
    assert_eq!(f.project(7), f);
}

#[test]
fn nonlinearity_single_pair() {
    let out = unit_pm1().nonlinearity();
    assert_eq!(out.max_mode(), 2);
    assert!((out.get(2) - c(0.0, 1.0)).norm() < 1e-15);
    assert_eq!(out.get(0), c(0.0, 0.0));
    // mode 1 gets (i/2)(f(0) f(1) + f(1) f(0) + f(2) f(-1)) = 0
    assert_eq!(out.get(1), c(0.0, 0.0));
}

#[test]
fn nonlinearity_of_zero() {
    assert!(SpectralCoeffs::zeros(6).nonlinearity().is_zero());
}

#[test]
fn nonlinearity_matches_real_space_square() {
    // d/dx (u^2 / 2) of u = 2 cos x + 2 sin 2x evaluated by hand in Fourier
    let u = SpectralCoeffs::from_positive(vec![c(1.0, 0.0), c(0.0, -1.0)]);
    let n = u.nonlinearity();
    // u^2 / 2 has mode 3 coefficient f(1) f(2) = -i; derivative multiplies by 3i
    assert!((n.get(3) - c(3.0, 0.0)).norm() < 1e-14);
    // mode 4: (f(2)^2)/2 = -1/2, times 4i
    assert!((n.get(4) - c(0.0, -2.0)).norm() < 1e-14);
}

#[test]
fn l2_norm_is_parseval() {
    let f = SpectralCoeffs::from_positive(vec![c(1.0, 0.0), c(0.0, 2.0)]);
    // u = 2 cos x - 4 sin 2x, int u^2 = 2 pi (2 + 8)
    assert!((f.l2_norm_sq() - 2.0 * PI * 10.0).abs() < 1e-12);
}

fn state(max: usize) -> impl Strategy<Value = SpectralCoeffs> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..=max)
        .prop_map(|v| SpectralCoeffs::from_positive(v.into_iter().map(|(a, b)| c(a, b)).collect()))
}

proptest! {
    #[test]
    fn hermitian_everywhere(f in state(12), t in -3.0f64..3.0, n in 0usize..14) {
        for g in [f.airy_evolve(t), f.project(n), f.nonlinearity()] {
            let m = g.max_mode() as i64;
            for k in -m..=m {
                prop_assert_eq!(g.get(-k), g.get(k).conj());
            }
            prop_assert_eq!(g.get(0), c(0.0, 0.0));
        }
    }

    #[test]
    fn airy_group_law(f in state(16), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let a = f.airy_evolve(s).airy_evolve(t);
        let b = f.airy_evolve(s + t);
        prop_assert!(a.sup_distance(&b) < 1e-10 * f.sup_norm().max(1.0));
    }

    #[test]
    fn airy_is_isometric(f in state(16), t in -2.0f64..2.0, alpha in -1.0f64..1.0, p in 1.0f64..6.0) {
        let prm = params(alpha, p);
        let before = f.fl_norm(prm);
        prop_assert!((f.airy_evolve(t).fl_norm(prm) - before).abs() <= 1e-12 * before.max(1.0));
        let sup = params(alpha, f64::INFINITY);
        prop_assert!((f.airy_evolve(t).fl_norm(sup) - f.fl_norm(sup)).abs() <= 1e-12 * f.fl_norm(sup).max(1.0));
    }

    #[test]
    fn projection_composes(f in state(12), n in 0usize..14, m in 0usize..14) {
        prop_assert_eq!(f.project(n).project(m), f.project(n.min(m)));
    }

    #[test]
    fn norm_homogeneous_and_subadditive(f in state(10), g in state(10), lam in -4.0f64..4.0, alpha in -1.0f64..1.0, p in 1.0f64..5.0) {
        let prm = params(alpha, p);
        prop_assert!(((&f * lam).fl_norm(prm) - lam.abs() * f.fl_norm(prm)).abs() <= 1e-12 * f.fl_norm(prm).max(1.0));
        prop_assert!((&f + &g).fl_norm(prm) <= f.fl_norm(prm) + g.fl_norm(prm) + 1e-12);
    }
}
