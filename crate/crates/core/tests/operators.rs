use std::f64::consts::PI;

use kdv_rough::harness::identities::{
    area_residual, chen_residual, gamma_identity_residual, random_state, symmetry_residuals, x2_quadrature_residual,
    x3_residuals,
};
use kdv_rough::operators::{
    empirical_operator_norm, gamma_correction, holder_growth_probe, m_integral, multiplier_norm_bound, x2_op, x3_ops,
    x_op, x_weighted_multiplier, BoundVariant, OperatorError, ProbeOperator, StepPlan,
};
use kdv_rough::quadrature::integrate;
use kdv_rough::{OperatorSpec, RegularityPair, SpectralCoeffs, Truncation};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn region(g: f64, a: f64, p: f64) -> RegularityPair {
    RegularityPair::new(g, a, p).unwrap()
}

#[test]
fn region_worked_examples() {
    let r = region(0.35, -0.40, 2.0);
    assert!(r.in_region_d());
    assert_eq!(r.alpha_star(), -0.5);
    assert!(r.in_region_dprime());

    assert!(!region(0.5, -1.0, 2.0).in_region_d());

    let r = region(0.0, -1.0, 1.0);
    assert!(r.in_region_d());
    assert!(!r.in_region_dprime());
}

#[test]
fn region_boundaries() {
    // upper branch is strict, lower branch is not
    assert!(!region(0.35, -0.45 - 1e-9, 2.0).in_region_d());
    assert!(region(0.35, -0.45 + 1e-9, 2.0).in_region_d());
    assert!(region(0.2, -0.8, 2.0).in_region_d());
    assert!(!region(0.2, -0.8 - 1e-9, 2.0).in_region_d());
    assert!(region(0.3, 0.1, f64::INFINITY).in_region_dprime());
    assert!(!region(0.3, 0.0, f64::INFINITY).in_region_dprime());
    assert!(RegularityPair::new(0.6, 0.0, 2.0).is_err());
    assert!(RegularityPair::new(0.3, 0.0, 0.5).is_err());
}

#[test]
fn m_integral_vanishes_on_diagonal() {
    assert_eq!(m_integral(2.0, 3.0, 0.7, 0.7).unwrap(), c(0.0, 0.0));
    assert_eq!(m_integral(2.0, -2.0, 0.7, 0.7).unwrap(), c(0.0, 0.0));
}

#[test]
fn m_integral_resonant_example() {
    let m = m_integral(1.0, -1.0, 0.0, PI).unwrap();
    assert!((m - c(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn m_integral_rejects_zero_frequency() {
    assert_eq!(m_integral(1.0, 0.0, 0.0, 1.0), Err(OperatorError::ZeroFrequency { a: 1.0, b: 0.0 }));
}

fn m_by_quadrature(a: f64, b: f64, s: f64, t: f64) -> Complex64 {
    let panels = |w: f64, span: f64| ((w.abs() * span / PI).ceil() as usize).max(2);
    integrate(s, t, panels(a.abs() + b.abs(), t - s), 16, |sigma| {
        let inner = integrate(s, sigma, panels(b, sigma - s), 16, |r| Complex64::cis(b * r));
        Complex64::cis(a * sigma) * inner
    })
}

#[test]
fn m_integral_matches_double_quadrature() {
    use rand::Rng;
    let mut g = rng(11);
    for _ in 0..40 {
        let a = g.random_range(-60.0..60.0f64).round();
        let b = g.random_range(-60.0..60.0f64).round();
        if a == 0.0 || b == 0.0 || a + b == 0.0 {
            continue;
        }
        let s = g.random_range(0.0..1.0);
        let t = s + g.random_range(0.0..1.0);
        let exact = m_integral(a, b, s, t).unwrap();
        let oracle = m_by_quadrature(a, b, s, t);
        assert!((exact - oracle).norm() < 1e-10, "a={a} b={b} s={s} t={t}: {exact} vs {oracle}");
    }
    // small-argument series branch
    for (a, b, h) in [(3.0, 5.0, 1e-3), (-7.0, 2.0, 1e-4), (1.0, 1.0, 0.04)] {
        let exact = m_integral(a, b, 0.3, 0.3 + h).unwrap();
        let oracle = m_by_quadrature(a, b, 0.3, 0.3 + h);
        assert!((exact - oracle).norm() < 1e-10 * h * h + 1e-18);
    }
}

#[test]
fn m_integral_resonant_branch_subtracts_linear_part() {
    let (a, s, t) = (4.0, 0.2, 1.1);
    let oracle = m_by_quadrature(a, -a, s, t) - (t - s) / c(0.0, -a);
    assert!((m_integral(a, -a, s, t).unwrap() - oracle).norm() < 1e-12);
}

fn unit_pair() -> SpectralCoeffs {
    SpectralCoeffs::from_positive(vec![c(1.0, 0.0)])
}

#[test]
fn x_op_single_pair_by_hand() {
    let phi = unit_pair();
    let (s, t) = (0.1, 0.35);
    let x = x_op(&phi, &phi, OperatorSpec::new(s, t));
    let expected = (Complex64::cis(-6.0 * s) - Complex64::cis(-6.0 * t)) / 6.0;
    assert!((x.get(2) - expected).norm() < 1e-15);
    assert_eq!(x.get(1), c(0.0, 0.0));
    assert_eq!(x.get(0), c(0.0, 0.0));
}

#[test]
fn x_op_vanishes_on_diagonal() {
    let mut g = rng(1);
    let (f1, f2) = (random_state(&mut g, 10), random_state(&mut g, 10));
    assert!(x_op(&f1, &f2, OperatorSpec::new(0.4, 0.4)).is_zero());
}

#[test]
fn chen_relation_holds() {
    let mut g = rng(2);
    for _ in 0..20 {
        let r = chen_residual(&mut g, 16);
        assert!(r < 1e-13, "chen residual {r}");
    }
}

#[test]
fn symmetric_breve_value() {
    let mut g = rng(3);
    let phi = random_state(&mut g, 6);
    let (s, t) = (0.2, 0.9);
    let breve = x2_op(&phi, &phi, &phi, OperatorSpec::new(s, t)).breve;
    for k in 1..=6i64 {
        let expected = phi.get(k) * phi.get(-k) * phi.get(k) * (t - s) / c(0.0, 3.0 * k as f64);
        assert!((breve.get(k) - expected).norm() < 1e-14, "k={k}");
    }
}

#[test]
fn breve_is_additive_in_time() {
    let mut g = rng(4);
    let (f1, f2, f3) = (random_state(&mut g, 6), random_state(&mut g, 6), random_state(&mut g, 6));
    let b = |s, t| x2_op(&f1, &f2, &f3, OperatorSpec::new(s, t)).breve;
    let d = &(&b(0.1, 0.8) - &b(0.5, 0.8)) - &b(0.1, 0.5);
    assert!(d.sup_norm() < 1e-15);
}

#[test]
fn area_relation_holds() {
    let mut g = rng(5);
    for _ in 0..5 {
        let r = area_residual(&mut g, 6);
        assert!(r < 1e-11, "area residual {r}");
    }
}

#[test]
fn x2_matches_nested_quadrature() {
    let mut g = rng(6);
    for _ in 0..2 {
        let r = x2_quadrature_residual(&mut g, 4, 0.05);
        assert!(r < 1e-8, "quadrature residual {r}");
    }
}

#[test]
fn pairing_identities_hold() {
    let mut g = rng(7);
    for _ in 0..10 {
        let (first, second) = symmetry_residuals(&mut g, 12);
        assert!(first < 1e-10 && second < 1e-10, "{first} {second}");
    }
}

#[test]
fn operator_outputs_are_mean_zero_and_hermitian() {
    let mut g = rng(8);
    let f = random_state(&mut g, 5);
    let x = x_op(&f, &f, OperatorSpec::new(0.0, 0.3));
    let x2 = x2_op(&f, &f, &f, OperatorSpec::new(0.0, 0.3)).total();
    for out in [&x, &x2] {
        assert_eq!(out.get(0), c(0.0, 0.0));
        for k in 1..=out.max_mode() as i64 {
            assert_eq!(out.get(-k), out.get(k).conj());
        }
    }
}

#[test]
fn gamma_vanishes_inside_the_cutoff() {
    let mut g = rng(9);
    let f = random_state(&mut g, 2);
    // inputs on modes <= 2 with N = 4: every interaction stays below N
    assert!(gamma_correction(&f, &f, &f, 4).is_zero());
}

#[test]
fn gamma_single_surviving_term() {
    let phi1 = SpectralCoeffs::from_positive(vec![c(0.7, -0.2)]);
    let phi2 = SpectralCoeffs::from_positive(vec![c(0.3, 0.4), c(-1.1, 0.5)]);
    let phi3 = SpectralCoeffs::from_positive(vec![c(0.9, 0.1), c(0.2, -0.6)]);
    let gam = gamma_correction(&phi1, &phi2, &phi3, 2);
    let coefficient = c(0.0, 1.0 / -6.0);
    let expected = coefficient * phi1.get(-1) * (phi2.get(1) * phi3.get(2) + phi3.get(1) * phi2.get(2));
    assert!((gam.get(2) - expected).norm() < 1e-15);
}

#[test]
fn gamma_identity_by_quadrature() {
    let mut g = rng(10);
    for _ in 0..3 {
        let r = gamma_identity_residual(&mut g, 4, 0.3);
        assert!(r < 1e-8, "gamma identity residual {r}");
    }
}

#[test]
fn x3_vanishes_on_diagonal() {
    let mut g = rng(12);
    let f: Vec<_> = (0..4).map(|_| random_state(&mut g, 3)).collect();
    let (a, b) = x3_ops(&f[0], &f[1], &f[2], &f[3], 0.5, 0.5);
    assert!(a.is_zero() && b.is_zero());
}

#[test]
fn x3_coboundary_relations() {
    let mut g = rng(13);
    let (ra, rb, _) = x3_residuals(&mut g, 2, 0.2);
    assert!(ra < 1e-6 && rb < 1e-6, "{ra} {rb}");
}

#[test]
fn multiplier_bound_of_zero() {
    let zero = |_: &[i64]| 0.0;
    assert_eq!(multiplier_norm_bound(&zero, 2, 2.0, 5, BoundVariant::SupDual).unwrap(), 0.0);
    assert_eq!(multiplier_norm_bound(&zero, 2, 3.0, 5, BoundVariant::Mixed).unwrap(), 0.0);
}

#[test]
fn multiplier_bound_of_indicator_counts_pairs() {
    let one = |_: &[i64]| 1.0;
    for k in [1usize, 3, 6] {
        let b = multiplier_norm_bound(&one, 2, 2.0, k, BoundVariant::SupDual).unwrap();
        assert!((b - ((2 * k + 1) as f64).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn mixed_bound_rejects_small_exponent() {
    let one = |_: &[i64]| 1.0;
    assert!(matches!(
        multiplier_norm_bound(&one, 2, 1.5, 3, BoundVariant::Mixed),
        Err(OperatorError::IncompatibleExponent { .. })
    ));
    assert!(multiplier_norm_bound(&one, 1, 3.0, 3, BoundVariant::Mixed).is_err());
}

#[test]
fn empirical_norm_below_multiplier_bound() {
    let n = 8;
    let (s, t) = (0.0, 0.05);
    for (gamma, alpha, p) in [(0.35, -0.4, 2.0), (0.2, 0.0, 2.0), (0.3, -0.2, 3.0), (0.1, -0.5, 1.5)] {
        let r = region(gamma, alpha, p);
        assert!(r.in_region_d());
        let m = |tuple: &[i64]| x_weighted_multiplier(tuple, alpha, s, t);
        let bound = multiplier_norm_bound(&m, 2, p, n, BoundVariant::SupDual).unwrap();
        let op = |f: &[SpectralCoeffs]| x_op(&f[0], &f[1], OperatorSpec::new(s, t));
        let observed = empirical_operator_norm(&op, 2, n, r.norm_params(), 100, 1);
        assert!(observed > 0.0 && observed <= bound * (1.0 + 1e-12), "{observed} > {bound}");
    }
}

#[test]
fn growth_probes() {
    let r = region(0.35, -0.4, 2.0);
    let x = holder_growth_probe(ProbeOperator::X, r, 64, 1..=10, 200, 3);
    assert!(x.fit.slope >= 0.30, "X slope {}", x.fit.slope);
    assert!(x.norms.windows(2).all(|w| w[1] < w[0]));
    let x2 = holder_growth_probe(ProbeOperator::X2Hat, r, 64, 2..=10, 20, 3);
    assert!(x2.fit.slope >= 0.60, "X2 slope {}", x2.fit.slope);
    // sampled maxima fluctuate at coarse spans; the fine tail decays monotonically
    assert!(x2.norms[4..].windows(2).all(|w| w[1] < w[0]), "{:?}", x2.norms);
}

#[test]
fn truncated_operator_converges() {
    let f = SpectralCoeffs::from_fn(64, |k| c(1.0 / k as f64, 0.5 / k as f64));
    let spec = OperatorSpec::new(0.0, 0.1);
    let params = RegularityPair::new(0.3, 0.0, 2.0).unwrap().norm_params();
    let gaps: Vec<f64> = [4usize, 8, 16, 32]
        .iter()
        .map(|&m| (&x_op(&f, &f, spec.galerkin(2 * m)) - &x_op(&f, &f, spec.galerkin(m))).fl_norm(params))
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn step_plan_matches_direct_operators() {
    let mut g = rng(14);
    let v = random_state(&mut g, 7);
    let h = 0.013;
    for trunc in [Truncation::Galerkin(7), Truncation::Modified(7)] {
        let plan = StepPlan::new(h, trunc);
        let (x, x2) = plan.apply(&v);
        let spec = OperatorSpec::new(0.0, h).with_truncation(trunc);
        assert!(x.sup_distance(&x_op(&v, &v, spec)) < 1e-14);
        assert!(x2.sup_distance(&x2_op(&v, &v, &v, spec).total()) < 1e-13);

        let s = 0.37;
        let spec = OperatorSpec::new(s, s + h).with_truncation(trunc);
        let direct = &x_op(&v, &v, spec) + &x2_op(&v, &v, &v, spec).total();
        assert!(plan.germ_at(&v, s).sup_distance(&direct) < 1e-12);
    }
}

#[test]
#[should_panic]
fn operator_spec_rejects_reversed_times() {
    let _ = OperatorSpec::new(1.0, 0.5);
}
