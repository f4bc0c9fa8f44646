use kdv_rough::harness::fit::fit_decay_order;
use kdv_rough::harness::identities::random_state;
use kdv_rough::operators::{gamma_correction_diag, x2_op, x_op};
use kdv_rough::solver::{
    compute_hamiltonian, euler_solve, galerkin_modified_solve, galerkin_naive_solve, global_solve_l2,
    hamiltonian_value, picard_iterate, EulerStepper, Frame, Scheme, SolverConfig, SolverError,
};
use kdv_rough::{OperatorSpec, RegularityPair, SpectralCoeffs};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn config(scheme: Scheme, max_mode: usize, steps_per_unit: usize, horizon: f64, dt: f64) -> SolverConfig {
    SolverConfig {
        regularity: RegularityPair::new(0.4, 0.0, 2.0).unwrap(),
        max_mode,
        steps_per_unit,
        horizon,
        dt,
        scheme,
    }
}

fn desk_instance() -> SpectralCoeffs {
    SpectralCoeffs::from_fn(8, |k| c(1.0 / k as f64, 0.0))
}

#[test]
fn euler_keeps_zero_data_at_zero() {
    let cfg = config(Scheme::Euler, 8, 32, 0.5, 0.01);
    let traj = euler_solve(&SpectralCoeffs::zeros(8), &cfg).unwrap();
    assert_eq!(traj.states.len(), 17);
    assert!(traj.states.iter().all(SpectralCoeffs::is_zero));
}

#[test]
fn euler_single_step_by_hand() {
    let v0 = SpectralCoeffs::from_positive(vec![c(1.0, 0.0)]);
    let n = 16;
    let h = 1.0 / n as f64;
    let cfg = config(Scheme::Euler, 4, n, h, 0.01);
    let traj = euler_solve(&v0, &cfg).unwrap();
    let v1 = &traj.states[1];
    // the quadratic term is the only source of mode 2; the cubic one feeds odd modes
    let mode2 = (c(1.0, 0.0) - Complex64::cis(-6.0 * h)) / 6.0;
    assert!((v1.get(2) - mode2).norm() < 1e-15);
    assert_eq!(v1.get(4), c(0.0, 0.0));
    let spec = OperatorSpec::new(0.0, h).modified(4);
    let direct = &(&v0 + &x_op(&v0, &v0, spec)) + &x2_op(&v0, &v0, &v0, spec).total();
    assert!(v1.sup_distance(&direct) < 1e-15);
}

#[test]
fn euler_step_is_cubic_polynomial_in_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v = random_state(&mut rng, 6);
    let stepper = EulerStepper::new(6, 0.02);
    let s = 0.3;
    let spec = OperatorSpec::new(s, s + 0.02).modified(6);
    let x = x_op(&v, &v, spec);
    let x2 = x2_op(&v, &v, &v, spec).total();
    for scale in [0.5, -1.5, 2.0] {
        let lhs = stepper.step(&v.scale(scale), s);
        let rhs = &(&v.scale(scale) + &x.scale(scale * scale)) + &x2.scale(scale * scale * scale);
        assert!(lhs.sup_distance(&rhs) < 1e-13 * rhs.sup_norm(), "scale {scale}");
    }
}

#[test]
fn frame_roundtrip_is_identity() {
    let cfg = config(Scheme::Euler, 8, 64, 0.25, 0.01);
    let traj = euler_solve(&desk_instance(), &cfg).unwrap();
    assert_eq!(traj.frame, Frame::Twisted);
    let physical = traj.to_physical();
    assert_eq!(physical.frame, Frame::Physical);
    assert!(physical.to_twisted().sup_distance(&traj) < 1e-15);
    assert!(traj.to_csv().starts_with("t,k,re,im\n"));
}

#[test]
fn euler_self_convergence_small() {
    let v0 = desk_instance();
    let ns = [32usize, 64, 128, 256];
    let fine = euler_solve(&v0, &config(Scheme::Euler, 8, 1024, 0.125, 0.01)).unwrap();
    let errors: Vec<f64> = ns
        .iter()
        .map(|&n| euler_solve(&v0, &config(Scheme::Euler, 8, n, 0.125, 0.01)).unwrap().sup_distance(&fine))
        .collect();
    let fit = fit_decay_order(&ns.map(|n| n as f64), &errors);
    assert!(fit.slope >= 0.1, "{errors:?} {fit:?}");
}

#[test]
fn rk4_converges_at_fourth_order() {
    let u0 = SpectralCoeffs::from_fn(4, |k| c(0.5 / k as f64, 0.2));
    let horizon = 0.05;
    let fine = galerkin_modified_solve(&u0, &config(Scheme::GalerkinModified, 4, 1, horizon, horizon / 512.0)).unwrap();
    let steps = [16usize, 32, 64, 128];
    let errors: Vec<f64> = steps
        .iter()
        .map(|&m| {
            let cfg = config(Scheme::GalerkinModified, 4, 1, horizon, horizon / m as f64);
            galerkin_modified_solve(&u0, &cfg).unwrap().final_state().sup_distance(fine.final_state())
        })
        .collect();
    let fit = fit_decay_order(&steps.map(|m| m as f64), &errors);
    assert!((fit.slope - 4.0).abs() <= 0.5, "{errors:?} {fit:?}");
}

#[test]
fn correction_vanishes_without_high_interactions() {
    let u0 = SpectralCoeffs::from_positive(vec![c(0.8, -0.3)]);
    let cfg = config(Scheme::GalerkinModified, 8, 1, 0.01, 0.01);
    let modified = galerkin_modified_solve(&u0, &cfg).unwrap();
    let naive = galerkin_naive_solve(&u0, &cfg).unwrap();
    assert!(modified.final_state().sup_distance(naive.final_state()) < 1e-15);
}

#[test]
fn naive_and_modified_differ_by_the_correction() {
    let n = 6;
    let u0 = SpectralCoeffs::from_fn(n, |k| c(1.0 / k as f64, 0.1 * k as f64));
    let gamma = gamma_correction_diag(&u0, n);
    let defect = |dt: f64| {
        let cfg = config(Scheme::GalerkinModified, n, 1, dt, dt);
        let m = galerkin_modified_solve(&u0, &cfg).unwrap();
        let v = galerkin_naive_solve(&u0, &cfg).unwrap();
        let diff = m.final_state() - v.final_state();
        (&diff - &gamma.scale(dt)).sup_norm()
    };
    let (coarse, fine) = (defect(1e-3), defect(5e-4));
    assert!(gamma.sup_norm() > 0.0);
    assert!(coarse < 1e-3 * 1e-3 * 1e2, "{coarse}");
    // second-order remainder: halving dt quarters it
    assert!((coarse / fine - 4.0).abs() < 0.5, "{coarse} {fine}");
}

#[test]
fn hamiltonian_examples() {
    assert_eq!(compute_hamiltonian(&SpectralCoeffs::zeros(4), 4).unwrap(), 0.0);
    let u = SpectralCoeffs::from_positive(vec![c(1.0, 0.0)]);
    for n in [2usize, 3, 8] {
        assert!((compute_hamiltonian(&u, n).unwrap() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn hamiltonian_is_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [4usize, 8, 16] {
        let u = random_state(&mut rng, n);
        let h = hamiltonian_value(&u, n).unwrap();
        assert!(h.im.abs() <= 1e-14 * h.norm().max(1.0), "{h}");
    }
}

#[test]
fn picard_of_zero_is_zero() {
    let cfg = config(Scheme::Picard, 4, 64, 0.125, 0.01);
    let out = picard_iterate(&SpectralCoeffs::zeros(4), &cfg, 5).unwrap();
    assert_eq!(out.distances, vec![0.0]);
    assert!(out.triple.y.iter().all(SpectralCoeffs::is_zero));
    assert_eq!(out.triple.y_sharp.sup_norm(), 0.0);
}

#[test]
fn picard_contracts_and_reaches_the_euler_path() {
    let v0 = desk_instance();
    let cfg = config(Scheme::Picard, 8, 128, 1.0 / 16.0, 0.01);
    let out = picard_iterate(&v0, &cfg, 10).unwrap();
    let d = &out.distances;
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    // the controlled relation holds on every grid pair
    let grid = out.triple.grid().clone();
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let spec = OperatorSpec::new(grid.t(i), grid.t(j)).modified(8);
            let x = x_op(&out.triple.y_prime[i], &out.triple.y_prime[i], spec);
            let lhs = &out.triple.y[j] - &out.triple.y[i];
            let rhs = &x + out.triple.y_sharp.get(i, j);
            assert!(lhs.sup_distance(&rhs) < 1e-12);
        }
    }
    let euler = euler_solve(&v0, &cfg_as(Scheme::Euler, &cfg)).unwrap();
    let gap = out.triple.y.iter().zip(&euler.states).map(|(a, b)| a.sup_distance(b)).fold(0.0, f64::max);
    assert!(gap < 1e-12, "{gap}");
}

fn cfg_as(scheme: Scheme, cfg: &SolverConfig) -> SolverConfig {
    SolverConfig { scheme, ..*cfg }
}

#[test]
fn picard_needs_dyadic_grid() {
    let cfg = config(Scheme::Picard, 4, 24, 0.5, 0.01);
    assert!(matches!(picard_iterate(&desk_instance(), &cfg, 2), Err(SolverError::InvalidConfig(_))));
}

#[test]
fn global_solve_zero_data() {
    let cfg = config(Scheme::Euler, 8, 32, 0.25, 0.01);
    let out = global_solve_l2(&SpectralCoeffs::zeros(8), &cfg, 1.0).unwrap();
    assert!(out.trajectory.states.iter().all(SpectralCoeffs::is_zero));
    assert_eq!(out.windows, vec![0.25; 4]);
}

#[test]
fn global_solve_windows_chain_consistently() {
    let v0 = desk_instance();
    let two = global_solve_l2(&v0, &config(Scheme::Euler, 8, 128, 0.0625, 0.01), 0.125).unwrap();
    let one = euler_solve(&v0, &config(Scheme::Euler, 8, 128, 0.125, 0.01)).unwrap();
    assert!(two.trajectory.final_state().sup_distance(one.final_state()) < 1e-12);
}

#[test]
fn global_solve_l2_drift_shrinks_with_n() {
    let v0 = desk_instance();
    let drift = |n: usize| {
        let out = global_solve_l2(&v0, &config(Scheme::Euler, 8, n, 0.0625, 0.01), 0.125).unwrap();
        let start = out.l2_norms[0];
        out.l2_norms.iter().map(|x| (x - start).abs()).fold(0.0, f64::max)
    };
    let (d1, d2, d3) = (drift(64), drift(128), drift(256));
    assert!(d2 < d1 && d3 < d2, "{d1} {d2} {d3}");
}

#[test]
fn global_solve_rejects_weighted_frames() {
    let mut cfg = config(Scheme::Euler, 8, 32, 0.25, 0.01);
    cfg.regularity = RegularityPair::new(0.4, 0.1, 2.0).unwrap();
    assert!(global_solve_l2(&desk_instance(), &cfg, 1.0).is_err());
}
