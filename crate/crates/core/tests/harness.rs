use kdv_rough::harness::config::{ExperimentConfig, InitialData};
use kdv_rough::harness::criteria::{regions, REGION_TABLE};
use kdv_rough::harness::experiments::{
    covariance_check, euler_sweep, max_over_trials, run_conservation_study, run_identity_suite, run_noise_study,
    run_solve, sewing_bound_ratio, trial_rng,
};
use kdv_rough::harness::fit::fit_power_law;
use kdv_rough::solver::Scheme;
use kdv_rough::stochastic::NoiseSpec;
use kdv_rough::FLNormParams;
use rand::Rng;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::parse(
        "max_mode = 8\nhorizon = 1/16\nn_values = 64, 128, 256\nmode_values = 4, 8\n\
         dt_values = 1/256, 1/512, 1/1024\nseeds = 0..200\ntrials = 4\nquadrature_trials = 1\n",
    )
    .unwrap();
    cfg.initial = InitialData::PowerLaw { modes: 4, decay: 1.0 };
    cfg
}

#[test]
fn fit_recovers_exact_power_law() {
    let x = [1.0, 2.0, 4.0, 8.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
    let fit = fit_power_law(&x, &y);
    assert!((fit.slope + 1.5).abs() < 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
}

#[test]
fn trial_streams_are_independent_and_reproducible() {
    let a: u64 = trial_rng(1, 0).random();
    let b: u64 = trial_rng(1, 1).random();
    assert_ne!(a, b);
    assert_eq!(a, trial_rng(1, 0).random::<u64>());
    let m = max_over_trials(5, 2, |g| vec![g.random::<f64>(), -1.0]);
    assert_eq!(m.len(), 2);
    assert_eq!(m[1], -1.0);
}

#[test]
fn identity_suite_passes_on_few_trials() {
    let rep = run_identity_suite(&small(), 11);
    assert!(rep.passed(), "{}", rep.to_csv());
    assert!(rep.rows.iter().any(|r| r.quantity == "x3b_uncorrected" && r.pass.is_none()));
}

#[test]
fn conservation_study_on_small_settings() {
    let rep = run_conservation_study(&small());
    assert!(rep.passed(), "{}", rep.to_csv());
    let zero = rep.rows.iter().find(|r| r.quantity == "zero_data_drift").unwrap();
    assert_eq!(zero.value, 0.0);
}

#[test]
fn euler_sweep_errors_shrink() {
    let cfg = small();
    let v0 = cfg.initial.build().unwrap();
    let sweep = euler_sweep(&v0, &cfg.solver, &cfg.n_values, 2048).unwrap();
    assert!(sweep.errors.windows(2).all(|w| w[1] < w[0]), "{:?}", sweep.errors);
    assert!(sweep.error_fit.slope > 0.1);
}

#[test]
fn noise_study_on_small_settings() {
    let rep = run_noise_study(&small());
    assert!(rep.passed(), "{}", rep.to_csv());
}

#[test]
fn covariance_of_zero_noise_is_zero() {
    let spec = NoiseSpec::new(vec![0.0; 3], FLNormParams::l2()).unwrap();
    let cov = covariance_check(&spec, 1.0, 4, &[0, 1, 2]);
    assert!(cov.iter().all(|&(m, se, e)| m == 0.0 && se == 0.0 && e == 0.0));
}

#[test]
fn sewing_ratio_below_two() {
    for mu in [1.2, 2.0] {
        let r = sewing_bound_ratio(mu, 3, 5, 9);
        assert!(r > 0.0 && r <= 2.0, "{mu}: {r}");
    }
}

#[test]
fn region_table_is_consistent() {
    assert_eq!(REGION_TABLE.len(), 12);
    // D' is a subset of D
    assert!(REGION_TABLE.iter().all(|&(_, d, dp)| d || !dp));
    assert!(regions().passed());
}

#[test]
fn solve_reports_each_scheme() {
    for scheme in [Scheme::Euler, Scheme::GalerkinModified, Scheme::GalerkinNaive, Scheme::StochasticEuler, Scheme::Picard] {
        let mut cfg = small();
        cfg.solver.scheme = scheme;
        cfg.solver.dt = 1.0 / 1024.0;
        let (rep, traj) = run_solve(&cfg, 4);
        assert!(rep.passed(), "{scheme:?}");
        assert!(traj.unwrap().states.len() > 1);
    }
}

#[test]
fn unreadable_initial_data_fails_the_report() {
    let mut cfg = small();
    cfg.initial = InitialData::File("/nonexistent/initial.csv".into());
    let (rep, traj) = run_solve(&cfg, 0);
    assert!(traj.is_none());
    assert!(!rep.passed());
}
