//! The studies behind the CLI subcommands and their reusable pieces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::fit::{fit_decay_order, FitResult};
use super::identities::{
    area_residual, chen_residual, gamma_identity_residual, symmetry_residuals, x2_quadrature_residual, x3_residuals,
};
use super::report::{ParamTuple, Report};
use crate::increments::{delta_path, grr_functional, holder_norm, holder_norm_delta2, sew, SewOptions, TimeGrid, TwoIndexField};
use crate::operators::{RegularityPair, Truncation};
use crate::solver::{
    compute_hamiltonian, euler_solve, galerkin_modified_solve, galerkin_naive_solve, picard_iterate, Scheme,
    SolverConfig, SolverError, Trajectory,
};
use crate::spectral::SpectralCoeffs;
use crate::stochastic::{sample_noise, stochastic_euler_solve, stochastic_euler_with_path, xw_op, NoisePath, NoiseSpec};

/// Sets the size of the global worker pool. Only the first call has an
/// effect.
pub fn configure_threads(threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
}

/// Independent generator for one trial of a seeded ensemble.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Componentwise maximum of `f` over `trials` independent draws.
pub fn max_over_trials<F>(trials: usize, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|i| f(&mut trial_rng(seed, i)))
        .reduce_with(|a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
        .unwrap_or_default()
}

/// Mode counts and time spans at which each identity is checked.
pub mod scales {
    pub const CHEN_MODES: usize = 32;
    pub const AREA_MODES: usize = 16;
    pub const SYMMETRY_MODES: usize = 32;
    pub const X2_QUADRATURE_MODES: usize = 8;
    pub const X2_QUADRATURE_SPAN: f64 = 0.02;
    pub const GAMMA_MODES: usize = 4;
    pub const GAMMA_SPAN: f64 = 0.5;
    pub const X3_MODES: usize = 4;
    pub const X3_SPAN: f64 = 1.0;
}

fn identity_params(cfg: &ExperimentConfig, modes: usize) -> ParamTuple {
    ParamTuple::from_solver(&cfg.solver).modes(modes)
}

/// Randomised residuals of every algebraic identity against the configured
/// tolerances.
pub fn run_identity_suite(cfg: &ExperimentConfig, seed: u64) -> Report {
    use scales::*;
    let tol = &cfg.tolerances;
    let mut rep = Report::default();
    let push = |rep: &mut Report, name: &str, modes: usize, value: f64| {
        let t = tol.get(name);
        rep.check("identities", name, identity_params(cfg, modes).seed(seed), value, format!("<= {t:e}"), value <= t);
    };

    let r = max_over_trials(cfg.trials, seed, |g| vec![chen_residual(g, CHEN_MODES)]);
    push(&mut rep, "chen", CHEN_MODES, r[0]);
    let r = max_over_trials(cfg.trials, seed, |g| vec![area_residual(g, AREA_MODES)]);
    push(&mut rep, "area", AREA_MODES, r[0]);
    let r = max_over_trials(cfg.trials, seed, |g| {
        let (a, b) = symmetry_residuals(g, SYMMETRY_MODES);
        vec![a, b]
    });
    push(&mut rep, "symmetry", SYMMETRY_MODES, r[0].max(r[1]));
    let r = max_over_trials(cfg.quadrature_trials, seed, |g| {
        vec![x2_quadrature_residual(g, X2_QUADRATURE_MODES, X2_QUADRATURE_SPAN)]
    });
    push(&mut rep, "x2_quadrature", X2_QUADRATURE_MODES, r[0]);
    let r = max_over_trials(cfg.quadrature_trials, seed, |g| vec![gamma_identity_residual(g, GAMMA_MODES, GAMMA_SPAN)]);
    push(&mut rep, "gamma_identity", GAMMA_MODES, r[0]);
    let r = max_over_trials(cfg.quadrature_trials, seed, |g| {
        let (a, b, printed) = x3_residuals(g, X3_MODES, X3_SPAN);
        vec![a, b, printed]
    });
    push(&mut rep, "x3", X3_MODES, r[0].max(r[1]));
    rep.measure("identities", "x3b_uncorrected", identity_params(cfg, X3_MODES).seed(seed), r[2]);
    rep
}

/// Euler solves over an `n` sweep against a finer reference.
#[derive(Debug, Clone)]
pub struct EulerSweep {
    pub n_values: Vec<usize>,
    pub reference_n: usize,
    /// Sup distance to the reference on shared grid points.
    pub errors: Vec<f64>,
    /// `max_t | |v_t|^2 - |v_0|^2 | / |v_0|^2` in `L^2`.
    pub l2_drift: Vec<f64>,
    pub error_fit: FitResult,
    pub drift_fit: FitResult,
}

fn relative_l2_drift(traj: &Trajectory) -> f64 {
    let start = traj.states[0].l2_norm_sq();
    let worst = traj.states.iter().map(|s| (s.l2_norm_sq() - start).abs()).fold(0.0, f64::max);
    if start == 0.0 {
        worst
    } else {
        worst / start
    }
}

pub fn euler_sweep(
    v0: &SpectralCoeffs,
    solver: &SolverConfig,
    n_values: &[usize],
    reference_n: usize,
) -> Result<EulerSweep, SolverError> {
    let run = |n: usize| euler_solve(v0, &SolverConfig { steps_per_unit: n, scheme: Scheme::Euler, ..*solver });
    let mut all: Vec<usize> = n_values.to_vec();
    all.push(reference_n);
    let trajs: Vec<Trajectory> = all.par_iter().map(|&n| run(n)).collect::<Result<_, _>>()?;
    let (reference, coarse) = trajs.split_last().expect("reference is present");
    let errors: Vec<f64> = coarse.iter().map(|t| t.sup_distance(reference)).collect();
    let l2_drift: Vec<f64> = coarse.iter().map(relative_l2_drift).collect();
    let ns: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
    Ok(EulerSweep {
        n_values: n_values.to_vec(),
        reference_n,
        error_fit: fit_decay_order(&ns, &errors),
        drift_fit: fit_decay_order(&ns, &l2_drift),
        errors,
        l2_drift,
    })
}

/// Sup distances between modified Galerkin solves at consecutive entries
/// of `modes` extended by twice its last entry.
pub fn galerkin_self_differences(v0: &SpectralCoeffs, solver: &SolverConfig, modes: &[usize]) -> Result<Vec<f64>, SolverError> {
    let mut all = modes.to_vec();
    all.push(2 * modes[modes.len() - 1]);
    let trajs: Vec<Trajectory> = all
        .par_iter()
        .map(|&n| galerkin_modified_solve(v0, &SolverConfig { max_mode: n, scheme: Scheme::GalerkinModified, ..*solver }))
        .collect::<Result<_, _>>()?;
    Ok(trajs.windows(2).map(|w| w[0].sup_distance(&w[1])).collect())
}

/// Sup distance between the modified Galerkin solve at `N` and the Euler
/// solve at `n`, for each pair.
pub fn galerkin_euler_gaps(v0: &SpectralCoeffs, solver: &SolverConfig, pairs: &[(usize, usize)]) -> Result<Vec<f64>, SolverError> {
    pairs
        .par_iter()
        .map(|&(modes, n)| {
            let gal = galerkin_modified_solve(v0, &SolverConfig { max_mode: modes, scheme: Scheme::GalerkinModified, ..*solver })?;
            let eul = euler_solve(v0, &SolverConfig { max_mode: modes, steps_per_unit: n, scheme: Scheme::Euler, ..*solver })?;
            Ok(gal.sup_distance(&eul))
        })
        .collect()
}

/// Largest Hamiltonian deviation along a modified Galerkin solve, measured
/// on the physical state.
pub fn hamiltonian_drift(v0: &SpectralCoeffs, solver: &SolverConfig) -> Result<f64, SolverError> {
    let traj = galerkin_modified_solve(v0, &SolverConfig { scheme: Scheme::GalerkinModified, ..*solver })?.to_physical();
    let n = solver.max_mode;
    let h0 = compute_hamiltonian(&traj.states[0], n)?;
    traj.states.iter().try_fold(0.0f64, |acc, s| Ok(acc.max((compute_hamiltonian(s, n)? - h0).abs())))
}

/// Hamiltonian drift for each RK4 step and its fitted order.
pub fn hamiltonian_sweep(
    v0: &SpectralCoeffs,
    solver: &SolverConfig,
    dt_values: &[f64],
) -> Result<(Vec<f64>, FitResult), SolverError> {
    let drifts: Vec<f64> = dt_values
        .par_iter()
        .map(|&dt| hamiltonian_drift(v0, &SolverConfig { dt, ..*solver }))
        .collect::<Result<_, _>>()?;
    let inv: Vec<f64> = dt_values.iter().map(|d| 1.0 / d).collect();
    let fit = fit_decay_order(&inv, &drifts);
    Ok((drifts, fit))
}

fn strictly_decreasing(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] < w[0])
}

fn order_target(r: RegularityPair, slack: f64) -> f64 {
    3.0 * r.gamma - 1.0 - slack
}

fn solver_error_row(rep: &mut Report, study: &str, params: ParamTuple, e: &SolverError) {
    rep.check(study, format!("error: {e}").replace(',', ";"), params, f64::NAN, "completes", false);
}

/// Euler self-convergence, Galerkin self-differences, and the gap
/// between the two.
pub fn run_convergence_study(cfg: &ExperimentConfig) -> Report {
    let mut rep = Report::default();
    let base = ParamTuple::from_solver(&cfg.solver);
    let v0 = match cfg.initial.build() {
        Ok(v) => v,
        Err(e) => {
            rep.check("converge", format!("initial data: {e}").replace(',', ";"), base, f64::NAN, "readable", false);
            return rep;
        }
    };
    let slack = cfg.tolerances.get("euler_order_slack");
    let target = order_target(cfg.solver.regularity, slack);
    let n_max = *cfg.n_values.iter().max().expect("non-empty");
    let modes = cfg.solver.max_mode;
    match euler_sweep(&v0, &cfg.solver, &cfg.n_values, cfg.reference_factor * n_max) {
        Ok(sweep) => {
            for (n, e) in sweep.n_values.iter().zip(&sweep.errors) {
                rep.measure("converge", "euler_error", base.modes(modes).steps(*n), *e);
            }
            rep.check(
                "converge",
                "euler_order",
                base.modes(modes).steps(sweep.reference_n),
                sweep.error_fit.slope,
                format!(">= {target:.3}"),
                sweep.error_fit.slope >= target,
            );
            let doubled: Vec<usize> = cfg.n_values.iter().map(|n| 2 * n).collect();
            match euler_sweep(&v0, &cfg.solver, &doubled, 2 * sweep.reference_n) {
                Ok(again) => {
                    let shift = (again.error_fit.slope - sweep.error_fit.slope).abs();
                    let tol = cfg.tolerances.get("fit_stability");
                    rep.measure("converge", "euler_order_doubled", base.modes(modes).steps(again.reference_n), again.error_fit.slope);
                    rep.check(
                        "converge",
                        "euler_order_stability",
                        base.modes(modes).steps(again.reference_n),
                        shift,
                        format!("<= {tol}"),
                        shift <= tol,
                    );
                }
                Err(e) => solver_error_row(&mut rep, "converge", base.modes(modes), &e),
            }
        }
        Err(e) => solver_error_row(&mut rep, "converge", base.modes(modes), &e),
    }

    let dt = cfg.solver.dt;
    match galerkin_self_differences(&v0, &cfg.solver, &cfg.mode_values) {
        Ok(diffs) => {
            for (m, d) in cfg.mode_values.iter().zip(&diffs) {
                rep.measure("converge", "galerkin_self_difference", base.modes(*m).dt(dt), *d);
            }
            let ok = strictly_decreasing(&diffs);
            rep.check("converge", "galerkin_self_difference_decreasing", base.dt(dt), f64::from(u8::from(ok)), "1", ok);
        }
        Err(e) => solver_error_row(&mut rep, "converge", base.dt(dt), &e),
    }

    let pairs: Vec<(usize, usize)> = cfg.mode_values.iter().copied().zip(cfg.n_values.iter().copied()).collect();
    match galerkin_euler_gaps(&v0, &cfg.solver, &pairs) {
        Ok(gaps) => {
            for ((m, n), g) in pairs.iter().zip(&gaps) {
                rep.measure("converge", "galerkin_euler_gap", base.modes(*m).steps(*n).dt(dt), *g);
            }
            let ok = strictly_decreasing(&gaps);
            rep.check("converge", "galerkin_euler_gap_decreasing", base.dt(dt), f64::from(u8::from(ok)), "1", ok);
        }
        Err(e) => solver_error_row(&mut rep, "converge", base.dt(dt), &e),
    }
    rep
}

/// `L^2` drift of the Euler scheme against `n` and Hamiltonian drift of the
/// modified Galerkin flow against `dt`.
pub fn run_conservation_study(cfg: &ExperimentConfig) -> Report {
    let mut rep = Report::default();
    let base = ParamTuple::from_solver(&cfg.solver);
    let v0 = match cfg.initial.build() {
        Ok(v) => v,
        Err(e) => {
            rep.check("conserve", format!("initial data: {e}").replace(',', ";"), base, f64::NAN, "readable", false);
            return rep;
        }
    };
    let modes = cfg.solver.max_mode;
    let target = order_target(cfg.solver.regularity, cfg.tolerances.get("euler_order_slack"));
    let n_max = *cfg.n_values.iter().max().expect("non-empty");
    match euler_sweep(&v0, &cfg.solver, &cfg.n_values, 2 * n_max) {
        Ok(sweep) => {
            for (n, d) in sweep.n_values.iter().zip(&sweep.l2_drift) {
                rep.measure("conserve", "l2_relative_drift", base.modes(modes).steps(*n), *d);
            }
            rep.check(
                "conserve",
                "l2_drift_order",
                base.modes(modes),
                sweep.drift_fit.slope,
                format!(">= {target:.3}"),
                sweep.drift_fit.slope >= target,
            );
            let last = sweep.l2_drift[sweep.l2_drift.len() - 1];
            let tol = cfg.tolerances.get("l2_relative_drift");
            rep.check(
                "conserve",
                "l2_relative_drift_finest",
                base.modes(modes).steps(sweep.n_values[sweep.n_values.len() - 1]),
                last,
                format!("<= {tol}"),
                last <= tol,
            );
        }
        Err(e) => solver_error_row(&mut rep, "conserve", base.modes(modes), &e),
    }

    let h_modes = cfg.mode_values[0];
    let h_solver = SolverConfig { max_mode: h_modes, ..cfg.solver };
    match hamiltonian_sweep(&v0, &h_solver, &cfg.dt_values) {
        Ok((drifts, fit)) => {
            for (dt, d) in cfg.dt_values.iter().zip(&drifts) {
                rep.measure("conserve", "hamiltonian_drift", base.modes(h_modes).dt(*dt), *d);
            }
            let width = cfg.tolerances.get("hamiltonian_order_width");
            rep.check(
                "conserve",
                "hamiltonian_order",
                base.modes(h_modes),
                fit.slope,
                format!("in [{}; {}]", 4.0 - width, 4.0 + width),
                (fit.slope - 4.0).abs() <= width,
            );
        }
        Err(e) => solver_error_row(&mut rep, "conserve", base.modes(h_modes), &e),
    }

    let zero = SpectralCoeffs::zeros(1);
    let zero_drift = euler_solve(&zero, &SolverConfig { scheme: Scheme::Euler, ..cfg.solver })
        .map(|t| relative_l2_drift(&t))
        .and_then(|d| Ok(d + hamiltonian_drift(&zero, &h_solver)?));
    match zero_drift {
        Ok(d) => rep.check("conserve", "zero_data_drift", base.modes(modes), d, "= 0", d == 0.0),
        Err(e) => solver_error_row(&mut rep, "conserve", base.modes(modes), &e),
    }
    rep
}

/// Sample mean and standard error.
pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mean = x.iter().sum::<f64>() / m;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

/// Per mode `k`: `(mean, standard error, expected)` of `|w_T(k)|^2` over
/// the seeds, with `w` sampled on `steps` intervals of `[0, T]`.
pub fn covariance_check(spec: &NoiseSpec, horizon: f64, steps: usize, seeds: &[u64]) -> Vec<(f64, f64, f64)> {
    let grid = TimeGrid::uniform(horizon, steps);
    let finals: Vec<SpectralCoeffs> = seeds
        .par_iter()
        .map(|&s| sample_noise(spec, &grid, s).expect("uniform grid").value(steps).clone())
        .collect();
    spec.lambda()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let samples: Vec<f64> = finals.iter().map(|w| w.positive()[i].norm_sqr()).collect();
            let (mean, se) = mean_and_se(&samples);
            (mean, se, l * l * horizon)
        })
        .collect()
}

/// Mean over seeds of the `rho`-Hölder norm of `delta w` on dyadic grids of
/// the given levels, all coarsened from one path per seed.
pub fn noise_holder_profile(spec: &NoiseSpec, levels: &[u32], rho: f64, seeds: &[u64]) -> Vec<f64> {
    let finest = 1usize << levels.iter().max().copied().unwrap_or(0);
    let per_seed: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            let path = sample_noise(spec, &TimeGrid::uniform(1.0, finest), seed).expect("uniform grid");
            levels
                .iter()
                .map(|&l| {
                    let coarse = path.coarsen(finest >> l).expect("dyadic factor");
                    let values: Vec<SpectralCoeffs> = (0..coarse.grid().len()).map(|i| coarse.value(i).clone()).collect();
                    holder_norm(&delta_path(coarse.grid(), &values), rho)
                })
                .collect()
        })
        .collect();
    (0..levels.len()).map(|i| per_seed.iter().map(|v| v[i]).sum::<f64>() / seeds.len() as f64).collect()
}

/// `X^w_{ts}(phi)` for every pair of the path grid.
pub fn xw_field(phi: &SpectralCoeffs, path: &NoisePath) -> TwoIndexField<SpectralCoeffs> {
    let grid = path.grid().clone();
    TwoIndexField::from_index_fn(&grid, |i, j| {
        xw_op(phi, path, grid.t(i), grid.t(j), Truncation::Full).expect("grid points")
    })
}

const HOLDER_LEVELS: [u32; 5] = [5, 6, 7, 8, 9];
const HOLDER_SEEDS: usize = 8;

/// Covariance, the zero-noise reduction, frozen-path refinement and
/// regularity probes of the forcing.
pub fn run_noise_study(cfg: &ExperimentConfig) -> Report {
    let mut rep = Report::default();
    let base = ParamTuple::from_solver(&cfg.solver);
    let spec = cfg.noise_spec();
    let horizon = cfg.solver.horizon;
    let se_factor = cfg.tolerances.get("covariance_se");
    let steps = cfg.solver.rough_steps().unwrap_or(1);

    let cov = covariance_check(&spec, horizon, steps, &cfg.seeds);
    let worst = cov.iter().map(|(m, se, e)| (m - e).abs() / se.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    for (k, (mean, se, expected)) in cov.iter().enumerate() {
        rep.measure("noise", format!("variance_mode_{}", k + 1), base.modes(k + 1).steps(steps), *mean);
        rep.measure("noise", format!("variance_se_mode_{}", k + 1), base.modes(k + 1).steps(steps), *se);
        rep.measure("noise", format!("variance_expected_mode_{}", k + 1), base.modes(k + 1).steps(steps), *expected);
    }
    rep.check(
        "noise",
        "variance_deviation_in_se",
        base.modes(spec.max_mode()).steps(steps),
        worst,
        format!("<= {se_factor}"),
        worst <= se_factor,
    );

    let v0 = match cfg.initial.build() {
        Ok(v) => v,
        Err(e) => {
            rep.check("noise", format!("initial data: {e}").replace(',', ";"), base, f64::NAN, "readable", false);
            return rep;
        }
    };
    let modes = cfg.solver.max_mode;
    let seed = cfg.seeds[0];
    let n = cfg.solver.steps_per_unit;
    let zero = NoiseSpec::new(vec![0.0; spec.max_mode()], cfg.solver.regularity.norm_params()).expect("finite");
    let stoch_cfg = SolverConfig { scheme: Scheme::StochasticEuler, ..cfg.solver };
    let same = match (stochastic_euler_solve(&v0, &zero, &stoch_cfg, seed), euler_solve(&v0, &SolverConfig { scheme: Scheme::Euler, ..cfg.solver })) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    rep.check("noise", "zero_noise_bit_identical", base.modes(modes).steps(n).seed(seed), f64::from(u8::from(same)), "1", same);

    let n_max = *cfg.n_values.iter().max().expect("non-empty");
    let finest = cfg.reference_factor * n_max;
    let fine_steps = (finest as f64 * horizon).round() as usize;
    match sample_noise(&spec, &TimeGrid::uniform(horizon, fine_steps), seed) {
        Ok(path) => {
            let run = |m: usize| {
                let coarse = path.coarsen(finest / m).map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
                stochastic_euler_with_path(&v0, &coarse, &SolverConfig { steps_per_unit: m, ..stoch_cfg })
            };
            let mut all = cfg.n_values.clone();
            all.push(finest);
            let runs: Result<Vec<Trajectory>, SolverError> = all.par_iter().map(|&m| run(m)).collect();
            match runs {
                Ok(trajs) => {
                    let (reference, coarse) = trajs.split_last().expect("reference present");
                    let gaps: Vec<f64> = coarse.iter().map(|t| t.sup_distance(reference)).collect();
                    for (m, g) in cfg.n_values.iter().zip(&gaps) {
                        rep.measure("noise", "frozen_path_gap", base.modes(modes).steps(*m).seed(seed), *g);
                    }
                    let ok = strictly_decreasing(&gaps);
                    rep.check("noise", "frozen_path_gap_decreasing", base.modes(modes).seed(seed), f64::from(u8::from(ok)), "1", ok);
                }
                Err(e) => solver_error_row(&mut rep, "noise", base.modes(modes).seed(seed), &e),
            }
        }
        Err(e) => rep.check("noise", format!("sampling: {e}"), base, f64::NAN, "samples", false),
    }

    let probe_seeds: Vec<u64> = cfg.seeds.iter().take(HOLDER_SEEDS).copied().collect();
    let low = noise_holder_profile(&spec, &HOLDER_LEVELS, 0.45, &probe_seeds);
    let high = noise_holder_profile(&spec, &HOLDER_LEVELS, 0.55, &probe_seeds);
    for (l, (a, b)) in HOLDER_LEVELS.iter().zip(low.iter().zip(&high)) {
        rep.measure("noise", "holder_norm_rho_0.45", base.steps(1 << l), *a);
        rep.measure("noise", "holder_norm_rho_0.55", base.steps(1 << l), *b);
    }
    let worst_low = low.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    rep.check("noise", "holder_growth_rho_0.45_per_refinement", base, worst_low, "< 2", worst_low < 2.0);
    let total_high = high[high.len() - 1] / high[0];
    rep.check("noise", "holder_growth_rho_0.55_cumulative", base, total_high, "> 1.2", total_high > 1.2);

    let gamma = cfg.solver.regularity.gamma;
    for level in [3u32, 4, 5] {
        let path = sample_noise(&spec, &TimeGrid::uniform(horizon, 1 << level), seed);
        if let Ok(path) = path {
            let field = xw_field(&v0, &path);
            let p = base.steps(1 << level).seed(seed);
            rep.measure("noise", "xw_holder_2gamma", p, holder_norm(&field, 2.0 * gamma));
            rep.measure("noise", "xw_grr_2gamma_p2", p, grr_functional(&field, 2.0 * gamma, 2.0));
        }
    }
    rep
}

/// Runs the configured scheme once; returns a summary and the trajectory.
pub fn run_solve(cfg: &ExperimentConfig, seed: u64) -> (Report, Option<Trajectory>) {
    let mut rep = Report::default();
    let solver = cfg.solver;
    let base = ParamTuple::from_solver(&solver).modes(solver.max_mode);
    let params = match solver.scheme {
        Scheme::GalerkinModified | Scheme::GalerkinNaive => base.dt(solver.dt),
        Scheme::StochasticEuler => base.steps(solver.steps_per_unit).seed(seed),
        Scheme::Euler | Scheme::Picard => base.steps(solver.steps_per_unit),
    };
    let v0 = match cfg.initial.build() {
        Ok(v) => v,
        Err(e) => {
            rep.check("solve", format!("initial data: {e}").replace(',', ";"), params, f64::NAN, "readable", false);
            return (rep, None);
        }
    };
    let result = match solver.scheme {
        Scheme::Euler => euler_solve(&v0, &solver),
        Scheme::GalerkinModified => galerkin_modified_solve(&v0, &solver),
        Scheme::GalerkinNaive => galerkin_naive_solve(&v0, &solver),
        Scheme::StochasticEuler => stochastic_euler_solve(&v0, &cfg.noise_spec(), &solver, seed),
        Scheme::Picard => picard_iterate(&v0, &solver, 32).map(|out| {
            let grid = out.triple.grid().clone();
            for (i, d) in out.distances.iter().enumerate() {
                rep.measure("solve", format!("picard_distance_{i:02}"), params, *d);
            }
            Trajectory { grid, states: out.triple.y, frame: crate::solver::Frame::Twisted }
        }),
    };
    match result {
        Ok(traj) => {
            rep.measure("solve", "l2_relative_drift", params, relative_l2_drift(&traj));
            rep.measure("solve", "final_sup_norm", params, traj.final_state().sup_norm());
            if matches!(solver.scheme, Scheme::GalerkinModified) {
                if let Ok(d) = hamiltonian_drift(&v0, &solver) {
                    rep.measure("solve", "hamiltonian_drift", params, d);
                }
            }
            rep.check("solve", "completed", params, 1.0, "1", true);
            (rep, Some(traj))
        }
        Err(e) => {
            solver_error_row(&mut rep, "solve", params, &e);
            (rep, None)
        }
    }
}

/// Worst ratio of `||Lambda delta g||_mu` to `(2^mu - 2)^{-1}
/// ||delta g||_{mu/2, mu/2}` over `germs` random germs
/// `g_{ts} = y_s (x_t - x_s)` with lacunary `mu/2`-Hölder paths `x`, `y`,
/// on a dyadic grid of the given level.
pub fn sewing_bound_ratio(mu: f64, germs: usize, level: u32, seed: u64) -> f64 {
    use rand::Rng;
    let theta = mu / 2.0;
    let grid = TimeGrid::dyadic(1.0, level);
    let lacunary = |rng: &mut ChaCha8Rng| {
        let amplitude: f64 = rng.random_range(0.5..2.0);
        let phases: Vec<f64> = (0..level).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
        move |t: f64| {
            amplitude
                * phases
                    .iter()
                    .enumerate()
                    .map(|(j, ph)| {
                        let scale = 2f64.powi(j as i32);
                        scale.powf(-theta) * (std::f64::consts::TAU * scale * t + ph).sin()
                    })
                    .sum::<f64>()
        }
    };
    (0..germs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let x = lacunary(&mut rng);
            let y = lacunary(&mut rng);
            let germ = TwoIndexField::from_fn(&grid, |s, t| y(s) * (x(t) - x(s)));
            let sewn = sew(&germ, &grid, SewOptions::exhaustive()).expect("tabulated germs sew to grid depth");
            let bound = holder_norm_delta2(&germ, theta, theta) / (2f64.powf(mu) - 2.0);
            holder_norm(&sewn.remainder, mu) / bound
        })
        .reduce(|| 0.0, f64::max)
}
