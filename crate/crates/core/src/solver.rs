//! Time integrators for the twisted KdV flow.
//!
//! The twisted variable `v(t) = U(-t) u(t)` removes the Airy flow, so the
//! rough schemes advance `v` with the germ `X + X^2` and the Galerkin schemes
//! integrate `dv/dt = U(-t) [P_N N(U(t) v) + Gamma(U(t) v)]` with RK4.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::increments::{
    delta_path, holder_norm, sew, Germ, IncrementError, SewOptions, TimeGrid, TwoIndexField,
};
use crate::operators::{gamma_correction_diag, x2_op, x_op, OperatorSpec, RegularityPair, StepPlan, Truncation};
use crate::spectral::{FLNormParams, SpectralCoeffs};

/// Growth factor of the `FL^{alpha,p}` norm that counts as blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e3;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("norm {norm:e} at t = {time} exceeds the blow-up limit {limit:e}")]
    BlowUp { time: f64, norm: f64, limit: f64 },
    #[error("state has modes up to {found}, beyond the truncation {limit}")]
    Support { found: usize, limit: usize },
    #[error("Picard distance grew for three consecutive iterations (iteration {iteration})")]
    NonContraction { iteration: usize },
    #[error(transparent)]
    Increment(#[from] IncrementError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    GalerkinModified,
    GalerkinNaive,
    StochasticEuler,
    Picard,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Euler => "euler",
            Scheme::GalerkinModified => "galerkin-modified",
            Scheme::GalerkinNaive => "galerkin-naive",
            Scheme::StochasticEuler => "stochastic-euler",
            Scheme::Picard => "picard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Scheme::Euler, Scheme::GalerkinModified, Scheme::GalerkinNaive, Scheme::StochasticEuler, Scheme::Picard]
            .into_iter()
            .find(|x| x.name() == s)
    }

    fn is_rough(self) -> bool {
        matches!(self, Scheme::Euler | Scheme::StochasticEuler | Scheme::Picard)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub regularity: RegularityPair,
    /// Spectral truncation `N`.
    pub max_mode: usize,
    /// Rough-scheme steps per unit time.
    pub steps_per_unit: usize,
    pub horizon: f64,
    /// RK4 step of the Galerkin schemes.
    pub dt: f64,
    pub scheme: Scheme,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if self.max_mode == 0 {
            return bad("max_mode must be positive".into());
        }
        if self.steps_per_unit == 0 {
            return bad("steps_per_unit must be at least 1".into());
        }
        if !(self.horizon > 0.0) || !(self.dt > 0.0) {
            return bad(format!("horizon {} and dt {} must be positive", self.horizon, self.dt));
        }
        if self.scheme.is_rough() {
            let r = self.regularity;
            if !(r.gamma > 1.0 / 3.0) || !r.in_region_dprime() {
                return bad(format!(
                    "rough schemes need gamma > 1/3 inside the second-order region, got ({}, {}, {})",
                    r.gamma, r.alpha, r.p
                ));
            }
        }
        Ok(())
    }

    fn norm_params(&self) -> FLNormParams {
        self.regularity.norm_params()
    }

    /// Number of rough steps covering the horizon; the horizon must be a
    /// multiple of `1/n`.
    pub fn rough_steps(&self) -> Result<usize, SolverError> {
        count_steps(self.horizon, 1.0 / self.steps_per_unit as f64)
    }

    /// Number of RK4 steps covering the horizon.
    pub fn ode_steps(&self) -> Result<usize, SolverError> {
        count_steps(self.horizon, self.dt)
    }
}

fn count_steps(horizon: f64, h: f64) -> Result<usize, SolverError> {
    let raw = horizon / h;
    let steps = raw.round();
    if steps < 1.0 || (raw - steps).abs() > 1e-9 * raw.max(1.0) {
        return Err(SolverError::InvalidConfig(format!("horizon {horizon} is not a multiple of the step {h}")));
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// `v(t) = U(-t) u(t)`.
    Twisted,
    /// `u(t)`.
    Physical,
}

/// States of a solve on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<SpectralCoeffs>,
    pub frame: Frame,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralCoeffs {
        self.states.last().expect("trajectories are non-empty")
    }

    pub fn to_physical(&self) -> Self {
        self.reframe(Frame::Physical)
    }

    pub fn to_twisted(&self) -> Self {
        self.reframe(Frame::Twisted)
    }

    fn reframe(&self, target: Frame) -> Self {
        if self.frame == target {
            return self.clone();
        }
        let sign = if target == Frame::Physical { 1.0 } else { -1.0 };
        let states = self.states.iter().zip(self.grid.points()).map(|(s, t)| s.airy_evolve(sign * t)).collect();
        Self { grid: self.grid.clone(), states, frame: target }
    }

    /// State at time `t`, which must be a grid point up to rounding.
    pub fn at_time(&self, t: f64) -> Option<&SpectralCoeffs> {
        let i = self.grid.nearest_index(t);
        ((self.grid.t(i) - t).abs() <= 1e-9 * t.abs().max(1.0)).then(|| &self.states[i])
    }

    /// Largest coefficient gap on the grid points this trajectory shares
    /// with `other`. Both must be in the same frame.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.frame, other.frame);
        self.grid
            .points()
            .iter()
            .zip(&self.states)
            .filter_map(|(t, s)| other.at_time(*t).map(|o| s.sup_distance(o)))
            .fold(0.0, f64::max)
    }

    /// `t,k,re,im` rows for every state and positive mode.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,k,re,im\n");
        for (t, s) in self.grid.points().iter().zip(&self.states) {
            for (i, c) in s.positive().iter().enumerate() {
                let _ = writeln!(out, "{t},{},{:e},{:e}", i + 1, c.re, c.im);
            }
        }
        out
    }
}

struct Guard {
    params: FLNormParams,
    limit: f64,
}

impl Guard {
    fn new(v0: &SpectralCoeffs, params: FLNormParams) -> Self {
        let initial = v0.fl_norm(params);
        let limit = if initial > 0.0 { BLOW_UP_FACTOR * initial } else { f64::INFINITY };
        Self { params, limit }
    }

    fn check(&self, v: &SpectralCoeffs, time: f64) -> Result<(), SolverError> {
        let norm = v.fl_norm(self.params);
        if norm > self.limit || !norm.is_finite() {
            return Err(SolverError::BlowUp { time, norm, limit: self.limit });
        }
        Ok(())
    }
}

/// One rough Euler step `v + X_{s+h,s}(v, v) + X^2_{s+h,s}(v, v, v)` with
/// the `Gamma`-corrected truncation at `N`.
#[derive(Debug, Clone)]
pub struct EulerStepper {
    plan: StepPlan,
}

impl EulerStepper {
    pub fn new(max_mode: usize, h: f64) -> Self {
        Self { plan: StepPlan::new(h, Truncation::Modified(max_mode)) }
    }

    pub fn step_size(&self) -> f64 {
        self.plan.step()
    }

    /// `X + X^2` on `(s, s + h)`.
    pub fn increment(&self, v: &SpectralCoeffs, s: f64) -> SpectralCoeffs {
        self.plan.germ_at(v, s)
    }

    pub fn step(&self, v: &SpectralCoeffs, s: f64) -> SpectralCoeffs {
        v + &self.increment(v, s)
    }
}

fn euler_run(
    v0: &SpectralCoeffs,
    t0: f64,
    steps: usize,
    stepper: &EulerStepper,
    guard: &Guard,
) -> Result<Vec<SpectralCoeffs>, SolverError> {
    let h = stepper.step_size();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(v0.clone());
    for i in 0..steps {
        let s = t0 + i as f64 * h;
        let next = stepper.step(&states[i], s);
        guard.check(&next, s + h)?;
        states.push(next);
    }
    Ok(states)
}

/// Rough Euler scheme on `t_i = i/n`:
/// `v_i = v_{i-1} + X_{t_i t_{i-1}}(v_{i-1}) + X^2_{t_i t_{i-1}}(v_{i-1})`.
pub fn euler_solve(v0: &SpectralCoeffs, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let steps = cfg.rough_steps()?;
    let h = 1.0 / cfg.steps_per_unit as f64;
    let v0 = v0.project(cfg.max_mode).resized(cfg.max_mode);
    let stepper = EulerStepper::new(cfg.max_mode, h);
    let states = euler_run(&v0, 0.0, steps, &stepper, &Guard::new(&v0, cfg.norm_params()))?;
    Ok(Trajectory { grid: TimeGrid::uniform(steps as f64 * h, steps), states, frame: Frame::Twisted })
}

/// Right-hand side of the twisted Galerkin ODE at time `t`.
pub fn galerkin_rhs(v: &SpectralCoeffs, t: f64, n: usize, corrected: bool) -> SpectralCoeffs {
    let u = v.airy_evolve(t);
    let mut f = u.nonlinearity().project(n);
    if corrected {
        f = &f + &gamma_correction_diag(&u, n);
    }
    f.resized(n).airy_evolve(-t)
}

fn rk4_step(v: &SpectralCoeffs, t: f64, dt: f64, n: usize, corrected: bool) -> SpectralCoeffs {
    let f = |x: &SpectralCoeffs, time: f64| galerkin_rhs(x, time, n, corrected);
    let k1 = f(v, t);
    let k2 = f(&v.axpy(0.5 * dt, &k1), t + 0.5 * dt);
    let k3 = f(&v.axpy(0.5 * dt, &k2), t + 0.5 * dt);
    let k4 = f(&v.axpy(dt, &k3), t + dt);
    let mut incr = k1.axpy(2.0, &k2);
    incr = incr.axpy(2.0, &k3);
    incr = &incr + &k4;
    v.axpy(dt / 6.0, &incr)
}

fn galerkin_solve(u0: &SpectralCoeffs, cfg: &SolverConfig, corrected: bool) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let steps = cfg.ode_steps()?;
    let n = cfg.max_mode;
    let v0 = u0.project(n).resized(n);
    let guard = Guard::new(&v0, cfg.norm_params());
    let mut states = Vec::with_capacity(steps + 1);
    states.push(v0);
    for i in 0..steps {
        let t = i as f64 * cfg.dt;
        let next = rk4_step(&states[i], t, cfg.dt, n, corrected);
        guard.check(&next, t + cfg.dt)?;
        states.push(next);
    }
    Ok(Trajectory { grid: TimeGrid::uniform(steps as f64 * cfg.dt, steps), states, frame: Frame::Twisted })
}

/// RK4 solve of the `Gamma`-corrected Galerkin flow, in the twisted frame.
pub fn galerkin_modified_solve(u0: &SpectralCoeffs, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    galerkin_solve(u0, cfg, true)
}

/// RK4 solve of the plain Galerkin truncation, in the twisted frame.
pub fn galerkin_naive_solve(u0: &SpectralCoeffs, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    galerkin_solve(u0, cfg, false)
}

/// Hamiltonian of the `Gamma`-corrected Galerkin flow, before taking the
/// real part:
///
/// `1/2 sum k^2 |u(k)|^2 + 1/6 sum_{k1+k2+k3=0} u(k1) u(k2) u(k3)
///  + 1/12 sum_{|k-k1|>N} |u(k)|^2 |u(k1)|^2 / (k k1)`.
pub fn hamiltonian_value(u: &SpectralCoeffs, n: usize) -> Result<Complex64, SolverError> {
    let found = u.effective_max_mode();
    if found > n {
        return Err(SolverError::Support { found, limit: n });
    }
    let n = n as i64;
    let quadratic: f64 = u.positive().iter().enumerate().map(|(i, c)| ((i + 1) * (i + 1)) as f64 * c.norm_sqr()).sum();
    let mut cubic = Complex64::new(0.0, 0.0);
    let mut quartic = 0.0;
    for k1 in -n..=n {
        if k1 == 0 {
            continue;
        }
        let a = u.get(k1);
        for k2 in -n..=n {
            if k2 == 0 {
                continue;
            }
            let k3 = -k1 - k2;
            if k3 != 0 && k3.abs() <= n {
                cubic += a * u.get(k2) * u.get(k3);
            }
            if (k1 - k2).abs() > n {
                quartic += a.norm_sqr() * u.get(k2).norm_sqr() / (k1 * k2) as f64;
            }
        }
    }
    Ok(Complex64::new(quadratic, 0.0) + cubic / 6.0 + quartic / 12.0)
}

/// Real value of [`hamiltonian_value`].
pub fn compute_hamiltonian(u: &SpectralCoeffs, n: usize) -> Result<f64, SolverError> {
    hamiltonian_value(u, n).map(|h| h.re)
}

/// Discrete controlled path `(y, y', y#)` with `delta y = X(y', y') + y#`.
#[derive(Debug, Clone)]
pub struct ControlledTriple {
    pub y: Vec<SpectralCoeffs>,
    pub y_prime: Vec<SpectralCoeffs>,
    pub y_sharp: TwoIndexField<SpectralCoeffs>,
}

impl ControlledTriple {
    pub fn grid(&self) -> &TimeGrid {
        self.y_sharp.grid()
    }
}

/// Final iterate and the distance between successive iterates.
#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub triple: ControlledTriple,
    pub distances: Vec<f64>,
}

/// Second-order germ of a frozen path, limited to its grid.
struct FrozenGerm<'a> {
    grid: &'a TimeGrid,
    path: &'a [SpectralCoeffs],
    truncation: Truncation,
}

impl Germ<SpectralCoeffs> for FrozenGerm<'_> {
    fn eval(&self, s: f64, t: f64) -> SpectralCoeffs {
        let v = &self.path[self.grid.nearest_index(s)];
        let spec = OperatorSpec::new(s, t).with_truncation(self.truncation);
        &x_op(v, v, spec) + &x2_op(v, v, v, spec).total()
    }

    fn depth(&self) -> Option<u32> {
        self.grid.dyadic_level()
    }
}

fn sharp_part(grid: &TimeGrid, z: &[SpectralCoeffs], zp: &[SpectralCoeffs], truncation: Truncation) -> TwoIndexField<SpectralCoeffs> {
    TwoIndexField::from_index_fn(grid, |i, j| {
        let spec = OperatorSpec::new(grid.t(i), grid.t(j)).with_truncation(truncation);
        &(&z[j] - &z[i]) - &x_op(&zp[i], &zp[i], spec)
    })
}

/// `|y_0 - z_0| + ||delta(y' - z')||_eta + ||y# - z#||_{2 eta}`.
fn controlled_distance(a: &ControlledTriple, b: &ControlledTriple, eta: f64) -> f64 {
    let grid = a.grid();
    let dp: Vec<SpectralCoeffs> = a.y_prime.iter().zip(&b.y_prime).map(|(x, y)| x - y).collect();
    a.y[0].sup_distance(&b.y[0]) + holder_norm(&delta_path(grid, &dp), eta) + holder_norm(&a.y_sharp.sub(&b.y_sharp), 2.0 * eta)
}

/// Fixed-point iteration of the controlled-path map on a dyadic grid.
///
/// Each iterate sews the germ `X_{ts}(y_s) + X^2_{ts}(y_s)` of the previous
/// path down to the grid resolution, sets `z' = y` and
/// `z#_{ts} = delta z_{ts} - X_{ts}(y_s, y_s)`.
pub fn picard_iterate(v0: &SpectralCoeffs, cfg: &SolverConfig, iterations: usize) -> Result<PicardOutcome, SolverError> {
    cfg.validate()?;
    let steps = cfg.rough_steps()?;
    if !steps.is_power_of_two() {
        return Err(SolverError::InvalidConfig(format!("Picard needs a dyadic grid, got {steps} steps")));
    }
    let grid = TimeGrid::dyadic(cfg.horizon, steps.trailing_zeros());
    let truncation = Truncation::Modified(cfg.max_mode);
    let v0 = v0.project(cfg.max_mode).resized(cfg.max_mode);
    let eta = cfg.regularity.gamma;

    let constant = vec![v0.clone(); grid.len()];
    let mut current = ControlledTriple {
        y: constant.clone(),
        y_sharp: sharp_part(&grid, &constant, &constant, truncation),
        y_prime: constant,
    };
    let mut distances: Vec<f64> = Vec::new();
    let mut growth = 0;
    for it in 0..iterations {
        let germ = FrozenGerm { grid: &grid, path: &current.y, truncation };
        let sewn = sew(&germ, &grid, SewOptions::exhaustive())?;
        let z: Vec<SpectralCoeffs> = sewn.path.iter().map(|p| (&v0 + p).resized(cfg.max_mode)).collect();
        let next = ControlledTriple {
            y_sharp: sharp_part(&grid, &z, &current.y, truncation),
            y_prime: current.y.clone(),
            y: z,
        };
        let d = controlled_distance(&next, &current, eta);
        if let Some(&prev) = distances.last() {
            growth = if d > prev { growth + 1 } else { 0 };
            if growth >= 3 {
                return Err(SolverError::NonContraction { iteration: it });
            }
        }
        distances.push(d);
        current = next;
        if d == 0.0 {
            break;
        }
    }
    Ok(PicardOutcome { triple: current, distances })
}

/// Result of [`global_solve_l2`].
#[derive(Debug, Clone)]
pub struct GlobalSolve {
    pub trajectory: Trajectory,
    /// Window lengths actually used.
    pub windows: Vec<f64>,
    /// `|v|_{L^2}^2` at every grid point.
    pub l2_norms: Vec<f64>,
}

/// Chains Euler windows of length `cfg.horizon` up to `horizon`, restarting
/// each window from the endpoint of the previous one. A window that trips
/// the blow-up guard is halved and retried.
pub fn global_solve_l2(v0: &SpectralCoeffs, cfg: &SolverConfig, horizon: f64) -> Result<GlobalSolve, SolverError> {
    cfg.validate()?;
    let r = cfg.regularity;
    if r.alpha != 0.0 || r.p != 2.0 {
        return Err(SolverError::InvalidConfig("global L2 extension needs alpha = 0, p = 2".into()));
    }
    let h = 1.0 / cfg.steps_per_unit as f64;
    let total = count_steps(horizon, h)?;
    let mut window = cfg.rough_steps()?.min(total);
    let stepper = EulerStepper::new(cfg.max_mode, h);
    let mut states = vec![v0.project(cfg.max_mode).resized(cfg.max_mode)];
    let mut windows = Vec::new();
    let mut done = 0;
    while done < total {
        let len = window.min(total - done);
        let start = states[done].clone();
        let guard = Guard::new(&start, cfg.norm_params());
        match euler_run(&start, done as f64 * h, len, &stepper, &guard) {
            Ok(run) => {
                states.extend(run.into_iter().skip(1));
                windows.push(len as f64 * h);
                done += len;
            }
            Err(SolverError::BlowUp { .. }) if len > 1 => window = len / 2,
            Err(e) => return Err(e),
        }
    }
    let l2_norms = states.iter().map(SpectralCoeffs::l2_norm_sq).collect();
    Ok(GlobalSolve {
        trajectory: Trajectory { grid: TimeGrid::uniform(total as f64 * h, total), states, frame: Frame::Twisted },
        windows,
        l2_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(scheme: Scheme) -> SolverConfig {
        SolverConfig {
            regularity: RegularityPair::new(0.4, 0.0, 2.0).unwrap(),
            max_mode: 4,
            steps_per_unit: 8,
            horizon: 0.5,
            dt: 0.01,
            scheme,
        }
    }

    #[test]
    fn scheme_names_roundtrip() {
        for s in [Scheme::Euler, Scheme::GalerkinModified, Scheme::GalerkinNaive, Scheme::StochasticEuler, Scheme::Picard] {
            assert_eq!(Scheme::parse(s.name()), Some(s));
        }
        assert_eq!(Scheme::parse("rk45"), None);
    }

    #[test]
    fn rejects_rough_scheme_below_one_third() {
        let mut c = cfg(Scheme::Euler);
        c.regularity = RegularityPair::new(0.3, 0.0, 2.0).unwrap();
        assert!(matches!(c.validate(), Err(SolverError::InvalidConfig(_))));
        c.scheme = Scheme::GalerkinModified;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_horizon_off_the_grid() {
        let mut c = cfg(Scheme::Euler);
        c.horizon = 0.3;
        assert!(matches!(c.rough_steps(), Err(SolverError::InvalidConfig(_))));
    }

    #[test]
    fn hamiltonian_rejects_wide_support() {
        let u = SpectralCoeffs::from_fn(3, |_| Complex64::new(1.0, 0.0));
        assert_eq!(compute_hamiltonian(&u, 2), Err(SolverError::Support { found: 3, limit: 2 }));
    }
}
