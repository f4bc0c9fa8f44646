//! Additive white-in-time forcing diagonal in Fourier space.
//!
//! The forcing path is `w_t(k) = lambda_k beta^k_t` with independent complex
//! Brownian motions `beta^k` (`beta^{-k}` is the conjugate of `beta^k`).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::increments::TimeGrid;
use crate::operators::{x_op, OperatorSpec, Truncation};
use crate::solver::{euler_solve, EulerStepper, Frame, SolverConfig, SolverError, Trajectory, BLOW_UP_FACTOR};
use crate::spectral::{FLNormParams, SpectralCoeffs};

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("noise weights must be finite, mode {0} is not")]
    NonFinite(usize),
    #[error("noise grid must be uniform")]
    NonUniform,
    #[error("times ({s}, {t}) are not noise grid points in order")]
    OffGrid { s: f64, t: f64 },
    #[error("coarsening factor {factor} does not divide {intervals} intervals")]
    Coarsening { factor: usize, intervals: usize },
}

/// Mode weights `lambda_k`, `k >= 1`, with the norm used to measure them.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    lambda: Vec<f64>,
    params: FLNormParams,
}

impl NoiseSpec {
    pub fn new(lambda: Vec<f64>, params: FLNormParams) -> Result<Self, NoiseError> {
        if let Some(i) = lambda.iter().position(|l| !l.is_finite()) {
            return Err(NoiseError::NonFinite(i + 1));
        }
        let spec = Self { lambda, params };
        assert!(spec.weighted_norm().is_finite());
        Ok(spec)
    }

    /// `lambda_k = amplitude * k^{-beta}` for `k = 1..=n`.
    pub fn power_law(n: usize, amplitude: f64, beta: f64, params: FLNormParams) -> Result<Self, NoiseError> {
        Self::new((1..=n).map(|k| amplitude * (k as f64).powf(-beta)).collect(), params)
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn max_mode(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.iter().all(|l| *l == 0.0)
    }

    /// `sum_k |k|^{alpha p} |lambda_k|^p` over both signs.
    pub fn weighted_norm(&self) -> f64 {
        let (a, p) = (self.params.alpha(), self.params.p());
        self.lambda.iter().enumerate().map(|(i, l)| 2.0 * ((i + 1) as f64).powf(a * p) * l.abs().powf(p)).sum()
    }
}

/// Sampled forcing path on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    grid: TimeGrid,
    /// `w` at every grid point, starting from zero.
    values: Vec<SpectralCoeffs>,
    seed: u64,
}

fn uniform_step(grid: &TimeGrid) -> Result<f64, NoiseError> {
    let p = grid.points();
    let h = (p[p.len() - 1] - p[0]) / (p.len() - 1) as f64;
    if p.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(NoiseError::NonUniform);
    }
    Ok(h)
}

/// Samples `w` with increments `lambda_k (g1 + i g2) sqrt(h / 2)` per
/// interval and mode, drawn interval by interval from a ChaCha stream.
pub fn sample_noise(spec: &NoiseSpec, grid: &TimeGrid, seed: u64) -> Result<NoisePath, NoiseError> {
    let h = uniform_step(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (0.5 * h).sqrt();
    let mut values = Vec::with_capacity(grid.len());
    values.push(SpectralCoeffs::zeros(spec.max_mode()));
    for i in 1..grid.len() {
        let inc = SpectralCoeffs::from_fn(spec.max_mode(), |k| {
            let g1: f64 = rng.sample(StandardNormal);
            let g2: f64 = rng.sample(StandardNormal);
            Complex64::new(g1, g2) * (spec.lambda[k - 1] * scale)
        });
        values.push(&values[i - 1] + &inc);
    }
    Ok(NoisePath { grid: grid.clone(), values, seed })
}

impl NoisePath {
    /// Path built from given values at the grid points, e.g. a
    /// deterministic substitute for testing.
    pub fn from_values(grid: &TimeGrid, values: Vec<SpectralCoeffs>) -> Self {
        assert_eq!(grid.len(), values.len());
        Self { grid: grid.clone(), values, seed: 0 }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn value(&self, i: usize) -> &SpectralCoeffs {
        &self.values[i]
    }

    /// `w_{t_j} - w_{t_i}`.
    pub fn increment(&self, i: usize, j: usize) -> SpectralCoeffs {
        &self.values[j] - &self.values[i]
    }

    /// Keeps every `factor`-th grid point.
    pub fn coarsen(&self, factor: usize) -> Result<Self, NoiseError> {
        let intervals = self.grid.len() - 1;
        if factor == 0 || !intervals.is_multiple_of(factor) {
            return Err(NoiseError::Coarsening { factor, intervals });
        }
        let points = self.grid.points().iter().step_by(factor).copied().collect();
        let grid = TimeGrid::new(points).expect("subsampled grid stays increasing");
        let values = self.values.iter().step_by(factor).cloned().collect();
        Ok(Self { grid, values, seed: self.seed })
    }

    fn index_of(&self, t: f64) -> Option<usize> {
        let i = self.grid.nearest_index(t);
        ((self.grid.t(i) - t).abs() <= 1e-9 * t.abs().max(1.0)).then_some(i)
    }
}

/// `int_a^b (e^{-i w s} - e^{-i w sigma}) dsigma`.
fn linear_weight(w: f64, s: f64, a: f64, b: f64) -> Complex64 {
    let e = |x: f64| Complex64::cis(-w * x);
    e(s) * (b - a) - (e(a) - e(b)) / Complex64::new(0.0, w)
}

/// `X^w_{ts}(phi) = int_s^t Xdot_sigma(phi, w_sigma - w_s) dsigma`, computed
/// as `X_{ts}(phi, w_t - w_s) - int_s^t X_{sigma s}(phi, dw_sigma)` with `w`
/// linear between noise grid points. `s` and `t` must be grid points.
pub fn xw_op(phi: &SpectralCoeffs, w: &NoisePath, s: f64, t: f64, truncation: Truncation) -> Result<SpectralCoeffs, NoiseError> {
    let (i, j) = match (w.index_of(s), w.index_of(t)) {
        (Some(i), Some(j)) if i <= j => (i, j),
        _ => return Err(NoiseError::OffGrid { s, t }),
    };
    let spec = OperatorSpec::new(s, t).with_truncation(truncation);
    let mut out = x_op(phi, &w.increment(i, j), spec);
    let cap = match truncation {
        Truncation::Full => usize::MAX,
        Truncation::Galerkin(m) | Truncation::Modified(m) => m,
    };
    let n1 = phi.max_mode().min(cap) as i64;
    let nw = w.values[0].max_mode().min(cap) as i64;
    for l in i..j {
        let (a, b) = (w.grid.t(l), w.grid.t(l + 1));
        let slope = w.increment(l, l + 1).scale(1.0 / (b - a));
        let integral = SpectralCoeffs::from_fn(out.max_mode(), |k| {
            let k = k as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in (k - nw).max(-n1)..=(k + nw).min(n1) {
                if k1 == 0 || k1 == k {
                    continue;
                }
                let k2 = k - k1;
                let wk = (3 * k * k1 * k2) as f64;
                acc += linear_weight(wk, s, a, b) / (6 * k1 * k2) as f64 * phi.get(k1) * slope.get(k2);
            }
            acc
        });
        out = &out - &integral;
    }
    Ok(out)
}

/// Stochastic rough Euler scheme driven by a given path; the path grid
/// must refine the solver grid.
pub fn stochastic_euler_with_path(v0: &SpectralCoeffs, path: &NoisePath, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let steps = cfg.rough_steps()?;
    let h = 1.0 / cfg.steps_per_unit as f64;
    let n = cfg.max_mode;
    let stepper = EulerStepper::new(n, h);
    let truncation = Truncation::Galerkin(n);
    let mut v = v0.project(n).resized(n);
    let params = cfg.regularity.norm_params();
    let initial = v.fl_norm(params);
    let limit = if initial > 0.0 { BLOW_UP_FACTOR * initial } else { f64::INFINITY };
    let mut states = vec![v.clone()];
    for i in 0..steps {
        let (s, t) = (i as f64 * h, (i + 1) as f64 * h);
        let off = || SolverError::InvalidConfig(format!("noise grid does not contain ({s}, {t})"));
        let a = path.index_of(s).ok_or_else(off)?;
        let b = path.index_of(t).ok_or_else(off)?;
        let forcing = path.increment(a, b).project(n).resized(n);
        let xw = xw_op(&v, path, s, t, truncation).map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
        let next = &(&stepper.step(&v, s) + &forcing) + &xw.resized(n);
        let norm = next.fl_norm(params);
        if norm > limit || !norm.is_finite() {
            return Err(SolverError::BlowUp { time: t, norm, limit });
        }
        states.push(next.clone());
        v = next;
    }
    Ok(Trajectory { grid: TimeGrid::uniform(steps as f64 * h, steps), states, frame: Frame::Twisted })
}

/// Samples a path on the solver grid and runs the stochastic rough Euler
/// scheme. With all weights zero this is exactly [`euler_solve`].
pub fn stochastic_euler_solve(v0: &SpectralCoeffs, spec: &NoiseSpec, cfg: &SolverConfig, seed: u64) -> Result<Trajectory, SolverError> {
    if spec.is_zero() {
        return euler_solve(v0, cfg);
    }
    cfg.validate()?;
    let steps = cfg.rough_steps()?;
    let grid = TimeGrid::uniform(steps as f64 / cfg.steps_per_unit as f64, steps);
    let path = sample_noise(spec, &grid, seed).map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
    stochastic_euler_with_path(v0, &path, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_weights() {
        let p = FLNormParams::l2();
        assert_eq!(NoiseSpec::new(vec![1.0, f64::NAN], p), Err(NoiseError::NonFinite(2)));
    }

    #[test]
    fn coarsen_requires_divisor() {
        let spec = NoiseSpec::power_law(2, 1.0, 1.0, FLNormParams::l2()).unwrap();
        let path = sample_noise(&spec, &TimeGrid::uniform(1.0, 6), 1).unwrap();
        assert!(path.coarsen(4).is_err());
        let c = path.coarsen(3).unwrap();
        assert_eq!(c.grid().len(), 3);
        assert_eq!(c.value(2), path.value(6));
    }

    #[test]
    fn xw_rejects_off_grid_times() {
        let spec = NoiseSpec::power_law(2, 1.0, 1.0, FLNormParams::l2()).unwrap();
        let path = sample_noise(&spec, &TimeGrid::uniform(1.0, 4), 1).unwrap();
        let phi = SpectralCoeffs::zeros(2);
        assert!(xw_op(&phi, &path, 0.1, 0.5, Truncation::Full).is_err());
    }
}
