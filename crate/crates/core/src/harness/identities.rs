//! Randomised residuals of the algebraic operator identities.
//!
//! Every function draws its inputs and times from the given generator and
//! returns a relative residual (absolute defect over the size of the terms).

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{gamma_correction, x2_op, x3_ops, x_op, OperatorSpec};
use crate::oracles::{gamma_integral_quadrature, x2_nested_quadrature};
use crate::spectral::SpectralCoeffs;

/// Gaussian coefficients on modes `1..=n` with `1/k` decay.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> SpectralCoeffs {
    SpectralCoeffs::from_fn(n, |k| {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        Complex64::new(g1, g2) / k as f64
    })
}

/// Sorted `s < u < t` in `[0, horizon]`.
pub fn random_triple(rng: &mut ChaCha8Rng, horizon: f64) -> (f64, f64, f64) {
    let mut v = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()].map(|x| x * horizon);
    v.sort_by(f64::total_cmp);
    (v[0], v[1], v[2])
}

fn relative(defect: &SpectralCoeffs, terms: &[&SpectralCoeffs]) -> f64 {
    let scale = terms.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        defect.sup_norm()
    } else {
        defect.sup_norm() / scale
    }
}

/// `X_{ts} - X_{tu} - X_{us}` on random inputs and times.
pub fn chen_residual(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let (f1, f2) = (random_state(rng, n), random_state(rng, n));
    let (s, u, t) = random_triple(rng, 1.0);
    let ts = x_op(&f1, &f2, OperatorSpec::new(s, t));
    let tu = x_op(&f1, &f2, OperatorSpec::new(u, t));
    let us = x_op(&f1, &f2, OperatorSpec::new(s, u));
    relative(&(&(&ts - &tu) - &us), &[&ts, &tu, &us])
}

/// `delta X^2_{tus} - 2 X_{tu}(phi1, X_{us}(phi2, phi3))` from the closed forms.
pub fn area_residual(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let (f1, f2, f3) = (random_state(rng, n), random_state(rng, n), random_state(rng, n));
    let (s, u, t) = random_triple(rng, 1.0);
    let x2 = |a: f64, b: f64| x2_op(&f1, &f2, &f3, OperatorSpec::new(a, b)).total();
    let (ts, tu, us) = (x2(s, t), x2(u, t), x2(s, u));
    let rhs = x_op(&f1, &x_op(&f2, &f3, OperatorSpec::new(s, u)), OperatorSpec::new(u, t)).scale(2.0);
    let defect = &(&(&(&ts - &tu) - &us) - &rhs);
    relative(defect, &[&ts, &tu, &us, &rhs])
}

/// Closed-form `X^2_{ts}` against nested time quadrature on a window of
/// length `span`.
pub fn x2_quadrature_residual(rng: &mut ChaCha8Rng, n: usize, span: f64) -> f64 {
    let (f1, f2, f3) = (random_state(rng, n), random_state(rng, n), random_state(rng, n));
    let s: f64 = rng.random();
    let closed = x2_op(&f1, &f2, &f3, OperatorSpec::new(s, s + span)).total();
    let oracle = x2_nested_quadrature(&f1, &f2, &f3, s, s + span);
    relative(&(&closed - &oracle), &[&closed, &oracle])
}

/// Residuals of `<phi, X(phi, phi)> = 0` and
/// `2 <phi, X^2(phi, phi, phi)> + <X(phi, phi), X(phi, phi)> = 0`.
pub fn symmetry_residuals(rng: &mut ChaCha8Rng, n: usize) -> (f64, f64) {
    let f = random_state(rng, n);
    let (s, _, t) = random_triple(rng, 1.0);
    let spec = OperatorSpec::new(s, t);
    let x = x_op(&f, &f, spec);
    let x2 = x2_op(&f, &f, &f, spec).total();
    let fx = f.resized(x.max_mode());
    let fx2 = f.resized(x2.max_mode());
    let norm = |g: &SpectralCoeffs| g.l2_norm_sq().sqrt();
    let first = fx.l2_inner(&x).abs() / (norm(&f) * norm(&x)).max(f64::MIN_POSITIVE);
    let xx = x.l2_inner(&x);
    let cross = fx2.l2_inner(&x2);
    let second = (2.0 * cross + xx).abs() / (xx.abs() + 2.0 * norm(&f) * norm(&x2)).max(f64::MIN_POSITIVE);
    (first, second)
}

/// Untruncated minus `N`-truncated linear part of `X^2` against the time
/// integral of the conjugated correction, inputs on modes `1..=2N`.
pub fn gamma_identity_residual(rng: &mut ChaCha8Rng, n: usize, span: f64) -> f64 {
    let m = 2 * n;
    let (f1, f2, f3) = (random_state(rng, m), random_state(rng, m), random_state(rng, m));
    let s: f64 = rng.random();
    let spec = OperatorSpec::new(s, s + span);
    let full = x2_op(&f1, &f2, &f3, spec).breve;
    let truncated = x2_op(&f1, &f2, &f3, spec.galerkin(n)).breve;
    let diff = &full - &truncated.resized(full.max_mode());
    let oracle = gamma_integral_quadrature(&f1, &f2, &f3, n, s, s + span);
    let oracle = oracle.resized(diff.max_mode());
    let direct = gamma_correction(&f1, &f2, &f3, n).scale(span).resized(diff.max_mode());
    relative(&(&diff - &oracle), &[&diff, &oracle, &direct])
}

/// Residuals of the coboundary relations of the third-order operators over
/// a random triple in `[0, span]`: `(X3a, X3b, X3b with the uncorrected
/// right-hand side)`. With `A = X_{us}(phi1, phi2)`, `B = X_{us}(phi3, phi4)`:
///
/// * `delta X3a = X_{tu}(phi1, X^2_{us}(phi2, phi3, phi4)) + X^2_{tu}(phi1, phi2, X_{us}(phi3, phi4))`
/// * `delta X3b = 2 X_{tu}(A, B) + X^2_{tu}(B, phi1, phi2) + X^2_{tu}(A, phi3, phi4)`
/// * uncorrected: `X_{tu}(A, B) + X^2_{tu}(phi3, phi4, A) + X^2_{tu}(phi1, phi2, B)`
pub fn x3_residuals(rng: &mut ChaCha8Rng, n: usize, span: f64) -> (f64, f64, f64) {
    let f: Vec<SpectralCoeffs> = (0..4).map(|_| random_state(rng, n)).collect();
    let (s, u, t) = random_triple(rng, span);
    let (ts_a, ts_b) = x3_ops(&f[0], &f[1], &f[2], &f[3], s, t);
    let (tu_a, tu_b) = x3_ops(&f[0], &f[1], &f[2], &f[3], u, t);
    let (us_a, us_b) = x3_ops(&f[0], &f[1], &f[2], &f[3], s, u);
    let (tu, us) = (OperatorSpec::new(u, t), OperatorSpec::new(s, u));
    let x2 = |a: &SpectralCoeffs, b: &SpectralCoeffs, c: &SpectralCoeffs| x2_op(a, b, c, tu).total();

    let delta_a = &(&ts_a - &tu_a) - &us_a;
    let rhs_a = &x_op(&f[0], &x2_op(&f[1], &f[2], &f[3], us).total(), tu) + &x2(&f[0], &f[1], &x_op(&f[2], &f[3], us));
    let res_a = relative(&(&delta_a - &rhs_a), &[&ts_a, &tu_a, &us_a, &rhs_a]);

    let a = x_op(&f[0], &f[1], us);
    let b = x_op(&f[2], &f[3], us);
    let delta_b = &(&ts_b - &tu_b) - &us_b;
    let xab = x_op(&a, &b, tu);
    let rhs_b = &(&xab.scale(2.0) + &x2(&b, &f[0], &f[1])) + &x2(&a, &f[2], &f[3]);
    let res_b = relative(&(&delta_b - &rhs_b), &[&ts_b, &tu_b, &us_b, &rhs_b]);
    let printed = &(&xab + &x2(&f[2], &f[3], &a)) + &x2(&f[0], &f[1], &b);
    let res_printed = relative(&(&delta_b - &printed), &[&ts_b, &tu_b, &us_b, &printed]);
    (res_a, res_b, res_printed)
}
