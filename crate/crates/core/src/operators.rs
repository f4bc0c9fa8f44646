//! The KdV rough-path operators as exact Fourier multipliers.
//!
//! Notation: for an output mode `k` the first input sits at `k1` and the
//! second at `k2 = k - k1`; for the second-order operator the second slot is
//! itself a product and splits as `k2 = k21 + k22`. The resonance function
//! of the first-order operator is `3 k k1 k2 = k^3 - k1^3 - k2^3`.
//!
//! * [`x_op`] is the first-order operator `X_{ts}`.
//! * [`x2_op`] is the second-order operator, split into an oscillatory part
//!   (`hat`) and a part linear in `t - s` (`breve`).
//! * [`gamma_correction`] is the counter-term of the modified Galerkin flow.
//! * [`x3_ops`] are the two third-order iterated integrals, by quadrature.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::harness::fit::{fit_power_law, FitResult};
use crate::quadrature::{composite_rule, panels_for};
use crate::spectral::{bracket, FLNormParams, SpectralCoeffs};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Error, PartialEq)]
pub enum OperatorError {
    #[error("zero frequency in m-integral (a = {a}, b = {b})")]
    ZeroFrequency { a: f64, b: f64 },
    #[error("second bound needs arity >= 2 and p >= n/(n-1); got n = {n}, p = {p}")]
    IncompatibleExponent { n: usize, p: f64 },
    #[error("invalid regularity triple: {0}")]
    InvalidRegularity(String),
}

/// Regularity triple `(gamma, alpha, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityPair {
    pub gamma: f64,
    pub alpha: f64,
    pub p: f64,
}

impl RegularityPair {
    pub fn new(gamma: f64, alpha: f64, p: f64) -> Result<Self, OperatorError> {
        if !(0.0..=0.5).contains(&gamma) {
            return Err(OperatorError::InvalidRegularity(format!("gamma = {gamma} outside [0, 1/2]")));
        }
        if !(p >= 1.0) {
            return Err(OperatorError::InvalidRegularity(format!("p = {p} below 1")));
        }
        if !alpha.is_finite() {
            return Err(OperatorError::InvalidRegularity(format!("alpha = {alpha}")));
        }
        Ok(Self { gamma, alpha, p })
    }

    pub fn norm_params(&self) -> FLNormParams {
        FLNormParams::new(self.alpha, self.p).expect("p >= 1 checked on construction")
    }

    /// `1/p`, zero for `p = infinity`.
    fn inv_p(&self) -> f64 {
        1.0 / self.p
    }

    /// Membership in the region where the first-order operator is bounded
    /// with Hölder exponent `gamma`.
    pub fn in_region_d(&self) -> bool {
        let (g, a, ip) = (self.gamma, self.alpha, self.inv_p());
        if !(0.0..=0.5).contains(&g) {
            return false;
        }
        let knee = if self.p >= 2.0 { 0.25 } else { 0.5 * ip };
        if g < knee {
            let floor = if self.p >= 2.0 { -0.5 - ip + g } else { -1.0 + g };
            a >= floor
        } else {
            a > -1.0 - ip + 3.0 * g
        }
    }

    /// `max(-1/p, -1/2)`.
    pub fn alpha_star(&self) -> f64 {
        (-self.inv_p()).max(-0.5)
    }

    /// Membership in the region where the second-order operator is also
    /// bounded, with exponent `2 gamma`.
    pub fn in_region_dprime(&self) -> bool {
        self.in_region_d() && self.alpha > self.alpha_star()
    }
}

/// Mode truncation applied to an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// No truncation: the output carries every generated mode.
    Full,
    /// Every input, intermediate and output mode restricted to `|k| <= M`.
    Galerkin(usize),
    /// As `Galerkin` for the oscillatory part; the linear-in-time part is
    /// evaluated untruncated on `P_M` inputs and projected afterwards. This
    /// is the second-order germ of the `Gamma`-corrected Galerkin flow.
    Modified(usize),
}

impl Truncation {
    fn cap(self) -> Option<usize> {
        match self {
            Truncation::Full => None,
            Truncation::Galerkin(m) | Truncation::Modified(m) => Some(m),
        }
    }
}

/// Time pair and truncation for an operator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub s: f64,
    pub t: f64,
    pub truncation: Truncation,
}

impl OperatorSpec {
    /// # Panics
    /// If `s > t`.
    pub fn new(s: f64, t: f64) -> Self {
        assert!(s <= t, "operator time pair needs s <= t, got ({s}, {t})");
        Self { s, t, truncation: Truncation::Full }
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn galerkin(self, m: usize) -> Self {
        self.with_truncation(Truncation::Galerkin(m))
    }

    pub fn modified(self, m: usize) -> Self {
        self.with_truncation(Truncation::Modified(m))
    }
}

/// Two-sided dense view of a state, modes `-n..=n`.
struct Dense {
    n: i64,
    data: Vec<Complex64>,
}

impl Dense {
    fn new(f: &SpectralCoeffs, cap: Option<usize>) -> Self {
        let n = cap.map_or(f.max_mode(), |m| m.min(f.max_mode())) as i64;
        let data = (-n..=n).map(|k| f.get(k)).collect();
        Self { n, data }
    }

    #[inline]
    fn at(&self, k: i64) -> Complex64 {
        if k.abs() > self.n {
            ZERO
        } else {
            self.data[(k + self.n) as usize]
        }
    }
}

/// `e^{i x} - e^{i y}` without cancellation for close arguments.
#[inline]
fn cis_diff(x: f64, y: f64) -> Complex64 {
    Complex64::cis(0.5 * (x + y)) * Complex64::new(0.0, 2.0 * (0.5 * (x - y)).sin())
}

/// First-order multiplier `(e^{-i w s} - e^{-i w t}) / (6 k1 k2)`, `w = 3 k k1 k2`.
#[inline]
fn x_multiplier(k: i64, k1: i64, k2: i64, s: f64, t: f64) -> Complex64 {
    let w = (3 * k * k1 * k2) as f64;
    cis_diff(-w * s, -w * t) / (6 * k1 * k2) as f64
}

/// Coefficient of the linear-in-time part of the second-order operator.
#[inline]
fn breve_coefficient(k1: i64) -> Complex64 {
    // -1 / (6 i k1)
    Complex64::new(0.0, 1.0 / (6 * k1) as f64)
}

/// `int_0^h int_0^sigma e^{i a sigma + i b sigma1} dsigma1 dsigma` for `a + b != 0`.
fn m_origin(a: f64, b: f64, h: f64) -> Complex64 {
    if (a.abs() + b.abs()) * h < 0.1 {
        // sum_{j,l} (ia)^j (ib)^l h^{j+l+2} / (j! l! (l+1)(j+l+2))
        let ia = Complex64::new(0.0, a * h);
        let ib = Complex64::new(0.0, b * h);
        let mut total = ZERO;
        let mut pa = Complex64::new(1.0, 0.0);
        for j in 0..14 {
            let mut pb = Complex64::new(1.0, 0.0);
            for l in 0..(14 - j) {
                total += pa * pb / ((l + 1) as f64 * (j + l + 2) as f64);
                pb = pb * ib / (l + 1) as f64;
            }
            pa = pa * ia / (j + 1) as f64;
        }
        return total * h * h;
    }
    let ab = a + b;
    -cis_diff(ab * h, 0.0) / (b * ab) + cis_diff(a * h, 0.0) / (a * b)
}

#[inline]
fn m_unchecked(a: f64, b: f64, s: f64, t: f64) -> Complex64 {
    let h = t - s;
    if a + b == 0.0 {
        -cis_diff(a * h, 0.0) / (a * a)
    } else {
        Complex64::cis((a + b) * s) * m_origin(a, b, h)
    }
}

/// `int_s^t int_s^sigma e^{i a sigma} e^{i b sigma1}`, minus `(t - s)/(i b)`
/// when `a + b = 0` (the non-oscillating part).
pub fn m_integral(a: f64, b: f64, s: f64, t: f64) -> Result<Complex64, OperatorError> {
    if a == 0.0 || b == 0.0 {
        return Err(OperatorError::ZeroFrequency { a, b });
    }
    Ok(m_unchecked(a, b, s, t))
}

fn out_cap(natural: usize, trunc: Truncation) -> usize {
    trunc.cap().map_or(natural, |m| m.min(natural))
}

/// `X_{ts}(phi1, phi2)`.
pub fn x_op(phi1: &SpectralCoeffs, phi2: &SpectralCoeffs, spec: OperatorSpec) -> SpectralCoeffs {
    let cap = spec.truncation.cap();
    let (a, b) = (Dense::new(phi1, cap), Dense::new(phi2, cap));
    let out = out_cap(phi1.max_mode() + phi2.max_mode(), spec.truncation);
    SpectralCoeffs::from_fn(out, |k| {
        let k = k as i64;
        let mut acc = ZERO;
        for k1 in (k - b.n).max(-a.n)..=(k + b.n).min(a.n) {
            if k1 == 0 || k1 == k {
                continue;
            }
            let v1 = a.at(k1);
            if v1 == ZERO {
                continue;
            }
            let k2 = k - k1;
            acc += x_multiplier(k, k1, k2, spec.s, spec.t) * v1 * b.at(k2);
        }
        acc
    })
}

/// Time derivative of `X`: `(ik/2) sum' e^{-i 3 k k1 k2 sigma} phi1(k1) phi2(k2)`.
pub fn x_dot(phi1: &SpectralCoeffs, phi2: &SpectralCoeffs, sigma: f64, truncation: Truncation) -> SpectralCoeffs {
    let cap = truncation.cap();
    let (a, b) = (Dense::new(phi1, cap), Dense::new(phi2, cap));
    let out = out_cap(phi1.max_mode() + phi2.max_mode(), truncation);
    SpectralCoeffs::from_fn(out, |k| {
        let k = k as i64;
        let mut acc = ZERO;
        for k1 in (k - b.n).max(-a.n)..=(k + b.n).min(a.n) {
            if k1 == 0 || k1 == k {
                continue;
            }
            let k2 = k - k1;
            let w = (3 * k * k1 * k2) as f64;
            acc += Complex64::cis(-w * sigma) * a.at(k1) * b.at(k2);
        }
        acc * Complex64::new(0.0, 0.5 * k as f64)
    })
}

/// The two parts of the second-order operator.
#[derive(Debug, Clone, PartialEq)]
pub struct X2Parts {
    /// Oscillatory part.
    pub hat: SpectralCoeffs,
    /// Part linear in `t - s`; additive in the time pair.
    pub breve: SpectralCoeffs,
}

impl X2Parts {
    pub fn total(&self) -> SpectralCoeffs {
        &self.hat + &self.breve
    }
}

/// `(t-s) sum_{k1} c(k1) phi1(k1) [phi2(k) phi3(-k1) + phi2(-k1) phi3(k)]`
/// with `k1 != 0, k` and `|k - k1| <= k2_cap`.
fn breve_mode(a: &Dense, b: &Dense, c: &Dense, k: i64, k2_cap: i64, span: f64) -> Complex64 {
    let (bk, ck) = (b.at(k), c.at(k));
    if bk == ZERO && ck == ZERO {
        return ZERO;
    }
    let mut acc = ZERO;
    for k1 in (k - k2_cap).max(-a.n)..=(k + k2_cap).min(a.n) {
        if k1 == 0 || k1 == k {
            continue;
        }
        let v1 = a.at(k1);
        if v1 == ZERO {
            continue;
        }
        acc += breve_coefficient(k1) * v1 * (bk * c.at(-k1) + b.at(-k1) * ck);
    }
    acc * span
}

/// `X^2_{ts}(phi1, phi2, phi3)`, split into oscillatory and linear parts.
///
/// The full operator is `-(k k2 / 2)` times the double time integral of
/// `e^{i a sigma + i b sigma1}` with `a = -3 k k1 k2`, `b = -3 k2 k21 k22`,
/// summed over `k1 + k21 + k22 = k` with `k k1 k2 k21 k22 != 0`.
/// Resonant triples (`a + b = 0`) have `k21 = k` or `k21 = -k1` and
/// contribute a term linear in `t - s`; `breve` collects those terms, with
/// the single triple lying on both branches (`k1 = -k`, `k21 = k22 = k`)
/// counted once per branch, and `hat` is the remainder.
pub fn x2_op(phi1: &SpectralCoeffs, phi2: &SpectralCoeffs, phi3: &SpectralCoeffs, spec: OperatorSpec) -> X2Parts {
    let cap = spec.truncation.cap();
    let (a, b, c) = (Dense::new(phi1, cap), Dense::new(phi2, cap), Dense::new(phi3, cap));
    let k2_cap = match cap {
        None => b.n + c.n,
        Some(m) => (m as i64).min(b.n + c.n),
    };
    let natural = phi1.max_mode() + phi2.max_mode() + phi3.max_mode();
    let out = out_cap(natural, spec.truncation);
    let (s, t) = (spec.s, spec.t);
    let span = t - s;

    let hat = SpectralCoeffs::from_fn(out, |k| {
        let k = k as i64;
        let mut acc = ZERO;
        for k1 in (k - k2_cap).max(-a.n)..=(k + k2_cap).min(a.n) {
            if k1 == 0 || k1 == k {
                continue;
            }
            let v1 = a.at(k1);
            if v1 == ZERO {
                continue;
            }
            let k2 = k - k1;
            let fa = (-3 * k * k1 * k2) as f64;
            let mut inner = ZERO;
            for k21 in (k2 - c.n).max(-b.n)..=(k2 + c.n).min(b.n) {
                if k21 == 0 || k21 == k2 {
                    continue;
                }
                let v2 = b.at(k21);
                if v2 == ZERO {
                    continue;
                }
                let k22 = k2 - k21;
                let fb = (-3 * k2 * k21 * k22) as f64;
                inner += m_unchecked(fa, fb, s, t) * v2 * c.at(k22);
            }
            acc += inner * v1 * (-0.5 * (k * k2) as f64);
        }
        if 2 * k <= k2_cap {
            acc -= breve_coefficient(-k) * a.at(-k) * b.at(k) * c.at(k) * span;
        }
        acc
    });

    let breve_cap = match spec.truncation {
        Truncation::Galerkin(_) => k2_cap,
        Truncation::Full | Truncation::Modified(_) => i64::MAX / 4,
    };
    let breve = SpectralCoeffs::from_fn(out, |k| breve_mode(&a, &b, &c, k as i64, breve_cap, span));
    X2Parts { hat, breve }
}

/// `Gamma^{(N)}(phi1, phi2, phi3)`: the linear-part multiplier restricted to
/// interactions where some mode among `k, k1, k - k1` exceeds `N`.
pub fn gamma_correction(phi1: &SpectralCoeffs, phi2: &SpectralCoeffs, phi3: &SpectralCoeffs, n: usize) -> SpectralCoeffs {
    let (a, b, c) = (Dense::new(phi1, None), Dense::new(phi2, None), Dense::new(phi3, None));
    let n = n as i64;
    let out = phi2.max_mode().max(phi3.max_mode());
    SpectralCoeffs::from_fn(out, |k| {
        let k = k as i64;
        let (bk, ck) = (b.at(k), c.at(k));
        if bk == ZERO && ck == ZERO {
            return ZERO;
        }
        let mut acc = ZERO;
        for k1 in -a.n..=a.n {
            if k1 == 0 || k1 == k {
                continue;
            }
            if k <= n && k1.abs() <= n && (k - k1).abs() <= n {
                continue;
            }
            acc += breve_coefficient(k1) * a.at(k1) * (bk * c.at(-k1) + b.at(-k1) * ck);
        }
        acc
    })
}

/// `Gamma^{(N)}(u, u, u)` for `u` supported on `|k| <= N`:
/// `2 u(q) sum_{|q - k1| > N} c(k1) |u(k1)|^2`.
pub fn gamma_correction_diag(u: &SpectralCoeffs, n: usize) -> SpectralCoeffs {
    let a = Dense::new(u, Some(n));
    let n = n as i64;
    SpectralCoeffs::from_fn(a.n as usize, |q| {
        let q = q as i64;
        let mut acc = ZERO;
        for k1 in -a.n..(q - n) {
            acc += breve_coefficient(k1) * a.at(k1).norm_sqr();
        }
        acc * a.at(q) * 2.0
    })
}

/// Precomputed multipliers for the diagonal germ `X_{h0}(u, u) +
/// X^2_{h0}(u, u, u)` at a fixed step `h` and truncation.
///
/// Shifting the time pair to `(s, s + h)` is conjugation by the Airy group,
/// so one plan serves every step of a uniform scheme.
#[derive(Debug, Clone)]
pub struct StepPlan {
    h: f64,
    m: i64,
    truncation: Truncation,
    x_mult: Vec<Complex64>,
    x2_mult: Vec<Complex64>,
}

impl StepPlan {
    /// # Panics
    /// For `Truncation::Full`, which has no finite mode bound.
    pub fn new(h: f64, truncation: Truncation) -> Self {
        let m = truncation.cap().expect("step plans need a finite truncation") as i64;
        let mut x_mult = Vec::new();
        let mut x2_mult = Vec::new();
        for k in 1..=m {
            for k1 in (k - m).max(-m)..=m {
                if k1 == 0 || k1 == k {
                    continue;
                }
                let k2 = k - k1;
                x_mult.push(x_multiplier(k, k1, k2, 0.0, h));
                let fa = (-3 * k * k1 * k2) as f64;
                let coef = -0.5 * (k * k2) as f64;
                for k21 in (k2 - m).max(-m)..=(k2 + m).min(m) {
                    if k21 == 0 || k21 == k2 {
                        continue;
                    }
                    let fb = (-3 * k2 * k21 * (k2 - k21)) as f64;
                    x2_mult.push(m_unchecked(fa, fb, 0.0, h) * coef);
                }
            }
        }
        Self { h, m, truncation, x_mult, x2_mult }
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// `(X_{h0}(u, u), X^2_{h0}(u, u, u))` with the plan's truncation.
    pub fn apply(&self, u: &SpectralCoeffs) -> (SpectralCoeffs, SpectralCoeffs) {
        let m = self.m;
        let a = Dense::new(u, Some(m as usize));
        let mut x = SpectralCoeffs::zeros(m as usize);
        let mut x2 = SpectralCoeffs::zeros(m as usize);
        let (mut ix, mut ix2) = (0, 0);
        for k in 1..=m {
            let mut acc1 = ZERO;
            let mut acc2 = ZERO;
            for k1 in (k - m).max(-m)..=m {
                if k1 == 0 || k1 == k {
                    continue;
                }
                let k2 = k - k1;
                let v1 = a.at(k1);
                acc1 += self.x_mult[ix] * v1 * a.at(k2);
                ix += 1;
                let lo = (k2 - m).max(-m);
                let hi = (k2 + m).min(m);
                let width = (hi - lo + 1) as usize - usize::from(lo <= 0 && 0 <= hi) - usize::from(lo <= k2 && k2 <= hi);
                if v1 == ZERO {
                    ix2 += width;
                    continue;
                }
                let mut inner = ZERO;
                for k21 in lo..=hi {
                    if k21 == 0 || k21 == k2 {
                        continue;
                    }
                    inner += self.x2_mult[ix2] * a.at(k21) * a.at(k2 - k21);
                    ix2 += 1;
                }
                acc2 += inner * v1;
            }
            if 2 * k <= m {
                acc2 -= breve_coefficient(-k) * a.at(-k) * a.at(k) * a.at(k) * self.h;
            }
            x.positive_mut()[(k - 1) as usize] = acc1;
            x2.positive_mut()[(k - 1) as usize] = acc2;
        }
        let breve_cap = match self.truncation {
            Truncation::Galerkin(_) => m,
            _ => i64::MAX / 4,
        };
        for k in 1..=m {
            x2.positive_mut()[(k - 1) as usize] += breve_mode(&a, &a, &a, k, breve_cap, self.h);
        }
        (x, x2)
    }

    /// Germ on `(s, s + h)`: `U(-s) [X + X^2](U(s) v)`.
    pub fn germ_at(&self, v: &SpectralCoeffs, s: f64) -> SpectralCoeffs {
        let u = v.airy_evolve(s);
        let (x, x2) = self.apply(&u);
        (&x + &x2).airy_evolve(-s)
    }
}

/// Third-order iterated integrals `(X^{3a}_{ts}, X^{3b}_{ts})`:
///
/// * `X^{3a} = int_s^t Xdot_sigma(phi1, X^2_{sigma s}(phi2, phi3, phi4)) dsigma`
/// * `X^{3b} = 2 int_s^t Xdot_sigma(X_{sigma s}(phi1, phi2), X_{sigma s}(phi3, phi4)) dsigma`
///
/// The inner operators are exact; the outer integral uses a composite
/// Gauss-Legendre rule fine enough to resolve every phase. Untruncated;
/// intended for small `N`.
pub fn x3_ops(
    phi1: &SpectralCoeffs,
    phi2: &SpectralCoeffs,
    phi3: &SpectralCoeffs,
    phi4: &SpectralCoeffs,
    s: f64,
    t: f64,
) -> (SpectralCoeffs, SpectralCoeffs) {
    let n = [phi1, phi2, phi3, phi4].iter().map(|f| f.max_mode()).max().unwrap_or(0) as f64;
    let out_a = phi1.max_mode() + phi2.max_mode() + phi3.max_mode() + phi4.max_mode();
    let mut acc_a = SpectralCoeffs::zeros(out_a);
    let mut acc_b = SpectralCoeffs::zeros(out_a);
    if t == s {
        return (acc_a, acc_b);
    }
    let omega = 72.0 * n * n * n;
    let (nodes, weights) = composite_rule(s, t, panels_for(omega, t - s, 2), 16);
    for (sigma, w) in nodes.iter().zip(&weights) {
        let inner = OperatorSpec::new(s, *sigma);
        let x2 = x2_op(phi2, phi3, phi4, inner).total();
        acc_a = acc_a.axpy(*w, &x_dot(phi1, &x2, *sigma, Truncation::Full));
        let left = x_op(phi1, phi2, inner);
        let right = x_op(phi3, phi4, inner);
        acc_b = acc_b.axpy(2.0 * w, &x_dot(&left, &right, *sigma, Truncation::Full));
    }
    (acc_a, acc_b)
}

/// Which of the two operator bounds to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    /// `sup_{k0} [sum |m|^q]^{1/q}`, `1/p + 1/q = 1`.
    SupDual,
    /// `{sum_{k0} [sum |m|^qhat]^{p/qhat}}^{1/p}`, `qhat = p / (p - n/(n-1))`.
    Mixed,
}

/// Upper bound on the `FL^p` operator norm of the `n`-linear Fourier
/// multiplier `m(k0, k1, ..., kn)` (supported on `k0 + ... + kn = 0`), with
/// `k1..kn` ranging over `[-K, K]`. `m` returns the modulus.
pub fn multiplier_norm_bound(
    m: &dyn Fn(&[i64]) -> f64,
    n: usize,
    p: f64,
    cutoff: usize,
    variant: BoundVariant,
) -> Result<f64, OperatorError> {
    let exponent = match variant {
        BoundVariant::SupDual => {
            if !(p >= 1.0) || n == 0 {
                return Err(OperatorError::IncompatibleExponent { n, p });
            }
            if p == 1.0 {
                f64::INFINITY
            } else if p.is_infinite() {
                1.0
            } else {
                p / (p - 1.0)
            }
        }
        BoundVariant::Mixed => {
            if n < 2 {
                return Err(OperatorError::IncompatibleExponent { n, p });
            }
            let floor = n as f64 / (n as f64 - 1.0);
            if !(p >= floor) {
                return Err(OperatorError::IncompatibleExponent { n, p });
            }
            if p == floor {
                f64::INFINITY
            } else if p.is_infinite() {
                1.0
            } else {
                p / (p - floor)
            }
        }
    };
    let k = cutoff as i64;
    let offset = n as i64 * k;
    let mut per_k0 = vec![0.0f64; (2 * offset + 1) as usize];
    let mut tuple = vec![0i64; n + 1];
    let mut idx = vec![-k; n];
    loop {
        let sum: i64 = idx.iter().sum();
        tuple[0] = -sum;
        tuple[1..].copy_from_slice(&idx);
        let v = m(&tuple).abs();
        let slot = &mut per_k0[(tuple[0] + offset) as usize];
        if exponent.is_infinite() {
            *slot = slot.max(v);
        } else {
            *slot += v.powf(exponent);
        }
        let mut d = 0;
        loop {
            if d == n {
                break;
            }
            idx[d] += 1;
            if idx[d] <= k {
                break;
            }
            idx[d] = -k;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    let inner: Vec<f64> = per_k0
        .iter()
        .map(|&x| if exponent.is_infinite() { x } else { x.powf(1.0 / exponent) })
        .collect();
    Ok(match variant {
        BoundVariant::SupDual => inner.iter().copied().fold(0.0, f64::max),
        BoundVariant::Mixed => {
            if p.is_infinite() {
                inner.iter().copied().fold(0.0, f64::max)
            } else {
                inner.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    })
}

/// Modulus of the first-order multiplier in `FL^{alpha,p}` normalisation:
/// output weight `<k0>^alpha` over input weights `<k1>^alpha <k2>^alpha`,
/// with output mode `k = -k0`.
pub fn x_weighted_multiplier(tuple: &[i64], alpha: f64, s: f64, t: f64) -> f64 {
    let (k, k1, k2) = (-tuple[0], tuple[1], tuple[2]);
    if k == 0 || k1 == 0 || k2 == 0 {
        return 0.0;
    }
    let weight = bracket(k as f64).powf(alpha) / (bracket(k1 as f64) * bracket(k2 as f64)).powf(alpha);
    x_multiplier(k, k1, k2, s, t).norm() * weight
}

/// Random state on modes `1..=n`, normalised to unit `FL^{alpha,p}` norm.
/// Half of the draws are dense Gaussian, half are supported on one to three
/// random modes.
pub fn random_unit_state(rng: &mut ChaCha8Rng, n: usize, params: FLNormParams) -> SpectralCoeffs {
    let mut f = SpectralCoeffs::zeros(n);
    let gauss = |rng: &mut ChaCha8Rng| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    if rng.random_bool(0.5) {
        for c in f.positive_mut() {
            *c = gauss(rng);
        }
    } else {
        let count = rng.random_range(1..=3usize.min(n));
        for _ in 0..count {
            let k = rng.random_range(0..n);
            f.positive_mut()[k] = gauss(rng);
        }
    }
    let norm = f.fl_norm(params);
    if norm == 0.0 {
        f.positive_mut()[0] = Complex64::new(1.0, 0.0);
        let norm = f.fl_norm(params);
        return f.scale(1.0 / norm);
    }
    f.scale(1.0 / norm)
}

/// Largest observed `|op(phi_1..phi_r)| / prod |phi_i|` in `FL^{alpha,p}`
/// over `samples` random unit inputs on modes `1..=n`: a lower bound on
/// the operator norm.
pub fn empirical_operator_norm(
    op: &dyn Fn(&[SpectralCoeffs]) -> SpectralCoeffs,
    arity: usize,
    n: usize,
    params: FLNormParams,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let inputs: Vec<SpectralCoeffs> = (0..arity).map(|_| random_unit_state(&mut rng, n, params)).collect();
        best = best.max(op(&inputs).fl_norm(params));
    }
    best
}

/// Operator whose growth in `t - s` is probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOperator {
    X,
    X2Hat,
}

/// Result of [`holder_growth_probe`].
#[derive(Debug, Clone)]
pub struct GrowthProbe {
    pub spans: Vec<f64>,
    pub norms: Vec<f64>,
    pub fit: FitResult,
}

/// Fits `log |op_{h0}| ~ slope * log h` over the dyadic spans `2^{-j}` for
/// `j` in `levels`, with operator norms estimated by random sampling on
/// modes `1..=n`. The same inputs are used at every span.
pub fn holder_growth_probe(
    op: ProbeOperator,
    r: RegularityPair,
    n: usize,
    levels: std::ops::RangeInclusive<u32>,
    samples: usize,
    seed: u64,
) -> GrowthProbe {
    let params = r.norm_params();
    let mut spans = Vec::new();
    let mut norms = Vec::new();
    for j in levels {
        let h = 0.5f64.powi(j as i32);
        let spec = OperatorSpec::new(0.0, h);
        let value = match op {
            ProbeOperator::X => {
                empirical_operator_norm(&|f: &[SpectralCoeffs]| x_op(&f[0], &f[1], spec), 2, n, params, samples, seed)
            }
            ProbeOperator::X2Hat => empirical_operator_norm(
                &|f: &[SpectralCoeffs]| x2_op(&f[0], &f[1], &f[2], spec).hat,
                3,
                n,
                params,
                samples,
                seed,
            ),
        };
        spans.push(h);
        norms.push(value);
    }
    let fit = fit_power_law(&spans, &norms);
    GrowthProbe { spans, norms, fit }
}
