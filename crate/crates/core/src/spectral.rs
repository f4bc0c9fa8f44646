//! Mean-zero periodic Fourier states.
//!
//! A [`SpectralCoeffs`] holds the coefficients of a real, mean-zero function
//! on the torus for the modes `1..=N`; the negative modes are the complex
//! conjugates and the zero mode is identically zero.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Errors raised while building or parsing spectral states.
#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("Lebesgue exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("state has modes up to {found}, expected at most {limit}")]
    Support { found: usize, limit: usize },
}

/// Japanese bracket `(1 + k^2)^{1/2}`.
#[inline]
pub fn bracket(k: f64) -> f64 {
    (1.0 + k * k).sqrt()
}

/// Weight exponent and Lebesgue exponent of a Fourier-Lebesgue norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FLNormParams {
    alpha: f64,
    p: f64,
}

impl FLNormParams {
    pub fn new(alpha: f64, p: f64) -> Result<Self, SpectralError> {
        if !(p >= 1.0) {
            return Err(SpectralError::InvalidExponent(p));
        }
        Ok(Self { alpha, p })
    }

    /// The L² norm up to the factor `sqrt(2 pi)`.
    pub fn l2() -> Self {
        Self { alpha: 0.0, p: 2.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// Fourier coefficients of a real mean-zero function, modes `|k| <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    // coeffs[k - 1] is the coefficient of mode k
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn zeros(max_mode: usize) -> Self {
        Self { coeffs: vec![Complex64::new(0.0, 0.0); max_mode] }
    }

    /// Builds a state from the coefficients of modes `1..=N`, in order.
    pub fn from_positive(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    /// Builds a state by evaluating `f(k)` for `k = 1..=N`.
    pub fn from_fn(max_mode: usize, mut f: impl FnMut(usize) -> Complex64) -> Self {
        Self { coeffs: (1..=max_mode).map(&mut f).collect() }
    }

    pub fn max_mode(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients of modes `1..=N`.
    pub fn positive(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn positive_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of an arbitrary integer mode; zero outside the support.
    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        if k > 0 && k <= n {
            self.coeffs[(k - 1) as usize]
        } else if k < 0 && k >= -n {
            self.coeffs[(-k - 1) as usize].conj()
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Sets mode `k` (and implicitly `-k`). Panics for `k = 0` or `|k| > N`.
    pub fn set(&mut self, k: i64, value: Complex64) {
        assert!(k != 0, "mode 0 is fixed at zero");
        let n = self.coeffs.len() as i64;
        assert!(k.abs() <= n, "mode {k} outside support {n}");
        if k > 0 {
            self.coeffs[(k - 1) as usize] = value;
        } else {
            self.coeffs[(-k - 1) as usize] = value.conj();
        }
    }

    /// Highest mode with a nonzero coefficient, 0 for the zero state.
    pub fn effective_max_mode(&self) -> usize {
        self.coeffs.iter().rposition(|c| c.norm_sqr() != 0.0).map_or(0, |i| i + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Copy with support enlarged (zero padded) or cut to `max_mode`.
    pub fn resized(&self, max_mode: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(max_mode, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|z| z * c).collect() }
    }

    /// `self + c * other`, support is the larger of the two.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        let n = self.max_mode().max(other.max_mode());
        let mut out = self.resized(n);
        for (o, z) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o += z * c;
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sup of coefficient differences, over the union of supports.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        (self - other).sup_norm()
    }

    /// `(sum_k <k>^{alpha p} |f(k)|^p)^{1/p}` over both signs of `k`.
    pub fn fl_norm(&self, params: FLNormParams) -> f64 {
        let FLNormParams { alpha, p } = params;
        if p.is_infinite() {
            return self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| bracket((i + 1) as f64).powf(alpha) * c.norm())
                .fold(0.0, f64::max);
        }
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (bracket((i + 1) as f64).powf(alpha) * c.norm()).powf(p))
            .sum();
        (2.0 * sum).powf(1.0 / p)
    }

    /// Real-space pairing `2 pi sum_k f(-k) g(k)`.
    pub fn l2_inner(&self, other: &Self) -> f64 {
        let s: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(f, g)| (f.conj() * g).re).sum();
        4.0 * std::f64::consts::PI * s
    }

    /// `|f|^2` in `L^2(T)`, i.e. `2 pi sum_k |f(k)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_inner(self)
    }

    /// Multiplies mode `k` by `exp(i k^3 t)`.
    pub fn airy_evolve(&self, t: f64) -> Self {
        if t == 0.0 {
            return self.clone();
        }
        Self::from_fn(self.max_mode(), |k| {
            let kf = k as f64;
            self.coeffs[k - 1] * Complex64::cis(kf * kf * kf * t)
        })
    }

    /// Zeroes every mode with `|k| > n`; the support shrinks to `min(N, n)`.
    pub fn project(&self, n: usize) -> Self {
        let m = n.min(self.max_mode());
        Self { coeffs: self.coeffs[..m].to_vec() }
    }

    /// `(ik/2) sum_{k1} f(k1) f(k - k1)`, on modes up to `2N`.
    pub fn nonlinearity(&self) -> Self {
        let n = self.max_mode() as i64;
        Self::from_fn(2 * n as usize, |k| {
            let k = k as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            for k1 in (k - n).max(-n)..=n.min(k + n) {
                acc += self.get(k1) * self.get(k - k1);
            }
            acc * Complex64::new(0.0, 0.5 * k as f64)
        })
    }

    /// CSV with a `k,re,im` header and one row per positive mode.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,re,im\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{},{:e},{:e}", i + 1, c.re, c.im);
        }
        out
    }

    /// Parses the format written by [`to_csv`](Self::to_csv). Missing modes
    /// are zero; the support is the largest mode listed.
    pub fn from_csv(text: &str) -> Result<Self, SpectralError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || (idx == 0 && line.starts_with('k')) {
                continue;
            }
            let err = |msg: &str| SpectralError::Parse { line: idx + 1, msg: msg.to_string() };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err("expected three fields k,re,im"));
            }
            let k: usize = fields[0].parse().map_err(|_| err("bad mode index"))?;
            if k == 0 {
                return Err(err("mode 0 must not be listed"));
            }
            let re: f64 = fields[1].parse().map_err(|_| err("bad real part"))?;
            let im: f64 = fields[2].parse().map_err(|_| err("bad imaginary part"))?;
            entries.push((k, Complex64::new(re, im)));
        }
        let n = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let mut out = Self::zeros(n);
        for (k, c) in entries {
            out.coeffs[k - 1] = c;
        }
        Ok(out)
    }
}

impl Add for &SpectralCoeffs {
    type Output = SpectralCoeffs;
    fn add(self, rhs: Self) -> SpectralCoeffs {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralCoeffs {
    type Output = SpectralCoeffs;
    fn sub(self, rhs: Self) -> SpectralCoeffs {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &SpectralCoeffs {
    type Output = SpectralCoeffs;
    fn neg(self) -> SpectralCoeffs {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralCoeffs {
    type Output = SpectralCoeffs;
    fn mul(self, rhs: f64) -> SpectralCoeffs {
        self.scale(rhs)
    }
}
