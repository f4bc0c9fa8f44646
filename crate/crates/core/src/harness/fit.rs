//! Least-squares power-law fits on log-log data.

/// Fitted line `ln y = slope * ln x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln y`.
    pub residual: f64,
    pub points_used: usize,
    /// Whether the two coarsest points were discarded.
    pub dropped_coarse: bool,
    /// Outcome of the last [`FitResult::check`].
    pub pass: Option<bool>,
}

/// Residual above which the two coarsest points are discarded.
pub const DROP_THRESHOLD: f64 = 0.1;

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Fits `y ~ C x^slope`. Points must be ordered from coarsest to finest;
/// nonpositive values are skipped. With five or more usable points and a
/// residual above [`DROP_THRESHOLD`], the two coarsest are dropped and the
/// fit redone. Fewer than three usable points yield a NaN slope.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> FitResult {
    assert_eq!(x.len(), y.len());
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).unzip();
    if lx.len() < 3 {
        return FitResult {
            slope: f64::NAN,
            intercept: f64::NAN,
            residual: f64::NAN,
            points_used: lx.len(),
            dropped_coarse: false,
            pass: None,
        };
    }
    let (mut slope, mut intercept, mut residual) = least_squares(&lx, &ly);
    let mut used = lx.len();
    let mut dropped = false;
    if residual > DROP_THRESHOLD && lx.len() >= 5 {
        (slope, intercept, residual) = least_squares(&lx[2..], &ly[2..]);
        used -= 2;
        dropped = true;
    }
    FitResult { slope, intercept, residual, points_used: used, dropped_coarse: dropped, pass: None }
}

/// Order of decay of `errors` as the resolution `n` grows: the negated
/// slope of `error ~ n^slope`.
pub fn fit_decay_order(n: &[f64], errors: &[f64]) -> FitResult {
    let mut fit = fit_power_law(n, errors);
    fit.slope = -fit.slope;
    fit
}

impl FitResult {
    /// Records and returns whether the slope lies in `[lo, hi]`.
    pub fn check(&mut self, lo: f64, hi: f64) -> bool {
        let ok = self.slope >= lo && self.slope <= hi;
        self.pass = Some(ok);
        ok
    }
}
