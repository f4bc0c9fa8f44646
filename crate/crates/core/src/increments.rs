//! Increment calculus on time grids.
//!
//! One- and two-parameter families indexed by grid points, the coboundaries
//! `delta` and `delta2`, Hölder-type norms, the sewing map realised as a
//! limit of dyadic Riemann sums, and the Garsia-Rodemich-Rumsey functional.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::spectral::SpectralCoeffs;

/// Value types the increment calculus works over.
pub trait NormedSpace: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn norm(&self) -> f64;
}

impl NormedSpace for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl NormedSpace for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// Spectral states are measured in the sup norm of their coefficients.
impl NormedSpace for SpectralCoeffs {
    fn zero_like(&self) -> Self {
        SpectralCoeffs::zeros(self.max_mode())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn scale(&self, c: f64) -> Self {
        SpectralCoeffs::scale(self, c)
    }
    fn norm(&self) -> f64 {
        self.sup_norm()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum IncrementError {
    #[error("a time grid needs at least two points")]
    TooFewPoints,
    #[error("grid points must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("sewing needs a dyadic grid")]
    NotDyadic,
    #[error("germ coboundary does not decay faster than linearly (ratio {ratio:.3} between levels 1 and 2)")]
    Precondition { ratio: f64 },
    #[error("Riemann sums did not settle by level {level}: last difference {difference:e}")]
    NoConvergence { level: u32, difference: f64 },
}

/// Strictly increasing time points, optionally flagged as a dyadic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    dyadic_level: Option<u32>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, IncrementError> {
        if points.len() < 2 {
            return Err(IncrementError::TooFewPoints);
        }
        if let Some(i) = points.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(IncrementError::NotIncreasing(i + 1));
        }
        Ok(Self { points, dyadic_level: None })
    }

    /// `m + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, m: usize) -> Self {
        assert!(m >= 1 && horizon > 0.0);
        let points = (0..=m).map(|i| horizon * i as f64 / m as f64).collect();
        Self { points, dyadic_level: None }
    }

    /// `2^level + 1` points on `[0, horizon]`.
    pub fn dyadic(horizon: f64, level: u32) -> Self {
        let mut g = Self::uniform(horizon, 1 << level);
        g.dyadic_level = Some(level);
        g
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn horizon(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn dyadic_level(&self) -> Option<u32> {
        self.dyadic_level
    }

    /// Index of the grid point nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        match self.points.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.points.len() => i - 1,
            Err(i) => {
                if t - self.points[i - 1] <= self.points[i] - t {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

/// Values on ordered grid pairs `s < t`; zero on the diagonal.
#[derive(Debug, Clone)]
pub struct TwoIndexField<V> {
    grid: TimeGrid,
    // values[i][j - i - 1] belongs to the pair (t_i, t_j)
    values: Vec<Vec<V>>,
    zero: V,
}

impl<V: NormedSpace> TwoIndexField<V> {
    /// Tabulates `f(s, t)` on every grid pair, in parallel.
    pub fn from_fn<F>(grid: &TimeGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> V + Sync,
    {
        Self::from_index_fn(grid, |i, j| f(grid.t(i), grid.t(j)))
    }

    /// Tabulates `f(i, j)` over grid index pairs `i < j`.
    pub fn from_index_fn<F>(grid: &TimeGrid, f: F) -> Self
    where
        F: Fn(usize, usize) -> V + Sync,
    {
        let m = grid.len();
        let values: Vec<Vec<V>> = (0..m - 1)
            .into_par_iter()
            .map(|i| (i + 1..m).map(|j| f(i, j)).collect())
            .collect();
        let zero = values[0][0].zero_like();
        Self { grid: grid.clone(), values, zero }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Value on the pair `(t_i, t_j)`, `i <= j`.
    pub fn get(&self, i: usize, j: usize) -> &V {
        assert!(i <= j, "two-index fields are stored for s <= t");
        if i == j {
            &self.zero
        } else {
            &self.values[i][j - i - 1]
        }
    }

    pub fn map<W: NormedSpace, F: Fn(&V) -> W + Sync>(&self, f: F) -> TwoIndexField<W>
    where
        V: Sync,
    {
        TwoIndexField::from_index_fn(&self.grid, |i, j| f(self.get(i, j)))
    }

    pub fn zip_with<F: Fn(&V, &V) -> V + Sync>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.grid, other.grid);
        Self::from_index_fn(&self.grid, |i, j| f(self.get(i, j), other.get(i, j)))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub(b))
    }

    /// Largest value norm over all pairs.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().map(NormedSpace::norm).fold(0.0, f64::max)
    }

    /// Iterates `(i, j, value)` over `i < j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &V)> {
        self.values
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(d, v)| (i, i + d + 1, v)))
    }
}

/// Values on ordered grid triples `s < u < t`.
#[derive(Debug, Clone)]
pub struct ThreeIndexField<V> {
    grid: TimeGrid,
    // values[i][j - i - 1][l - j - 1] belongs to (t_i, t_j, t_l)
    values: Vec<Vec<Vec<V>>>,
}

impl<V: NormedSpace> ThreeIndexField<V> {
    pub fn from_index_fn<F>(grid: &TimeGrid, f: F) -> Self
    where
        F: Fn(usize, usize, usize) -> V + Sync,
    {
        let m = grid.len();
        let values = (0..m.saturating_sub(2))
            .into_par_iter()
            .map(|i| (i + 1..m - 1).map(|j| (j + 1..m).map(|l| f(i, j, l)).collect()).collect())
            .collect();
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Value on `(s, u, t) = (t_i, t_j, t_l)`, requires `i < j < l`.
    pub fn get(&self, i: usize, j: usize, l: usize) -> &V {
        assert!(i < j && j < l);
        &self.values[i][j - i - 1][l - j - 1]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().flatten().map(NormedSpace::norm).fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize, &V)> {
        self.values.iter().enumerate().flat_map(|(i, plane)| {
            plane.iter().enumerate().flat_map(move |(dj, row)| {
                let j = i + dj + 1;
                row.iter().enumerate().map(move |(dl, v)| (i, j, j + dl + 1, v))
            })
        })
    }
}

/// `delta f_{ts} = f_t - f_s`.
pub fn delta_path<V: NormedSpace>(grid: &TimeGrid, path: &[V]) -> TwoIndexField<V> {
    assert_eq!(path.len(), grid.len(), "path must have one value per grid point");
    TwoIndexField::from_index_fn(grid, |i, j| path[j].sub(&path[i]))
}

/// `delta a_{tus} = a_{ts} - a_{tu} - a_{us}`.
pub fn delta2<V: NormedSpace>(a: &TwoIndexField<V>) -> ThreeIndexField<V> {
    ThreeIndexField::from_index_fn(a.grid(), |i, j, l| a.get(i, l).sub(a.get(j, l)).sub(a.get(i, j)))
}

/// `sup |a_{ts}| / (t - s)^mu` over grid pairs.
pub fn holder_norm<V: NormedSpace>(a: &TwoIndexField<V>, mu: f64) -> f64 {
    assert!(mu > 0.0);
    let g = a.grid();
    a.iter().map(|(i, j, v)| v.norm() / (g.t(j) - g.t(i)).powf(mu)).fold(0.0, f64::max)
}

/// `sup |h_{tus}| / ((u - s)^gamma (t - u)^rho)` over grid triples.
pub fn holder_norm_3<V: NormedSpace>(h: &ThreeIndexField<V>, gamma: f64, rho: f64) -> f64 {
    assert!(gamma > 0.0 && rho > 0.0);
    let g = h.grid();
    h.iter()
        .map(|(i, j, l, v)| v.norm() / ((g.t(j) - g.t(i)).powf(gamma) * (g.t(l) - g.t(j)).powf(rho)))
        .fold(0.0, f64::max)
}

/// `holder_norm_3(delta2(a), gamma, rho)` without tabulating the triples.
pub fn holder_norm_delta2<V: NormedSpace>(a: &TwoIndexField<V>, gamma: f64, rho: f64) -> f64 {
    let g = a.grid();
    let m = g.len();
    (0..m.saturating_sub(2))
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in i + 1..m - 1 {
                for l in j + 1..m {
                    let h = a.get(i, l).sub(a.get(j, l)).sub(a.get(i, j)).norm();
                    let w = (g.t(j) - g.t(i)).powf(gamma) * (g.t(l) - g.t(j)).powf(rho);
                    best = best.max(h / w);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// A two-parameter family that can be fed to [`sew`].
pub trait Germ<V>: Sync {
    /// Value on the time pair `(s, t)`.
    fn eval(&self, s: f64, t: f64) -> V;

    /// Finest dyadic level the germ is defined on; `None` for continuous germs.
    fn depth(&self) -> Option<u32> {
        None
    }
}

/// Wraps a closure `(s, t) -> V` as a continuous germ.
pub struct FnGerm<F>(pub F);

impl<V, F: Fn(f64, f64) -> V + Sync> Germ<V> for FnGerm<F> {
    fn eval(&self, s: f64, t: f64) -> V {
        (self.0)(s, t)
    }
}

/// A tabulated field is a germ limited to its own dyadic grid.
impl<V: NormedSpace> Germ<V> for TwoIndexField<V> {
    fn eval(&self, s: f64, t: f64) -> V {
        let i = self.grid.nearest_index(s);
        let j = self.grid.nearest_index(t);
        self.get(i, j).clone()
    }

    fn depth(&self) -> Option<u32> {
        self.grid.dyadic_level()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SewOptions {
    /// Sup-norm gap between successive levels that ends the refinement.
    pub tol: f64,
    /// Hard cap on the refinement level.
    pub max_level: u32,
    /// Ignore `tol` and refine down to the finest admissible level.
    pub exhaustive: bool,
    /// Check that the germ coboundary decays faster than linearly.
    pub check_precondition: bool,
}

impl Default for SewOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_level: 16, exhaustive: false, check_precondition: true }
    }
}

impl SewOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn exhaustive() -> Self {
        Self { exhaustive: true, check_precondition: false, ..Self::default() }
    }
}

/// Output of the sewing map on a grid.
#[derive(Debug, Clone)]
pub struct Sewn<V> {
    /// Sewn path, starting from zero at the first grid point.
    pub path: Vec<V>,
    /// `germ - delta(path)` on grid pairs.
    pub remainder: TwoIndexField<V>,
    /// Dyadic level of the last Riemann sums used.
    pub level: u32,
    /// Sup-norm gap between the last two levels.
    pub last_difference: f64,
}

/// Riemann sums of `germ` over `[0, t_j]` for every grid point, using the
/// level-`level` dyadic partition completed by `t_j`.
fn riemann_sums<V: NormedSpace, G: Germ<V> + ?Sized>(
    germ: &G,
    grid: &TimeGrid,
    grid_level: u32,
    level: u32,
) -> Vec<V> {
    let horizon = grid.horizon();
    let cells = 1usize << level;
    let tau = |i: usize| horizon * (i as f64 / cells as f64);
    let pieces: Vec<V> = (0..cells).into_par_iter().map(|i| germ.eval(tau(i), tau(i + 1))).collect();
    let mut cumulative = Vec::with_capacity(cells + 1);
    cumulative.push(pieces[0].zero_like());
    for p in &pieces {
        let next = cumulative[cumulative.len() - 1].add(p);
        cumulative.push(next);
    }
    (0..grid.len())
        .map(|j| {
            if level >= grid_level {
                cumulative[j << (level - grid_level)].clone()
            } else {
                let stride = 1usize << (grid_level - level);
                let (p, r) = (j / stride, j % stride);
                if r == 0 {
                    cumulative[p].clone()
                } else {
                    cumulative[p].add(&germ.eval(tau(p), grid.t(j)))
                }
            }
        })
        .collect()
}

fn path_gap<V: NormedSpace>(a: &[V], b: &[V]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).norm()).fold(0.0, f64::max)
}

/// Largest `|delta g|` over consecutive level-`level` triples.
fn coboundary_scale<V: NormedSpace, G: Germ<V> + ?Sized>(germ: &G, horizon: f64, level: u32) -> f64 {
    let cells = 1usize << level;
    let tau = |i: usize| horizon * (i as f64 / cells as f64);
    (0..cells - 1)
        .map(|i| {
            let (s, u, t) = (tau(i), tau(i + 1), tau(i + 2));
            germ.eval(s, t).sub(&germ.eval(u, t)).sub(&germ.eval(s, u)).norm()
        })
        .fold(0.0, f64::max)
}

/// Sews `germ` into a path on the dyadic `grid`.
///
/// Riemann sums over refining dyadic partitions of `[0, t_j]` are formed
/// level by level until two successive levels agree to `opts.tol` in sup
/// norm. The remainder `germ - delta(path)` is returned on grid pairs.
pub fn sew<V, G>(germ: &G, grid: &TimeGrid, opts: SewOptions) -> Result<Sewn<V>, IncrementError>
where
    V: NormedSpace,
    G: Germ<V> + ?Sized,
{
    let grid_level = grid.dyadic_level().ok_or(IncrementError::NotDyadic)?;
    let finest = match germ.depth() {
        Some(d) => d.min(opts.max_level),
        None => opts.max_level,
    };
    if opts.check_precondition && finest >= 2 {
        let coarse = coboundary_scale(germ, grid.horizon(), 1);
        if coarse > 0.0 {
            let ratio = coboundary_scale(germ, grid.horizon(), 2) / coarse;
            if ratio >= 0.5 {
                return Err(IncrementError::Precondition { ratio });
            }
        }
    }

    let mut level = 0;
    let mut path = riemann_sums(germ, grid, grid_level, 0);
    let mut difference = f64::INFINITY;
    while level < finest {
        level += 1;
        let next = riemann_sums(germ, grid, grid_level, level);
        difference = path_gap(&path, &next);
        path = next;
        if !opts.exhaustive && difference < opts.tol {
            break;
        }
    }
    if !opts.exhaustive && !(difference < opts.tol) {
        return Err(IncrementError::NoConvergence { level, difference });
    }

    let remainder = TwoIndexField::from_index_fn(grid, |i, j| {
        germ.eval(grid.t(i), grid.t(j)).sub(&path[j].sub(&path[i]))
    });
    Ok(Sewn { path, remainder, level, last_difference: difference })
}

/// Trapezoidal approximation of
/// `[ int int (|R_{ts}| / |t - s|^theta)^p dt ds ]^{1/p}` over the grid square.
///
/// The integrand is symmetric in `(s, t)`. On the diagonal, where the ratio
/// is undefined, the mean of the adjacent off-diagonal values is used.
pub fn grr_functional<V: NormedSpace>(r: &TwoIndexField<V>, theta: f64, p: f64) -> f64 {
    assert!(theta > 0.0 && p >= 1.0);
    let g = r.grid();
    let m = g.len();
    let weight = |i: usize| {
        let left = if i > 0 { g.t(i) - g.t(i - 1) } else { 0.0 };
        let right = if i + 1 < m { g.t(i + 1) - g.t(i) } else { 0.0 };
        0.5 * (left + right)
    };
    let value = |i: usize, j: usize| {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        (r.get(a, b).norm() / (g.t(b) - g.t(a)).powf(theta)).powf(p)
    };
    let mut total = 0.0;
    for i in 0..m {
        let wi = weight(i);
        for j in 0..m {
            let f = if i != j {
                value(i, j)
            } else {
                let mut acc = 0.0;
                let mut count = 0.0;
                if i > 0 {
                    acc += value(i - 1, i);
                    count += 1.0;
                }
                if i + 1 < m {
                    acc += value(i, i + 1);
                    count += 1.0;
                }
                acc / count
            };
            total += wi * weight(j) * f;
        }
    }
    total.powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_points() {
        assert_eq!(TimeGrid::new(vec![0.0]), Err(IncrementError::TooFewPoints));
        assert_eq!(TimeGrid::new(vec![0.0, 1.0, 1.0]), Err(IncrementError::NotIncreasing(2)));
    }

    #[test]
    fn nearest_index_rounds() {
        let g = TimeGrid::dyadic(1.0, 2);
        assert_eq!(g.nearest_index(0.26), 1);
        assert_eq!(g.nearest_index(0.4), 2);
        assert_eq!(g.nearest_index(7.0), 4);
        assert_eq!(g.nearest_index(-1.0), 0);
    }

    #[test]
    fn three_index_iteration_visits_every_triple() {
        let g = TimeGrid::uniform(1.0, 5);
        let h = ThreeIndexField::from_index_fn(&g, |i, j, l| (100 * i + 10 * j + l) as f64);
        let all: Vec<_> = h.iter().map(|(i, j, l, v)| (i, j, l, *v)).collect();
        assert_eq!(all.len(), 20);
        for (i, j, l, v) in all {
            assert!(i < j && j < l);
            assert_eq!(v, (100 * i + 10 * j + l) as f64);
        }
    }

    #[test]
    fn sew_requires_dyadic_grid() {
        let g = TimeGrid::uniform(1.0, 3);
        let germ = FnGerm(|s: f64, t: f64| t - s);
        assert_eq!(sew(&germ, &g, SewOptions::default()).unwrap_err(), IncrementError::NotDyadic);
    }

    #[test]
    fn sew_rejects_linear_coboundary() {
        let g = TimeGrid::dyadic(1.0, 3);
        // delta of sqrt(t - s) scales like sqrt(h): no sewing
        let germ = FnGerm(|s: f64, t: f64| (t - s).sqrt());
        assert!(matches!(sew(&germ, &g, SewOptions::default()), Err(IncrementError::Precondition { .. })));
    }
}
