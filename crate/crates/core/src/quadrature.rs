//! Gauss-Legendre rules and composite integration of vector-valued maps.

use crate::increments::NormedSpace;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule on `[a, b]`: `panels` equal panels with an
/// `order`-point rule on each. Returns `(nodes, weights)`.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let left = a + p as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(left + 0.5 * width * (xi + 1.0));
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

/// Panel count resolving oscillations up to angular frequency `omega` on an
/// interval of length `span`, with a floor of `min_panels`.
pub fn panels_for(omega: f64, span: f64, min_panels: usize) -> usize {
    let periods = (omega * span.abs() / std::f64::consts::TAU).ceil() as usize;
    (2 * periods).max(min_panels)
}

/// `int_a^b f(x) dx` by a composite Gauss-Legendre rule.
pub fn integrate<V: NormedSpace>(a: f64, b: f64, panels: usize, order: usize, f: impl Fn(f64) -> V) -> V {
    let (nodes, weights) = composite_rule(a, b, panels, order);
    let mut acc: Option<V> = None;
    for (x, w) in nodes.iter().zip(&weights) {
        let term = f(*x).scale(*w);
        acc = Some(match acc {
            None => term,
            Some(prev) => prev.add(&term),
        });
    }
    acc.expect("rule has at least one node")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-13, "n={n} deg={deg}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn composite_handles_oscillation() {
        let v = integrate(0.0, 3.0, panels_for(200.0, 3.0, 4), 12, |x: f64| (200.0 * x).cos());
        assert!((v - (600.0f64).sin() / 200.0).abs() < 1e-13);
    }
}
