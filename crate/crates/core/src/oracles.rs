//! Reference evaluations by time quadrature, used to cross-check the
//! closed-form operators.

use crate::operators::{gamma_correction, x_dot, Truncation};
use crate::quadrature::{integrate, panels_for};
use crate::spectral::SpectralCoeffs;

const ORDER: usize = 16;

fn omega2(n1: usize, n2: usize) -> f64 {
    3.0 * ((n1 + n2) * n1 * n2) as f64
}

/// `2 int_s^t Xdot_sigma(phi1, int_s^sigma Xdot_r(phi2, phi3) dr) dsigma`
/// with both integrals done by composite Gauss-Legendre quadrature.
pub fn x2_nested_quadrature(
    phi1: &SpectralCoeffs,
    phi2: &SpectralCoeffs,
    phi3: &SpectralCoeffs,
    s: f64,
    t: f64,
) -> SpectralCoeffs {
    let (n1, n2, n3) = (phi1.max_mode(), phi2.max_mode(), phi3.max_mode());
    let inner_omega = omega2(n2, n3);
    let outer_omega = omega2(n1, n2 + n3) + inner_omega;
    let outer_panels = panels_for(outer_omega, t - s, 2);
    integrate(s, t, outer_panels, ORDER, |sigma| {
        let inner_panels = panels_for(inner_omega, sigma - s, 1);
        let inner = integrate(s, sigma, inner_panels, ORDER, |r| x_dot(phi2, phi3, r, Truncation::Full));
        x_dot(phi1, &inner, sigma, Truncation::Full).scale(2.0)
    })
}

/// `int_s^t U(-r) Gamma^{(N)}(U(r) phi1, U(r) phi2, U(r) phi3) dr`.
pub fn gamma_integral_quadrature(
    phi1: &SpectralCoeffs,
    phi2: &SpectralCoeffs,
    phi3: &SpectralCoeffs,
    n: usize,
    s: f64,
    t: f64,
) -> SpectralCoeffs {
    let top = [phi1, phi2, phi3].iter().map(|f| f.max_mode()).max().unwrap_or(0) as f64;
    let panels = panels_for(6.0 * top * top * top, t - s, 2);
    integrate(s, t, panels, ORDER, |r| {
        gamma_correction(&phi1.airy_evolve(r), &phi2.airy_evolve(r), &phi3.airy_evolve(r), n).airy_evolve(-r)
    })
}

/// `int_s^t Xdot_sigma(phi, (sigma - s) psi) dsigma`.
pub fn xw_linear_quadrature(phi: &SpectralCoeffs, psi: &SpectralCoeffs, s: f64, t: f64) -> SpectralCoeffs {
    let panels = panels_for(omega2(phi.max_mode(), psi.max_mode()), t - s, 2);
    integrate(s, t, panels, ORDER, |sigma| x_dot(phi, &psi.scale(sigma - s), sigma, Truncation::Full))
}
