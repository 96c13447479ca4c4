//! Bessel functions of the first kind, used by the infinite-temperature
//! closed forms of the bath correlation functions.

use crate::quad::gauss_legendre;

/// `J_n(x)` from the integral representation
/// `J_n(x) = (1/pi) int_0^pi cos(n theta - x sin theta) d theta`,
/// evaluated by Gauss-Legendre quadrature. The integrand's total phase grows
/// like `|x|`, so the order scales with the argument; convergence is
/// spectral once the oscillations are resolved.
fn bessel_j(n: u32, x: f64) -> f64 {
    let order = 40 + x.abs().ceil() as usize;
    let (nodes, weights) = gauss_legendre(order, 0.0, std::f64::consts::PI);
    let mut acc = 0.0;
    for (theta, w) in nodes.iter().zip(&weights) {
        acc += w * (n as f64 * theta - x * theta.sin()).cos();
    }
    acc / std::f64::consts::PI
}

/// Bessel function `J_0(x)`.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

/// Bessel function `J_1(x)`.
pub fn bessel_j1(x: f64) -> f64 {
    bessel_j(1, x)
}

/// `J_1(x) / x`, continued through `x = 0` with its limit `1/2`.
pub fn bessel_j1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        // Series J_1(x)/x = 1/2 - x^2/16 + O(x^4).
        0.5 - x * x / 16.0
    } else {
        bessel_j1(x) / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun tables.
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-12);
        assert!((bessel_j1(0.0)).abs() < 1e-12);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-12);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-12);
        assert!((bessel_j0(10.0) + 0.245_935_764_451_348_3).abs() < 1e-12);
        assert!((bessel_j1(10.0) - 0.043_472_746_168_861_44).abs() < 1e-12);
        assert!((bessel_j0(40.0) - 0.007_366_890_584_236_951).abs() < 1e-11);
    }

    #[test]
    fn derivative_identity() {
        // J_0'(x) = -J_1(x).
        for &x in &[0.3, 1.7, 6.2, 15.0] {
            let h = 1e-5;
            let d = (bessel_j0(x + h) - bessel_j0(x - h)) / (2.0 * h);
            assert!((d + bessel_j1(x)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn j1_over_x_continuous_at_zero() {
        assert!((bessel_j1_over_x(0.0) - 0.5).abs() < 1e-12);
        assert!((bessel_j1_over_x(1e-7) - 0.5).abs() < 1e-12);
        assert!((bessel_j1_over_x(2e-6) - bessel_j1(2e-6) / 2e-6).abs() < 1e-10);
    }
}
