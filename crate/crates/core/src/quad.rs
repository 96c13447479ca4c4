//! Adaptive quadrature helpers.

use num_complex::Complex64;

use crate::{Error, Result};

/// Adaptive Simpson integration of a real-valued function.
///
/// Recursion stops when the local Richardson estimate falls below the
/// panel-share of `tol`, or errors out beyond `max_depth`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> Result<f64> {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = simpson(a, b, fa, fc, fb);
    simpson_recurse(f, a, b, fa, fb, fc, whole, tol, max_depth)
}

fn simpson(a: f64, b: f64, fa: f64, fc: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fc + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let (fd, fe) = (f(d), f(e));
    let left = simpson(a, c, fa, fd, fc);
    let right = simpson(c, b, fc, fe, fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol || !err.is_finite() {
        if !err.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "max recursion depth reached on [{a}, {b}] (err {err:.3e})"
        )));
    }
    let l = simpson_recurse(f, a, c, fa, fc, fd, left, tol / 2.0, depth - 1)?;
    let r = simpson_recurse(f, c, b, fc, fb, fe, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson integration of a complex-valued function over a set of
/// panels. Each panel is refined until its local Richardson estimate is below
/// `tol_per_panel`.
pub fn adaptive_simpson_complex_panels<F: Fn(f64) -> Complex64>(
    f: &F,
    breakpoints: &[f64],
    tol_per_panel: f64,
    max_depth: u32,
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let re = adaptive_simpson(&|x| f(x).re, a, b, tol_per_panel, max_depth)?;
        let im = adaptive_simpson(&|x| f(x).im, a, b, tol_per_panel, max_depth)?;
        total += Complex64::new(re, im);
    }
    Ok(total)
}

/// Nodes and weights for fixed-order Gauss-Legendre quadrature on `[a, b]`.
///
/// Computed by Newton iteration on the Legendre polynomial; order is small
/// enough that this is done on demand.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Initial guess (Abramowitz & Stegun 22.16.6).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for i in 0..n {
        nodes[i] = mid + half * nodes[i];
        weights[i] *= half;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
