//! Bath correlation functions of the chain coupled through site `m0`.
//!
//! The interaction picture correlators `alpha^+(t) = tr(rho_E c^dag_m0 u
//! e^{-i H_E t} u c_m0 e^{+i H_E t})` (and `alpha^-` with `c` and `c^dag`
//! swapped) carry the Jordan-Wigner string `u = prod_{l<m0} (1 - 2 n_l)`.
//! Three generators are provided: the no-string mode sum (exact for `m0 = 1`
//! or vacuum), the fermionic Gaussian-trace evaluation valid for any thermal
//! state and coupling site (the string enters through a sign conjugation of
//! the hopping matrix), and the infinite-temperature thermodynamic-limit
//! closed forms. Kernels and an envelope-based correlation-time estimator
//! quantify how fast the bath forgets.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::linalg::{ci, det, inverse, CMat};
use crate::model::{Occupations, SystemSpec};
use crate::special::bessel_j1_over_x;
use crate::{Error, Result};

/// Which generator produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    GaussianTrace,
    NsSum,
    ClosedFormInfiniteT,
}

/// Correlation functions on a uniform time grid.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub dt: f64,
    pub alpha_plus: Vec<Complex64>,
    pub alpha_minus: Vec<Complex64>,
    pub provenance: Provenance,
}

impl CorrelationSeries {
    /// `|alpha^+(0) + alpha^-(0) - 1|`: the anticommutator sum rule.
    pub fn sum_rule_defect(&self) -> f64 {
        (self.alpha_plus[0] + self.alpha_minus[0] - 1.0).norm()
    }
}

/// Chain mode-transformation matrix `W_{jk} = sqrt(2/(N+1)) sin(pi k j /
/// (N+1))` (symmetric, orthogonal, and an involution).
fn chain_w(n: usize) -> Array2<f64> {
    let norm = (2.0 / (n as f64 + 1.0)).sqrt();
    Array2::from_shape_fn((n, n), |(j, k)| {
        norm * (std::f64::consts::PI * (k + 1) as f64 * (j + 1) as f64 / (n as f64 + 1.0)).sin()
    })
}

/// Chain mode energies `E_k = 2J cos(pi k/(N+1)) + 2h`.
fn chain_energies(spec: &SystemSpec) -> Vec<f64> {
    (1..=spec.n)
        .map(|k| 2.0 * spec.j * (std::f64::consts::PI * k as f64 / (spec.n as f64 + 1.0)).cos()
            + 2.0 * spec.h)
        .collect()
}

/// No-string correlation functions from mode occupations:
/// `alpha^+ = sum_k |W_{m0,k}|^2 f_k e^{+i E_k t}`,
/// `alpha^- = sum_k |W_{m0,k}|^2 (1 - f_k) e^{-i E_k t}`.
///
/// Exact whenever the string acts trivially (`m0 = 1`, or vacuum occupations
/// where every annihilation kills the state).
pub fn correlation_ns(
    spec: &SystemSpec,
    occ: &Occupations,
    dt: f64,
    steps: usize,
) -> CorrelationSeries {
    let w = chain_w(spec.n);
    let energies = chain_energies(spec);
    let p = spec.m0 - 1;
    let weights: Vec<f64> = (0..spec.n).map(|k| w[(p, k)] * w[(p, k)]).collect();
    let f = occ.as_slice();
    let mut alpha_plus = Vec::with_capacity(steps + 1);
    let mut alpha_minus = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = s as f64 * dt;
        let mut ap = Complex64::new(0.0, 0.0);
        let mut am = Complex64::new(0.0, 0.0);
        for k in 0..spec.n {
            let phase = ci(energies[k] * t).exp();
            ap += weights[k] * f[k] * phase;
            am += weights[k] * (1.0 - f[k]) * phase.conj();
        }
        alpha_plus.push(ap);
        alpha_minus.push(am);
    }
    CorrelationSeries { dt, alpha_plus, alpha_minus, provenance: Provenance::NsSum }
}

/// The `2N x 2N` block-diagonal Gaussian-trace ingredient
/// `Gamma_f = tr(G C' C'^dag)` for `C' = (f_1..f_N, f^dag_1..f^dag_N)`:
/// `WVW (1 + e^{-(beta - it) Lambda})^{-1} WVW` on the annihilation block
/// and the `+` exponent on the creation block.
#[derive(Debug, Clone)]
pub struct GammaF {
    pub annihilation: CMat,
    pub creation: CMat,
}

/// Builds the [`GammaF`] blocks at time `t`.
pub fn gamma_f(spec: &SystemSpec, beta: f64, t: f64) -> GammaF {
    let n = spec.n;
    let w = chain_w(n);
    let energies = chain_energies(spec);
    let p = spec.m0 - 1;
    // WVW with V the string-sign matrix.
    let mut wvw = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                let sign = if l < p { -1.0 } else { 1.0 };
                acc += w[(i, l)] * sign * w[(l, j)];
            }
            wvw[(i, j)] = acc;
        }
    }
    let build = |sig: f64| -> CMat {
        let mut m = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let z = Complex64::new(beta, -t) * energies[k] * sig;
                    acc += wvw[(i, k)] * wvw[(k, j)] / (1.0 + (-z).exp());
                }
                m[(i, j)] = acc;
            }
        }
        m
    };
    GammaF { annihilation: build(1.0), creation: build(-1.0) }
}

/// Thermal correlation functions by fermionic Gaussian calculus, valid for
/// any coupling site.
///
/// Commuting the string through the evolution turns the correlators into
/// single-determinant Gaussian traces: with `g = e^{+iht} e^{-beta h} V
/// e^{-iht} V` (one-body matrices, `V` the string sign),
///
/// `alpha^+ = R [g (1+g)^{-1} g2^{-1}]_pp`,  `alpha^- = R [g2 (1+g)^{-1}]_pp`,
///
/// where `g2 = V e^{-iht} V`, `p = m0 - 1`, and `R = det((1+g)(1+e^{-beta
/// h})^{-1})` is the partition-function ratio. Everything is evaluated in
/// the mode basis where `g = A B` with `A` diagonal (entries `e^{(it -
/// beta) E_k}`) and `B` unitary: splitting `A = Abar Ahat` into a real
/// diagonal `Abar >= 1` and a bounded remainder gives `1 + g = Abar
/// (Abar^{-1} + Ahat B)`, whose second factor is well scaled, and the
/// diagonal part cancels against the partition function factor by factor.
/// This keeps the evaluation accurate at large `beta J`, where `e^{-beta h}`
/// alone is exponentially ill-conditioned.
pub fn correlation_gaussian(
    spec: &SystemSpec,
    beta: f64,
    dt: f64,
    steps: usize,
) -> Result<CorrelationSeries> {
    if beta <= 0.0 || dt <= 0.0 {
        return Err(Error::InvalidSpec("need beta > 0 and dt > 0".into()));
    }
    let n = spec.n;
    let p = spec.m0 - 1;
    let w = chain_w(n);
    let energies = chain_energies(spec);
    // String sign matrix in the mode basis (symmetric, orthogonal).
    let vt = {
        let mut m = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    let sign = if l < p { -1.0 } else { 1.0 };
                    acc += w[(i, l)] * sign * w[(l, j)];
                }
                m[(i, j)] = acc;
            }
        }
        to_complex_mat(&m)
    };
    let wp: Vec<f64> = (0..n).map(|k| w[(p, k)]).collect();
    // Per-mode ratio max(e^{-beta E}, 1) / (1 + e^{-beta E}) in (1/2, 1].
    let z_ratio: f64 = energies
        .iter()
        .map(|&e| 1.0 / (1.0 + (-beta * e.abs()).exp()))
        .product();

    let mut alpha_plus = Vec::with_capacity(steps + 1);
    let mut alpha_minus = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = s as f64 * dt;
        let phase_m: Vec<Complex64> = energies.iter().map(|&e| ci(-e * t).exp()).collect();
        // B = Vt diag(e^{-iEt}) Vt (the mode-space g2), and its inverse.
        let b = scale_cols(&vt, &phase_m).dot(&vt);
        let b_inv = scale_cols(&vt, &phase_m.iter().map(|z| z.conj()).collect::<Vec<_>>()).dot(&vt);
        let mut abar = vec![0.0; n];
        let mut ahat = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let mag = (-beta * energies[k]).exp();
            abar[k] = mag.max(1.0);
            ahat[k] = ci(energies[k] * t).exp() * (mag / abar[k]);
        }
        // C = Abar^{-1} + Ahat B: well scaled; 1 + g = Abar C.
        let mut cmat = scale_rows(&b, &ahat);
        for k in 0..n {
            cmat[(k, k)] += 1.0 / abar[k];
        }
        let ratio = z_ratio * det(&cmat)?;
        if !ratio.is_finite() {
            return Err(Error::Linalg(
                "Gaussian-trace partition ratio overflowed; reduce beta or N".into(),
            ));
        }
        // (1+g)^{-1} = C^{-1} Abar^{-1}.
        let c_inv = inverse(&cmat)?;
        let g_resolvent = scale_cols(&c_inv, &abar.iter().map(|&x| Complex64::new(1.0 / x, 0.0)).collect::<Vec<_>>());
        // g (1+g)^{-1} = 1 - (1+g)^{-1}.
        let mut occ_mat = -&g_resolvent;
        for k in 0..n {
            occ_mat[(k, k)] += 1.0;
        }
        let x_plus = occ_mat.dot(&b_inv);
        let x_minus = b.dot(&g_resolvent);
        let project = |m: &CMat| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    acc += wp[i] * m[(i, j)] * wp[j];
                }
            }
            acc
        };
        alpha_plus.push(ratio * project(&x_plus));
        alpha_minus.push(ratio * project(&x_minus));
    }
    Ok(CorrelationSeries {
        dt,
        alpha_plus,
        alpha_minus,
        provenance: Provenance::GaussianTrace,
    })
}

/// Brute-force correlators in the full `2^N` Fock space: Jordan-Wigner
/// fermion matrices built explicitly, thermal state and evolution by exact
/// diagonalization. Exponential in `N`; serves as the reference the
/// Gaussian-trace evaluation is checked against.
pub fn correlation_dense_trace(
    spec: &SystemSpec,
    beta: f64,
    dt: f64,
    steps: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    use crate::linalg::{dagger, evolution_operator, to_complex};
    let n = spec.n;
    if n > 12 {
        return Err(Error::DenseCap { n, cap: 12, bytes: 16usize << (2 * n) });
    }
    let dim = 1usize << n;
    // c_j (0-based site j = bit j) with string sign over lower bits.
    let mut c_ops: Vec<Array2<f64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut m = Array2::<f64>::zeros((dim, dim));
        for st in 0..dim {
            if st & (1 << j) != 0 {
                let parity = (st & ((1 << j) - 1)).count_ones();
                let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
                m[(st ^ (1 << j), st)] = sign;
            }
        }
        c_ops.push(m);
    }
    let mut h_env = Array2::<f64>::zeros((dim, dim));
    for i in 0..n {
        h_env = h_env + 2.0 * spec.h * &c_ops[i].t().dot(&c_ops[i]);
        if i + 1 < n {
            let hop = c_ops[i].t().dot(&c_ops[i + 1]);
            h_env = h_env + spec.j * (&hop + &hop.t());
        }
    }
    let (vals, vecs) = crate::linalg::eigh_real(&h_env)?;
    let e0 = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut rho = Array2::<f64>::zeros((dim, dim));
    let mut z = 0.0;
    for m in 0..dim {
        let wgt = (-beta * (vals[m] - e0)).exp();
        z += wgt;
        for a in 0..dim {
            for b in 0..dim {
                rho[(a, b)] += wgt * vecs[(a, m)] * vecs[(b, m)];
            }
        }
    }
    rho /= z;
    let rho = to_complex(&rho);
    let p = spec.m0 - 1;
    let mut u = CMat::zeros((dim, dim));
    for st in 0..dim {
        let parity = (st & ((1 << p) - 1)).count_ones();
        u[(st, st)] = Complex64::new(if parity % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    let cc = to_complex(&c_ops[p]);
    let cd = dagger(&cc);
    let vecs_c = to_complex(&vecs);
    let mut ap = Vec::with_capacity(steps + 1);
    let mut am = Vec::with_capacity(steps + 1);
    for st in 0..=steps {
        let t = st as f64 * dt;
        let em = evolution_operator(&vals, &vecs_c, t);
        let ep = dagger(&em);
        let middle = u.dot(&em).dot(&u);
        ap.push(rho.dot(&cd).dot(&middle).dot(&cc).dot(&ep).diag().sum());
        am.push(rho.dot(&cc).dot(&middle).dot(&cd).dot(&ep).diag().sum());
    }
    Ok((ap, am))
}

fn to_complex_mat(m: &Array2<f64>) -> CMat {
    m.mapv(|x| Complex64::new(x, 0.0))
}

fn scale_rows(m: &CMat, d: &[Complex64]) -> CMat {
    let n = m.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| d[i] * m[(i, j)])
}

fn scale_cols(m: &CMat, d: &[Complex64]) -> CMat {
    let n = m.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| m[(i, j)] * d[j])
}

/// Runs [`correlation_gaussian`] at increasing chain length (preserving the
/// coupling-site role: edge stays edge, center stays center) until doubling
/// `N` changes the result by less than `tol` on the grid. Returns the
/// converged series and the chain length used.
pub fn correlation_gaussian_converged(
    spec: &SystemSpec,
    beta: f64,
    dt: f64,
    steps: usize,
    tol: f64,
    n_max: usize,
) -> Result<(CorrelationSeries, usize)> {
    let rebuild = |n: usize| -> Result<SystemSpec> {
        let m0 = if spec.m0 == 1 {
            1
        } else if spec.is_center_coupled() {
            (n + 1) / 2
        } else {
            (spec.m0 * (n + 1) / (spec.n + 1)).max(1)
        };
        SystemSpec::new(n, spec.j, spec.h, spec.omega, spec.delta, m0)
    };
    let mut n = spec.n;
    let mut prev = correlation_gaussian(&rebuild(n)?, beta, dt, steps)?;
    while n < n_max {
        let n_next = 2 * n + 1;
        let next = correlation_gaussian(&rebuild(n_next)?, beta, dt, steps)?;
        let dev = prev
            .alpha_plus
            .iter()
            .zip(&next.alpha_plus)
            .chain(prev.alpha_minus.iter().zip(&next.alpha_minus))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        if dev < tol {
            return Ok((next, n_next));
        }
        prev = next;
        n = n_next;
    }
    Err(Error::Quadrature(format!(
        "correlation functions not converged in chain length by N = {n_max}"
    )))
}

/// Infinite-temperature thermodynamic-limit closed forms.
///
/// Center coupling: `alpha^+ = (1/2) e^{+i2ht} e^{-J^2 t^2}`; edge coupling:
/// `alpha^+ = e^{+i2ht} J_1(2Jt)/(2Jt)`, whose `t -> 0` limit `1/2` makes it
/// satisfy the sum rule without any extra prefactor. In both cases
/// `alpha^- = conj(alpha^+)`.
pub fn closed_form_infinite_t(
    spec: &SystemSpec,
    dt: f64,
    steps: usize,
) -> Result<CorrelationSeries> {
    let edge = spec.m0 == 1;
    if !edge && !spec.is_center_coupled() {
        return Err(Error::Unsupported(
            "infinite-temperature closed forms exist only for edge or center coupling".into(),
        ));
    }
    let mut alpha_plus = Vec::with_capacity(steps + 1);
    let mut alpha_minus = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = s as f64 * dt;
        let envelope = if edge {
            bessel_j1_over_x(2.0 * spec.j * t)
        } else {
            0.5 * (-spec.j * spec.j * t * t).exp()
        };
        let ap = ci(2.0 * spec.h * t).exp() * envelope;
        alpha_plus.push(ap);
        alpha_minus.push(ap.conj());
    }
    Ok(CorrelationSeries {
        dt,
        alpha_plus,
        alpha_minus,
        provenance: Provenance::ClosedFormInfiniteT,
    })
}

/// Memory kernels `K±(t) = Re(alpha±(t) e^{∓i Delta t})` entering the
/// emitter's integro-differential equation.
pub fn kernels(series: &CorrelationSeries, delta: f64) -> (Vec<f64>, Vec<f64>) {
    let k = |alpha: &[Complex64], sign: f64| -> Vec<f64> {
        alpha
            .iter()
            .enumerate()
            .map(|(s, a)| (a * ci(sign * delta * s as f64 * series.dt).exp()).re)
            .collect()
    };
    (k(&series.alpha_plus, -1.0), k(&series.alpha_minus, 1.0))
}

/// Magnitude of the analytic signal (Hilbert-transform envelope) of a real
/// series.
pub fn envelope(series: &[f64], _dt: f64) -> Vec<f64> {
    let m = series.len();
    // Even mirror extension: the FFT-based transform assumes periodicity,
    // and the raw series jumps at the wrap point, which would contaminate
    // both ends of the envelope.
    let mut ext: Vec<f64> = series.to_vec();
    if m > 2 {
        ext.extend(series[1..m - 1].iter().rev());
    }
    let n = ext.len();
    let mut buf: Vec<Complex64> = ext.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == n / 2) {
            // DC (and Nyquist for even length) stay untouched.
        } else if k < n.div_ceil(2) {
            *z *= 2.0;
        } else {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf[..m].iter().map(|z| z.norm() / n as f64).collect()
}

/// Correlation-time estimate of a kernel.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationTime {
    /// First time after which the envelope stays below `e^{-1}` of its
    /// maximum; `+inf` when that never happens within the grid.
    pub tau_c: f64,
    /// The envelope never settles below the threshold within the grid.
    pub no_decay: bool,
    /// The tail falls off slowly (the kernel magnitude still exceeds
    /// `e^{-3}` of its maximum beyond five correlation times): power-law
    /// rather than (super)exponential memory loss.
    pub slow_decay: bool,
}

impl CorrelationTime {
    /// Markovianity figure of merit `Omega * tau_c`.
    pub fn omega_tau(&self, omega: f64) -> f64 {
        omega * self.tau_c
    }
}

/// Running maximum of `|series|` from each index to the end: a monotone
/// upper envelope free of the `1/t` tail the analytic signal picks up from
/// one-sided data.
pub fn tail_envelope(series: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; series.len()];
    let mut run = 0.0_f64;
    for i in (0..series.len()).rev() {
        run = run.max(series[i].abs());
        out[i] = run;
    }
    out
}

/// Estimates the correlation time of a real kernel sampled at spacing `dt`.
///
/// The threshold crossing uses the running-max envelope: the
/// analytic-signal magnitude acquires an algebraic (Dawson-like) tail even
/// for a pure Gaussian kernel and would overestimate `tau_c`, while the
/// running maximum reproduces `tau_c = 1/J` for `e^{-J^2 t^2}` exactly.
pub fn correlation_time(kernel: &[f64], dt: f64) -> CorrelationTime {
    let env = tail_envelope(kernel);
    let max = env.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return CorrelationTime { tau_c: 0.0, no_decay: false, slow_decay: false };
    }
    let thr = max / std::f64::consts::E;
    // Smallest index from which the envelope never exceeds the threshold.
    let mut idx = None;
    for i in (0..env.len()).rev() {
        if env[i] >= thr {
            break;
        }
        idx = Some(i);
    }
    match idx {
        None => CorrelationTime { tau_c: f64::INFINITY, no_decay: true, slow_decay: true },
        Some(i) => {
            let tau_c = i as f64 * dt;
            let probe = ((5.0 * tau_c / dt).round() as usize).min(env.len() - 1);
            let slow_decay = env[probe] > max * (-3.0_f64).exp();
            CorrelationTime { tau_c, no_decay: false, slow_decay }
        }
    }
}
