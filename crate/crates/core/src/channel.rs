//! Qubit channel representation: block channel samples, map matrices in the
//! canonical operator basis, Choi states and infinitesimal steps.
//!
//! Basis ordering is `(ee, eg, ge, gg)` with the excited state first, i.e. the
//! component index `(i, j)` refers to `|i><j|`. The coherence element `b`
//! multiplies `rho_eg = <e|rho|g>`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::linalg::{self, c, CMat};
use crate::Result;

/// Channel of the excitation-number-conserving block form at one time:
/// `a` and `c` are the excited populations starting from the excited and
/// ground state, `b` multiplies the coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub t: f64,
    pub a: f64,
    pub c: f64,
    pub b: Complex64,
}

impl ChannelSample {
    pub fn identity(t: f64) -> Self {
        Self { t, a: 1.0, c: 0.0, b: c(1.0) }
    }

    /// Whether the sample is completely positive within `tol` (minimum Choi
    /// eigenvalue above `-tol`).
    pub fn is_cp(&self, tol: f64) -> Result<bool> {
        let m = map_matrix(self);
        let ch = choi(&m);
        Ok(linalg::min_eigenvalue(&ch)? >= -tol)
    }
}

/// Time series of channel samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct ChannelTrajectory {
    pub dt: f64,
    pub samples: Vec<ChannelSample>,
}

impl ChannelTrajectory {
    pub fn new(dt: f64, samples: Vec<ChannelSample>) -> Self {
        debug_assert!(dt > 0.0);
        debug_assert!(!samples.is_empty());
        Self { dt, samples }
    }

    pub fn t_final(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Builds a trajectory from element series; `t[k] = k * dt`.
    pub fn from_elements(dt: f64, a: &[f64], c_el: &[f64], b: &[Complex64]) -> Self {
        let samples = a
            .iter()
            .zip(c_el)
            .zip(b)
            .enumerate()
            .map(|(k, ((&a, &c_v), &b))| ChannelSample { t: k as f64 * dt, a, c: c_v, b })
            .collect();
        Self::new(dt, samples)
    }
}

/// 4x4 matrix representation of the block channel in the canonical basis.
pub fn map_matrix(s: &ChannelSample) -> CMat {
    let mut m = Array2::zeros((4, 4));
    m[(0, 0)] = c(s.a);
    m[(0, 3)] = c(s.c);
    m[(1, 1)] = s.b;
    m[(2, 2)] = s.b.conj();
    m[(3, 0)] = c(1.0 - s.a);
    m[(3, 3)] = c(1.0 - s.c);
    m
}

/// Choi matrix of a map given in the canonical basis:
/// `<ij| T^Gamma |kl> = <ik| T |jl>`.
pub fn choi(t: &CMat) -> CMat {
    let d = (t.dim().0 as f64).sqrt() as usize;
    let mut g = Array2::zeros(t.dim());
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    g[(d * i + j, d * k + l)] = t[(d * i + k, d * j + l)];
                }
            }
        }
    }
    g
}

/// Projector onto the maximally entangled state, in the same basis.
pub fn omega_projector(d: usize) -> CMat {
    let mut m = Array2::zeros((d * d, d * d));
    let v = c(1.0 / d as f64);
    for i in 0..d {
        for k in 0..d {
            m[(d * i + i, d * k + k)] = v;
        }
    }
    m
}

/// `1 - omega`.
pub fn omega_perp(d: usize) -> CMat {
    let mut m = omega_projector(d);
    m.mapv_inplace(|z| -z);
    for i in 0..d * d {
        m[(i, i)] += c(1.0);
    }
    m
}

/// Relative singular-value cutoff below which a map is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-10;

/// One infinitesimal step of the trajectory, `dT = T_next T_t^{-1}`.
///
/// Returns the step map and a flag marking that `T_t` was singular and the
/// pseudoinverse was used.
pub fn step_channel(t_now: &CMat, t_next: &CMat) -> Result<(CMat, bool)> {
    let cond = linalg::condition_number(t_now)?;
    if cond.is_finite() && cond < 1.0 / SINGULAR_RCOND {
        let inv = linalg::inverse(t_now)?;
        Ok((t_next.dot(&inv), false))
    } else {
        let p = linalg::pinv(t_now, SINGULAR_RCOND)?;
        Ok((t_next.dot(&p), true))
    }
}

/// Trace-preservation defect: deviation of the trace-recovering row from the
/// identity map's.
pub fn trace_preservation_defect(t: &CMat) -> f64 {
    let d = (t.dim().0 as f64).sqrt() as usize;
    let mut worst: f64 = 0.0;
    for j in 0..d {
        for l in 0..d {
            let mut sum = Complex64::new(0.0, 0.0);
            for i in 0..d {
                sum += t[(d * i + i, d * j + l)];
            }
            let expect = if j == l { 1.0 } else { 0.0 };
            worst = worst.max((sum - c(expect)).norm());
        }
    }
    worst
}
