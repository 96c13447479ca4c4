//! One-excitation-sector engine.
//!
//! The interaction conserves total excitation number, so starting from the
//! environment vacuum the wavefunction stays in the span of `|e, 0>` and
//! `|g, k>` (one excitation in mode `k`). The Jordan-Wigner string acts as the
//! identity on these basis states, so the sector Hamiltonian is a real
//! symmetric `(N+1) x (N+1)` matrix that is diagonalized once for all times.

use num_complex::Complex64;

use crate::channel::{ChannelSample, ChannelTrajectory};
use crate::linalg::{ci, eigh_real};
use crate::model::{diagonalize_environment, SystemSpec};
use crate::{Error, Result};

/// Trajectory plus the boundary-echo diagnostic.
#[derive(Debug, Clone)]
pub struct SectorResult {
    pub trajectory: ChannelTrajectory,
    /// The time grid reaches past the reflection horizon `t J > N / 2`:
    /// finite-size echoes may contaminate late samples.
    pub echo_warning: bool,
}

/// Sector Hamiltonian in the basis `{|e,0>, |g,1>, ..., |g,N>}`:
/// diagonal `(Delta, E_1, ..., E_N)`, first row/column `Omega W_{m0,k}`.
pub fn sector_hamiltonian(spec: &SystemSpec) -> ndarray::Array2<f64> {
    let basis = diagonalize_environment(spec);
    let n = spec.n;
    let mut h = ndarray::Array2::zeros((n + 1, n + 1));
    h[(0, 0)] = spec.delta;
    for k in 1..=n {
        h[(k, k)] = basis.energies[k - 1];
        let v = spec.omega * basis.coupling_weight(spec.m0, k);
        h[(0, k)] = v;
        h[(k, 0)] = v;
    }
    h
}

fn echo_horizon_exceeded(spec: &SystemSpec, t_fin: f64) -> bool {
    t_fin * spec.j > spec.n as f64 / 2.0
}

/// Vacuum-environment channel: `a = |C_e|^2`, `b = C_e`, `c = 0` with
/// `C_e(t) = <e,0| exp(-i H t) |e,0>`.
pub fn evolve_vacuum(spec: &SystemSpec, dt: f64, steps: usize) -> Result<SectorResult> {
    if dt <= 0.0 || steps == 0 {
        return Err(Error::InvalidSpec("need dt > 0 and at least one step".into()));
    }
    let h = sector_hamiltonian(spec);
    let (vals, vecs) = eigh_real(&h)?;
    let weights: Vec<f64> = (0..=spec.n).map(|m| vecs[(0, m)] * vecs[(0, m)]).collect();

    let mut samples = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = s as f64 * dt;
        let mut ce = Complex64::new(0.0, 0.0);
        for (m, &w) in weights.iter().enumerate() {
            ce += ci(-vals[m] * t).exp() * w;
        }
        samples.push(ChannelSample { t, a: ce.norm_sqr(), c: 0.0, b: ce });
    }
    Ok(SectorResult {
        trajectory: ChannelTrajectory::new(dt, samples),
        echo_warning: echo_horizon_exceeded(spec, steps as f64 * dt),
    })
}

/// `c(t) = |<e,0| exp(-i H t) |g,k>|^2` for a single initial environment
/// excitation in mode `k`.
pub fn evolve_single_mode_c(
    spec: &SystemSpec,
    k: usize,
    dt: f64,
    steps: usize,
) -> Result<(Vec<f64>, bool)> {
    if k < 1 || k > spec.n {
        return Err(Error::InvalidSpec(format!(
            "mode index {k} outside 1..={}",
            spec.n
        )));
    }
    let h = sector_hamiltonian(spec);
    let (vals, vecs) = eigh_real(&h)?;
    let mut series = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = s as f64 * dt;
        let mut amp = Complex64::new(0.0, 0.0);
        for m in 0..=spec.n {
            amp += ci(-vals[m] * t).exp() * (vecs[(0, m)] * vecs[(k, m)]);
        }
        series.push(amp.norm_sqr());
    }
    Ok((series, echo_horizon_exceeded(spec, steps as f64 * dt)))
}
