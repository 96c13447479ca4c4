//! Gaussian (free-fermion) engine for edge coupling `m0 = 1`.
//!
//! With the emitter exchanging excitations with the first chain site, the
//! Jordan-Wigner string between the two is trivial and the full problem is
//! quadratic in fermions: a single `(N+1) x (N+1)` one-body Hamiltonian
//! governs all channel elements. One eigendecomposition yields the
//! single-particle propagator `P(t) = exp(-i H t)`; the channel is read off
//! from its first row and the initial hole matrix `M = <c_i c_j^dag>`.
//!
//! The populations follow from `a = 1 - (P M P^dag)_00` with the emitter
//! slot empty, the coherence is `b = P_00`, and `a - c = |P_00|^2` holds for
//! every number-conserving environment state, which forces `gamma_1 = 0`
//! identically in this geometry.

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::{ChannelSample, ChannelTrajectory};
use crate::linalg::ci;
use crate::model::{diagonalize_environment, occupations, EnvInitialState, SystemSpec};
use crate::{Error, Result};

/// Trajectory plus the boundary-echo diagnostic.
#[derive(Debug, Clone)]
pub struct GaussianResult {
    pub trajectory: ChannelTrajectory,
    /// The time grid reaches past `t J > N`: reflections off the far
    /// boundary can contaminate late samples.
    pub echo_warning: bool,
}

/// One-body Hamiltonian in the site basis `{emitter, 1, ..., N}`:
/// diagonal `(Delta, 2h, ..., 2h)`, off-diagonal `(Omega, J, ..., J)`.
///
/// Only defined for edge coupling; for `m0 > 1` the string operator makes
/// the emitter coupling non-quadratic.
pub fn single_particle_h(spec: &SystemSpec) -> Result<Array2<f64>> {
    if spec.m0 != 1 {
        return Err(Error::Unsupported(
            "free-fermion engine requires edge coupling m0 = 1".into(),
        ));
    }
    let n = spec.n;
    let mut h = Array2::zeros((n + 1, n + 1));
    h[(0, 0)] = spec.delta;
    for i in 1..=n {
        h[(i, i)] = 2.0 * spec.h;
    }
    h[(0, 1)] = spec.omega;
    h[(1, 0)] = spec.omega;
    for i in 1..n {
        h[(i, i + 1)] = spec.j;
        h[(i + 1, i)] = spec.j;
    }
    Ok(h)
}

/// Environment hole matrix `M_E[i,j] = <c_i c_j^dag>` in the site basis for a
/// number-diagonal state with mode occupations `f_k`.
fn env_hole_matrix(spec: &SystemSpec, env: &EnvInitialState) -> Result<Array2<f64>> {
    let basis = diagonalize_environment(spec);
    let f = occupations(spec, &basis, env)?;
    let n = spec.n;
    let mut m = Array2::eye(n);
    for k in 1..=n {
        let fk = f.as_slice()[k - 1];
        if fk == 0.0 {
            continue;
        }
        for i in 0..n {
            let wi = basis.coupling_weight(i + 1, k);
            for j in 0..n {
                m[(i, j)] -= fk * wi * basis.coupling_weight(j + 1, k);
            }
        }
    }
    Ok(m)
}

/// Exact channel for edge coupling from the single-particle propagator.
///
/// `b = P_00(t)`, `a = 1 - (P M P^dag)_00` with the emitter slot of the hole
/// matrix empty (excited emitter), and `c = a - |P_00|^2`.
pub fn channel_m01(
    spec: &SystemSpec,
    env: &EnvInitialState,
    dt: f64,
    steps: usize,
) -> Result<GaussianResult> {
    if dt <= 0.0 || steps == 0 {
        return Err(Error::InvalidSpec("need dt > 0 and at least one step".into()));
    }
    let h = single_particle_h(spec)?;
    let (vals, vecs) = crate::linalg::eigh_real(&h)?;
    let m_env = env_hole_matrix(spec, env)?;
    let n = spec.n;

    // P_0i(t) = sum_m V[0,m] V[i,m] exp(-i lambda_m t): precompute the
    // weight matrix U[i,m] = V[0,m] V[i,m].
    let mut u = Array2::<f64>::zeros((n + 1, n + 1));
    for m in 0..=n {
        let v0 = vecs[(0, m)];
        for i in 0..=n {
            u[(i, m)] = v0 * vecs[(i, m)];
        }
    }

    let mut samples = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = s as f64 * dt;
        let phases: Vec<Complex64> = vals.iter().map(|&l| ci(-l * t).exp()).collect();
        let mut p0 = vec![Complex64::new(0.0, 0.0); n + 1];
        for i in 0..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..=n {
                acc += phases[m] * u[(i, m)];
            }
            p0[i] = acc;
        }
        let b = p0[0];
        // Quadratic form over the environment block only (emitter slot of
        // the excited-state hole matrix vanishes).
        let mut hole = 0.0;
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += m_env[(i, j)] * p0[j + 1].conj();
            }
            hole += (p0[i + 1] * row).re;
        }
        let a = 1.0 - hole;
        samples.push(ChannelSample { t, a, c: a - b.norm_sqr(), b });
    }
    Ok(GaussianResult {
        trajectory: ChannelTrajectory::new(dt, samples),
        echo_warning: steps as f64 * dt * spec.j > spec.n as f64,
    })
}

/// Maximum pairwise deviation of `a - c` across a list of environment
/// states on a common time grid (exactly zero in exact arithmetic).
pub fn env_independence_check(
    spec: &SystemSpec,
    envs: &[EnvInitialState],
    dt: f64,
    steps: usize,
) -> Result<f64> {
    let runs: Vec<GaussianResult> = envs
        .iter()
        .map(|e| channel_m01(spec, e, dt, steps))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for x in &runs {
        for y in &runs {
            for (sx, sy) in x.trajectory.samples.iter().zip(&y.trajectory.samples) {
                worst = worst.max(((sx.a - sx.c) - (sy.a - sy.c)).abs());
            }
        }
    }
    Ok(worst)
}

/// Detuning `Delta_h = 2J - Omega^2 / J` at which the vacuum excited
/// population decays monotonically and the BLP measure vanishes.
///
/// Returns the detuning and an out-of-range flag: the construction is only
/// controlled for `Omega / J <= 1`; beyond that the coupling is strong
/// enough to break monotonicity at the same point.
pub fn blp_markov_point(omega: f64, j: f64) -> (f64, bool) {
    (2.0 * j - omega * omega / j, omega > j)
}
