//! Brute-force evolution of the full (N+1)-spin system at small N.
//!
//! The Hamiltonian is built in the spin (Pauli) representation — no
//! fermionization — over basis states indexed by bitmasks: the emitter
//! occupies the most significant bit, chain site `m` the bit `N - m`, and a
//! set bit means spin up (occupied). All terms are real, so a single real
//! symmetric eigendecomposition drives the evolution; reduced qubit elements
//! are evaluated in the eigenbasis at `O(dim^2)` per time point.

use ndarray::Array2;
use num_complex::Complex64;

use crate::blp::BlochState;
use crate::channel::{ChannelSample, ChannelTrajectory};
use crate::linalg::{c, eigh_real, CMat};
use crate::model::{diagonalize_environment, EnvInitialState, SystemSpec};
use crate::{Error, Result};

/// Largest N accepted without an explicit override.
pub const DENSE_CAP: usize = 10;

/// Off-block tolerance of the tomography consistency checks.
pub const BLOCK_TOL: f64 = 1e-9;

fn cap_check(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        let dim = 1usize << (n + 1);
        return Err(Error::DenseCap { n, cap, bytes: 16 * dim * dim });
    }
    Ok(())
}

/// Bit position of chain site `m` (1-based) in a state index of `n` sites.
#[inline]
fn site_bit(n: usize, m: usize) -> usize {
    n - m
}

/// Full Hamiltonian `H = H_E + H_SE + H_S`, dimension `2^(N+1)`.
pub fn build_full_hamiltonian(spec: &SystemSpec) -> Result<Array2<f64>> {
    cap_check(spec.n, DENSE_CAP)?;
    let n = spec.n;
    let dim = 1usize << (n + 1);
    let emitter = 1usize << n;
    let mut h = Array2::zeros((dim, dim));
    for s in 0..dim {
        // Diagonal: h sigma_z per site, Delta for the emitter.
        let mut diag = 0.0;
        for m in 1..=n {
            diag += if s & (1 << site_bit(n, m)) != 0 { spec.h } else { -spec.h };
        }
        if s & emitter != 0 {
            diag += spec.delta;
        }
        h[(s, s)] = diag;
        // XY hopping between neighbouring sites.
        for m in 1..n {
            let mask = (1 << site_bit(n, m)) | (1 << site_bit(n, m + 1));
            let bits = s & mask;
            if bits != 0 && bits != mask {
                h[(s, s ^ mask)] = spec.j;
            }
        }
        // Exchange with the emitter at site m0.
        let mask = emitter | (1 << site_bit(n, spec.m0));
        let bits = s & mask;
        if bits != 0 && bits != mask {
            h[(s, s ^ mask)] = spec.omega;
        }
    }
    Ok(h)
}

/// Environment-only Hamiltonian `H_E`, dimension `2^N`, with field `h_field`.
pub fn build_env_hamiltonian(spec: &SystemSpec, h_field: f64) -> Array2<f64> {
    let n = spec.n;
    let dim = 1usize << n;
    let mut h = Array2::zeros((dim, dim));
    for s in 0..dim {
        let mut diag = 0.0;
        for m in 1..=n {
            diag += if s & (1 << site_bit(n, m)) != 0 { h_field } else { -h_field };
        }
        h[(s, s)] = diag;
        for m in 1..n {
            let mask = (1 << site_bit(n, m)) | (1 << site_bit(n, m + 1));
            let bits = s & mask;
            if bits != 0 && bits != mask {
                h[(s, s ^ mask)] = spec.j;
            }
        }
    }
    h
}

/// Gibbs state `exp(-beta H_E) / Z` of the environment chain.
pub fn thermal_env_density(spec: &SystemSpec, beta: f64) -> Result<Array2<f64>> {
    cap_check(spec.n, DENSE_CAP)?;
    let h = build_env_hamiltonian(spec, spec.h);
    let (vals, vecs) = eigh_real(&h)?;
    let e0 = vals[0];
    let weights: Vec<f64> = vals.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let dim = vals.len();
    let mut rho = Array2::zeros((dim, dim));
    for m in 0..dim {
        let w = weights[m] / z;
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] += vecs[(i, m)] * w * vecs[(j, m)];
            }
        }
    }
    Ok(rho)
}

/// Environment density matrix (real in the spin basis) for a number-conserving
/// initial state.
pub fn env_density(spec: &SystemSpec, env: &EnvInitialState) -> Result<Array2<f64>> {
    cap_check(spec.n, DENSE_CAP)?;
    env.validate(spec.n)?;
    let dim = 1usize << spec.n;
    match env {
        EnvInitialState::Vacuum => {
            let mut rho = Array2::zeros((dim, dim));
            rho[(0, 0)] = 1.0;
            Ok(rho)
        }
        EnvInitialState::Thermal { beta } => thermal_env_density(spec, *beta),
        EnvInitialState::Ground { h_prep } => {
            let h = build_env_hamiltonian(spec, *h_prep);
            let (_, vecs) = eigh_real(&h)?;
            let mut rho = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] = vecs[(i, 0)] * vecs[(j, 0)];
                }
            }
            Ok(rho)
        }
        EnvInitialState::SingleMode { k } => {
            // d_k^dag |0>: the Jordan-Wigner string is trivial on the vacuum.
            let basis = diagonalize_environment(spec);
            let mut psi = vec![0.0; dim];
            for j in 1..=spec.n {
                psi[1 << site_bit(spec.n, j)] = basis.w()[(*k - 1, j - 1)];
            }
            let mut rho = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] = psi[i] * psi[j];
                }
            }
            Ok(rho)
        }
    }
}

/// Mode occupation `tr(rho_E d_k^dag d_k)` of an environment density matrix,
/// evaluated through `<c_i^dag c_j>` with the Jordan-Wigner string.
pub fn mode_occupation(spec: &SystemSpec, rho_env: &Array2<f64>, k: usize) -> f64 {
    let n = spec.n;
    let dim = 1usize << n;
    let basis = diagonalize_environment(spec);
    // C[i][j] = tr(rho c_i^dag c_j), 1-based sites.
    let mut corr = vec![vec![0.0; n + 1]; n + 1];
    for i in 1..=n {
        for j in i..=n {
            let mut v = 0.0;
            for s in 0..dim {
                if i == j {
                    if s & (1 << site_bit(n, i)) != 0 {
                        v += rho_env[(s, s)];
                    }
                } else {
                    // c_i^dag c_j = sigma_i^+ (prod_{i<l<j} -sigma_l^z) sigma_j^-
                    let (bi, bj) = (1 << site_bit(n, i), 1 << site_bit(n, j));
                    if s & bj == 0 || s & bi != 0 {
                        continue;
                    }
                    let mut sign = 1.0;
                    for l in i + 1..j {
                        if s & (1 << site_bit(n, l)) != 0 {
                            sign = -sign;
                        }
                    }
                    let s2 = (s ^ bj) | bi;
                    v += sign * rho_env[(s2, s)];
                }
            }
            corr[i][j] = v;
            corr[j][i] = v;
        }
    }
    let mut occ = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            occ += basis.w()[(k - 1, i - 1)] * basis.w()[(k - 1, j - 1)] * corr[i][j];
        }
    }
    occ
}

/// Eigendecomposed full Hamiltonian plus the partial-trace contraction
/// matrices, reusable across runs and time grids.
pub struct DenseEngine {
    spec: SystemSpec,
    vals: Vec<f64>,
    vecs: Array2<f64>,
    /// `G_pop[n, m] = sum_e V[(e, env), n] V[(e, env), m]` (emitter excited).
    g_pop: Array2<f64>,
    /// `G_coh[n, m] = sum_e V[(g, env), n] V[(e, env), m]`.
    g_coh: Array2<f64>,
}

impl DenseEngine {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        Self::with_cap(spec, DENSE_CAP)
    }

    /// Overrides the size cap (memory grows as `16 * 4^(N+1)` bytes per
    /// operator).
    pub fn with_cap(spec: &SystemSpec, cap: usize) -> Result<Self> {
        cap_check(spec.n, cap)?;
        let h = build_full_hamiltonian(spec)?;
        let (vals, vecs) = eigh_real(&h)?;
        let half = 1usize << spec.n;
        let upper = vecs.slice(ndarray::s![half.., ..]); // emitter excited rows
        let lower = vecs.slice(ndarray::s![..half, ..]); // emitter ground rows
        let g_pop = upper.t().dot(&upper);
        let g_coh = lower.t().dot(&upper);
        Ok(Self { spec: *spec, vals, vecs, g_pop, g_coh })
    }

    /// `R_{qq'} = V_q^T rho_E V_{q'}` blocks for one environment state;
    /// the channel's excitation structure only needs the diagonal blocks and
    /// the (e, g) cross block.
    fn env_blocks(&self, rho_env: &Array2<f64>) -> EnvBlocks {
        let half = 1usize << self.spec.n;
        let upper = self.vecs.slice(ndarray::s![half.., ..]);
        let lower = self.vecs.slice(ndarray::s![..half, ..]);
        let rho_u = rho_env.dot(&upper);
        let rho_l = rho_env.dot(&lower);
        EnvBlocks {
            r_ee: upper.t().dot(&rho_u),
            r_gg: lower.t().dot(&rho_l),
            r_eg: upper.t().dot(&rho_l),
        }
    }

    /// Reduced qubit states for one product initial condition.
    pub fn evolve(
        &self,
        rho_env: &Array2<f64>,
        system_init: &BlochState,
        dt: f64,
        steps: usize,
    ) -> Result<Vec<CMat>> {
        let blocks = self.env_blocks(rho_env);
        let run = self.run(&blocks, system_init, dt, steps);
        Ok(run
            .into_iter()
            .map(|(f_ee, f_eg)| {
                ndarray::array![
                    [f_ee, f_eg],
                    [f_eg.conj(), c(1.0) - f_ee]
                ]
            })
            .collect())
    }

    /// `(rho_ee(t), rho_eg(t))` for one run; the remaining elements follow
    /// from hermiticity and unit trace.
    fn run(
        &self,
        blocks: &EnvBlocks,
        init: &BlochState,
        dt: f64,
        steps: usize,
    ) -> Vec<(Complex64, Complex64)> {
        let dim = self.vals.len();
        let rho_ee = c(init.rho_ee());
        let rho_gg = c(1.0 - init.rho_ee());
        let rho_eg = init.rho_ge().conj();
        let rho_ge = init.rho_ge();

        // rho~0 = sum_{qq'} rhoS[q,q'] R_{qq'}; then K = rho~0 (.) G^T.
        let mut k_pop: CMat = Array2::zeros((dim, dim));
        let mut k_coh: CMat = Array2::zeros((dim, dim));
        for m in 0..dim {
            for nn in 0..dim {
                let rt = rho_ee * blocks.r_ee[(m, nn)]
                    + rho_gg * blocks.r_gg[(m, nn)]
                    + rho_eg * blocks.r_eg[(m, nn)]
                    + rho_ge * blocks.r_eg[(nn, m)];
                k_pop[(m, nn)] = rt * self.g_pop[(nn, m)];
                k_coh[(m, nn)] = rt * self.g_coh[(nn, m)];
            }
        }

        let mut out = Vec::with_capacity(steps + 1);
        let mut phases = vec![Complex64::new(0.0, 0.0); dim];
        for s in 0..=steps {
            let t = s as f64 * dt;
            for (p, &e) in phases.iter_mut().zip(&self.vals) {
                *p = Complex64::new(0.0, -e * t).exp();
            }
            let mut f_pop = Complex64::new(0.0, 0.0);
            let mut f_coh = Complex64::new(0.0, 0.0);
            for m in 0..dim {
                let mut acc_p = Complex64::new(0.0, 0.0);
                let mut acc_c = Complex64::new(0.0, 0.0);
                for nn in 0..dim {
                    let pc = phases[nn].conj();
                    acc_p += k_pop[(m, nn)] * pc;
                    acc_c += k_coh[(m, nn)] * pc;
                }
                f_pop += phases[m] * acc_p;
                f_coh += phases[m] * acc_c;
            }
            out.push((f_pop, f_coh));
        }
        out
    }

    /// Process tomography: runs with the emitter in `e`, `g`, `x+` give
    /// `a`, `c` and `b = 2 <e|rho(t)|g>`; a fourth `y+` run must reproduce
    /// `b` within [`BLOCK_TOL`] (block-structure consistency), and the `e`/`g`
    /// runs must show no coherence.
    pub fn tomography(
        &self,
        env: &EnvInitialState,
        dt: f64,
        steps: usize,
    ) -> Result<ChannelTrajectory> {
        let rho_env = env_density(&self.spec, env)?;
        let blocks = self.env_blocks(&rho_env);
        let run_e = self.run(&blocks, &BlochState::excited(), dt, steps);
        let run_g = self.run(&blocks, &BlochState::ground(), dt, steps);
        let run_x = self.run(&blocks, &BlochState::x_plus(), dt, steps);
        let run_y = self.run(
            &blocks,
            &BlochState::new(0.0, 1.0, 0.0),
            dt,
            steps,
        );

        let mut samples = Vec::with_capacity(steps + 1);
        for s in 0..=steps {
            let t = s as f64 * dt;
            let (a, coh_e) = run_e[s];
            let (cc, coh_g) = run_g[s];
            if coh_e.norm() > BLOCK_TOL || coh_g.norm() > BLOCK_TOL {
                return Err(Error::BlockStructure);
            }
            let b = 2.0 * run_x[s].1;
            let b_y = Complex64::new(0.0, 2.0) * run_y[s].1;
            if (b - b_y).norm() > BLOCK_TOL {
                return Err(Error::BlockStructure);
            }
            samples.push(ChannelSample { t, a: a.re, c: cc.re, b });
        }
        Ok(ChannelTrajectory::new(dt, samples))
    }
}

struct EnvBlocks {
    r_ee: Array2<f64>,
    r_gg: Array2<f64>,
    r_eg: Array2<f64>,
}
