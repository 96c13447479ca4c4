//! Divisibility robustness of channel trajectories.
//!
//! Each infinitesimal step `dT` is tested for a hermitian logarithm whose
//! projected Choi state `omega_perp (log dT)^Gamma omega_perp` is positive
//! semidefinite over all branches within a window; the minimum isotropic noise
//! `mu` restoring positivity quantifies the non-Markovianity of the step, and
//! the normalized degree aggregates the step average.

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::{choi, map_matrix, omega_perp, step_channel, ChannelTrajectory};
use crate::linalg::{self, c, dagger, CMat};
use crate::{Error, Result};

/// Default branch window for the integer search over logarithm branches.
pub const DEFAULT_BRANCH_WINDOW: i64 = 2;

/// Relative imaginary-part threshold classifying an eigenvalue of `dT` as real.
const REAL_EIG_TOL: f64 = 1e-10;

/// Diagnostic flags accumulated while processing a step or a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// `(log dT)^Gamma` failed the hermiticity check.
    pub nonhermitian_log: bool,
    /// `dT` had a real negative eigenvalue (no hermitian logarithm exists).
    pub negative_real_eigenvalue: bool,
    /// A map inversion fell back to the pseudoinverse.
    pub singular_map: bool,
}

impl Flags {
    pub fn merge(&mut self, other: Flags) {
        self.nonhermitian_log |= other.nonhermitian_log;
        self.negative_real_eigenvalue |= other.negative_real_eigenvalue;
        self.singular_map |= other.singular_map;
    }

    /// Whether any flag forces `mu = infinity` for the step.
    pub fn infinite(&self) -> bool {
        self.nonhermitian_log || self.negative_real_eigenvalue
    }
}

/// Robustness of a single step.
#[derive(Debug, Clone, Copy)]
pub struct StepRobustness {
    /// Minimum isotropic noise rate; meaningless when `flags.infinite()`.
    pub mu: f64,
    pub flags: Flags,
}

/// Aggregate robustness of a trajectory.
#[derive(Debug, Clone)]
pub struct RobustnessResult {
    /// Per-step noise rates (finite steps only carry their value; infinite
    /// steps are recorded in `flags` and force `degree = 1`).
    pub mu_steps: Vec<f64>,
    /// Average of the finite per-step values.
    pub mu_bar: f64,
    /// Normalized degree of non-Markovianity in `[0, 1]`.
    pub degree: f64,
    pub flags: Flags,
}

/// Normalized degree from the average noise: `1 - exp[mu_bar (1 - d^2)]`.
pub fn degree_from_mu(mu_bar: f64, d: usize, any_infinite: bool) -> f64 {
    if any_infinite {
        return 1.0;
    }
    1.0 - (mu_bar * (1.0 - (d * d) as f64)).exp()
}

/// Hermitian logarithm data of a step map: principal branch plus the
/// conjugate-pair projector differences spanning the other branches.
#[derive(Debug, Clone)]
pub struct BranchDecomposition {
    pub log_principal: CMat,
    /// `P_c - P_cbar` for each conjugate eigenvalue pair of `dT`.
    pub pair_projector_diffs: Vec<CMat>,
    pub flags: Flags,
}

/// Builds the branch decomposition of `dT`.
///
/// A real negative eigenvalue or a non-hermitian principal-log Choi sets the
/// corresponding flag; callers treat those steps as infinitely non-Markovian.
pub fn branch_decomposition(dt_map: &CMat) -> Result<BranchDecomposition> {
    let dim = dt_map.dim().0;
    let (vals, v, vinv) = linalg::eig_general(dt_map)?;
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);

    let mut flags = Flags::default();
    for lam in vals.iter() {
        if lam.im.abs() <= REAL_EIG_TOL * scale && lam.re < 0.0 {
            flags.negative_real_eigenvalue = true;
        }
    }

    // Principal logarithm V log(diag) V^-1.
    let mut tmp = v.clone();
    for j in 0..dim {
        let l = vals[j].ln();
        tmp.column_mut(j).mapv_inplace(|z| z * l);
    }
    let log_principal = tmp.dot(&vinv);

    // Pair up complex-conjugate eigenvalues and form P_c - P_cbar.
    let mut used = vec![false; dim];
    let mut pair_projector_diffs = Vec::new();
    for i in 0..dim {
        if used[i] || vals[i].im <= REAL_EIG_TOL * scale {
            continue;
        }
        // Closest unused eigenvalue to the conjugate.
        let target = vals[i].conj();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..dim {
            if used[j] || j == i || vals[j].im >= 0.0 {
                continue;
            }
            let dist = (vals[j] - target).norm();
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((j, dist));
            }
        }
        let Some((j, dist)) = best else {
            flags.nonhermitian_log = true;
            continue;
        };
        if dist > 1e-6 * scale {
            flags.nonhermitian_log = true;
        }
        used[i] = true;
        used[j] = true;
        pair_projector_diffs.push(spectral_projector(&v, &vinv, i) - spectral_projector(&v, &vinv, j));
    }

    let lg = choi(&log_principal);
    let tol = 1e-8 * (1.0 + linalg::frobenius_norm(&lg));
    if !linalg::is_hermitian(&lg, tol) {
        flags.nonhermitian_log = true;
    }

    Ok(BranchDecomposition { log_principal, pair_projector_diffs, flags })
}

fn spectral_projector(v: &CMat, vinv: &CMat, idx: usize) -> CMat {
    let dim = v.dim().0;
    let mut p = Array2::zeros((dim, dim));
    for r in 0..dim {
        for s in 0..dim {
            p[(r, s)] = v[(r, idx)] * vinv[(idx, s)];
        }
    }
    p
}

fn hermitize(m: &CMat) -> CMat {
    let md = dagger(m);
    (m + &md).mapv(|z| z * 0.5)
}

/// Robustness of one step map `dT` taken over time `delta_t`.
///
/// The noise rate is `mu = d * max(0, -lambda_min) / delta_t`, minimized over
/// logarithm branches with integers in `[-branch_window, branch_window]`; the
/// division by the step makes `mu` a rate consistent with the negative-rate
/// closed form `-d * gamma_min * tr(L_min^dag L_min)`.
pub fn robustness_step(dt_map: &CMat, delta_t: f64, branch_window: i64) -> Result<StepRobustness> {
    let dec = branch_decomposition(dt_map)?;
    if dec.flags.infinite() {
        return Ok(StepRobustness { mu: f64::INFINITY, flags: dec.flags });
    }
    let dim2 = dt_map.dim().0;
    let d = (dim2 as f64).sqrt().round() as usize;
    let perp = omega_perp(d);

    let a0 = hermitize(&perp.dot(&choi(&dec.log_principal)).dot(&perp));
    let a_branch: Vec<CMat> = dec
        .pair_projector_diffs
        .iter()
        .map(|pd| {
            let g = choi(pd);
            let mut m = perp.dot(&g).dot(&perp);
            m.mapv_inplace(|z| z * Complex64::new(0.0, 2.0 * std::f64::consts::PI));
            hermitize(&m)
        })
        .collect();

    let mut best = f64::NEG_INFINITY;
    let combos = (2 * branch_window + 1).pow(a_branch.len() as u32);
    for combo in 0..combos.max(1) {
        let mut a = a0.clone();
        let mut rem = combo;
        for ab in &a_branch {
            let m = rem % (2 * branch_window + 1) - branch_window;
            rem /= 2 * branch_window + 1;
            if m != 0 {
                a = a + ab.mapv(|z| z * m as f64);
            }
        }
        let lmin = linalg::min_eigenvalue(&a)?;
        if lmin > best {
            best = lmin;
        }
    }

    let mu = d as f64 * (-best).max(0.0) / delta_t;
    Ok(StepRobustness { mu, flags: dec.flags })
}

/// Size of the branch matrices `A_c` of a step; the block channels of this
/// model have vanishing `A_c`.
pub fn branch_matrix_norm(dt_map: &CMat) -> Result<f64> {
    let dec = branch_decomposition(dt_map)?;
    let dim2 = dt_map.dim().0;
    let d = (dim2 as f64).sqrt().round() as usize;
    let perp = omega_perp(d);
    let mut worst: f64 = 0.0;
    for pd in &dec.pair_projector_diffs {
        let g = choi(pd);
        let mut m = perp.dot(&g).dot(&perp);
        m.mapv_inplace(|z| z * Complex64::new(0.0, 2.0 * std::f64::consts::PI));
        worst = worst.max(linalg::frobenius_norm(&m));
    }
    Ok(worst)
}

/// Extracted rate and Lindblad operator of one step.
#[derive(Debug, Clone)]
pub struct ExtractedRate {
    pub gamma: f64,
    pub operator: CMat,
}

/// Eigendecomposes `omega_perp (log dT)^Gamma omega_perp`; each nonzero
/// eigenvalue `lambda_i` with eigenvector reshaped to an operator `L_i` gives
/// `gamma_i = lambda_i / (tr(L_i^dag L_i) delta_t)`.
pub fn extract_rates_generic(dt_map: &CMat, delta_t: f64) -> Result<Vec<ExtractedRate>> {
    let dec = branch_decomposition(dt_map)?;
    if dec.flags.infinite() {
        return Err(Error::Linalg(
            "step has no hermitian logarithm; rates undefined".into(),
        ));
    }
    let dim2 = dt_map.dim().0;
    let d = (dim2 as f64).sqrt().round() as usize;
    let perp = omega_perp(d);
    let a = hermitize(&perp.dot(&choi(&dec.log_principal)).dot(&perp));
    let (vals, vecs) = linalg::eigh_hermitian(&a)?;
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cutoff = 1e-12 * (1.0 + scale);
    let mut out = Vec::new();
    for (idx, &lam) in vals.iter().enumerate() {
        if lam.abs() <= cutoff {
            continue;
        }
        let mut op = Array2::zeros((d, d));
        for j in 0..d {
            for l in 0..d {
                op[(j, l)] = vecs[(d * j + l, idx)];
            }
        }
        let tr = dagger(&op)
            .dot(&op)
            .diag()
            .iter()
            .map(|z| z.re)
            .sum::<f64>();
        out.push(ExtractedRate { gamma: lam / (tr * delta_t), operator: op });
    }
    Ok(out)
}

/// Robustness of a full trajectory: per-step `mu`, average, and degree.
pub fn trajectory_robustness(
    traj: &ChannelTrajectory,
    branch_window: i64,
) -> Result<RobustnessResult> {
    if traj.samples.len() < 2 {
        return Err(Error::InvalidSpec("trajectory needs at least two samples".into()));
    }
    let d = 2usize;
    let mut flags = Flags::default();
    let mut mu_steps = Vec::with_capacity(traj.samples.len() - 1);
    let mut any_infinite = false;
    for w in traj.samples.windows(2) {
        let (m_now, m_next) = (map_matrix(&w[0]), map_matrix(&w[1]));
        let (dt_map, singular) = step_channel(&m_now, &m_next)?;
        flags.singular_map |= singular;
        let step = robustness_step(&dt_map, traj.dt, branch_window)?;
        flags.merge(step.flags);
        if step.flags.infinite() {
            any_infinite = true;
            mu_steps.push(f64::INFINITY);
        } else {
            mu_steps.push(step.mu);
        }
    }
    let finite: Vec<f64> = mu_steps.iter().cloned().filter(|m| m.is_finite()).collect();
    let mu_bar = if finite.is_empty() {
        0.0
    } else {
        finite.iter().sum::<f64>() / mu_steps.len() as f64
    };
    let degree = degree_from_mu(mu_bar * traj.dt, d, any_infinite);
    Ok(RobustnessResult { mu_steps, mu_bar, degree, flags })
}

/// Matrix representation of a Lindbladian in the canonical basis
/// (`vec` row-major): `i[rho, H] + sum_i gamma_i (L rho L^dag - {L^dag L, rho}/2)`.
pub fn lindblad_matrix(h: &CMat, terms: &[(f64, CMat)]) -> CMat {
    let d = h.dim().0;
    let id = linalg::identity(d);
    let ht = h.t().to_owned();
    // i(rho H - H rho) -> i((I (x) H^T) - (H (x) I)).
    let mut m = (linalg::kron(&id, &ht) - linalg::kron(h, &id)).mapv(|z| z * Complex64::i());
    for (gamma, l) in terms {
        let lc = l.mapv(|z| z.conj());
        let ldl = dagger(l).dot(l);
        let ldlt = ldl.t().to_owned();
        let diss = linalg::kron(l, &lc)
            - (linalg::kron(&ldl, &id) + linalg::kron(&id, &ldlt)).mapv(|z| z * c(0.5));
        m = m + diss.mapv(|z| z * c(*gamma));
    }
    m
}
