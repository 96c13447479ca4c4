//! BLP trace-distance measure of non-Markovianity and the analytic backflow
//! witnesses of the block channel.
//!
//! Index convention: component 0 is the excited state, so the Bloch vector of
//! `rho = (1 + v . sigma)/2` has `rho_ee = (1 + v3)/2` and
//! `rho_ge = (v1 + i v2)/2`.

use num_complex::Complex64;

use crate::channel::{ChannelSample, ChannelTrajectory};
use crate::Result;

/// Increment tolerance suppressing floating-point ripple in backflow sums.
pub const INCREMENT_TOL: f64 = 1e-10;

/// Qubit state as a real Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl BlochState {
    pub fn new(v1: f64, v2: f64, v3: f64) -> Self {
        debug_assert!(v1 * v1 + v2 * v2 + v3 * v3 <= 1.0 + 1e-12);
        Self { v1, v2, v3 }
    }

    pub fn excited() -> Self {
        Self { v1: 0.0, v2: 0.0, v3: 1.0 }
    }

    pub fn ground() -> Self {
        Self { v1: 0.0, v2: 0.0, v3: -1.0 }
    }

    pub fn x_plus() -> Self {
        Self { v1: 1.0, v2: 0.0, v3: 0.0 }
    }

    pub fn x_minus() -> Self {
        Self { v1: -1.0, v2: 0.0, v3: 0.0 }
    }

    pub fn rho_ee(&self) -> f64 {
        0.5 * (1.0 + self.v3)
    }

    pub fn rho_ge(&self) -> Complex64 {
        Complex64::new(0.5 * self.v1, 0.5 * self.v2)
    }
}

/// Trace distance between two qubit states: half the Euclidean Bloch distance.
pub fn trace_distance(s1: &BlochState, s2: &BlochState) -> f64 {
    let d1 = s1.v1 - s2.v1;
    let d2 = s1.v2 - s2.v2;
    let d3 = s1.v3 - s2.v3;
    0.5 * (d1 * d1 + d2 * d2 + d3 * d3).sqrt()
}

/// Applies a channel sample to an initial state:
/// `v1 = 2 Re(b rho_ge(0))`, `v2 = 2 Im(b rho_ge(0))`,
/// `v3 = 2 (a - c) rho_ee(0) + 2 c - 1`.
pub fn apply_channel(sample: &ChannelSample, initial: &BlochState) -> BlochState {
    let coh = sample.b * initial.rho_ge();
    BlochState {
        v1: 2.0 * coh.re,
        v2: 2.0 * coh.im,
        v3: 2.0 * (sample.a - sample.c) * initial.rho_ee() + 2.0 * sample.c - 1.0,
    }
}

/// Default witness pairs: `(|e>, |g>)` isolates `d(a-c)/dt`, the equatorial
/// antipodes isolate `d|b|^2/dt`; together they cover every backflow channel
/// of the block form.
pub fn default_pairs() -> Vec<(BlochState, BlochState)> {
    vec![
        (BlochState::excited(), BlochState::ground()),
        (BlochState::x_plus(), BlochState::x_minus()),
    ]
}

/// Antipodal pairs on a Fibonacci sphere, for verification of the default
/// witness set.
pub fn grid_pairs(count: usize) -> Vec<(BlochState, BlochState)> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = 2.0 * std::f64::consts::PI * (i as f64 / golden).fract();
            let s = BlochState::new(r * phi.cos(), r * phi.sin(), z);
            (s, BlochState::new(-s.v1, -s.v2, -s.v3))
        })
        .collect()
}

/// BLP measure of a trajectory over a set of initial pairs.
#[derive(Debug, Clone)]
pub struct BlpResult {
    /// Maximum accumulated backflow over the pairs.
    pub n_blp: f64,
    /// Accumulated backflow per pair, in input order.
    pub contributions: Vec<f64>,
    /// `a - c < 0` occurred somewhere: the two-pair witness argument assumes
    /// `a - c >= 0`, so the default set may not attain the supremum.
    pub a_minus_c_negative: bool,
}

/// Sums positive trace-distance increments per pair; `N_BLP` is the maximum.
pub fn blp_measure(
    traj: &ChannelTrajectory,
    pairs: &[(BlochState, BlochState)],
) -> Result<BlpResult> {
    let a_minus_c_negative = traj.samples.iter().any(|s| s.a - s.c < -INCREMENT_TOL);
    let mut contributions = Vec::with_capacity(pairs.len());
    for (p, q) in pairs {
        let mut sum = 0.0;
        let mut prev = trace_distance(
            &apply_channel(&traj.samples[0], p),
            &apply_channel(&traj.samples[0], q),
        );
        for s in &traj.samples[1..] {
            let d = trace_distance(&apply_channel(s, p), &apply_channel(s, q));
            if d - prev > INCREMENT_TOL {
                sum += d - prev;
            }
            prev = d;
        }
        contributions.push(sum);
    }
    let n_blp = contributions.iter().cloned().fold(0.0, f64::max);
    Ok(BlpResult { n_blp, contributions, a_minus_c_negative })
}

/// Time interval flagged by the analytic backflow witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackflowInterval {
    pub t_start: f64,
    pub t_end: f64,
}

/// Result of the analytic backflow scan.
#[derive(Debug, Clone)]
pub struct BackflowWitness {
    /// Intervals where `d(a-c)/dt > tol` or `d|b|^2/dt > tol`.
    pub intervals: Vec<BackflowInterval>,
    /// See [`BlpResult::a_minus_c_negative`].
    pub a_minus_c_negative: bool,
}

/// Scans the trajectory for intervals violating the monotonicity conditions
/// of the backflow-free criterion (`a - c` and `|b|^2` nonincreasing).
pub fn backflow_witness(traj: &ChannelTrajectory, tol: f64) -> BackflowWitness {
    let a_minus_c_negative = traj.samples.iter().any(|s| s.a - s.c < -tol);
    let mut intervals: Vec<BackflowInterval> = Vec::new();
    let mut open: Option<f64> = None;
    for w in traj.samples.windows(2) {
        let d_amc = (w[1].a - w[1].c) - (w[0].a - w[0].c);
        let d_b2 = w[1].b.norm_sqr() - w[0].b.norm_sqr();
        let flagged = d_amc > tol * traj.dt || d_b2 > tol * traj.dt;
        match (flagged, open) {
            (true, None) => open = Some(w[0].t),
            (false, Some(t0)) => {
                intervals.push(BackflowInterval { t_start: t0, t_end: w[0].t });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(t0) = open {
        intervals.push(BackflowInterval { t_start: t0, t_end: traj.t_final() });
    }
    BackflowWitness { intervals, a_minus_c_negative }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn trace_distance_examples() {
        assert!((trace_distance(&BlochState::excited(), &BlochState::ground()) - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&BlochState::x_plus(), &BlochState::x_plus()), 0.0);
        let d = trace_distance(&BlochState::new(1.0, 0.0, 0.0), &BlochState::new(0.0, 1.0, 0.0));
        assert!((d - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn apply_channel_examples() {
        let s = ChannelSample { t: 0.3, a: 0.8, c: 0.1, b: Complex64::new(0.6, 0.2) };
        let init = BlochState::new(0.4, -0.3, 0.5);
        let id = ChannelSample::identity(0.0);
        let same = apply_channel(&id, &init);
        assert!((same.v1 - init.v1).abs() < 1e-15);
        assert!((same.v2 - init.v2).abs() < 1e-15);
        assert!((same.v3 - init.v3).abs() < 1e-15);

        let collapse = ChannelSample { t: 1.0, a: 0.0, c: 0.0, b: c(0.0) };
        let out = apply_channel(&collapse, &init);
        assert_eq!((out.v1, out.v2, out.v3), (0.0, 0.0, -1.0));

        let from_e = apply_channel(&s, &BlochState::excited());
        assert!((from_e.v3 - (2.0 * s.a - 1.0)).abs() < 1e-15);
    }

    fn decay_trajectory(g: f64, dt: f64, n: usize) -> ChannelTrajectory {
        let mut a = Vec::new();
        let mut cc = Vec::new();
        let mut b = Vec::new();
        for k in 0..n {
            let t = k as f64 * dt;
            a.push((-g * t).exp());
            cc.push(0.0);
            b.push(c((-0.5 * g * t).exp()));
        }
        ChannelTrajectory::from_elements(dt, &a, &cc, &b)
    }

    #[test]
    fn monotone_decay_has_zero_blp() {
        let traj = decay_trajectory(0.4, 0.02, 300);
        let res = blp_measure(&traj, &default_pairs()).unwrap();
        assert_eq!(res.n_blp, 0.0);
        assert!(!res.a_minus_c_negative);
        assert!(backflow_witness(&traj, INCREMENT_TOL).intervals.is_empty());
        // Contractivity also holds over a dense grid of pairs.
        let grid = blp_measure(&traj, &grid_pairs(64)).unwrap();
        assert_eq!(grid.n_blp, 0.0);
    }

    #[test]
    fn time_reversed_segment_recovers_distance() {
        // Decay to t = T/2, then mirror: recovered distance for the (e, g)
        // pair equals a(T) - a(T/2).
        let g = 0.5;
        let dt = 0.01;
        let half = 150usize;
        let mut a = Vec::new();
        let mut cc = Vec::new();
        let mut b = Vec::new();
        for k in 0..2 * half + 1 {
            let t = dt * (half as f64 - (k as f64 - half as f64).abs());
            a.push((-g * t).exp());
            cc.push(0.0);
            b.push(c((-0.5 * g * t).exp()));
        }
        let traj = ChannelTrajectory::from_elements(dt, &a, &cc, &b);
        let res = blp_measure(&traj, &default_pairs()).unwrap();
        let expected = a[2 * half] - a[half];
        assert!((res.contributions[0] - expected).abs() < 1e-12);
        assert!(res.n_blp >= res.contributions[0]);
        let witness = backflow_witness(&traj, INCREMENT_TOL);
        assert_eq!(witness.intervals.len(), 1);
        assert!((witness.intervals[0].t_start - half as f64 * dt).abs() < 2.0 * dt);
    }

    #[test]
    fn oscillating_amplitude_triggers_witness_and_blp() {
        // Vacuum-like trajectory with monotonicity-breaking oscillations.
        let dt = 0.01;
        let n = 600;
        let mut a = Vec::new();
        let mut cc = Vec::new();
        let mut b = Vec::new();
        for k in 0..n {
            let t = k as f64 * dt;
            let env: f64 = (0.55 + 0.45 * (2.0 * t).cos()) * (-0.1 * t).exp();
            a.push(env * env);
            cc.push(0.0);
            b.push(c(env));
        }
        let traj = ChannelTrajectory::from_elements(dt, &a, &cc, &b);
        let res = blp_measure(&traj, &default_pairs()).unwrap();
        assert!(res.n_blp > 0.1, "n_blp = {}", res.n_blp);
        let witness = backflow_witness(&traj, INCREMENT_TOL);
        assert!(!witness.intervals.is_empty());
        // The default pairs dominate a dense grid (witness optimality).
        let grid = blp_measure(&traj, &grid_pairs(128)).unwrap();
        assert!(grid.n_blp <= res.n_blp + 1e-9);
    }

    #[test]
    fn pre_crossing_window_is_blp_blind() {
        // a and c approach each other (gamma1 diverges at the crossing) while
        // a - c and |b|^2 both decay: no BLP backflow before the crossing.
        let dt = 0.01;
        let n = 90; // stop before the crossing at t = 1
        let mut a = Vec::new();
        let mut cc = Vec::new();
        let mut b = Vec::new();
        for k in 0..n {
            let t = k as f64 * dt;
            a.push(1.0 - 0.55 * t);
            cc.push(0.45 * t);
            b.push(c((-0.3 * t).exp()));
        }
        let traj = ChannelTrajectory::from_elements(dt, &a, &cc, &b);
        let res = blp_measure(&traj, &default_pairs()).unwrap();
        assert_eq!(res.n_blp, 0.0);
        assert!(backflow_witness(&traj, INCREMENT_TOL).intervals.is_empty());
    }
}
