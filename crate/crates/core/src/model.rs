//! Physical model: Hamiltonian parameters, environment diagonalization,
//! mode occupations, spectral densities and master-equation validity metrics.
//!
//! All energies and times are expressed in units of the hopping `J`; the CLI
//! and every engine accept `J`-scaled dimensionless values.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::{Error, Result};

/// Hamiltonian and geometry parameters of the emitter + chain model.
///
/// `delta_h = delta - 2 h` is always recomputed, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    /// Chain length (number of environment sites).
    pub n: usize,
    /// Hopping energy; sets the unit of energy and inverse time.
    pub j: f64,
    /// Magnetic field along z.
    pub h: f64,
    /// Emitter-chain coupling strength.
    pub omega: f64,
    /// Emitter level splitting.
    pub delta: f64,
    /// Coupling site, 1-based.
    pub m0: usize,
}

impl SystemSpec {
    pub fn new(n: usize, j: f64, h: f64, omega: f64, delta: f64, m0: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSpec("N must be >= 1".into()));
        }
        if !(j > 0.0) {
            return Err(Error::InvalidSpec(format!("J must be > 0, got {j}")));
        }
        if m0 < 1 || m0 > n {
            return Err(Error::InvalidSpec(format!(
                "coupling site m0={m0} outside 1..={n}"
            )));
        }
        Ok(Self { n, j, h, omega, delta, m0 })
    }

    /// Detuning of the emitter from the band center.
    pub fn detuning(&self) -> f64 {
        self.delta - 2.0 * self.h
    }

    /// The site treated as "center coupling" for continuum formulas.
    pub fn center_site(&self) -> usize {
        (self.n + 1) / 2
    }

    /// Whether `m0` designates center coupling.
    pub fn is_center_coupled(&self) -> bool {
        self.m0 == self.center_site() || self.m0 == self.n / 2
    }

    /// Band edges `2h - 2J` and `2h + 2J`.
    pub fn band_edges(&self) -> (f64, f64) {
        (2.0 * self.h - 2.0 * self.j, 2.0 * self.h + 2.0 * self.j)
    }
}

/// Orthogonal sine transform diagonalizing the chain, with mode energies.
///
/// `W[(k-1, j-1)] = sqrt(2/(N+1)) sin(pi k j / (N+1))` maps site operators to
/// diagonal modes `d_k = sum_j W_{k,j} c_j`, with `E_k = 2J cos(pi k/(N+1)) + 2h`
/// strictly decreasing in `k`.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub energies: Vec<f64>,
    w: Array2<f64>,
}

impl ModeBasis {
    pub fn w(&self) -> &Array2<f64> {
        &self.w
    }

    /// `W_{m0,k}` for 1-based site `m0` and mode `k`.
    pub fn coupling_weight(&self, m0: usize, k: usize) -> f64 {
        self.w[(k - 1, m0 - 1)]
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Closed-form diagonalization of the environment chain.
pub fn diagonalize_environment(spec: &SystemSpec) -> ModeBasis {
    let n = spec.n;
    let norm = (2.0 / (n as f64 + 1.0)).sqrt();
    let mut w = Array2::zeros((n, n));
    for k in 1..=n {
        for j in 1..=n {
            w[(k - 1, j - 1)] = norm * (PI * (k * j) as f64 / (n as f64 + 1.0)).sin();
        }
    }
    let energies = (1..=n)
        .map(|k| 2.0 * spec.j * (PI * k as f64 / (n as f64 + 1.0)).cos() + 2.0 * spec.h)
        .collect();
    ModeBasis { energies, w }
}

/// Initial state of the environment chain. All variants commute with the
/// total fermion number, as required for the block channel form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvInitialState {
    /// Fermionic vacuum (all modes empty).
    Vacuum,
    /// Ground state of the chain prepared at field `h_prep`.
    Ground { h_prep: f64 },
    /// Thermal state at inverse temperature `beta > 0`.
    Thermal { beta: f64 },
    /// A single excitation in mode `k` (1-based).
    SingleMode { k: usize },
}

impl EnvInitialState {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            EnvInitialState::Thermal { beta } if !(*beta > 0.0) => {
                Err(Error::InvalidSpec(format!("thermal beta must be > 0, got {beta}")))
            }
            EnvInitialState::SingleMode { k } if *k < 1 || *k > n => {
                Err(Error::InvalidSpec(format!("single mode k={k} outside 1..={n}")))
            }
            _ => Ok(()),
        }
    }
}

/// Mode occupation numbers `f_k` in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Occupations(pub Vec<f64>);

impl Occupations {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Occupations induced by an environment initial state.
///
/// Ground states are the `beta -> infinity` Fermi-Dirac limit with exact step
/// filling; a degenerate `E_k = 0` mode at the Fermi level gets `f = 1/2`.
pub fn occupations(spec: &SystemSpec, basis: &ModeBasis, env: &EnvInitialState) -> Result<Occupations> {
    env.validate(spec.n)?;
    let f = match env {
        EnvInitialState::Vacuum => vec![0.0; spec.n],
        EnvInitialState::Thermal { beta } => basis
            .energies
            .iter()
            .map(|&e| fermi_dirac(*beta, e))
            .collect(),
        EnvInitialState::Ground { h_prep } => {
            // Energies re-evaluated at the preparation field.
            (1..=spec.n)
                .map(|k| {
                    let e = 2.0 * spec.j * (PI * k as f64 / (spec.n as f64 + 1.0)).cos()
                        + 2.0 * h_prep;
                    if e.abs() < 1e-12 {
                        0.5
                    } else if e < 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        EnvInitialState::SingleMode { k } => {
            let mut f = vec![0.0; spec.n];
            f[*k - 1] = 1.0;
            f
        }
    };
    Ok(Occupations(f))
}

/// Fermi-Dirac occupation, stable for large `beta * |e|`.
pub fn fermi_dirac(beta: f64, e: f64) -> f64 {
    let x = beta * e;
    if x > 0.0 {
        let t = (-x).exp();
        t / (1.0 + t)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// A spectral value that may diverge at the band edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralValue {
    Finite(f64),
    Divergent,
}

impl SpectralValue {
    pub fn value(&self) -> f64 {
        match self {
            SpectralValue::Finite(v) => *v,
            SpectralValue::Divergent => f64::INFINITY,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, SpectralValue::Divergent)
    }
}

/// Continuum density of states `n(E) = 1/(pi sqrt(4J^2 - (E-2h)^2))` inside
/// the band, zero outside, divergent at the edges.
pub fn density_of_states(e: f64, spec: &SystemSpec) -> SpectralValue {
    let x = (e - 2.0 * spec.h).abs();
    let edge = 2.0 * spec.j;
    if (x - edge).abs() <= 1e-12 * edge {
        SpectralValue::Divergent
    } else if x < edge {
        SpectralValue::Finite(1.0 / (PI * (edge * edge - x * x).sqrt()))
    } else {
        SpectralValue::Finite(0.0)
    }
}

/// Continuum spectral density `D(E) = |W_{m0}(E)|^2 n(E)`.
///
/// Center coupling uses the periodic-boundary surrogate `|W|^2 -> 1/N`, giving
/// `D(E) = n(E)` (divergent at the edges). Edge coupling (`m0 = 1`) gives the
/// semicircle `sqrt(4J^2 - (E-2h)^2) / (2 pi J^2)`, which vanishes at the
/// edges. Other interior sites have no continuum form here; use
/// [`spectral_density_broadened`].
pub fn spectral_density_continuum(e: f64, spec: &SystemSpec) -> Result<SpectralValue> {
    if spec.is_center_coupled() {
        Ok(density_of_states(e, spec))
    } else if spec.m0 == 1 {
        let x = e - 2.0 * spec.h;
        let disc = 4.0 * spec.j * spec.j - x * x;
        if disc > 0.0 {
            Ok(SpectralValue::Finite(disc.sqrt() / (2.0 * PI * spec.j * spec.j)))
        } else {
            Ok(SpectralValue::Finite(0.0))
        }
    } else {
        Err(Error::Unsupported(
            "continuum spectral density for interior m0 other than the center".into(),
        ))
    }
}

/// Finite-`N` spectral density estimate with Gaussian broadening `eta`:
/// `sum_k |W_{m0,k}|^2 g_eta(E - E_k)`. Integrates to one over `E`.
pub fn spectral_density_broadened(e: f64, spec: &SystemSpec, basis: &ModeBasis, eta: f64) -> f64 {
    let norm = 1.0 / (eta * (2.0 * PI).sqrt());
    (1..=spec.n)
        .map(|k| {
            let w = basis.coupling_weight(spec.m0, k);
            let x = (e - basis.energies[k - 1]) / eta;
            w * w * norm * (-0.5 * x * x).exp()
        })
        .sum()
}

/// Default Gaussian broadening width, in units of `J`.
pub const DEFAULT_BROADENING: f64 = 0.01;

/// Golden-rule rates and flatness metric for the standard master-equation
/// self-consistency check.
#[derive(Debug, Clone, Copy)]
pub struct SelfConsistency {
    /// `2 pi Omega^2 D(Delta) f(Delta)`.
    pub gamma_ns_plus: f64,
    /// `2 pi Omega^2 D(Delta) (1 - f(Delta))`.
    pub gamma_ns_minus: f64,
    pub metric_plus: f64,
    pub metric_minus: f64,
    /// `max(metric_plus, metric_minus)`; the derivation is consistent when
    /// this is much smaller than one.
    pub metric: f64,
    /// Set when `Delta` sits at or outside the band edges.
    pub divergent: bool,
}

/// Evaluates the self-consistency condition for the "no string" cases by
/// numerical differentiation of `alpha^{ns±}(E) = D(E) f(E)` (resp.
/// `D(E)(1 - f(E))`) at `E = Delta`.
pub fn self_consistency_metric(spec: &SystemSpec, env: &EnvInitialState) -> Result<SelfConsistency> {
    let (lo, hi) = spec.band_edges();
    if spec.delta <= lo || spec.delta >= hi {
        return Ok(SelfConsistency {
            gamma_ns_plus: f64::INFINITY,
            gamma_ns_minus: f64::INFINITY,
            metric_plus: f64::INFINITY,
            metric_minus: f64::INFINITY,
            metric: f64::INFINITY,
            divergent: true,
        });
    }
    let occupation = |e: f64| -> f64 {
        match env {
            EnvInitialState::Vacuum => 0.0,
            EnvInitialState::Thermal { beta } => fermi_dirac(*beta, e),
            EnvInitialState::Ground { h_prep } => {
                // Occupation as a function of energy at the preparation field;
                // the mode at energy E under the run field sits at
                // E - 2h + 2 h_prep when prepared.
                let ep = e - 2.0 * spec.h + 2.0 * h_prep;
                if ep < 0.0 {
                    1.0
                } else if ep == 0.0 {
                    0.5
                } else {
                    0.0
                }
            }
            EnvInitialState::SingleMode { .. } => {
                return f64::NAN; // not a smooth distribution; caller guards
            }
        }
    };
    if matches!(env, EnvInitialState::SingleMode { .. }) {
        return Err(Error::Unsupported(
            "self-consistency metric for single-mode environment states".into(),
        ));
    }
    let d_of = |e: f64| spectral_density_continuum(e, spec).map(|v| v.value());
    let alpha_plus = |e: f64| -> Result<f64> { Ok(d_of(e)? * occupation(e)) };
    let alpha_minus = |e: f64| -> Result<f64> { Ok(d_of(e)? * (1.0 - occupation(e))) };

    let d_delta = d_of(spec.delta)?;
    let f_delta = occupation(spec.delta);
    let pref = 2.0 * PI * spec.omega * spec.omega;
    let gamma_plus = pref * d_delta * f_delta;
    let gamma_minus = pref * d_delta * (1.0 - f_delta);
    let gamma_max = gamma_plus.max(gamma_minus);

    // Central difference with a step small relative to the distance to the
    // nearest band edge.
    let step = 1e-5 * spec.j.min((spec.delta - lo).min(hi - spec.delta) / 4.0);
    let deriv_plus = (alpha_plus(spec.delta + step)? - alpha_plus(spec.delta - step)?) / (2.0 * step);
    let deriv_minus =
        (alpha_minus(spec.delta + step)? - alpha_minus(spec.delta - step)?) / (2.0 * step);

    let metric_plus = deriv_plus.abs() * gamma_max;
    let metric_minus = deriv_minus.abs() * gamma_max;
    Ok(SelfConsistency {
        gamma_ns_plus: gamma_plus,
        gamma_ns_minus: gamma_minus,
        metric_plus,
        metric_minus,
        metric: metric_plus.max(metric_minus),
        divergent: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    fn spec(n: usize, h: f64) -> SystemSpec {
        SystemSpec::new(n, 1.0, h, 0.4, 0.0, (n + 1) / 2).unwrap()
    }

    #[test]
    fn mode_energies_n3() {
        let basis = diagonalize_environment(&spec(3, 0.0));
        let e = &basis.energies;
        assert!((e[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!(e[1].abs() < 1e-12);
        assert!((e[2] + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn field_shifts_energies() {
        let e0 = diagonalize_environment(&spec(3, 0.0)).energies;
        let e2 = diagonalize_environment(&spec(3, 2.0)).energies;
        for (a, b) in e0.iter().zip(&e2) {
            assert!((b - a - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_is_orthogonal_and_diagonalizes() {
        for n in [1, 2, 7, 40] {
            let s = spec(n, 0.3);
            let basis = diagonalize_environment(&s);
            let w = basis.w();
            let gram = w.dot(&w.t());
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[(i, j)] - expect).abs() < 1e-12, "n={n}");
                }
            }
            // W^T diag(E) W reproduces the tridiagonal single-particle matrix.
            let lam = Array2::from_diag(&Array1::from_vec(basis.energies.clone()));
            let tri = w.t().dot(&lam).dot(w);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j {
                        2.0 * s.h
                    } else if i.abs_diff(j) == 1 {
                        s.j
                    } else {
                        0.0
                    };
                    assert!((tri[(i, j)] - expect).abs() < 1e-12, "n={n} ({i},{j})");
                }
            }
            // E_k strictly decreasing.
            for k in 1..n {
                assert!(basis.energies[k] < basis.energies[k - 1]);
            }
        }
    }

    #[test]
    fn occupations_vacuum_and_infinite_temperature() {
        let s = spec(5, 0.2);
        let basis = diagonalize_environment(&s);
        let vac = occupations(&s, &basis, &EnvInitialState::Vacuum).unwrap();
        assert!(vac.as_slice().iter().all(|&f| f == 0.0));
        let hot = occupations(&s, &basis, &EnvInitialState::Thermal { beta: 1e-9 }).unwrap();
        for f in hot.as_slice() {
            assert!((f - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn ground_state_is_step_filling() {
        let s = spec(200, 0.95);
        let basis = diagonalize_environment(&s);
        let occ = occupations(&s, &basis, &EnvInitialState::Ground { h_prep: 0.95 }).unwrap();
        for (k, f) in occ.as_slice().iter().enumerate() {
            let e = basis.energies[k];
            if e < -1e-12 {
                assert_eq!(*f, 1.0);
            } else if e > 1e-12 {
                assert_eq!(*f, 0.0);
            }
        }
        // Matches the beta -> infinity thermal limit.
        let cold = occupations(&s, &basis, &EnvInitialState::Thermal { beta: 1e6 }).unwrap();
        for (a, b) in occ.as_slice().iter().zip(cold.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn thermal_occupations_monotone_in_energy() {
        let s = spec(30, 0.4);
        let basis = diagonalize_environment(&s);
        let occ = occupations(&s, &basis, &EnvInitialState::Thermal { beta: 2.5 }).unwrap();
        // energies decrease with k, so f_k must be nondecreasing.
        for k in 1..s.n {
            assert!(occ.as_slice()[k] >= occ.as_slice()[k - 1]);
        }
    }

    #[test]
    fn dos_examples() {
        let s = spec(10, 1.3);
        match density_of_states(2.0 * s.h, &s) {
            SpectralValue::Finite(v) => assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-14),
            _ => panic!("band center must be finite"),
        }
        assert_eq!(density_of_states(2.0 * s.h + 3.0, &s), SpectralValue::Finite(0.0));
        assert!(density_of_states(2.0 * s.h + 2.0, &s).is_divergent());
    }

    #[test]
    fn dos_integrates_to_one() {
        // Quadrature oracle with edge-singularity substitution E = 2h + 2J sin(u).
        let s = spec(10, 0.7);
        let f = |u: f64| {
            let e = 2.0 * s.h + 2.0 * s.j * u.sin();
            density_of_states(e, &s).value() * 2.0 * s.j * u.cos()
        };
        // Stay off the endpoints where n(E) diverges; the substituted
        // integrand equals 1/pi, so the known truncation is 2*eps/pi.
        let eps = 1e-4;
        let total =
            crate::quad::adaptive_simpson(&f, -PI / 2.0 + eps, PI / 2.0 - eps, 1e-10, 40).unwrap()
                + 2.0 * eps / PI;
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn broadened_density_matches_continuum_at_center() {
        let mut s = spec(2000, 0.0);
        s.m0 = s.center_site();
        let basis = diagonalize_environment(&s);
        let est = spectral_density_broadened(2.0 * s.h, &s, &basis, 0.01);
        let exact = density_of_states(2.0 * s.h, &s).value();
        assert!((est - exact).abs() / exact < 0.02, "est={est} exact={exact}");
    }

    #[test]
    fn broadened_density_vanishes_at_edge_for_edge_coupling() {
        let mut s = spec(2000, 0.0);
        s.m0 = 1;
        let basis = diagonalize_environment(&s);
        let (lo, _) = s.band_edges();
        let est = spectral_density_broadened(lo, &s, &basis, 0.01);
        let center = spectral_density_broadened(0.0, &s, &basis, 0.01);
        assert!(est < 0.05 * center, "edge={est} center={center}");
        // and agrees with the semicircle inside the band
        let cont = spectral_density_continuum(0.5, &s).unwrap().value();
        let est_mid = spectral_density_broadened(0.5, &s, &basis, 0.01);
        assert!((est_mid - cont).abs() / cont < 0.02);
    }

    #[test]
    fn broadened_density_normalized() {
        let s = spec(50, 0.0);
        let basis = diagonalize_environment(&s);
        let f = |e: f64| spectral_density_broadened(e, &s, &basis, 0.05);
        let total = crate::quad::adaptive_simpson(&f, -4.0, 4.0, 1e-10, 40).unwrap();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn self_consistency_examples() {
        // Vacuum, band center: Markovian regime.
        let mut s = spec(10, 0.0);
        s.delta = 0.0;
        let r = self_consistency_metric(&s, &EnvInitialState::Vacuum).unwrap();
        assert!(!r.divergent);
        assert!(r.metric < 0.1, "metric={}", r.metric);
        assert!((r.gamma_ns_plus).abs() < 1e-14);

        // Near the band edge the metric blows up.
        let mut edge = spec(10, 0.0);
        edge.delta = -1.99;
        let r = self_consistency_metric(&edge, &EnvInitialState::Vacuum).unwrap();
        assert!(r.metric > 10.0);

        // Omega = 0 kills the rates and the metric.
        let mut free = spec(10, 0.0);
        free.omega = 0.0;
        let r = self_consistency_metric(&free, &EnvInitialState::Thermal { beta: 1.0 }).unwrap();
        assert_eq!(r.metric, 0.0);

        // At or outside the band edge: divergence flag.
        let mut out = spec(10, 0.0);
        out.delta = -2.0;
        assert!(self_consistency_metric(&out, &EnvInitialState::Vacuum).unwrap().divergent);
    }
}
