//! Thermodynamic-limit vacuum amplitude via the emitter resolvent.
//!
//! In the infinite-chain limit with bulk coupling the excited-state
//! amplitude is the inverse Laplace transform of the retarded Green
//! function `G_e(z) = 1 / (z - Delta - Sigma_e(z))` with the self-energy
//! `Sigma_e(z) = +-Omega^2 / sqrt((z - 2h)^2 - 4J^2)`. Bound states appear
//! as real poles outside the band `[2h - 2J, 2h + 2J]`; their energies and
//! the band edges form a frequency ledger whose pairwise beats explain the
//! oscillations seen in the measured decay rates.

use num_complex::Complex64;

use crate::linalg::ci;
use crate::model::SystemSpec;
use crate::quad::adaptive_simpson_complex_panels;
use crate::{Error, Result};

/// Relative window around `|(z-2h)^2| = 4J^2` treated as a branch point.
const BRANCH_TOL: f64 = 1e-12;

/// Residual tolerance for accepted bound-state roots.
pub const BOUND_STATE_TOL: f64 = 1e-10;

/// Contour shift off the real axis, in units of `J`.
pub const DEFAULT_ETA: f64 = 1e-3;

/// Per-panel quadrature tolerance for the amplitude integral.
const PANEL_TOL: f64 = 1e-6;

/// Retarded self-energy of the emitter coupled to the bulk continuum.
///
/// Computed as `Omega^2 / (sqrt(z - 2h - 2J) * sqrt(z - 2h + 2J))` with
/// principal square roots: this realizes the sign rule (positive for
/// `Re(z - 2h) > 0` outside the band, negative on the other side) and gives
/// `Im Sigma_e(E + i0+) <= 0` inside the band.
pub fn self_energy(z: Complex64, spec: &SystemSpec) -> Complex64 {
    let zz = z - 2.0 * spec.h;
    let two_j = 2.0 * spec.j;
    spec.omega * spec.omega / ((zz - two_j).sqrt() * (zz + two_j).sqrt())
}

/// A point evaluation of the resolvent.
#[derive(Debug, Clone, Copy)]
pub struct ResolventPoint {
    pub z: Complex64,
    pub sigma: Complex64,
    /// `G_e(z) = 1 / (z - Delta - Sigma_e(z))`.
    pub g: Complex64,
    /// `z` sits on a branch point `2h +- 2J` (self-energy diverges).
    pub branch_point: bool,
}

/// Evaluates self-energy and Green function at `z`.
pub fn resolvent_point(z: Complex64, spec: &SystemSpec) -> ResolventPoint {
    let zz = z - 2.0 * spec.h;
    let two_j = 2.0 * spec.j;
    let branch_point = (zz - two_j).norm() <= BRANCH_TOL * two_j
        || (zz + two_j).norm() <= BRANCH_TOL * two_j;
    let sigma = self_energy(z, spec);
    ResolventPoint { z, sigma, g: (z - spec.delta - sigma).finv(), branch_point }
}

/// Real bound-state energies outside the band, labeled by side.
#[derive(Debug, Clone, Copy)]
pub struct BoundStateSet {
    /// Root on `(2h + 2J, +inf)`.
    pub upper: Option<f64>,
    /// Root on `(-inf, 2h - 2J)`.
    pub lower: Option<f64>,
}

fn pole_condition(e: f64, spec: &SystemSpec) -> f64 {
    let sigma = self_energy(Complex64::new(e, 0.0), spec);
    e - spec.delta - sigma.re
}

/// Finds a root of `z - Delta - Sigma_e(z)` by expanding a bracket outward
/// from the band edge and bisecting. `dir = +1` searches above the upper
/// edge, `dir = -1` below the lower edge.
fn bound_state_side(spec: &SystemSpec, dir: f64) -> Option<f64> {
    let edge = 2.0 * spec.h + dir * 2.0 * spec.j;
    // The self-energy diverges like dir * infinity at the edge, so the
    // condition starts at -dir * infinity just outside.
    let mut step = 1e-9 * spec.j.max(1.0);
    let mut a = edge + dir * step;
    let fa = pole_condition(a, spec);
    if fa * dir >= 0.0 {
        // Root closer to the edge than the initial offset: treat the edge
        // itself as the degenerate bracket endpoint.
        a = edge;
    }
    let mut b = a;
    let mut fb = fa;
    for _ in 0..200 {
        step *= 2.0;
        b = edge + dir * step;
        fb = pole_condition(b, spec);
        if fb * dir > 0.0 {
            break;
        }
        a = b;
    }
    if fb * dir <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = if dir > 0.0 { (a, b) } else { (b, a) };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pole_condition(mid, spec) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    // Near the divergent band edge the condition's slope can be so steep
    // that even a machine-tight bracket leaves a visible residual; a
    // collapsed bracket is then the sharper acceptance criterion.
    let bracket_tight = hi - lo <= 8.0 * f64::EPSILON * root.abs().max(1.0);
    (pole_condition(root, spec).abs() < BOUND_STATE_TOL || bracket_tight).then_some(root)
}

/// Locates the bound states on both sides of the band. For the bulk
/// (divergent-edge) spectral density both roots always exist.
pub fn bound_states(spec: &SystemSpec) -> BoundStateSet {
    BoundStateSet {
        upper: bound_state_side(spec, 1.0),
        lower: bound_state_side(spec, -1.0),
    }
}

/// Thermodynamic-limit vacuum amplitude on a uniform time grid.
///
/// Evaluates `C_e(t) = e^{eta t} * (i / 2 pi) int dE [G_e(E + i eta) -
/// 1/(E + i eta - Delta)] e^{-i E t} + e^{-i Delta t}`: the free-propagator
/// pole is transformed exactly and subtracted from the integrand, which
/// then decays as `1/E^3` and is integrated over a finite window with
/// panel breakpoints at the band edges, the bare frequency, and the bound
/// states. The `e^{eta t}` factor undoes the damping introduced by the
/// contour shift.
pub fn vacuum_amplitude_tdl(
    spec: &SystemSpec,
    dt: f64,
    steps: usize,
    eta: f64,
) -> Result<Vec<Complex64>> {
    if dt <= 0.0 || eta <= 0.0 {
        return Err(Error::InvalidSpec("need dt > 0 and eta > 0".into()));
    }
    let bs = bound_states(spec);
    let center = 2.0 * spec.h;
    let margin = 12.0 * spec.j;
    let mut features = vec![center - 2.0 * spec.j, center + 2.0 * spec.j, spec.delta];
    features.extend(bs.upper);
    features.extend(bs.lower);
    let lo = features.iter().cloned().fold(f64::INFINITY, f64::min) - margin;
    let hi = features.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + margin;
    let mut breakpoints = vec![lo, hi];
    breakpoints.extend(&features);
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut out = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let t = s as f64 * dt;
        let integrand = |e: f64| {
            let z = Complex64::new(e, eta);
            let g = resolvent_point(z, spec).g;
            (g - (z - spec.delta).finv()) * ci(-e * t).exp()
        };
        let integral = adaptive_simpson_complex_panels(&integrand, &breakpoints, PANEL_TOL, 48)?;
        let ce = ci(-spec.delta * t).exp()
            + (eta * t).exp() * Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI)) * integral;
        out.push(ce);
    }
    Ok(out)
}

/// Named contribution frequencies of the vacuum amplitude and their beats.
#[derive(Debug, Clone)]
pub struct FrequencyLedger {
    /// Bare emitter frequency `Delta`.
    pub nu_r: f64,
    /// Upper band edge `2h + 2J`.
    pub nu_e_plus: f64,
    /// Lower band edge `2h - 2J`.
    pub nu_e_minus: f64,
    /// Bound-state energies, when present.
    pub nu_b_plus: Option<f64>,
    pub nu_b_minus: Option<f64>,
    /// All pairwise beat frequencies `|nu_i - nu_j|`, labeled.
    pub beats: Vec<(String, String, f64)>,
}

/// Builds the frequency ledger: interference of any two contributions to
/// `C_e(t)` shows up in `|C_e|^2` (and in the rates) at their difference
/// frequency.
pub fn contribution_frequencies(spec: &SystemSpec) -> FrequencyLedger {
    let bs = bound_states(spec);
    let center = 2.0 * spec.h;
    let mut named: Vec<(String, f64)> = vec![
        ("nu_r".into(), spec.delta),
        ("nu_e+".into(), center + 2.0 * spec.j),
        ("nu_e-".into(), center - 2.0 * spec.j),
    ];
    if let Some(e) = bs.upper {
        named.push(("nu_b+".into(), e));
    }
    if let Some(e) = bs.lower {
        named.push(("nu_b-".into(), e));
    }
    let mut beats = Vec::new();
    for i in 0..named.len() {
        for j in i + 1..named.len() {
            beats.push((named[i].0.clone(), named[j].0.clone(), (named[i].1 - named[j].1).abs()));
        }
    }
    FrequencyLedger {
        nu_r: spec.delta,
        nu_e_plus: center + 2.0 * spec.j,
        nu_e_minus: center - 2.0 * spec.j,
        nu_b_plus: bs.upper,
        nu_b_minus: bs.lower,
        beats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(omega: f64, delta: f64, h: f64) -> SystemSpec {
        // Large odd N with center coupling; the resolvent only reads the
        // couplings, not the chain length.
        SystemSpec::new(301, 1.0, h, omega, delta, 151).unwrap()
    }

    #[test]
    fn self_energy_outside_band() {
        // z = 2h + 3J (real): Sigma = +Omega^2 / (sqrt(5) J).
        let s = spec(0.4, 0.0, 0.3);
        let sig = self_energy(Complex64::new(2.0 * s.h + 3.0, 0.0), &s);
        assert!((sig.re - 0.16 / 5.0_f64.sqrt()).abs() < 1e-14);
        assert!(sig.im.abs() < 1e-14);
        // Mirror side picks up the opposite sign.
        let sig_m = self_energy(Complex64::new(2.0 * s.h - 3.0, 0.0), &s);
        assert!((sig_m.re + 0.16 / 5.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn self_energy_retarded_in_band() {
        // Band center just above the axis: Sigma = -i Omega^2 / (2J).
        let s = spec(0.4, 0.0, 0.3);
        let sig = self_energy(Complex64::new(2.0 * s.h, 1e-12), &s);
        assert!(sig.re.abs() < 1e-9);
        assert!((sig.im + 0.16 / 2.0).abs() < 1e-9);
        // Im Sigma <= 0 across the band.
        for k in 1..40 {
            let e = 2.0 * s.h - 2.0 + 0.1 * k as f64;
            assert!(self_energy(Complex64::new(e, 1e-9), &s).im < 0.0);
        }
    }

    #[test]
    fn self_energy_continuity_across_axis() {
        // Fixed Re z - 2h > 0 outside the band: no branch cut there, so the
        // value is continuous through Im z = 0.
        let s = spec(0.4, 0.0, 0.1);
        let e = 2.0 * s.h + 2.7;
        let above = self_energy(Complex64::new(e, 1e-9), &s);
        let below = self_energy(Complex64::new(e, -1e-9), &s);
        assert!((above - below).norm() < 1e-8);
    }

    #[test]
    fn branch_point_flagged() {
        let s = spec(0.4, 0.0, 0.3);
        assert!(resolvent_point(Complex64::new(2.0 * s.h + 2.0, 0.0), &s).branch_point);
        assert!(!resolvent_point(Complex64::new(2.0 * s.h + 2.5, 0.0), &s).branch_point);
    }

    #[test]
    fn bound_states_exist_and_converge_to_edges() {
        let s = spec(0.4, 0.0, 0.3);
        let bs = bound_states(&s);
        let (up, lo) = (bs.upper.unwrap(), bs.lower.unwrap());
        assert!(up > 2.0 * s.h + 2.0);
        assert!(lo < 2.0 * s.h - 2.0);
        assert!(pole_condition(up, &s).abs() < BOUND_STATE_TOL);
        assert!(pole_condition(lo, &s).abs() < BOUND_STATE_TOL);

        // Delta_h = 0 (Delta = 2h): symmetric about the band center.
        let ssym = spec(0.4, 0.6, 0.3);
        let b = bound_states(&ssym);
        assert!((b.upper.unwrap() + b.lower.unwrap() - 2.0 * 2.0 * ssym.h).abs() < 1e-6);

        // Weak coupling: roots hug the band edges.
        let sweak = spec(1e-3, 0.0, 0.0);
        let bw = bound_states(&sweak);
        assert!((bw.upper.unwrap() - 2.0).abs() < 1e-3);
        assert!((bw.lower.unwrap() + 2.0).abs() < 1e-3);
    }

    #[test]
    fn amplitude_sum_rule_and_sector_oracle() {
        // Delta_h = 0, Omega/J = 0.4: the contour amplitude must agree with
        // a long-chain sector computation.
        let s = SystemSpec::new(401, 1.0, 0.15, 0.4, 0.3, 201).unwrap();
        let dt = 0.25;
        let steps = 80; // t J up to 20
        let ce = vacuum_amplitude_tdl(&s, dt, steps, DEFAULT_ETA).unwrap();
        assert!((ce[0].norm() - 1.0).abs() < 1e-3, "|C_e(0)| = {}", ce[0].norm());
        let sector = crate::sector::evolve_vacuum(&s, dt, steps).unwrap();
        for (z, smp) in ce.iter().zip(&sector.trajectory.samples) {
            assert!((z - smp.b).norm() < 1e-3, "t={} diff={:e}", smp.t, (z - smp.b).norm());
        }
    }

    #[test]
    fn amplitude_eta_robust() {
        let s = spec(0.4, 0.0, 0.0);
        let a = vacuum_amplitude_tdl(&s, 1.0, 10, DEFAULT_ETA).unwrap();
        let b = vacuum_amplitude_tdl(&s, 1.0, 10, DEFAULT_ETA / 2.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.norm() - y.norm()).abs() < 1e-3);
        }
    }

    #[test]
    fn below_band_detuning_plateaus() {
        // Delta_h = -2J: the resonance sits at the lower band edge and the
        // bound state keeps a large overlap, so |C_e|^2 does not decay away.
        let s = spec(0.4, -2.0, 0.0);
        let ce = vacuum_amplitude_tdl(&s, 1.0, 20, DEFAULT_ETA).unwrap();
        assert!(ce.last().unwrap().norm_sqr() > 0.01);
    }

    #[test]
    fn ledger_beats() {
        let s = spec(0.4, 0.6, 0.3); // Delta_h = 0
        let led = contribution_frequencies(&s);
        assert!((led.nu_e_plus - led.nu_e_minus - 4.0).abs() < 1e-14);
        assert!(((led.nu_r - led.nu_e_plus).abs() - 2.0).abs() < 1e-14);
        // Bound states sit close to the edges at weak coupling, so the
        // resonant-vs-bound beats are near 2J.
        for nb in [led.nu_b_plus.unwrap(), led.nu_b_minus.unwrap()] {
            let beat = (led.nu_r - nb).abs();
            assert!((beat - 2.0).abs() / 2.0 < 0.1, "beat = {beat}");
        }
        assert!(led.beats.iter().any(|(a, b, w)| {
            (a == "nu_e+" && b == "nu_e-" || a == "nu_e-" && b == "nu_e+") && (*w - 4.0).abs() < 1e-12
        }));
    }
}
