//! The `validate` subcommand: a fast cross-engine, oracle, and invariant
//! suite with a machine-readable pass/fail report.

use std::collections::BTreeMap;
use std::fs;

use serde_json::Value;

use spinbath::blp::{blp_measure, default_pairs};
use spinbath::channel::{map_matrix, step_channel, ChannelTrajectory};
use spinbath::correlations::{correlation_dense_trace, correlation_gaussian};
use spinbath::dense::DenseEngine;
use spinbath::gaussian::{channel_m01, env_independence_check};
use spinbath::rates::{degree_from_rates, propagate_rates, rates_analytic, RateInput};
use spinbath::robustness::{robustness_step, trajectory_robustness, DEFAULT_BRANCH_WINDOW};
use spinbath::sector::evolve_vacuum;
use spinbath::{EnvInitialState, Result, SystemSpec};

use crate::config::Config;
use crate::output::write_json;
use crate::Failure;

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn channel_diff(x: &ChannelTrajectory, y: &ChannelTrajectory) -> f64 {
    x.samples
        .iter()
        .zip(&y.samples)
        .map(|(p, q)| (p.a - q.a).abs().max((p.c - q.c).abs()).max((p.b - q.b).norm()))
        .fold(0.0, f64::max)
}

/// Three-engine agreement at edge coupling, N = 6.
fn engine_triangle() -> Result<Check> {
    let h = 0.3;
    let spec = SystemSpec::new(6, 1.0, h, 0.4, 1.0 + 2.0 * h, 1)?;
    let (dt, steps) = (0.05, 100);
    let dense = DenseEngine::new(&spec)?;
    let mut dg: f64 = 0.0;
    for env in [EnvInitialState::Vacuum, EnvInitialState::Thermal { beta: 1.0 }] {
        let d = dense.tomography(&env, dt, steps)?;
        let g = channel_m01(&spec, &env, dt, steps)?;
        dg = dg.max(channel_diff(&d, &g.trajectory));
    }
    let g = channel_m01(&spec, &EnvInitialState::Vacuum, dt, steps)?;
    let s = evolve_vacuum(&spec, dt, steps)?;
    let sg = channel_diff(&g.trajectory, &s.trajectory);
    Ok(Check {
        name: "engine_triangle",
        passed: dg <= 1e-8 && sg <= 1e-10,
        detail: format!("dense-vs-gaussian {dg:.2e}, sector-vs-gaussian {sg:.2e}"),
    })
}

/// Exact environment independence of `a - c` at edge coupling.
fn env_independence() -> Result<Check> {
    let h = 0.3;
    let spec = SystemSpec::new(60, 1.0, h, 0.4, 1.0 + 2.0 * h, 1)?;
    let envs = [
        EnvInitialState::Vacuum,
        EnvInitialState::Thermal { beta: 1.0 },
        EnvInitialState::Ground { h_prep: -0.5 },
    ];
    let spread = env_independence_check(&spec, &envs, 0.05, 400)?;
    Ok(Check {
        name: "env_independence",
        passed: spread <= 1e-12,
        detail: format!("spread in a - c {spread:.2e}"),
    })
}

/// A decoupled emitter is static: all rates and both measures vanish.
fn decoupled_trivial() -> Result<Check> {
    let spec = SystemSpec::new(40, 1.0, 0.2, 0.0, 0.7, 1)?;
    let traj = channel_m01(&spec, &EnvInitialState::Thermal { beta: 1.0 }, 0.05, 200)?.trajectory;
    let rates = rates_analytic(&traj)?;
    let max_rate = rates
        .iter()
        .map(|r| r.gamma1.abs().max(r.gamma2.abs()).max(r.gamma3.abs()))
        .fold(0.0, f64::max);
    let degree = degree_from_rates(&rates, traj.dt, false);
    let blp = blp_measure(&traj, &default_pairs())?;
    Ok(Check {
        name: "decoupled_trivial",
        passed: max_rate <= 1e-10 && degree <= 1e-12 && blp.n_blp <= 1e-12,
        detail: format!(
            "max rate {max_rate:.2e}, N_degree {degree:.2e}, N_BLP {:.2e}",
            blp.n_blp
        ),
    })
}

/// Synthetic Lindblad trajectories: nonnegative rates give a vanishing
/// degree, a negative-rate segment gives the closed-form noise rate.
fn measure_self_consistency() -> Result<Check> {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let dt = 0.1;
    let mut max_degree: f64 = 0.0;
    for _ in 0..20 {
        let mut inputs = Vec::new();
        for _ in 0..4 {
            let r = RateInput {
                e_ls: 2.0 * next() - 1.0,
                gamma1: 0.25 * next(),
                gamma2: 0.5 * next(),
                gamma3: 0.5 * next(),
            };
            inputs.extend(std::iter::repeat(r).take(10));
        }
        let traj = propagate_rates(dt, &inputs);
        max_degree = max_degree.max(trajectory_robustness(&traj, DEFAULT_BRANCH_WINDOW)?.degree);
    }
    let g = 0.12;
    let mut inputs = vec![RateInput { e_ls: 0.3, gamma1: 0.0, gamma2: 0.1, gamma3: 0.2 }; 10];
    inputs.extend(vec![RateInput { e_ls: 0.3, gamma1: 0.0, gamma2: 0.0, gamma3: -g }; 10]);
    let traj = propagate_rates(dt, &inputs);
    let injected = trajectory_robustness(&traj, DEFAULT_BRANCH_WINDOW)?.degree;
    let m_now = map_matrix(&traj.samples[14]);
    let m_next = map_matrix(&traj.samples[15]);
    let (dt_map, _) = step_channel(&m_now, &m_next)?;
    let mu_err = (robustness_step(&dt_map, dt, DEFAULT_BRANCH_WINDOW)?.mu - 2.0 * g).abs();
    Ok(Check {
        name: "measure_self_consistency",
        passed: max_degree <= 1e-6 && injected > 1e-6 && mu_err <= 1e-8,
        detail: format!(
            "max Markovian degree {max_degree:.2e}, injected degree {injected:.2e}, |mu - 2g| {mu_err:.2e}"
        ),
    })
}

/// Gaussian-trace correlators against the full 2^N dense trace.
fn gaussian_trace_oracle() -> Result<Check> {
    let (dt, steps) = (0.5, 10);
    let mut worst: f64 = 0.0;
    for m0 in [1usize, 3] {
        for beta in [0.05, 10.0] {
            let spec = SystemSpec::new(6, 1.0, 0.3, 0.4, 0.0, m0)?;
            let g = correlation_gaussian(&spec, beta, dt, steps)?;
            let (ap, am) = correlation_dense_trace(&spec, beta, dt, steps)?;
            for i in 0..=steps {
                worst = worst
                    .max((g.alpha_plus[i] - ap[i]).norm())
                    .max((g.alpha_minus[i] - am[i]).norm());
            }
        }
    }
    Ok(Check {
        name: "gaussian_trace_oracle",
        passed: worst <= 1e-8,
        detail: format!("worst deviation {worst:.2e}"),
    })
}

/// The BLP-blind point: monotone vacuum decay and a vanishing BLP measure.
fn blp_markov_point() -> Result<Check> {
    let h = 0.25;
    let spec = SystemSpec::new(120, 1.0, h, 1.0, 1.0 + 2.0 * h, 1)?;
    let (dt, steps) = (0.05, 600);
    let vac = channel_m01(&spec, &EnvInitialState::Vacuum, dt, steps)?.trajectory;
    let max_rise = vac
        .samples
        .windows(2)
        .map(|w| (w[1].a - w[0].a) / dt)
        .fold(f64::NEG_INFINITY, f64::max);
    let ground = channel_m01(&spec, &EnvInitialState::Ground { h_prep: -0.5 }, dt, steps)?.trajectory;
    let n_blp = blp_measure(&ground, &default_pairs())?.n_blp;
    Ok(Check {
        name: "blp_markov_point",
        passed: max_rise <= 1e-9 && n_blp <= 1e-10,
        detail: format!("max da/dt {max_rise:.2e}, ground N_BLP {n_blp:.2e}"),
    })
}

pub fn run_validate(cfg: &Config) -> std::result::Result<(), Failure> {
    let suite: Vec<fn() -> Result<Check>> = vec![
        engine_triangle,
        env_independence,
        decoupled_trivial,
        measure_self_consistency,
        gaussian_trace_oracle,
        blp_markov_point,
    ];
    let mut checks = Vec::new();
    for run in suite {
        match run() {
            Ok(check) => checks.push(check),
            Err(e) => checks.push(Check {
                name: "suite_error",
                passed: false,
                detail: e.to_string(),
            }),
        }
    }

    let all_passed = checks.iter().all(|c| c.passed);
    let entries: Vec<Value> = checks
        .iter()
        .map(|c| {
            let mut m: BTreeMap<String, Value> = BTreeMap::new();
            m.insert("detail".into(), Value::String(c.detail.clone()));
            m.insert("name".into(), Value::String(c.name.into()));
            m.insert("passed".into(), Value::Bool(c.passed));
            Value::Object(m.into_iter().collect())
        })
        .collect();
    let mut report: BTreeMap<String, Value> = BTreeMap::new();
    report.insert("checks".into(), Value::Array(entries));
    report.insert("passed".into(), Value::Bool(all_passed));
    fs::create_dir_all(&cfg.out)?;
    write_json(&cfg.out.join("validate.json"), &report)?;

    for c in &checks {
        println!(
            "[validate] {}: {} ({})",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure { code: 1, message: "validation failed".into() })
    }
}
