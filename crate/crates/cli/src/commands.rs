//! The trajectory, phase-diagram, and correlations subcommands.

use std::collections::BTreeMap;
use std::fs;

use serde_json::Value;

use spinbath::blp::{blp_measure, default_pairs};
use spinbath::channel::ChannelTrajectory;
use spinbath::correlations::{
    correlation_gaussian, correlation_ns, correlation_time, kernels,
};
use spinbath::dense::DenseEngine;
use spinbath::gaussian::channel_m01;
use spinbath::model::{diagonalize_environment, occupations};
use spinbath::rates::{degree_from_rates, rates_analytic, reintegration_error};
use spinbath::resolvent::{vacuum_amplitude_tdl, DEFAULT_ETA};
use spinbath::sector::evolve_vacuum;
use spinbath::SystemSpec;

use crate::config::{Config, EngineSel, EnvKind};
use crate::output::{fmt12, json_f64, plot_script, write_csv, write_json};
use crate::Failure;

fn refusal(msg: impl Into<String>) -> Failure {
    Failure { code: 3, message: msg.into() }
}

struct EngineRun {
    trajectory: ChannelTrajectory,
    engine: &'static str,
    /// Finite-size revival horizon in units of `1/J`, when applicable.
    echo_horizon: Option<f64>,
    echo_warning: bool,
}

fn run_engine(cfg: &Config, spec: &SystemSpec) -> Result<EngineRun, Failure> {
    let (dt, steps) = (cfg.dt, cfg.steps());
    match cfg.resolve_engine(spec) {
        EngineSel::Sector => {
            if cfg.env != EnvKind::Vacuum {
                return Err(refusal(
                    "sector engine handles only the vacuum environment; pick engine=dense or gaussian",
                ));
            }
            let res = evolve_vacuum(spec, dt, steps)?;
            Ok(EngineRun {
                trajectory: res.trajectory,
                engine: "sector",
                echo_horizon: Some(spec.n as f64 / (2.0 * spec.j)),
                echo_warning: res.echo_warning,
            })
        }
        EngineSel::Gaussian => {
            let res = channel_m01(spec, &cfg.env_state(), dt, steps)?;
            Ok(EngineRun {
                trajectory: res.trajectory,
                engine: "gaussian",
                echo_horizon: Some(spec.n as f64 / spec.j),
                echo_warning: res.echo_warning,
            })
        }
        EngineSel::Dense => {
            let engine = DenseEngine::new(spec)?;
            let trajectory = engine.tomography(&cfg.env_state(), dt, steps)?;
            Ok(EngineRun { trajectory, engine: "dense", echo_horizon: None, echo_warning: false })
        }
        EngineSel::Analytic => {
            if cfg.env != EnvKind::Vacuum {
                return Err(refusal("the analytic engine handles only the vacuum environment"));
            }
            let ce = vacuum_amplitude_tdl(spec, dt, steps, DEFAULT_ETA)?;
            let a: Vec<f64> = ce.iter().map(|z| z.norm_sqr()).collect();
            let c = vec![0.0; ce.len()];
            let trajectory = ChannelTrajectory::from_elements(dt, &a, &c, &ce);
            Ok(EngineRun { trajectory, engine: "analytic", echo_horizon: None, echo_warning: false })
        }
        EngineSel::Auto => unreachable!("auto is resolved before dispatch"),
    }
}

fn rate_flags(divergent: bool, phase_flag: bool) -> String {
    match (divergent, phase_flag) {
        (true, true) => "divergent|phase".into(),
        (true, false) => "divergent".into(),
        (false, true) => "phase".into(),
        (false, false) => "-".into(),
    }
}

pub fn run_trajectory(cfg: &Config) -> Result<(), Failure> {
    let spec = cfg.system_spec()?;
    let run = run_engine(cfg, &spec)?;
    let rates = rates_analytic(&run.trajectory)?;
    let degree = degree_from_rates(&rates, run.trajectory.dt, false);
    let blp = blp_measure(&run.trajectory, &default_pairs())?;
    let closure = reintegration_error(&run.trajectory)?;

    fs::create_dir_all(&cfg.out)?;
    let header = "t,a,c,Re_b,Im_b,E_LS,gamma1,gamma2,gamma3,mu,flags";
    let rows: Vec<String> = run
        .trajectory
        .samples
        .iter()
        .zip(&rates)
        .map(|(s, r)| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                fmt12(s.t),
                fmt12(s.a),
                fmt12(s.c),
                fmt12(s.b.re),
                fmt12(s.b.im),
                fmt12(r.e_ls),
                fmt12(r.gamma1),
                fmt12(r.gamma2),
                fmt12(r.gamma3),
                fmt12(r.mu),
                rate_flags(r.divergent, r.phase_flag),
            )
        })
        .collect();
    write_csv(&cfg.out.join("trajectory.csv"), header, &rows)?;

    let mut convergence: BTreeMap<String, Value> = BTreeMap::new();
    convergence.insert("reintegration_error".into(), json_f64(closure));
    convergence
        .insert("echo_warning".into(), Value::Bool(run.echo_warning));
    let mut summary: BTreeMap<String, Value> = BTreeMap::new();
    summary.insert("N_BLP".into(), json_f64(blp.n_blp));
    summary.insert("N_degree".into(), json_f64(degree));
    summary.insert(
        "convergence_report".into(),
        Value::Object(convergence.into_iter().collect()),
    );
    summary.insert(
        "echo_horizon".into(),
        run.echo_horizon.map(json_f64).unwrap_or(Value::Null),
    );
    summary.insert("engine".into(), Value::String(run.engine.into()));
    write_json(&cfg.out.join("summary.json"), &summary)?;

    if cfg.emit_plot_script {
        fs::write(
            cfg.out.join("plot_trajectory.py"),
            plot_script("trajectory.csv", &["a", "c", "gamma3", "mu"]),
        )?;
    }
    println!(
        "trajectory: engine={} N_degree={} N_BLP={} -> {}",
        run.engine,
        fmt12(degree),
        fmt12(blp.n_blp),
        cfg.out.display()
    );
    Ok(())
}

/// One sweep point: the divisibility degree at `(delta_h, omega)`.
/// Failures are returned as messages so the sweep can record them in-row.
fn phase_point(cfg: &Config, delta_h: f64, omega: f64) -> Result<f64, String> {
    let mut point = cfg.clone();
    point.delta_h = delta_h;
    point.omega = omega;
    let spec = point.system_spec().map_err(|e| e.to_string())?;
    let run = run_engine(&point, &spec).map_err(|f| f.message)?;
    let rates = rates_analytic(&run.trajectory).map_err(|e| e.to_string())?;
    Ok(degree_from_rates(&rates, run.trajectory.dt, false))
}

pub fn run_phase_diagram(cfg: &Config) -> Result<(), Failure> {
    let grid: Vec<(f64, f64)> = cfg
        .delta_h_grid
        .values()
        .into_iter()
        .flat_map(|dh| cfg.omega_grid.values().into_iter().map(move |om| (dh, om)))
        .collect();

    // Shared-nothing worker pool; the merge is by grid index, so the output
    // is byte-identical regardless of the parallelism degree.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Failure { code: 1, message: format!("worker pool: {e}") })?;
    let results: Vec<Result<f64, String>> = pool.install(|| {
        use rayon::prelude::*;
        grid.par_iter().map(|&(dh, om)| phase_point(cfg, dh, om)).collect()
    });

    fs::create_dir_all(&cfg.out)?;
    let rows: Vec<String> = grid
        .iter()
        .zip(&results)
        .map(|(&(dh, om), res)| match res {
            Ok(degree) => format!("{},{},{},ok", fmt12(dh), fmt12(om), fmt12(*degree)),
            Err(msg) => format!(
                "{},{},nan,{}",
                fmt12(dh),
                fmt12(om),
                msg.replace([',', '\n'], ";")
            ),
        })
        .collect();
    write_csv(&cfg.out.join("phase_diagram.csv"), "Delta_h,Omega,N_degree,status", &rows)?;
    let failures = results.iter().filter(|r| r.is_err()).count();
    println!(
        "phase-diagram: {} points ({} failed) -> {}",
        grid.len(),
        failures,
        cfg.out.display()
    );
    Ok(())
}

pub fn run_correlations(cfg: &Config) -> Result<(), Failure> {
    if cfg.is_tdl() {
        return Err(refusal("correlation functions need a finite chain (n > 0)"));
    }
    let spec = cfg.system_spec()?;
    let (dt, steps) = (cfg.dt, cfg.steps());
    let series = match cfg.env {
        EnvKind::Thermal => correlation_gaussian(&spec, cfg.beta, dt, steps)?,
        // Vacuum and ground states are number-conserving: the mode
        // occupations fix the correlators exactly.
        _ => {
            let basis = diagonalize_environment(&spec);
            let occ = occupations(&spec, &basis, &cfg.env_state())?;
            correlation_ns(&spec, &occ, dt, steps)
        }
    };
    let (k_plus, k_minus) = kernels(&series, spec.detuning());
    let mags: Vec<f64> = series.alpha_plus.iter().map(|z| z.norm()).collect();
    let tau = correlation_time(&mags, dt);

    fs::create_dir_all(&cfg.out)?;
    let header = "t,Re_alpha_plus,Im_alpha_plus,Re_alpha_minus,Im_alpha_minus,K_plus,K_minus";
    let rows: Vec<String> = (0..series.alpha_plus.len())
        .map(|i| {
            format!(
                "{},{},{},{},{},{},{}",
                fmt12(i as f64 * dt),
                fmt12(series.alpha_plus[i].re),
                fmt12(series.alpha_plus[i].im),
                fmt12(series.alpha_minus[i].re),
                fmt12(series.alpha_minus[i].im),
                fmt12(k_plus[i]),
                fmt12(k_minus[i]),
            )
        })
        .collect();
    write_csv(&cfg.out.join("correlations.csv"), header, &rows)?;

    let mut summary: BTreeMap<String, Value> = BTreeMap::new();
    summary.insert("no_decay".into(), Value::Bool(tau.no_decay));
    summary.insert("provenance".into(), Value::String(format!("{:?}", series.provenance)));
    summary.insert("slow_decay".into(), Value::Bool(tau.slow_decay));
    summary.insert("sum_rule_defect".into(), json_f64(series.sum_rule_defect()));
    summary.insert("tau_c".into(), json_f64(tau.tau_c));
    write_json(&cfg.out.join("correlations.json"), &summary)?;

    if cfg.emit_plot_script {
        fs::write(
            cfg.out.join("plot_correlations.py"),
            plot_script("correlations.csv", &["Re_alpha_plus", "Im_alpha_plus", "K_plus"]),
        )?;
    }
    println!(
        "correlations: tau_c={} sum_rule_defect={} -> {}",
        fmt12(tau.tau_c),
        fmt12(series.sum_rule_defect()),
        cfg.out.display()
    );
    Ok(())
}
