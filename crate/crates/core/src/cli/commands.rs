use std::path::Path;
use std::time::Instant;

use serde_json::json;

use super::config::RunConfig;
use super::output::{fmt_float, fmt_opt, write_csv, CheckStatus, FinalEnergies, RunSummary};
use crate::analysis::{
    analytic_sine_ratio, convergence_study, energy_ledger, ladyzhenskaya_study,
    perturbation_scaling, quartic_quadrature_order, stability_experiment, ConvergenceSetup,
};
use crate::basis::quadrature_grid;
use crate::dynamics::{simulate, SimulationState, Trajectory};
use crate::error::Result;
use crate::operators::Discretization;

struct Run {
    disc: Discretization,
    traj: Trajectory,
    summary: RunSummary,
}

fn run_simulation(cfg: &RunConfig, command: &str) -> Result<Run> {
    cfg.validate()?;
    let disc = cfg.discretization()?;
    let data = cfg.initial_data(&disc)?;
    let (a, b) = disc.project_initial(&data)?;
    let forcing = disc.forcing(data.forcing.clone());
    let solver = cfg.solver_config();
    let traj = simulate(&solver, &disc.ops, SimulationState::new(0.0, a, b), &forcing)?;
    let ledger = energy_ledger(&traj, &disc.ops, &cfg.params, &forcing)?;
    let mut summary = RunSummary::new(command, cfg);
    let last = traj.samples.last().unwrap();
    summary.final_energies = Some(FinalEnergies {
        t: last.state.t,
        kinetic: last.diagnostics.kinetic,
        stress_energy: last.diagnostics.stress_energy,
        total: last.diagnostics.total_energy(),
    });
    summary.max_energy_residual = Some(ledger.max_abs_residual());
    summary.max_relative_energy_residual = Some(ledger.max_relative_residual());
    Ok(Run {
        disc,
        traj,
        summary,
    })
}

fn finish(mut summary: RunSummary, start: Instant, dir: &Path) -> Result<RunSummary> {
    summary.wall_time_s = start.elapsed().as_secs_f64();
    summary.write(dir)?;
    Ok(summary)
}

/// Writes `trajectory.csv` and `summary.json`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let run = run_simulation(cfg, "simulate")?;
    let dir = &cfg.output.dir;
    let (n, m) = (run.disc.ops.n(), run.disc.ops.m());
    let mut header: Vec<String> = ["t", "kinetic", "stress_energy", "viscous_rate"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n).map(|i| format!("a_{i}")));
    header.extend((1..=m).map(|i| format!("b_{i}")));
    let rows = run.traj.samples.iter().map(|s| {
        let d = &s.diagnostics;
        let mut row = vec![
            fmt_float(s.state.t),
            fmt_float(d.kinetic),
            fmt_float(d.stress_energy),
            fmt_float(d.viscous_rate),
        ];
        row.extend(s.state.a.iter().map(|&x| fmt_float(x)));
        row.extend(s.state.b.iter().map(|&x| fmt_float(x)));
        row
    });
    write_csv(&dir.join("trajectory.csv"), &header, rows)?;
    finish(run.summary, start, dir)
}

/// Writes `energy.csv`; the energy check passes when the max relative
/// residual is at most `study.energy_tolerance`.
pub fn cmd_energy_check(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let mut run = run_simulation(cfg, "energy-check")?;
    let dir = &cfg.output.dir;
    let data = cfg.initial_data(&run.disc)?;
    let forcing = run.disc.forcing(data.forcing);
    let ledger = energy_ledger(&run.traj, &run.disc.ops, &cfg.params, &forcing)?;
    let header: Vec<String> = [
        "t",
        "kinetic",
        "viscous_integral",
        "stress_integral",
        "stress_energy",
        "work_integral",
        "initial_terms",
        "residual",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = ledger.rows.iter().map(|r| {
        [
            r.t,
            r.kinetic,
            r.viscous_integral,
            r.stress_integral,
            r.stress_energy,
            r.work_integral,
            r.initial_terms,
            r.residual,
        ]
        .iter()
        .map(|&x| fmt_float(x))
        .collect()
    });
    write_csv(&dir.join("energy.csv"), &header, rows)?;
    let rel = ledger.max_relative_residual();
    // Residual of the same run sampled at every other step.
    let coarse = energy_ledger(&run.traj.subsample(2), &run.disc.ops, &cfg.params, &forcing)?;
    run.summary.set_check(
        "energy",
        CheckStatus::from_bool(rel <= cfg.study.energy_tolerance),
    );
    run.summary.details = json!({
        "energy_tolerance": cfg.study.energy_tolerance,
        "max_relative_residual": rel,
        "max_relative_residual_stride2": coarse.max_relative_residual(),
    });
    finish(run.summary, start, dir)
}

/// Runs the configured data against a copy perturbed by
/// `study.epsilon · φ_{study.perturb_mode}`; writes `stability.csv`.
pub fn cmd_stability(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    cfg.validate()?;
    let dir = &cfg.output.dir;
    let disc = cfg.discretization()?;
    let base = cfg.initial_data(&disc)?;
    let dv = cfg.perturbation(&disc);
    let eps = cfg.study.epsilon;
    let solver = cfg.solver_config();
    let identical = stability_experiment(&solver, &disc, &base, &base.clone())?;
    let report = stability_experiment(&solver, &disc, &base, &base.perturbed(dv.clone(), eps))?;
    let scaling = perturbation_scaling(&solver, &disc, &base, dv, eps, cfg.study.scaling_tolerance)?;
    let header: Vec<String> = [
        "t",
        "delta",
        "gronwall_bound",
        "xi",
        "xi_integral",
        "xi_l2",
        "xi_l2_integral",
        "gronwall_bound_l2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = report.rows.iter().map(|r| {
        [
            r.t,
            r.delta,
            r.gronwall_bound,
            r.xi,
            r.xi_integral,
            r.xi_l2,
            r.xi_l2_integral,
            r.gronwall_bound_l2,
        ]
        .iter()
        .map(|&x| fmt_float(x))
        .collect()
    });
    write_csv(&dir.join("stability.csv"), &header, rows)?;
    let mut summary = RunSummary::new("stability", cfg);
    summary.set_check(
        "stability",
        CheckStatus::from_bool(report.bound_holds && identical.identical),
    );
    summary.set_check(
        "stability_scaling",
        CheckStatus::from_bool(scaling.within_tolerance),
    );
    summary.details = json!({
        "epsilon": eps,
        "fitted_c": report.fitted_c,
        "fitted_c_l2": report.fitted_c_l2,
        "rate_c": report.rate_c,
        "bound_holds": report.bound_holds,
        "bound_holds_l2": report.bound_holds_l2,
        "differential_holds": report.differential_holds,
        "identical_data_delta_zero": identical.identical,
        "scaling_max_deviation": scaling.max_deviation,
    });
    finish(summary, start, dir)
}

/// `study.n_samples` seeded random fields; writes `ratios.csv`.
pub fn cmd_ladyzhenskaya(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    cfg.validate()?;
    let dir = &cfg.output.dir;
    let domain = cfg.domain_spec()?;
    let k = cfg.discretization.k_max;
    let basis = crate::basis::build_velocity_basis(&domain, k)?;
    let quad = quadrature_grid(&domain, quartic_quadrature_order(&domain, k))?;
    let study = ladyzhenskaya_study(&basis, &quad, cfg.study.n_samples, cfg.seed)?;
    let header: Vec<String> = ["index", "component", "l4", "l2", "grad_l2", "ratio", "status"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = study.samples.iter().map(|s| {
        let comp = serde_json::to_value(s.component).unwrap();
        let mut row = vec![s.index.to_string(), comp.as_str().unwrap().to_string()];
        match s.report {
            Some(r) => {
                row.extend([r.l4, r.l2, r.grad_l2, r.ratio].iter().map(|&x| fmt_float(x)));
                row.push(if r.passes() { "pass" } else { "fail" }.to_string());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 4));
                row.push("skipped".to_string());
            }
        }
        row
    });
    write_csv(&dir.join("ratios.csv"), &header, rows)?;
    let mut summary = RunSummary::new("ladyzhenskaya", cfg);
    summary.set_check("ladyzhenskaya", CheckStatus::from_bool(study.all_pass()));
    summary.details = json!({
        "n_samples": cfg.study.n_samples,
        "max_ratio": study.max_ratio(),
        "analytic_sine_ratio": analytic_sine_ratio(),
        "quad_order": quad.order,
    });
    finish(summary, start, dir)
}

/// Spatial study over `study.k_list` and temporal study over
/// `study.dt_list` at `study.temporal_k`; writes `convergence.csv`.
pub fn cmd_converge(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    cfg.validate()?;
    let dir = &cfg.output.dir;
    let domain = cfg.domain_spec()?;
    // Transient data is built on the finest basis so every mode index exists.
    let finest = *cfg.study.k_list.iter().max().unwrap();
    let fine = Discretization::new(domain, finest.max(cfg.discretization.k_max), None)?;
    let transient = cfg.initial_data(&fine)?;
    let setup = ConvergenceSetup {
        solver: cfg.solver_config(),
        domain,
        k_list: cfg.study.k_list.clone(),
        dt_list: cfg.study.dt_list.clone(),
        temporal_k: cfg.study.temporal_k,
    };
    let table = convergence_study(&setup, &transient)?;
    let header: Vec<String> = [
        "kind",
        "k_max",
        "dt",
        "n_modes",
        "mms_projection_error",
        "mms_steady_residual",
        "smooth_projection_error",
        "error",
        "observed_order",
        "richardson_order",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows: Vec<Vec<String>> = table
        .spatial
        .iter()
        .map(|r| {
            vec![
                "spatial".into(),
                r.k_max.to_string(),
                fmt_float(cfg.solver.dt),
                r.n_modes.to_string(),
                fmt_float(r.mms_projection_error),
                fmt_float(r.mms_steady_residual),
                fmt_float(r.smooth_projection_error),
                fmt_opt(r.transient_error),
                fmt_opt(r.observed_order),
                String::new(),
            ]
        })
        .collect();
    rows.extend(table.temporal.iter().map(|r| {
        vec![
            "temporal".into(),
            table.temporal_k.to_string(),
            fmt_float(r.dt),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            fmt_opt(r.error),
            fmt_opt(r.observed_order),
            fmt_opt(r.richardson_order),
        ]
    }));
    write_csv(&dir.join("convergence.csv"), &header, rows)?;

    let mut summary = RunSummary::new("converge", cfg);
    let smooth: Vec<f64> = table.spatial.iter().map(|r| r.smooth_projection_error).collect();
    summary.set_check(
        "convergence_spatial",
        CheckStatus::from_bool(smooth.windows(2).all(|w| w[1] < w[0])),
    );
    let expected = match cfg.solver.scheme {
        crate::dynamics::Scheme::Rk4 => Some(4.0),
        crate::dynamics::Scheme::Imex => Some(1.0),
        crate::dynamics::Scheme::ExactStress => Some(2.0),
    };
    // Finest available estimate; coarse steps may be pre-asymptotic.
    let finest_order = table.temporal.iter().rev().find_map(|r| r.richardson_order);
    let temporal = match (expected, finest_order) {
        (Some(p), Some(q)) => CheckStatus::from_bool((q - p).abs() <= 0.5),
        _ => CheckStatus::Skipped,
    };
    summary.set_check("convergence_temporal", temporal);
    summary.details = serde_json::to_value(&table)?;
    finish(summary, start, dir)
}
