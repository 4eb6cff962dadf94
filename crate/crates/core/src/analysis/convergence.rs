use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::manufactured_solution;
use crate::basis::{evaluate_field, DomainSpec, Point};
use crate::dynamics::{simulate, SimulationState, SolverConfig};
use crate::error::{Error, Result};
use crate::operators::{Discretization, InitialData, VectorField};

/// Curl of `g(x/L) g(y/L)` with `g(s) = s²(1−s)² eˢ`; divergence-free,
/// no-slip, and not in any finite trigonometric span.
pub fn smooth_target_velocity(domain: &DomainSpec) -> VectorField {
    let l = domain.side_length;
    let g = |s: f64| s * s * (1.0 - s) * (1.0 - s) * s.exp();
    let dg = |s: f64| {
        let u = 1.0 - s;
        s.exp() * (2.0 * s * u * u - 2.0 * s * s * u + s * s * u * u)
    };
    Arc::new(move |[x, y]: Point| {
        let (sx, sy) = (x / l, y / l);
        [g(sx) * dg(sy) / l, -dg(sx) * g(sy) / l]
    })
}

/// Inputs of a convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceSetup {
    pub solver: SolverConfig,
    pub domain: DomainSpec,
    /// Strictly increasing; the last entry is the spatial reference.
    pub k_list: Vec<usize>,
    /// Strictly decreasing; the last entry is the temporal reference.
    pub dt_list: Vec<f64>,
    /// Resolution of the temporal study.
    pub temporal_k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpatialRow {
    pub k_max: usize,
    pub n_modes: usize,
    /// `‖v* − P v*‖`
    pub mms_projection_error: f64,
    /// Max-norm of the time derivatives at the manufactured steady state.
    pub mms_steady_residual: f64,
    /// `‖v − P v‖` for [`smooth_target_velocity`].
    pub smooth_projection_error: f64,
    /// `‖v_k(T) − v_ref(T)‖ + ‖τ_k(T) − τ_ref(T)‖`; `None` on the reference row.
    pub transient_error: Option<f64>,
    /// `log(e_prev / e) / log(k / k_prev)` of the transient error.
    pub observed_order: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TemporalRow {
    pub dt: f64,
    /// Coefficient error at `T` against the finest `dt`, mass-weighted for
    /// the velocity; `None` on the reference row.
    pub error: Option<f64>,
    pub observed_order: Option<f64>,
    /// From this row and the next two, independent of the reference.
    pub richardson_order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub spatial: Vec<SpatialRow>,
    pub temporal: Vec<TemporalRow>,
    pub temporal_k: usize,
}

fn l2_distance<T, F>(a: &[T], b: &[T], w: &[f64], dist: F) -> f64
where
    F: Fn(&T, &T) -> f64,
{
    a.iter()
        .zip(b)
        .zip(w)
        .map(|((x, y), w)| w * dist(x, y))
        .sum::<f64>()
        .sqrt()
}

fn projection_error(disc: &Discretization, field: &VectorField) -> Result<f64> {
    let a = disc.project_velocity(&**field);
    let approx = evaluate_field(a.as_slice(), &disc.velocity, &disc.quad.nodes)?;
    let exact: Vec<_> = disc.quad.nodes.iter().map(|&p| field(p)).collect();
    Ok(l2_distance(&approx, &exact, &disc.quad.weights, |u, v| {
        (u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)
    }))
}

fn final_state(
    disc: &Discretization,
    config: &SolverConfig,
    data: &InitialData,
) -> Result<SimulationState> {
    let (a, b) = disc.project_initial(data)?;
    let forcing = disc.forcing(data.forcing.clone());
    let traj = simulate(config, &disc.ops, SimulationState::new(0.0, a, b), &forcing)?;
    Ok(traj.last().clone())
}

fn order(e_coarse: f64, e_fine: f64, h_ratio: f64) -> Option<f64> {
    (e_coarse > 0.0 && e_fine > 0.0).then(|| (e_coarse / e_fine).ln() / h_ratio.ln())
}

fn validate(setup: &ConvergenceSetup) -> Result<()> {
    let mut errs = Vec::new();
    if setup.k_list.is_empty() || setup.k_list.contains(&0) {
        errs.push("k_list must be non-empty with entries ≥ 1".to_string());
    }
    if setup.k_list.windows(2).any(|w| w[0] >= w[1]) {
        errs.push("k_list must be strictly increasing".to_string());
    }
    if setup.dt_list.is_empty() || setup.dt_list.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        errs.push("dt_list must be non-empty with positive entries".to_string());
    }
    if setup.dt_list.windows(2).any(|w| w[0] <= w[1]) {
        errs.push("dt_list must be strictly decreasing".to_string());
    }
    if setup.temporal_k == 0 {
        errs.push("temporal_k must be ≥ 1".to_string());
    }
    errs.extend(setup.solver.violations());
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(errs))
    }
}

/// Spatial rows over `k_list` and temporal rows over `dt_list`. Each run is
/// independent and the grid runs concurrently; rows come back in list order.
pub fn convergence_study(setup: &ConvergenceSetup, transient: &InitialData) -> Result<ConvergenceTable> {
    validate(setup)?;
    let params = setup.solver.params;
    let target = smooth_target_velocity(&setup.domain);

    let discs: Vec<Discretization> = setup
        .k_list
        .par_iter()
        .map(|&k| Discretization::new(setup.domain, k, None))
        .collect::<Result<_>>()?;
    let finals: Vec<SimulationState> = discs
        .par_iter()
        .map(|d| final_state(d, &setup.solver, transient))
        .collect::<Result<_>>()?;
    let reference = discs.last().unwrap();
    let ref_state = finals.last().unwrap();
    let nodes = &reference.quad.nodes;
    let weights = &reference.quad.weights;
    let ref_v = evaluate_field(ref_state.a.as_slice(), &reference.velocity, nodes)?;
    let ref_s = evaluate_field(ref_state.b.as_slice(), &reference.stress, nodes)?;

    let mut spatial = Vec::with_capacity(discs.len());
    for (i, (d, fin)) in discs.iter().zip(&finals).enumerate() {
        let ms = manufactured_solution(&params, &d.velocity)?;
        let transient_error = if i + 1 == discs.len() {
            None
        } else {
            let v = evaluate_field(fin.a.as_slice(), &d.velocity, nodes)?;
            let s = evaluate_field(fin.b.as_slice(), &d.stress, nodes)?;
            let ev = l2_distance(&v, &ref_v, weights, |u, w| {
                (u[0] - w[0]).powi(2) + (u[1] - w[1]).powi(2)
            });
            let es = l2_distance(&s, &ref_s, weights, |u, w| {
                let e = *u - *w;
                e.dot(&e)
            });
            Some(ev + es)
        };
        let observed_order = match (spatial.last(), transient_error) {
            (Some(SpatialRow {
                k_max,
                transient_error: Some(prev),
                ..
            }), Some(e)) => order(*prev, e, d.k_max as f64 / *k_max as f64),
            _ => None,
        };
        spatial.push(SpatialRow {
            k_max: d.k_max,
            n_modes: d.ops.n(),
            mms_projection_error: projection_error(d, &ms.velocity())?,
            mms_steady_residual: ms.steady_residual(d)?,
            smooth_projection_error: projection_error(d, &target)?,
            transient_error,
            observed_order,
        });
    }

    let tdisc = Discretization::new(setup.domain, setup.temporal_k, None)?;
    let runs: Vec<SimulationState> = setup
        .dt_list
        .par_iter()
        .map(|&dt| {
            let cfg = SolverConfig { dt, ..setup.solver };
            final_state(&tdisc, &cfg, transient)
        })
        .collect::<Result<_>>()?;
    let dist = |x: &SimulationState, y: &SimulationState| -> f64 {
        let da: DVector<f64> = &x.a - &y.a;
        tdisc.ops.velocity_l2_sq(&da).sqrt() + (&x.b - &y.b).norm()
    };
    let last = runs.last().unwrap();
    let n = runs.len();
    let errors: Vec<Option<f64>> = (0..n)
        .map(|i| (i + 1 < n).then(|| dist(&runs[i], last)))
        .collect();
    let temporal = (0..n)
        .map(|i| {
            let observed_order = match (i.checked_sub(1).and_then(|j| errors[j]), errors[i]) {
                (Some(prev), Some(e)) => order(prev, e, setup.dt_list[i - 1] / setup.dt_list[i]),
                _ => None,
            };
            let richardson_order = (i + 2 < n)
                .then(|| {
                    let e1 = dist(&runs[i], &runs[i + 1]);
                    let e2 = dist(&runs[i + 1], &runs[i + 2]);
                    order(e1, e2, setup.dt_list[i] / setup.dt_list[i + 1])
                })
                .flatten();
            TemporalRow {
                dt: setup.dt_list[i],
                error: errors[i],
                observed_order,
                richardson_order,
            }
        })
        .collect();
    Ok(ConvergenceTable {
        spatial,
        temporal,
        temporal_k: setup.temporal_k,
    })
}
