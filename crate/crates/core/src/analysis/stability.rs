use serde::Serialize;

use super::cumulative_trapezoid;
use crate::dynamics::{simulate, SimulationState, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::operators::{Discretization, InitialData, VectorField};

/// Relative slack on the bound check, for round-off in `exp`.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StabilityRow {
    pub t: f64,
    /// `‖v1 − v2‖² + ‖τ1 − τ2‖²`
    pub delta: f64,
    /// `(1−a) ‖∇v2‖²`
    pub xi: f64,
    pub xi_integral: f64,
    /// `delta(0) · exp(fitted_c · ∫ξ)`
    pub gronwall_bound: f64,
    /// `‖v2‖²`
    pub xi_l2: f64,
    pub xi_l2_integral: f64,
    pub gronwall_bound_l2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// Smallest `C ≥ 0` with `delta(t) ≤ delta(0) exp(C ∫₀ᵗ ξ)` at every sample.
    pub fitted_c: f64,
    pub fitted_c_l2: f64,
    /// Smallest `C ≥ 0` bounding every interval rate `Δ ln delta / Δ∫ξ`.
    pub rate_c: f64,
    pub bound_holds: bool,
    pub bound_holds_l2: bool,
    /// `Δdelta ≤ rate_c · ∫ ξ delta` on every interval, up to the
    /// trapezoid's second-order error.
    pub differential_holds: bool,
    /// Every `delta` is exactly zero.
    pub identical: bool,
}

fn squared_differences(t1: &Trajectory, t2: &Trajectory, disc: &Discretization) -> Vec<f64> {
    t1.samples
        .iter()
        .zip(&t2.samples)
        .map(|(s1, s2)| {
            let da = &s1.state.a - &s2.state.a;
            let db = &s1.state.b - &s2.state.b;
            disc.ops.velocity_l2_sq(&da) + db.norm_squared()
        })
        .collect()
}

fn fit_constant(delta: &[f64], integral: &[f64]) -> f64 {
    let d0 = delta[0];
    let mut c: f64 = 0.0;
    for (&d, &x) in delta.iter().zip(integral).skip(1) {
        if d <= d0 * (1.0 + BOUND_SLACK) {
            continue;
        }
        if x <= 0.0 || d0 == 0.0 {
            return f64::INFINITY;
        }
        c = c.max((d / d0).ln() / x);
    }
    c
}

fn bound_holds(delta: &[f64], bound: &[f64]) -> bool {
    delta
        .iter()
        .zip(bound)
        .all(|(&d, &b)| d <= b * (1.0 + BOUND_SLACK) || (d == 0.0 && b == 0.0))
}

fn bounds(delta0: f64, c: f64, integral: &[f64]) -> Vec<f64> {
    integral
        .iter()
        .map(|&x| if c == 0.0 { delta0 } else { delta0 * (c * x).exp() })
        .collect()
}

/// Two runs on the same discretization and step sequence, compared sample
/// by sample. `ξ` is measured on the second run.
pub fn stability_experiment(
    config: &SolverConfig,
    disc: &Discretization,
    data1: &InitialData,
    data2: &InitialData,
) -> Result<StabilityReport> {
    let run = |data: &InitialData| -> Result<Trajectory> {
        let (a, b) = disc.project_initial(data)?;
        let forcing = disc.forcing(data.forcing.clone());
        simulate(config, &disc.ops, SimulationState::new(0.0, a, b), &forcing)
    };
    let (r1, r2) = rayon::join(|| run(data1), || run(data2));
    let (t1, t2) = (r1?, r2?);
    if t1.len() != t2.len() {
        return Err(Error::invalid("runs produced different sample grids"));
    }
    let times = t1.times();
    let delta = squared_differences(&t1, &t2, disc);
    let visc = config.params.solvent_viscosity();
    let xi: Vec<f64> = t2
        .samples
        .iter()
        .map(|s| visc * disc.ops.velocity_grad_sq(&s.state.a))
        .collect();
    let xi_l2: Vec<f64> = t2
        .samples
        .iter()
        .map(|s| disc.ops.velocity_l2_sq(&s.state.a))
        .collect();
    let xi_int = cumulative_trapezoid(&times, &xi);
    let xi_l2_int = cumulative_trapezoid(&times, &xi_l2);

    let fitted_c = fit_constant(&delta, &xi_int);
    let fitted_c_l2 = fit_constant(&delta, &xi_l2_int);
    let bound = bounds(delta[0], fitted_c, &xi_int);
    let bound_l2 = bounds(delta[0], fitted_c_l2, &xi_l2_int);

    let mut rate_c: f64 = 0.0;
    for k in 1..delta.len() {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d1 <= d0 {
            continue;
        }
        let dx = xi_int[k] - xi_int[k - 1];
        if d0 == 0.0 || dx <= 0.0 {
            rate_c = f64::INFINITY;
            break;
        }
        rate_c = rate_c.max((d1 / d0).ln() / dx);
    }
    let differential_holds = rate_c.is_finite()
        && (1..delta.len()).all(|k| {
            let h = times[k] - times[k - 1];
            let inc = delta[k] - delta[k - 1];
            let trap = 0.5 * h * (xi[k] * delta[k] + xi[k - 1] * delta[k - 1]);
            let dx = xi_int[k] - xi_int[k - 1];
            let tol = (rate_c * dx).powi(2) * delta[k].max(delta[k - 1])
                + BOUND_SLACK * delta[k].abs();
            inc <= rate_c * trap + tol
        });

    let rows = (0..times.len())
        .map(|k| StabilityRow {
            t: times[k],
            delta: delta[k],
            xi: xi[k],
            xi_integral: xi_int[k],
            gronwall_bound: bound[k],
            xi_l2: xi_l2[k],
            xi_l2_integral: xi_l2_int[k],
            gronwall_bound_l2: bound_l2[k],
        })
        .collect();
    Ok(StabilityReport {
        rows,
        fitted_c,
        fitted_c_l2,
        rate_c,
        bound_holds: fitted_c.is_finite() && bound_holds(&delta, &bound),
        bound_holds_l2: fitted_c_l2.is_finite() && bound_holds(&delta, &bound_l2),
        differential_holds,
        identical: delta.iter().all(|&d| d == 0.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub epsilon: f64,
    /// `delta_ε(t) / delta_{ε/2}(t)` per sample.
    pub ratios: Vec<f64>,
    /// `max |ratio/4 − 1|`
    pub max_deviation: f64,
    pub within_tolerance: bool,
}

/// Runs `base` against `base + ε·dv` and `base + (ε/2)·dv` and checks that
/// the whole delta curve scales by 4.
pub fn perturbation_scaling(
    config: &SolverConfig,
    disc: &Discretization,
    base: &InitialData,
    dv: VectorField,
    epsilon: f64,
    tolerance: f64,
) -> Result<ScalingReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon must be positive and finite"));
    }
    let full = stability_experiment(config, disc, base, &base.perturbed(dv.clone(), epsilon))?;
    let half = stability_experiment(config, disc, base, &base.perturbed(dv, 0.5 * epsilon))?;
    let ratios: Vec<f64> = full
        .rows
        .iter()
        .zip(&half.rows)
        .map(|(f, h)| f.delta / h.delta)
        .collect();
    let max_deviation = ratios
        .iter()
        .map(|r| (r / 4.0 - 1.0).abs())
        .fold(0.0, |m: f64, x| if x.is_nan() { f64::INFINITY } else { m.max(x) });
    Ok(ScalingReport {
        epsilon,
        ratios,
        max_deviation,
        within_tolerance: max_deviation <= tolerance,
    })
}
