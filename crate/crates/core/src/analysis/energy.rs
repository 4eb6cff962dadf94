use serde::Serialize;

use super::cumulative_trapezoid;
use crate::dynamics::{Diagnostics, Forcing, Trajectory};
use crate::error::{Error, Result};
use crate::operators::{FluidParams, GalerkinOperators};

/// Every term of the energy balance at one sample time.
///
/// ```text
/// kinetic + viscous_integral + stress_integral + stress_energy
///     = work_integral + initial_terms
/// ```
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    /// `Re ‖v(t)‖²`
    pub kinetic: f64,
    /// `2(1−a) ∫₀ᵗ ‖∇v‖²`
    pub viscous_integral: f64,
    /// `(1/a) ∫₀ᵗ ‖τ‖²`
    pub stress_integral: f64,
    /// `(We/2a) ‖τ(t)‖²`
    pub stress_energy: f64,
    /// `2 ∫₀ᵗ (f, v)`
    pub work_integral: f64,
    /// `Re ‖v0‖² + (We/2a) ‖τ0‖²`
    pub initial_terms: f64,
    /// left side minus right side
    pub residual: f64,
}

impl LedgerRow {
    pub fn lhs(&self) -> f64 {
        self.kinetic + self.viscous_integral + self.stress_integral + self.stress_energy
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn max_abs_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    /// `max |residual| / max LHS`; zero for an all-zero ledger.
    pub fn max_relative_residual(&self) -> f64 {
        let scale = self.rows.iter().map(LedgerRow::lhs).fold(0.0, f64::max);
        if scale == 0.0 {
            return self.max_abs_residual();
        }
        self.max_abs_residual() / scale
    }
}

/// Energy ledger with time integrals by composite trapezoid on the
/// trajectory's own sample grid.
pub fn energy_ledger(
    traj: &Trajectory,
    ops: &GalerkinOperators,
    params: &FluidParams,
    forcing: &dyn Forcing,
) -> Result<EnergyLedger> {
    if traj.is_empty() {
        return Err(Error::invalid("energy ledger needs a non-empty trajectory"));
    }
    let times = traj.times();
    let diag: Vec<_> = traj
        .samples
        .iter()
        .map(|s| Diagnostics::of(&s.state, ops, params))
        .collect();
    let work_rate: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| 2.0 * forcing.load(s.state.t).dot(&s.state.a))
        .collect();
    let viscous = cumulative_trapezoid(
        &times,
        &diag.iter().map(|d| d.viscous_rate).collect::<Vec<_>>(),
    );
    let relax = cumulative_trapezoid(
        &times,
        &diag.iter().map(|d| d.relaxation_rate).collect::<Vec<_>>(),
    );
    let work = cumulative_trapezoid(&times, &work_rate);
    let initial = diag[0].kinetic + diag[0].stress_energy;
    let rows = (0..times.len())
        .map(|k| {
            let mut row = LedgerRow {
                t: times[k],
                kinetic: diag[k].kinetic,
                viscous_integral: viscous[k],
                stress_integral: relax[k],
                stress_energy: diag[k].stress_energy,
                work_integral: work[k],
                initial_terms: initial,
                residual: 0.0,
            };
            row.residual = row.lhs() - (row.work_integral + row.initial_terms);
            row
        })
        .collect();
    Ok(EnergyLedger { rows })
}

/// Largest change of `‖v‖` and `‖τ‖` between adjacent samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub max_velocity_jump: f64,
    pub max_stress_jump: f64,
}

pub fn continuity_diagnostic(traj: &Trajectory, ops: &GalerkinOperators) -> ContinuityReport {
    let vn: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| ops.velocity_l2_sq(&s.state.a).sqrt())
        .collect();
    let sn: Vec<f64> = traj.samples.iter().map(|s| s.state.b.norm()).collect();
    let jump = |x: &[f64]| {
        x.windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    };
    ContinuityReport {
        max_velocity_jump: jump(&vn),
        max_stress_jump: jump(&sn),
    }
}
