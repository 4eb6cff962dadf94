//! Numerical certificates for the continuous theory, evaluated on discrete
//! trajectories.

mod convergence;
mod energy;
mod ladyzhenskaya;
mod manufactured;
mod stability;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub use convergence::{
    convergence_study, smooth_target_velocity, ConvergenceSetup, ConvergenceTable, SpatialRow,
    TemporalRow,
};
pub use energy::{continuity_diagnostic, energy_ledger, ContinuityReport, EnergyLedger, LedgerRow};
pub use ladyzhenskaya::{
    analytic_sine_ratio, check_ladyzhenskaya, ladyzhenskaya_ratio_fn, ladyzhenskaya_study,
    quartic_quadrature_order, LadyzhenskayaReport, LadyzhenskayaSample, LadyzhenskayaStudy,
    ScalarComponent,
    LADYZHENSKAYA_CONSTANT, LADYZHENSKAYA_TOLERANCE,
};
pub use manufactured::{manufactured_solution, ManufacturedSolution};
pub use stability::{
    perturbation_scaling, stability_experiment, ScalingReport, StabilityReport, StabilityRow,
};

/// Standard-normal coefficient vector.
pub fn standard_normal_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<f64> {
    DVector::from_iterator(
        len,
        (0..len).map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z
        }),
    )
}

/// Composite trapezoid running integral of `values` over `times`.
pub(crate) fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..values.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
        out.push(acc);
    }
    out
}
