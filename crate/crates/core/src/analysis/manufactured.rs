use std::sync::Arc;

use nalgebra::DVector;

use crate::basis::{DomainMode, Sym2, VelocityBasis};
use crate::dynamics::{rhs, simulate, Forcing, SimulationState, SolverConfig};
use crate::error::{Error, Result};
use crate::operators::{Discretization, FluidParams, ForcingField, InitialData, TensorField, VectorField};

/// Exact steady solution `(v*, τ*)` with the body force `f*` that sustains
/// it. `v*` is the lowest stream mode `(1, 1)` of the velocity basis,
/// `τ* = 2a E(v*)` and
///
/// ```text
/// f* = Re (v*·∇)v* − (1−a) Δv* − ∇·τ* = Re (v*·∇)v* − Δv*
/// ```
///
/// since `∇·(2a E(v)) = a Δv` for solenoidal `v`.
#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    pub params: FluidParams,
    /// Index of `v*` in the velocity basis.
    pub mode_index: usize,
    /// `a* = e_{mode_index}`
    pub coefficients: DVector<f64>,
    /// `v*`, `τ*`, `f*` as pointwise fields.
    pub data: InitialData,
}

pub fn manufactured_solution(
    params: &FluidParams,
    vbasis: &VelocityBasis,
) -> Result<ManufacturedSolution> {
    if vbasis.domain.mode != DomainMode::NoslipSquare {
        return Err(Error::invalid(
            "the manufactured solution lives in the no-slip square basis",
        ));
    }
    let i = vbasis
        .stream_index(1, 1)
        .ok_or_else(|| Error::invalid("velocity basis has no (1, 1) mode"))?;
    let mut coefficients = DVector::zeros(vbasis.n_modes());
    coefficients[i] = 1.0;

    let b = Arc::new(vbasis.clone());
    let velocity: VectorField = {
        let b = b.clone();
        Arc::new(move |p| b.value(i, p))
    };
    let two_a = 2.0 * params.retardation;
    let stress: TensorField = {
        let b = b.clone();
        Arc::new(move |p| b.strain(i, p).scale(two_a))
    };
    let re = params.reynolds;
    let forcing: ForcingField = {
        let b = b.clone();
        Arc::new(move |p, _t| {
            let s = b.sample(i, p);
            let (v, g, l) = (s.value, s.gradient, s.laplacian);
            let conv = [
                v[0] * g[0][0] + v[1] * g[0][1],
                v[0] * g[1][0] + v[1] * g[1][1],
            ];
            [re * conv[0] - l[0], re * conv[1] - l[1]]
        })
    };
    Ok(ManufacturedSolution {
        params: *params,
        mode_index: i,
        coefficients,
        data: InitialData {
            velocity,
            stress,
            forcing,
        },
    })
}

impl ManufacturedSolution {
    pub fn velocity(&self) -> VectorField {
        self.data.velocity.clone()
    }

    pub fn stress(&self) -> TensorField {
        self.data.stress.clone()
    }

    pub fn forcing(&self) -> ForcingField {
        self.data.forcing.clone()
    }

    /// Rest initial state driven by `f*`.
    pub fn forced_from_rest(&self) -> InitialData {
        InitialData {
            forcing: self.forcing(),
            ..InitialData::rest()
        }
    }

    /// `(a*, b*)` with `b*` the stress projection of `τ*`.
    pub fn steady_state(&self, disc: &Discretization) -> SimulationState {
        SimulationState::new(
            0.0,
            self.coefficients.clone(),
            disc.project_stress(&*self.data.stress),
        )
    }

    /// Max-norm of both time derivatives at the steady state.
    pub fn steady_residual(&self, disc: &Discretization) -> Result<f64> {
        let state = self.steady_state(disc);
        let load = disc.forcing(self.forcing()).load(0.0);
        let (da, db) = rhs(&state, &disc.ops, &self.params, &load)?;
        Ok(da.amax().max(db.amax()))
    }

    /// `max_t max(‖a(t) − a*‖, ‖b(t) − b*‖)` along a run started at the
    /// steady state.
    pub fn steady_deviation(&self, disc: &Discretization, config: &SolverConfig) -> Result<f64> {
        let start = self.steady_state(disc);
        let forcing = disc.forcing(self.forcing());
        let traj = simulate(config, &disc.ops, start.clone(), &forcing)?;
        Ok(traj
            .samples
            .iter()
            .map(|s| {
                let da = (&s.state.a - &start.a).norm();
                let db = (&s.state.b - &start.b).norm();
                da.max(db)
            })
            .fold(0.0, f64::max))
    }

    /// `τ*` with the shear slot read from both off-diagonal entries.
    pub fn stress_matrix(&self, p: crate::basis::Point) -> [[f64; 2]; 2] {
        let t: Sym2 = (self.data.stress)(p);
        t.to_matrix()
    }
}
