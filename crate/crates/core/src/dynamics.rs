//! Time integration of the coupled modal system
//!
//! ```text
//! Re M a' = Re C(a, a) − (1 − a) K a − Dᵀ b + F(t)
//! We b'   = −b + 2a D a
//! ```
//!
//! where `C(a, a)_p = Σ C[p][q][r] a_q a_r = (v_l v, ∂_l φ^p) = −((v·∇)v, φ^p)`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{FluidParams, GalerkinOperators};

/// Modal load vector `F(t)` as seen by the integrator.
pub trait Forcing: Sync {
    fn load(&self, t: f64) -> DVector<f64>;
}

/// `F ≡ 0` of a given dimension.
#[derive(Clone, Copy, Debug)]
pub struct NoForcing(pub usize);

impl Forcing for NoForcing {
    fn load(&self, _t: f64) -> DVector<f64> {
        DVector::zeros(self.0)
    }
}

/// Time-independent load.
#[derive(Clone, Debug)]
pub struct SteadyLoad(pub DVector<f64>);

impl Forcing for SteadyLoad {
    fn load(&self, _t: f64) -> DVector<f64> {
        self.0.clone()
    }
}

impl<T: Forcing + ?Sized> Forcing for &T {
    fn load(&self, t: f64) -> DVector<f64> {
        (**self).load(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
}

impl SimulationState {
    pub fn new(t: f64, a: DVector<f64>, b: DVector<f64>) -> Self {
        Self { t, a, b }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self::new(0.0, DVector::zeros(n), DVector::zeros(m))
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.a.iter().all(|x| x.is_finite())
            && self.b.iter().all(|x| x.is_finite())
    }

    fn check_dims(&self, ops: &GalerkinOperators) -> Result<()> {
        if self.a.len() != ops.n() {
            return Err(Error::DimensionMismatch {
                context: "velocity coefficients",
                expected: ops.n(),
                got: self.a.len(),
            });
        }
        if self.b.len() != ops.m() {
            return Err(Error::DimensionMismatch {
                context: "stress coefficients",
                expected: ops.m(),
                got: self.b.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4,
    Imex,
    ExactStress,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub params: FluidParams,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub output_stride: usize,
}

impl SolverConfig {
    pub fn new(params: FluidParams, t_final: f64, dt: f64, scheme: Scheme) -> Self {
        Self {
            params,
            t_final,
            dt,
            scheme,
            output_stride: 1,
        }
    }

    pub fn with_stride(mut self, output_stride: usize) -> Self {
        self.output_stride = output_stride;
        self
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = self.params.violations();
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            errs.push(format!("t_final = {} must be positive", self.t_final));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            errs.push(format!("dt = {} must be positive", self.dt));
        } else if self.dt > self.t_final {
            errs.push(format!(
                "dt = {} must not exceed t_final = {}",
                self.dt, self.t_final
            ));
        }
        if self.output_stride < 1 {
            errs.push("output_stride must be at least 1".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Number of steps; the last one is shortened to land on `t_final`.
    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Largest `dt` with `dt · λ_max((1−a) M⁻¹K / Re) ≤ 2.5`.
pub fn stable_rk4_dt(ops: &GalerkinOperators, params: &FluidParams) -> f64 {
    // M⁻¹K is similar to L⁻¹ K L⁻ᵀ, which is symmetric.
    let l = ops.mass_factor().l();
    let linv = l
        .clone()
        .try_inverse()
        .expect("Cholesky factor is invertible");
    let s = &linv * &ops.stiffness * linv.transpose();
    let s = 0.5 * (&s + s.transpose());
    let lam = s.symmetric_eigen().eigenvalues.max();
    2.5 * params.reynolds / (params.solvent_viscosity() * lam)
}

fn velocity_rate(
    a: &DVector<f64>,
    b: &DVector<f64>,
    load: &DVector<f64>,
    ops: &GalerkinOperators,
    params: &FluidParams,
) -> DVector<f64> {
    let re = params.reynolds;
    let mut r = ops.convection.apply(a, a) * re;
    r -= &ops.stiffness * a * params.solvent_viscosity();
    r -= ops.coupling.tr_mul(b);
    r += load;
    ops.solve_mass(&r) / re
}

fn stress_rate(
    a: &DVector<f64>,
    b: &DVector<f64>,
    ops: &GalerkinOperators,
    params: &FluidParams,
) -> DVector<f64> {
    ((&ops.coupling * a) * (2.0 * params.retardation) - b) / params.weissenberg
}

/// Time derivatives `(da/dt, db/dt)` for a given load vector.
pub fn rhs(
    state: &SimulationState,
    ops: &GalerkinOperators,
    params: &FluidParams,
    load: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    state.check_dims(ops)?;
    if !state.is_finite() {
        return Err(Error::NonFinite("state coefficients"));
    }
    if load.len() != ops.n() {
        return Err(Error::DimensionMismatch {
            context: "forcing vector",
            expected: ops.n(),
            got: load.len(),
        });
    }
    Ok((
        velocity_rate(&state.a, &state.b, load, ops, params),
        stress_rate(&state.a, &state.b, ops, params),
    ))
}

fn finite_or_instability(prev: &SimulationState, next: SimulationState) -> Result<SimulationState> {
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Instability {
            t: next.t,
            last_finite: Box::new(prev.clone()),
        })
    }
}

/// One classical RK4 step, forcing sampled at the stage times.
pub fn step_rk4(
    state: &SimulationState,
    dt: f64,
    ops: &GalerkinOperators,
    params: &FluidParams,
    forcing: &dyn Forcing,
) -> Result<SimulationState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    let t = state.t;
    let f0 = forcing.load(t);
    let fh = forcing.load(t + 0.5 * dt);
    let f1 = forcing.load(t + dt);
    // A non-finite stage means the step blew up, not that the input was bad.
    let rhs = |s: &SimulationState, ops, params, f| {
        rhs(s, ops, params, f).map_err(|e| match e {
            Error::NonFinite(_) => Error::Instability {
                t: s.t,
                last_finite: Box::new(state.clone()),
            },
            e => e,
        })
    };
    let (ka1, kb1) = rhs(state, ops, params, &f0)?;
    let s2 = SimulationState::new(
        t + 0.5 * dt,
        &state.a + &ka1 * (0.5 * dt),
        &state.b + &kb1 * (0.5 * dt),
    );
    let (ka2, kb2) = rhs(&s2, ops, params, &fh)?;
    let s3 = SimulationState::new(
        t + 0.5 * dt,
        &state.a + &ka2 * (0.5 * dt),
        &state.b + &kb2 * (0.5 * dt),
    );
    let (ka3, kb3) = rhs(&s3, ops, params, &fh)?;
    let s4 = SimulationState::new(t + dt, &state.a + &ka3 * dt, &state.b + &kb3 * dt);
    let (ka4, kb4) = rhs(&s4, ops, params, &f1)?;
    let w = dt / 6.0;
    let next = SimulationState::new(
        t + dt,
        &state.a + (ka1 + ka2 * 2.0 + ka3 * 2.0 + ka4) * w,
        &state.b + (kb1 + kb2 * 2.0 + kb3 * 2.0 + kb4) * w,
    );
    finite_or_instability(state, next)
}

/// Backward Euler on `−(1−a)Ka` and `−b/We`, forward Euler on convection,
/// coupling and forcing. The implicit matrix `Re M + dt (1−a) K` is
/// factored once per step size.
pub struct ImexStepper {
    dt: f64,
    factor: Cholesky<f64, Dyn>,
}

impl ImexStepper {
    pub fn new(ops: &GalerkinOperators, params: &FluidParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt must be positive"));
        }
        let lhs: DMatrix<f64> =
            &ops.mass * params.reynolds + &ops.stiffness * (dt * params.solvent_viscosity());
        let factor = lhs.cholesky().ok_or(Error::SingularImplicit)?;
        Ok(Self { dt, factor })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(
        &self,
        state: &SimulationState,
        ops: &GalerkinOperators,
        params: &FluidParams,
        forcing: &dyn Forcing,
    ) -> Result<SimulationState> {
        state.check_dims(ops)?;
        let dt = self.dt;
        let re = params.reynolds;
        let load = forcing.load(state.t);
        let mut explicit = ops.convection.apply(&state.a, &state.a) * re;
        explicit -= ops.coupling.tr_mul(&state.b);
        explicit += load;
        let rhs_v = &ops.mass * &state.a * re + explicit * dt;
        let a = self.factor.solve(&rhs_v);
        let strain = &ops.coupling * &state.a * (2.0 * params.retardation);
        let b = (&state.b + strain * (dt / params.weissenberg))
            / (1.0 + dt / params.weissenberg);
        finite_or_instability(state, SimulationState::new(state.t + dt, a, b))
    }
}

pub fn step_imex(
    state: &SimulationState,
    dt: f64,
    ops: &GalerkinOperators,
    params: &FluidParams,
    forcing: &dyn Forcing,
) -> Result<SimulationState> {
    ImexStepper::new(ops, params, dt)?.step(state, ops, params, forcing)
}

/// Variation of constants for `We b' = −b + 2a D a_mid` with the strain
/// frozen over the substep.
pub fn exact_stress_substep(
    b: &DVector<f64>,
    a_mid: &DVector<f64>,
    dt: f64,
    params: &FluidParams,
    coupling: &DMatrix<f64>,
) -> DVector<f64> {
    let decay = (-dt / params.weissenberg).exp();
    let gain = -(-dt / params.weissenberg).exp_m1();
    b * decay + (coupling * a_mid) * (2.0 * params.retardation * gain)
}

/// Strang splitting: exact stress half step, RK4 on the velocity with the
/// stress frozen, exact stress half step.
pub fn step_exact_stress(
    state: &SimulationState,
    dt: f64,
    ops: &GalerkinOperators,
    params: &FluidParams,
    forcing: &dyn Forcing,
) -> Result<SimulationState> {
    state.check_dims(ops)?;
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    let t = state.t;
    let b_half = exact_stress_substep(&state.b, &state.a, 0.5 * dt, params, &ops.coupling);
    let f0 = forcing.load(t);
    let fh = forcing.load(t + 0.5 * dt);
    let f1 = forcing.load(t + dt);
    let rate = |a: &DVector<f64>, f: &DVector<f64>| velocity_rate(a, &b_half, f, ops, params);
    let k1 = rate(&state.a, &f0);
    let k2 = rate(&(&state.a + &k1 * (0.5 * dt)), &fh);
    let k3 = rate(&(&state.a + &k2 * (0.5 * dt)), &fh);
    let k4 = rate(&(&state.a + &k3 * dt), &f1);
    let a = &state.a + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    let b = exact_stress_substep(&b_half, &a, 0.5 * dt, params, &ops.coupling);
    finite_or_instability(state, SimulationState::new(t + dt, a, b))
}

/// Energies and dissipation rates of one state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `Re ‖v‖²`
    pub kinetic: f64,
    /// `(We / 2a) ‖τ‖²`
    pub stress_energy: f64,
    /// `2(1−a) ‖∇v‖²`
    pub viscous_rate: f64,
    /// `(1/a) ‖τ‖²`
    pub relaxation_rate: f64,
}

impl Diagnostics {
    pub fn of(state: &SimulationState, ops: &GalerkinOperators, params: &FluidParams) -> Self {
        let tau_sq = state.b.norm_squared();
        Self {
            kinetic: params.reynolds * ops.velocity_l2_sq(&state.a),
            stress_energy: params.stress_energy_weight() * tau_sq,
            viscous_rate: 2.0 * params.solvent_viscosity() * ops.velocity_grad_sq(&state.a),
            relaxation_rate: tau_sq / params.retardation,
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.kinetic + self.stress_energy
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub state: SimulationState,
    pub diagnostics: Diagnostics,
}

/// Recorded states with strictly increasing times; the first sample is
/// the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn first(&self) -> &SimulationState {
        &self.samples[0].state
    }

    pub fn last(&self) -> &SimulationState {
        &self.samples[self.samples.len() - 1].state
    }

    /// Every `stride`-th sample, starting from the first.
    pub fn subsample(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        Trajectory {
            samples: self.samples.iter().step_by(stride).cloned().collect(),
        }
    }
}

/// Marches from the initial state to `t_final`, recording every
/// `output_stride`-th step and the final step.
pub fn simulate(
    config: &SolverConfig,
    ops: &GalerkinOperators,
    initial: SimulationState,
    forcing: &dyn Forcing,
) -> Result<Trajectory> {
    config.validate()?;
    initial.check_dims(ops)?;
    if !initial.is_finite() {
        return Err(Error::NonFinite("initial coefficients"));
    }
    let params = &config.params;
    let n_steps = config.n_steps();
    let t0 = initial.t;
    let mut imex: Option<ImexStepper> = None;
    let mut samples = vec![Sample {
        diagnostics: Diagnostics::of(&initial, ops, params),
        state: initial,
    }];
    let mut state = samples[0].state.clone();
    for k in 1..=n_steps {
        let t_target = if k == n_steps {
            t0 + config.t_final
        } else {
            t0 + k as f64 * config.dt
        };
        let h = t_target - state.t;
        let mut next = match config.scheme {
            Scheme::Rk4 => step_rk4(&state, h, ops, params, forcing)?,
            Scheme::ExactStress => step_exact_stress(&state, h, ops, params, forcing)?,
            Scheme::Imex => {
                if imex.as_ref().is_none_or(|s| s.dt() != h) {
                    imex = Some(ImexStepper::new(ops, params, h)?);
                }
                imex.as_ref().unwrap().step(&state, ops, params, forcing)?
            }
        };
        next.t = t_target;
        if k % config.output_stride == 0 || k == n_steps {
            samples.push(Sample {
                diagnostics: Diagnostics::of(&next, ops, params),
                state: next.clone(),
            });
        }
        state = next;
    }
    Ok(Trajectory { samples })
}
