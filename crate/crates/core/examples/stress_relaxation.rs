//! With zero velocity and an isotropic initial stress the stress decays as
//! exp(−t/We). Compares the three time integrators against that.

use nalgebra::DVector;
use oldroyd_galerkin::basis::DomainSpec;
use oldroyd_galerkin::dynamics::{simulate, NoForcing, Scheme, SimulationState, SolverConfig};
use oldroyd_galerkin::operators::{Discretization, FluidParams};

fn main() -> oldroyd_galerkin::Result<()> {
    let d = Discretization::new(DomainSpec::noslip_square(), 2, None)?;
    let b0 = DVector::from_vec(d.stress.isotropic_unit());
    for we in [0.5, 1.0, 2.0] {
        let params = FluidParams::new(1.0, we, 0.5)?;
        for scheme in [Scheme::Rk4, Scheme::Imex, Scheme::ExactStress] {
            let cfg = SolverConfig::new(params, 1.0, 1e-2, scheme);
            let s0 = SimulationState::new(0.0, DVector::zeros(d.ops.n()), b0.clone());
            let traj = simulate(&cfg, &d.ops, s0, &NoForcing(d.ops.n()))?;
            let err = traj
                .samples
                .iter()
                .map(|s| (s.state.b.norm() - (-s.state.t / we).exp()).abs())
                .fold(0.0, f64::max);
            println!("We {we:<4} {scheme:?}: max |‖b(t)‖ − e^(−t/We)| = {err:.3e}");
        }
    }
    Ok(())
}
