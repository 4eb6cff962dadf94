//! Drives the flow from rest with the manufactured forcing and tabulates
//! every term of the energy balance. Halving the sampling rate should
//! quadruple the trapezoid residual.

use oldroyd_galerkin::analysis::{energy_ledger, manufactured_solution};
use oldroyd_galerkin::basis::DomainSpec;
use oldroyd_galerkin::dynamics::{simulate, Scheme, SimulationState, SolverConfig};
use oldroyd_galerkin::operators::{Discretization, FluidParams};

fn main() -> oldroyd_galerkin::Result<()> {
    let params = FluidParams::new(1.0, 1.0, 0.5)?;
    let d = Discretization::new(DomainSpec::noslip_square(), 4, None)?;
    let ms = manufactured_solution(&params, &d.velocity)?;
    let forcing = d.forcing(ms.forcing());
    let cfg = SolverConfig::new(params, 1.0, 1e-3, Scheme::Rk4);
    let traj = simulate(&cfg, &d.ops, SimulationState::zeros(d.ops.n(), d.ops.m()), &forcing)?;

    let ledger = energy_ledger(&traj, &d.ops, &params, &forcing)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>10}", "t", "kinetic", "viscous", "relax", "stress", "work", "residual");
    for row in ledger.rows.iter().step_by(100) {
        println!(
            "{:>6.3} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e} {:>10.2e}",
            row.t, row.kinetic, row.viscous_integral, row.stress_integral, row.stress_energy, row.work_integral, row.residual
        );
    }
    let coarse = energy_ledger(&traj.subsample(2), &d.ops, &params, &forcing)?;
    let (r1, r2) = (ledger.max_relative_residual(), coarse.max_relative_residual());
    println!("relative residual {r1:.3e}, at half the sample rate {r2:.3e}, ratio {:.3}", r2 / r1);
    Ok(())
}
