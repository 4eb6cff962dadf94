//! Manufactured steady state and convergence in k_max and dt.

use std::sync::Arc;

use oldroyd_galerkin::analysis::{convergence_study, manufactured_solution, ConvergenceSetup};
use oldroyd_galerkin::basis::DomainSpec;
use oldroyd_galerkin::dynamics::{Scheme, SolverConfig};
use oldroyd_galerkin::operators::{Discretization, FluidParams, InitialData};

fn main() -> oldroyd_galerkin::Result<()> {
    let params = FluidParams::new(1.0, 1.0, 0.5)?;
    let spec = DomainSpec::noslip_square();
    let d = Discretization::new(spec, 4, None)?;
    let ms = manufactured_solution(&params, &d.velocity)?;
    let cfg = SolverConfig::new(params, 1.0, 1e-3, Scheme::Rk4);
    println!("manufactured steady residual {:.2e}, drift over T = 1: {:.2e}", ms.steady_residual(&d)?, ms.steady_deviation(&d, &cfg)?);

    let basis = Arc::new(d.velocity.clone());
    let transient = InitialData {
        velocity: Arc::new(move |p| {
            let (u, w) = (basis.value(0, p), basis.value(1, p));
            [2.0 * u[0] + w[0], 2.0 * u[1] + w[1]]
        }),
        ..InitialData::rest()
    };
    let setup = ConvergenceSetup {
        solver: SolverConfig::new(params, 0.2, 2e-3, Scheme::Rk4),
        domain: spec,
        k_list: vec![2, 3, 4, 6],
        dt_list: vec![0.02, 0.01, 0.005, 0.0025],
        temporal_k: 2,
    };
    let table = convergence_study(&setup, &transient)?;
    println!("{:>4} {:>6} {:>12} {:>12} {:>8}", "k", "modes", "smooth proj", "transient", "order");
    for r in &table.spatial {
        let opt = |x: Option<f64>, w| x.map_or("-".to_string(), |v| format!("{v:.w$e}"));
        println!("{:>4} {:>6} {:>12.4e} {:>12} {:>8}", r.k_max, r.n_modes, r.smooth_projection_error, opt(r.transient_error, 4), opt(r.observed_order, 2));
    }
    println!("{:>8} {:>12} {:>8} {:>10}", "dt", "error", "order", "richardson");
    for r in &table.temporal {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!("{:>8} {:>12} {:>8} {:>10}", r.dt, r.error.map_or("-".into(), |e| format!("{e:.4e}")), f(r.observed_order), f(r.richardson_order));
    }
    Ok(())
}
