//! Builds both bases on the unit square, checks that velocity modes are
//! divergence free and vanish on the walls, and prints the stress Gram
//! defect on the default quadrature.

use oldroyd_galerkin::basis::{build_stress_basis, build_velocity_basis, quadrature_grid, DomainSpec};

fn main() -> oldroyd_galerkin::Result<()> {
    let spec = DomainSpec::noslip_square();
    let k = 3;
    let vel = build_velocity_basis(&spec, k)?;
    let stress = build_stress_basis(&spec, k)?;
    let quad = quadrature_grid(&spec, spec.default_quadrature_order(k))?;
    println!("k_max {k}: {} velocity modes, {} stress modes, {} nodes", vel.n_modes(), stress.m_modes(), quad.len());

    let mut div: f64 = 0.0;
    for i in 0..vel.n_modes() {
        for &p in &quad.nodes {
            let g = vel.gradient(i, p);
            div = div.max((g[0][0] + g[1][1]).abs());
        }
    }
    let mut wall: f64 = 0.0;
    for i in 0..vel.n_modes() {
        for s in [0.0, 0.25, 0.5, 0.9] {
            for p in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                let v = vel.value(i, p);
                wall = wall.max(v[0].abs().max(v[1].abs()));
            }
        }
    }
    println!("max |div v| on nodes {div:.2e}, max |v| on walls {wall:.2e}");

    let m = stress.m_modes();
    let mut gram: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let g = quad.integrate(|p| stress.value(i, p).dot(&stress.value(j, p)));
            gram = gram.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    println!("stress Gram defect {gram:.2e}");
    Ok(())
}
