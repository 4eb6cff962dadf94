//! Samples random velocity fields and checks ‖w‖⁴_L4 ≤ √2 ‖w‖²‖∇w‖² for
//! each scalar component, plus the closed-form ratio for sin(πx)sin(πy).

use std::f64::consts::PI;

use oldroyd_galerkin::analysis::{
    analytic_sine_ratio, ladyzhenskaya_ratio_fn, ladyzhenskaya_study, quartic_quadrature_order,
};
use oldroyd_galerkin::basis::{build_velocity_basis, quadrature_grid, DomainSpec};

fn main() -> oldroyd_galerkin::Result<()> {
    let spec = DomainSpec::noslip_square();
    let k = 4;
    let basis = build_velocity_basis(&spec, k)?;
    let quad = quadrature_grid(&spec, quartic_quadrature_order(&spec, k))?;
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);

    let study = ladyzhenskaya_study(&basis, &quad, 300, seed)?;
    let mut worst = study.samples.iter().filter_map(|s| s.report.map(|r| (s.component, r.ratio))).collect::<Vec<_>>();
    worst.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("seed {seed}: {} fields, max ratio {:.6}, all pass {}", study.samples.len(), study.max_ratio(), study.all_pass());
    for (c, r) in worst.iter().take(3) {
        println!("  {c:?}: {r:.6}");
    }

    let sine = ladyzhenskaya_ratio_fn(
        |[x, y]| {
            let (sx, cx) = (PI * x).sin_cos();
            let (sy, cy) = (PI * y).sin_cos();
            (sx * sy, [PI * cx * sy, PI * sx * cy])
        },
        &quad,
    )
    .expect("nonzero field");
    println!("sin·sin ratio {:.15}, closed form {:.15}", sine.ratio, analytic_sine_ratio());
    Ok(())
}
