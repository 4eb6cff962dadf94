//! Assembles the Galerkin operators and prints their basic invariants:
//! definiteness of mass and stiffness, convection neutrality and the fact
//! that an isotropic stress exerts no force.

use nalgebra::DVector;
use oldroyd_galerkin::analysis::standard_normal_vector;
use oldroyd_galerkin::basis::DomainSpec;
use oldroyd_galerkin::operators::Discretization;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oldroyd_galerkin::Result<()> {
    for (name, spec, k) in [
        ("square", DomainSpec::noslip_square(), 3),
        ("torus", DomainSpec::periodic_torus(), 2),
    ] {
        let d = Discretization::new(spec, k, None)?;
        let ops = &d.ops;
        let m_eig = ops.mass.clone().symmetric_eigen().eigenvalues;
        let k_eig = ops.stiffness.clone().symmetric_eigen().eigenvalues;
        println!(
            "{name}, k_max {k}: n = {}, m = {}, quadrature order {}",
            ops.n(),
            ops.m(),
            d.quad.order
        );
        println!("  mass eigenvalues in [{:.4e}, {:.4e}]", m_eig.min(), m_eig.max());
        println!("  stiffness eigenvalues in [{:.4e}, {:.4e}]", k_eig.min(), k_eig.max());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = standard_normal_vector(&mut rng, ops.n());
        let neutral = ops.convection.trilinear(&a, &a, &a) / a.norm().powi(3);
        println!("  aᵀC(a,a)/‖a‖³ = {neutral:.2e}");

        let iso = DVector::from_vec(d.stress.isotropic_unit());
        println!("  ‖Dᵀ b_iso‖∞ = {:.2e}", ops.coupling.tr_mul(&iso).amax());
    }
    Ok(())
}
