//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints its own PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use oldroyd_galerkin::analysis::{
    analytic_sine_ratio, energy_ledger, ladyzhenskaya_ratio_fn, ladyzhenskaya_study,
    manufactured_solution, perturbation_scaling, quartic_quadrature_order, standard_normal_vector,
    stability_experiment, LADYZHENSKAYA_TOLERANCE,
};
use oldroyd_galerkin::basis::{quadrature_grid, DomainSpec, StressComponent};
use oldroyd_galerkin::dynamics::{
    simulate, step_rk4, Diagnostics, NoForcing, Scheme, SimulationState, SolverConfig,
};
use oldroyd_galerkin::operators::{Discretization, FluidParams, InitialData, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn params(we: f64) -> FluidParams {
    FluidParams::new(1.0, we, 0.5).unwrap()
}

fn square(k: usize) -> Discretization {
    Discretization::new(DomainSpec::noslip_square(), k, None).unwrap()
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn energy_equation() -> Outcome {
    let p = params(1.0);
    let d = square(4);
    let ms = manufactured_solution(&p, &d.velocity).map_err(|e| e.to_string())?;
    let forcing = d.forcing(ms.forcing());
    let cfg = SolverConfig::new(p, 1.0, 1e-3, Scheme::Rk4);
    let traj = simulate(&cfg, &d.ops, SimulationState::zeros(d.ops.n(), d.ops.m()), &forcing)
        .map_err(|e| e.to_string())?;
    let fine = energy_ledger(&traj, &d.ops, &p, &forcing).unwrap();
    let coarse = energy_ledger(&traj.subsample(2), &d.ops, &p, &forcing).unwrap();
    let (r1, r2) = (fine.max_relative_residual(), coarse.max_relative_residual());
    let factor = r2 / r1;
    check(
        r1 <= 1e-5 && (3.5..=4.5).contains(&factor),
        format!("max relative residual {r1:.3e} (≤ 1e-5), stride-2/stride-1 factor {factor:.3} (in [3.5, 4.5])"),
    )
}

fn stress_relaxation() -> Outcome {
    let d = square(3);
    let b0 = DVector::from_vec(d.stress.isotropic_unit());
    let mut worst: f64 = 0.0;
    let mut samples = usize::MAX;
    for we in [0.5, 1.0, 2.0] {
        let cfg = SolverConfig::new(params(we), 1.0, 1e-3, Scheme::Rk4).with_stride(10);
        let s0 = SimulationState::new(0.0, DVector::zeros(d.ops.n()), b0.clone());
        let traj = simulate(&cfg, &d.ops, s0, &NoForcing(d.ops.n())).map_err(|e| e.to_string())?;
        samples = samples.min(traj.len() - 1);
        for s in &traj.samples[1..] {
            let exact = (-s.state.t / we).exp() * b0.norm();
            worst = worst.max((s.state.b.norm() - exact).abs() + s.state.a.amax());
        }
    }
    check(
        worst <= 1e-6 && samples >= 100,
        format!("max |‖τ(t)‖ − e^(−t/We)‖τ0‖| = {worst:.3e} over {samples} samples per We (≤ 1e-6)"),
    )
}

fn ladyzhenskaya() -> Outcome {
    let spec = DomainSpec::noslip_square();
    let d = square(6);
    let quad = quadrature_grid(&spec, quartic_quadrature_order(&spec, 6)).unwrap();
    let study = ladyzhenskaya_study(&d.velocity, &quad, 1000, 20_240_601).unwrap();
    let skipped = study.samples.iter().filter(|s| s.report.is_none()).count();
    let sine = ladyzhenskaya_ratio_fn(
        |[x, y]| {
            let (sx, cx) = (PI * x).sin_cos();
            let (sy, cy) = (PI * y).sin_cos();
            (sx * sy, [PI * cx * sy, PI * sx * cy])
        },
        &quad,
    )
    .unwrap();
    let err = (sine.ratio - analytic_sine_ratio()).abs();
    check(
        study.all_pass() && skipped == 0 && err <= 1e-8,
        format!(
            "max ratio {:.6} over 1000 fields (≤ 1 + {LADYZHENSKAYA_TOLERANCE:e}); sin·sin ratio {:.12} vs closed form {:.12} (err {err:.1e})",
            study.max_ratio(),
            sine.ratio,
            analytic_sine_ratio()
        ),
    )
}

fn mode_field(d: &Discretization, i: usize, amp: f64) -> VectorField {
    let b = Arc::new(d.velocity.clone());
    Arc::new(move |p| {
        let v = b.value(i, p);
        [amp * v[0], amp * v[1]]
    })
}

fn uniqueness() -> Outcome {
    let d = square(4);
    let cfg = SolverConfig::new(params(1.0), 1.0, 1e-3, Scheme::Rk4).with_stride(10);
    let b = Arc::new(d.stress.clone());
    let iso = b.isotropic_unit();
    let base = InitialData {
        velocity: mode_field(&d, d.velocity.stream_index(1, 2).unwrap(), 2.0),
        stress: Arc::new(move |p| {
            iso.iter()
                .enumerate()
                .fold(oldroyd_galerkin::basis::Sym2::ZERO, |acc, (i, &c)| {
                    acc + b.value(i, p).scale(0.5 * c)
                })
        }),
        ..InitialData::rest()
    };
    let dv = mode_field(&d, 0, 1.0);
    let same = stability_experiment(&cfg, &d, &base, &base.clone()).map_err(|e| e.to_string())?;
    let pert = stability_experiment(&cfg, &d, &base, &base.perturbed(dv.clone(), 1e-6))
        .map_err(|e| e.to_string())?;
    let scaling =
        perturbation_scaling(&cfg, &d, &base, dv, 1e-6, 0.05).map_err(|e| e.to_string())?;
    let bitwise = same.rows.iter().all(|r| r.delta.to_bits() == 0);
    check(
        bitwise && pert.bound_holds && scaling.within_tolerance,
        format!(
            "identical data δ ≡ 0 bitwise: {bitwise}; ε = 1e-6 bound holds: {} (fitted C = {:.3e}, δ(0) = {:.3e}); ε² scaling deviation {:.2e} (≤ 0.05)",
            pert.bound_holds, pert.fitted_c, pert.rows[0].delta, scaling.max_deviation
        ),
    )
}

fn convection_neutrality() -> Outcome {
    let d = square(4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = standard_normal_vector(&mut rng, d.ops.n());
        let t = d.ops.convection.trilinear(&a, &a, &a).abs();
        worst = worst.max(t / a.norm().powi(3));
    }
    check(
        worst <= 1e-8,
        format!("max |aᵀC(a,a)| / ‖a‖³ = {worst:.3e} over 100 vectors (≤ 1e-8)"),
    )
}

fn manufactured_steady() -> Outcome {
    let p = params(1.0);
    let d = square(4);
    let ms = manufactured_solution(&p, &d.velocity).map_err(|e| e.to_string())?;
    let cfg = SolverConfig::new(p, 1.0, 1e-3, Scheme::Rk4);
    let proj = d.project_velocity(&*ms.data.velocity);
    let dev = ms.steady_deviation(&d, &cfg).map_err(|e| e.to_string())?;
    let proj_err = (&proj - &ms.coefficients).amax();
    check(
        dev <= 1e-6 && proj_err <= 1e-12,
        format!("max_t ‖(a, b)(t) − (a*, b*)‖ = {dev:.3e} (≤ 1e-6); ‖P v* − a*‖ = {proj_err:.1e}"),
    )
}

// Independent product-form velocity modes: ψ = η_j(x) η_k(y),
// η_j(s) = sin(πs) sin(jπs), v = (ψ_y, −ψ_x).
fn eta(j: usize, s: f64) -> [f64; 3] {
    let (a, b) = (PI * s, j as f64 * PI * s);
    let jf = j as f64;
    let f = a.sin() * b.sin();
    let f1 = PI * a.cos() * b.sin() + jf * PI * a.sin() * b.cos();
    let f2 = -PI * PI * (1.0 + jf * jf) * f + 2.0 * jf * PI * PI * a.cos() * b.cos();
    [f, f1, f2]
}

fn oracle_mode(j: usize, k: usize, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let (ex, ey) = (eta(j, x), eta(k, y));
    let v = [ex[0] * ey[1], -ex[1] * ey[0]];
    let g = [
        [ex[1] * ey[1], ex[0] * ey[2]],
        [-ex[2] * ey[0], -ex[1] * ey[1]],
    ];
    (v, g)
}

fn stress_oracle(comp: StressComponent, j: usize, k: usize, x: f64, y: f64) -> [f64; 3] {
    let c = |m: usize, s: f64| {
        if m == 0 {
            1.0
        } else {
            2f64.sqrt() * (m as f64 * PI * s).cos()
        }
    };
    let s = 2.0 * (j as f64 * PI * x).sin() * (k as f64 * PI * y).sin();
    match comp {
        StressComponent::Xx => [s, 0.0, 0.0],
        StressComponent::Xy => [0.0, c(j - 1, x) * c(k - 1, y) / 2f64.sqrt(), 0.0],
        StressComponent::Yy => [0.0, 0.0, s],
    }
}

/// Midpoint-rule operators on an `nn × nn` grid, indexed like the library.
struct MidpointOperators {
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    coupling: DMatrix<f64>,
    convection: Vec<f64>,
}

fn midpoint_operators(d: &Discretization, nn: usize) -> MidpointOperators {
    let k = d.k_max;
    let (n, m) = (d.ops.n(), d.ops.m());
    let jk: Vec<(usize, usize)> = (1..=k).flat_map(|j| (1..=k).map(move |l| (j, l))).collect();
    let idx: Vec<usize> = jk
        .iter()
        .map(|&(j, l)| d.velocity.stream_index(j, l).unwrap())
        .collect();
    let h = 1.0 / nn as f64;
    let w = h * h;
    let mut out = MidpointOperators {
        mass: DMatrix::zeros(n, n),
        stiffness: DMatrix::zeros(n, n),
        coupling: DMatrix::zeros(m, n),
        convection: vec![0.0; n * n * n],
    };
    for ix in 0..nn {
        for iy in 0..nn {
            let (x, y) = ((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
            let modes: Vec<_> = jk.iter().map(|&(j, l)| oracle_mode(j, l, x, y)).collect();
            for p in 0..n {
                let (vp, gp) = modes[p];
                for q in 0..n {
                    let (vq, gq) = modes[q];
                    out.mass[(idx[p], idx[q])] += w * (vp[0] * vq[0] + vp[1] * vq[1]);
                    let mut gg = 0.0;
                    for r in 0..2 {
                        for c in 0..2 {
                            gg += gp[r][c] * gq[r][c];
                        }
                    }
                    out.stiffness[(idx[p], idx[q])] += w * gg;
                    // ((φ^q·∇)φ^p) · φ^r
                    let adv = [
                        vq[0] * gp[0][0] + vq[1] * gp[0][1],
                        vq[0] * gp[1][0] + vq[1] * gp[1][1],
                    ];
                    for r in 0..n {
                        let vr = modes[r].0;
                        out.convection[(idx[p] * n + idx[q]) * n + idx[r]] +=
                            w * (adv[0] * vr[0] + adv[1] * vr[1]);
                    }
                }
                let e = [gp[0][0], 0.5 * (gp[0][1] + gp[1][0]), gp[1][1]];
                for i in 0..m {
                    let (sj, sk) = jk[i / 3];
                    let comp = [StressComponent::Xx, StressComponent::Xy, StressComponent::Yy][i % 3];
                    let s = stress_oracle(comp, sj, sk, x, y);
                    out.coupling[(i, idx[p])] +=
                        w * (s[0] * e[0] + 2.0 * s[1] * e[1] + s[2] * e[2]);
                }
            }
        }
    }
    out
}

fn convection_gap(d: &Discretization, c: &[f64]) -> f64 {
    let n = d.ops.n();
    let mut gap: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                gap = gap.max((c[(p * n + q) * n + r] - d.ops.convection.get(p, q, r)).abs());
            }
        }
    }
    gap
}

/// Deviations are scaled by `max(1, largest |entry|)` of each operator. The
/// midpoint rule's own O(h⁴) error on the convection integrand is about
/// 2e-8 at 512² against entries of size ~50; the 256² run shows that
/// shrinking rate.
fn operator_oracle() -> Outcome {
    let d = square(2);
    let fine = midpoint_operators(&d, 512);
    let coarse = midpoint_operators(&d, 256);
    let scale = |x: f64| x.max(1.0);
    let em = (&fine.mass - &d.ops.mass).amax();
    let ek = (&fine.stiffness - &d.ops.stiffness).amax();
    let ed = (&fine.coupling - &d.ops.coupling).amax();
    let ec = convection_gap(&d, &fine.convection);
    let ec_coarse = convection_gap(&d, &coarse.convection);
    let c_max = fine.convection.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let rel = [
        em / scale(fine.mass.amax()),
        ek / scale(fine.stiffness.amax()),
        ed / scale(fine.coupling.amax()),
        ec / scale(c_max),
    ];
    let worst = rel.iter().cloned().fold(0.0, f64::max);
    check(
        worst <= 1e-8,
        format!(
            "scaled deviation from 512² midpoint {worst:.1e} (≤ 1e-8); absolute M {em:.1e}, K {ek:.1e}, D {ed:.1e}, C {ec:.1e} (max |C| {c_max:.1}); C gap 256²/512² = {:.1}",
            ec_coarse / ec
        ),
    )
}

fn unforced_dissipation() -> Outcome {
    let p = params(1.0);
    let d = square(3);
    let dt: f64 = 1e-3;
    let slack = 10.0 * dt.powi(4);
    let f = NoForcing(d.ops.n());
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = standard_normal_vector(&mut rng, d.ops.n()) * 0.5;
        let b = standard_normal_vector(&mut rng, d.ops.m()) * 0.5;
        let mut s = SimulationState::new(0.0, a, b);
        let mut e = Diagnostics::of(&s, &d.ops, &p).total_energy();
        for _ in 0..500 {
            s = step_rk4(&s, dt, &d.ops, &p, &f).map_err(|e| e.to_string())?;
            let e1 = Diagnostics::of(&s, &d.ops, &p).total_energy();
            worst = worst.max(e1 - e);
            e = e1;
        }
    }
    check(
        worst <= slack,
        format!("max per-step energy increase {worst:.3e} over 10 seeds × 500 steps (≤ 10·dt⁴ = {slack:.0e})"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 energy equation", energy_equation),
        ("2 stress relaxation", stress_relaxation),
        ("3 Ladyzhenskaya inequality", ladyzhenskaya),
        ("4 discrete uniqueness", uniqueness),
        ("5 convection neutrality", convection_neutrality),
        ("6 manufactured steady state", manufactured_steady),
        ("7 operator assembly oracle", operator_oracle),
        ("8 unforced dissipation", unforced_dissipation),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.2} s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.2} s]");
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
