use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::standard_normal_vector;
use crate::basis::{DomainMode, DomainSpec, Point, QuadratureRule, Vector2, VelocityBasis};
use crate::error::{Error, Result};

/// `2^{1/4}`
pub const LADYZHENSKAYA_CONSTANT: f64 = 1.189_207_115_002_721;
/// A ratio passes when it does not exceed `1 + LADYZHENSKAYA_TOLERANCE`.
pub const LADYZHENSKAYA_TOLERANCE: f64 = 1e-9;

/// Which `H¹₀` scalar to extract from a velocity coefficient vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarComponent {
    VelocityX,
    VelocityY,
    StreamFunction,
}

impl ScalarComponent {
    pub const ALL: [ScalarComponent; 3] = [
        ScalarComponent::VelocityX,
        ScalarComponent::VelocityY,
        ScalarComponent::StreamFunction,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadyzhenskayaReport {
    pub l4: f64,
    pub l2: f64,
    pub grad_l2: f64,
    /// `‖w‖_{L⁴} / (2^{1/4} ‖w‖^{1/2}_{L²} ‖∇w‖^{1/2}_{L²})`
    pub ratio: f64,
}

impl LadyzhenskayaReport {
    pub fn passes(&self) -> bool {
        self.ratio <= 1.0 + LADYZHENSKAYA_TOLERANCE
    }
}

/// Points per axis that integrate the quartic `w⁴` of a `k_max` field to
/// round-off on the square.
pub fn quartic_quadrature_order(domain: &DomainSpec, k_max: usize) -> usize {
    match domain.mode {
        DomainMode::NoslipSquare => 4 * (k_max + 1) + 16,
        DomainMode::PeriodicTorus => 4 * k_max + 4,
    }
}

fn ratio_from_samples(
    values: impl Iterator<Item = (f64, Vector2)>,
    weights: &[f64],
) -> Option<LadyzhenskayaReport> {
    let (mut s2, mut s4, mut g2) = (0.0, 0.0, 0.0);
    for ((w, grad), &wt) in values.zip(weights) {
        let w2 = w * w;
        s2 += wt * w2;
        s4 += wt * w2 * w2;
        g2 += wt * (grad[0] * grad[0] + grad[1] * grad[1]);
    }
    if s2 == 0.0 || g2 == 0.0 {
        return None;
    }
    let l2 = s2.sqrt();
    let l4 = s4.sqrt().sqrt();
    let grad_l2 = g2.sqrt();
    Some(LadyzhenskayaReport {
        l4,
        l2,
        grad_l2,
        ratio: l4 / (LADYZHENSKAYA_CONSTANT * l2.sqrt() * grad_l2.sqrt()),
    })
}

/// Ratio for an arbitrary scalar given as `p ↦ (w(p), ∇w(p))`.
/// `None` for the zero field.
pub fn ladyzhenskaya_ratio_fn(
    w: impl Fn(Point) -> (f64, Vector2),
    quad: &QuadratureRule,
) -> Option<LadyzhenskayaReport> {
    ratio_from_samples(quad.nodes.iter().map(|&p| w(p)), &quad.weights)
}

/// Closed-form ratio for `w = sin(πx) sin(πy)` on the unit square, where
/// `‖w‖_{L²} = 1/2`, `‖∇w‖_{L²} = π/√2`, `‖w‖⁴_{L⁴} = 9/64`.
pub fn analytic_sine_ratio() -> f64 {
    let l4 = (9.0f64 / 64.0).powf(0.25);
    let l2: f64 = 0.5;
    let grad = PI / 2.0f64.sqrt();
    l4 / (LADYZHENSKAYA_CONSTANT * l2.sqrt() * grad.sqrt())
}

fn scalar_at(
    coeffs: &[f64],
    basis: &VelocityBasis,
    p: Point,
    component: ScalarComponent,
) -> (f64, Vector2) {
    let mut w = 0.0;
    let mut g = [0.0; 2];
    for (i, &c) in coeffs.iter().enumerate() {
        let s = basis.sample(i, p);
        let (wi, gi) = match component {
            ScalarComponent::VelocityX => (s.value[0], s.gradient[0]),
            ScalarComponent::VelocityY => (s.value[1], s.gradient[1]),
            ScalarComponent::StreamFunction => (s.stream, s.stream_gradient),
        };
        w += c * wi;
        g[0] += c * gi[0];
        g[1] += c * gi[1];
    }
    (w, g)
}

/// Ratio for one scalar built from a velocity coefficient vector. `Ok(None)`
/// means the field is zero and the check is skipped.
pub fn check_ladyzhenskaya(
    coeffs: &[f64],
    basis: &VelocityBasis,
    quad: &QuadratureRule,
    component: ScalarComponent,
) -> Result<Option<LadyzhenskayaReport>> {
    if basis.domain.mode != DomainMode::NoslipSquare {
        return Err(Error::invalid(
            "the Ladyzhenskaya check needs H¹₀ fields (no-slip square)",
        ));
    }
    if coeffs.len() != basis.n_modes() {
        return Err(Error::DimensionMismatch {
            context: "check_ladyzhenskaya",
            expected: basis.n_modes(),
            got: coeffs.len(),
        });
    }
    Ok(ladyzhenskaya_ratio_fn(
        |p| scalar_at(coeffs, basis, p, component),
        quad,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct LadyzhenskayaSample {
    pub index: usize,
    pub component: ScalarComponent,
    pub report: Option<LadyzhenskayaReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadyzhenskayaStudy {
    pub seed: u64,
    pub samples: Vec<LadyzhenskayaSample>,
}

impl LadyzhenskayaStudy {
    pub fn max_ratio(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| s.report.map(|r| r.ratio))
            .fold(0.0, f64::max)
    }

    pub fn all_pass(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.report.is_none_or(|r| r.passes()))
    }
}

/// `n_samples` standard-normal coefficient vectors, cycling through the
/// scalar components. Sample `i` draws from its own stream seeded with
/// `(seed, i)`, so the result does not depend on the thread schedule.
pub fn ladyzhenskaya_study(
    basis: &VelocityBasis,
    quad: &QuadratureRule,
    n_samples: usize,
    seed: u64,
) -> Result<LadyzhenskayaStudy> {
    // Tabulate once: per node, per mode (value, grad) for each component.
    let table: Vec<Vec<crate::basis::VelocitySample>> = quad
        .nodes
        .par_iter()
        .map(|&p| (0..basis.n_modes()).map(|i| basis.sample(i, p)).collect())
        .collect();
    if basis.domain.mode != DomainMode::NoslipSquare {
        return Err(Error::invalid(
            "the Ladyzhenskaya check needs H¹₀ fields (no-slip square)",
        ));
    }
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let c = standard_normal_vector(&mut rng, basis.n_modes());
            let component = ScalarComponent::ALL[index % 3];
            let values = table.iter().map(|node| {
                let mut w = 0.0;
                let mut g = [0.0; 2];
                for (s, &ci) in node.iter().zip(c.iter()) {
                    let (wi, gi) = match component {
                        ScalarComponent::VelocityX => (s.value[0], s.gradient[0]),
                        ScalarComponent::VelocityY => (s.value[1], s.gradient[1]),
                        ScalarComponent::StreamFunction => (s.stream, s.stream_gradient),
                    };
                    w += ci * wi;
                    g[0] += ci * gi[0];
                    g[1] += ci * gi[1];
                }
                (w, g)
            });
            LadyzhenskayaSample {
                index,
                component,
                report: ratio_from_samples(values, &quad.weights),
            }
        })
        .collect();
    Ok(LadyzhenskayaStudy { seed, samples })
}
