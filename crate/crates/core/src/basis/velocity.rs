use std::f64::consts::PI;

use super::trig::{cos_derivs, envelope_derivs, sin_derivs};
use super::{check_k_max, DomainMode, DomainSpec, Point, Sym2, Tensor2, Vector2};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityMode {
    /// Stream function `η_j(x)·η_k(y)` on the no-slip square.
    Stream { j: usize, k: usize },
    /// Stream function `cos(θ)/(κ|k|)` or `sin(θ)/(κ|k|)` with
    /// `θ = κ(p x + q y)` on the torus, so the velocity has unit amplitude.
    Fourier { p: i64, q: i64, sine: bool },
}

/// Everything the assembly and analysis code needs from one mode at one
/// point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VelocitySample {
    pub value: Vector2,
    /// `gradient[r][c] = ∂φ_r/∂x_c`.
    pub gradient: Tensor2,
    pub laplacian: Vector2,
    pub stream: f64,
    pub stream_gradient: Vector2,
}

impl VelocitySample {
    pub fn divergence(&self) -> f64 {
        self.gradient[0][0] + self.gradient[1][1]
    }

    pub fn strain(&self) -> Sym2 {
        Sym2::sym_part(&self.gradient)
    }
}

/// Divergence-free velocity fields `φ^j = (∂ψ/∂y, −∂ψ/∂x)`.
///
/// The modes are not orthonormalized; the assembled mass matrix carries
/// their Gram matrix instead.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityBasis {
    pub domain: DomainSpec,
    pub k_max: usize,
    modes: Vec<VelocityMode>,
}

pub fn build_velocity_basis(spec: &DomainSpec, k_max: usize) -> Result<VelocityBasis> {
    check_k_max(k_max)?;
    let mut modes = Vec::new();
    match spec.mode {
        DomainMode::NoslipSquare => {
            for j in 1..=k_max {
                for k in 1..=k_max {
                    modes.push(VelocityMode::Stream { j, k });
                }
            }
        }
        DomainMode::PeriodicTorus => {
            for (p, q) in half_plane_wavevectors(k_max) {
                modes.push(VelocityMode::Fourier { p, q, sine: false });
                modes.push(VelocityMode::Fourier { p, q, sine: true });
            }
        }
    }
    Ok(VelocityBasis {
        domain: *spec,
        k_max,
        modes,
    })
}

/// Nonzero wavevectors with `|p|, |q| ≤ k_max`, one of each `±k` pair,
/// lexicographic in `(p, q)`.
pub(crate) fn half_plane_wavevectors(k_max: usize) -> Vec<(i64, i64)> {
    let k = k_max as i64;
    let mut out = Vec::new();
    for p in 0..=k {
        for q in -k..=k {
            if p > 0 || q > 0 {
                out.push((p, q));
            }
        }
    }
    out
}

impl VelocityBasis {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[VelocityMode] {
        &self.modes
    }

    /// 0-based index of the stream mode `(j, k)` on the square.
    pub fn stream_index(&self, j: usize, k: usize) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| *m == VelocityMode::Stream { j, k })
    }

    pub fn value(&self, i: usize, p: Point) -> Vector2 {
        self.sample(i, p).value
    }

    pub fn gradient(&self, i: usize, p: Point) -> Tensor2 {
        self.sample(i, p).gradient
    }

    /// Symmetric gradient `E(φ^i)`.
    pub fn strain(&self, i: usize, p: Point) -> Sym2 {
        self.sample(i, p).strain()
    }

    pub fn sample(&self, i: usize, p: Point) -> VelocitySample {
        let l = self.domain.side_length;
        match self.modes[i] {
            VelocityMode::Stream { j, k } => {
                let kappa = PI / l;
                let xd = envelope_derivs(j, kappa, p[0]);
                let yd = envelope_derivs(k, kappa, p[1]);
                stream_product_sample(&xd, &yd)
            }
            VelocityMode::Fourier { p: kp, q: kq, sine } => {
                let kappa = 2.0 * PI / l;
                let norm = ((kp * kp + kq * kq) as f64).sqrt();
                let theta = kappa * (kp as f64 * p[0] + kq as f64 * p[1]);
                // Derivatives of the trig factor with respect to θ.
                let g = if sine {
                    sin_derivs(1.0, theta)
                } else {
                    cos_derivs(1.0, theta)
                };
                let ph = kp as f64 / norm;
                let qh = kq as f64 / norm;
                let (kx, ky) = (kappa * kp as f64, kappa * kq as f64);
                let value = [qh * g[1], -ph * g[1]];
                let gradient = [
                    [qh * kx * g[2], qh * ky * g[2]],
                    [-ph * kx * g[2], -ph * ky * g[2]],
                ];
                let k2 = kx * kx + ky * ky;
                VelocitySample {
                    value,
                    gradient,
                    laplacian: [-k2 * value[0], -k2 * value[1]],
                    stream: g[0] / (kappa * norm),
                    stream_gradient: [ph * g[1], qh * g[1]],
                }
            }
        }
    }
}

/// `ψ = X(x)·Y(y)` with `xd`, `yd` holding `[f, f', f'', f''']`.
fn stream_product_sample(xd: &[f64; 4], yd: &[f64; 4]) -> VelocitySample {
    let cross = xd[1] * yd[1];
    VelocitySample {
        value: [xd[0] * yd[1], -(xd[1] * yd[0])],
        gradient: [[cross, xd[0] * yd[2]], [-(xd[2] * yd[0]), -cross]],
        laplacian: [
            xd[2] * yd[1] + xd[0] * yd[3],
            -(xd[3] * yd[0] + xd[1] * yd[2]),
        ],
        stream: xd[0] * yd[0],
        stream_gradient: [xd[1] * yd[0], xd[0] * yd[1]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_zero_k_max() {
        assert!(build_velocity_basis(&DomainSpec::noslip_square(), 0).is_err());
    }

    #[test]
    fn mode_counts() {
        let b = build_velocity_basis(&DomainSpec::noslip_square(), 2).unwrap();
        assert_eq!(b.n_modes(), 4);
        let b = build_velocity_basis(&DomainSpec::periodic_torus(), 2).unwrap();
        assert_eq!(b.n_modes(), 4 * 2 * 3);
    }

    #[test]
    fn lowest_mode_vanishes_on_boundary() {
        let b = build_velocity_basis(&DomainSpec::noslip_square(), 1).unwrap();
        for &t in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            for p in [[0.0, t], [1.0, t], [t, 0.0], [t, 1.0]] {
                let v = b.value(0, p);
                assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15, "{p:?} -> {v:?}");
            }
        }
    }

    #[test]
    fn random_sample_divergence_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [DomainSpec::noslip_square(), DomainSpec::periodic_torus()] {
            let b = build_velocity_basis(&spec, 4).unwrap();
            let l = spec.side_length;
            for _ in 0..100 {
                let p = [rng.random::<f64>() * l, rng.random::<f64>() * l];
                for i in 0..b.n_modes() {
                    assert!(b.sample(i, p).divergence().abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn boundary_sample_is_zero_for_every_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = build_velocity_basis(&DomainSpec::noslip_square(), 5).unwrap();
        for n in 0..100 {
            let t: f64 = rng.random();
            let p = match n % 4 {
                0 => [0.0, t],
                1 => [1.0, t],
                2 => [t, 0.0],
                _ => [t, 1.0],
            };
            for i in 0..b.n_modes() {
                let v = b.value(i, p);
                assert!(v[0].abs().max(v[1].abs()) <= 1e-12);
            }
        }
    }

    #[test]
    fn gradient_and_laplacian_match_finite_differences() {
        let h = 1e-5;
        for spec in [DomainSpec::noslip_square(), DomainSpec::periodic_torus()] {
            let b = build_velocity_basis(&spec, 2).unwrap();
            let p = [0.37 * spec.side_length, 0.61 * spec.side_length];
            for i in 0..b.n_modes() {
                let s = b.sample(i, p);
                for c in 0..2 {
                    let mut pp = p;
                    let mut pm = p;
                    pp[c] += h;
                    pm[c] -= h;
                    let vp = b.value(i, pp);
                    let vm = b.value(i, pm);
                    for r in 0..2 {
                        let fd = (vp[r] - vm[r]) / (2.0 * h);
                        assert!((fd - s.gradient[r][c]).abs() < 1e-5 * (1.0 + fd.abs()));
                    }
                    let sp = b.sample(i, pp).stream;
                    let sm = b.sample(i, pm).stream;
                    let fd = (sp - sm) / (2.0 * h);
                    assert!((fd - s.stream_gradient[c]).abs() < 1e-5 * (1.0 + fd.abs()));
                }
                // Laplacian from divided differences of the gradient.
                for r in 0..2 {
                    let mut lap = 0.0;
                    for c in 0..2 {
                        let mut pp = p;
                        let mut pm = p;
                        pp[c] += h;
                        pm[c] -= h;
                        lap += (b.gradient(i, pp)[r][c] - b.gradient(i, pm)[r][c]) / (2.0 * h);
                    }
                    assert!((lap - s.laplacian[r]).abs() < 1e-4 * (1.0 + lap.abs()));
                }
                // Velocity is the rotated stream gradient.
                assert!((s.value[0] - s.stream_gradient[1]).abs() < 1e-12);
                assert!((s.value[1] + s.stream_gradient[0]).abs() < 1e-12);
            }
        }
    }
}
