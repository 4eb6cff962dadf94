//! Quadrature rules and the two Galerkin bases.
//!
//! The velocity basis is built from stream functions, so every mode is
//! divergence free by construction. On the no-slip square the stream
//! function envelope `sin(πs)·sin(jπs)` vanishes to second order at the
//! walls, which makes every velocity mode vanish on the boundary.
//!
//! The stress basis is an L²-orthonormal family of symmetric tensor fields.

mod field;
mod quadrature;
mod stress;
mod trig;
mod velocity;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use field::{evaluate_field, FieldBasis};
pub use quadrature::{gauss_legendre, quadrature_grid, QuadratureRule};
pub use stress::{build_stress_basis, ShearFamily, StressBasis, StressComponent, StressMode};
pub use velocity::{build_velocity_basis, VelocityBasis, VelocityMode, VelocitySample};

pub type Point = [f64; 2];
pub type Vector2 = [f64; 2];
/// `t[r][c] = ∂v_r/∂x_c` when used as a velocity gradient.
pub type Tensor2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainMode {
    NoslipSquare,
    PeriodicTorus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub mode: DomainMode,
    pub side_length: f64,
}

impl DomainSpec {
    pub fn new(mode: DomainMode, side_length: f64) -> Result<Self> {
        if !(side_length.is_finite() && side_length > 0.0) {
            return Err(Error::invalid(format!(
                "side_length must be positive, got {side_length}"
            )));
        }
        Ok(Self { mode, side_length })
    }

    /// The unit square with no-slip walls.
    pub fn noslip_square() -> Self {
        Self {
            mode: DomainMode::NoslipSquare,
            side_length: 1.0,
        }
    }

    /// The `[0, 2π)²` torus.
    pub fn periodic_torus() -> Self {
        Self {
            mode: DomainMode::PeriodicTorus,
            side_length: 2.0 * PI,
        }
    }

    pub fn area(&self) -> f64 {
        self.side_length * self.side_length
    }

    /// Points per axis sufficient to integrate triple products of velocity
    /// modes (and their gradients) to round-off.
    ///
    /// On the square the highest frequency per axis of a velocity mode is
    /// `(k_max + 1)`, so a cubic integrand reaches `3(k_max + 1)` half-waves.
    /// On the torus the trapezoid rule is exact once the grid resolves the
    /// product's highest wavenumber.
    pub fn default_quadrature_order(&self, k_max: usize) -> usize {
        match self.mode {
            DomainMode::NoslipSquare => 3 * (k_max + 1) + 12,
            DomainMode::PeriodicTorus => 4 * k_max + 4,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let l = self.side_length;
        (0.0..=l).contains(&p[0]) && (0.0..=l).contains(&p[1])
    }
}

/// Symmetric 2×2 matrix. The off-diagonal is stored once, so `τ₁₂ = τ₂₁`
/// holds exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        xx: 0.0,
        xy: 0.0,
        yy: 0.0,
    };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    /// Symmetric part `½(t + tᵀ)`.
    pub fn sym_part(t: &Tensor2) -> Self {
        Self::new(t[0][0], 0.5 * (t[0][1] + t[1][0]), t[1][1])
    }

    /// Frobenius product `A : B`.
    pub fn dot(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn to_matrix(&self) -> Tensor2 {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.xx, c * self.xy, c * self.yy)
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }
}

impl std::ops::Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl std::ops::Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

pub(crate) fn check_k_max(k_max: usize) -> Result<()> {
    if k_max < 1 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    Ok(())
}
