use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use super::velocity::half_plane_wavevectors;
use super::{check_k_max, DomainMode, DomainSpec, Point, Sym2};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StressComponent {
    Xx,
    /// Fills both off-diagonal slots, each scaled by `1/√2`.
    Xy,
    Yy,
}

/// Scalar family used for the shear (off-diagonal) component on the square.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ShearFamily {
    /// `c_{j-1}(x)·c_{k-1}(y)` with `c_0 = 1/√L`, `c_m = √(2/L)·cos(mπs/L)`.
    /// Contains the shear strain of every stream mode once `k_max` exceeds
    /// its frequency.
    #[default]
    Cosine,
    /// `(2/L)·sin(jπx/L)·sin(kπy/L)`, the same family as the normal components.
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scalar {
    /// `(2/L) sin(jκx) sin(kκy)`
    SinSin { j: usize, k: usize },
    /// `c_j(x) c_k(y)`, indices from 0
    CosCos { j: usize, k: usize },
    /// `1/L` on the torus
    Constant,
    /// `(√2/L) cos θ` or `(√2/L) sin θ`
    Fourier { p: i64, q: i64, sine: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StressMode {
    pub component: StressComponent,
    scalar: Scalar,
}

/// L²-orthonormal symmetric tensor fields.
#[derive(Clone, Debug, PartialEq)]
pub struct StressBasis {
    pub domain: DomainSpec,
    pub k_max: usize,
    modes: Vec<StressMode>,
}

pub fn build_stress_basis(spec: &DomainSpec, k_max: usize) -> Result<StressBasis> {
    StressBasis::with_shear_family(spec, k_max, ShearFamily::default())
}

impl StressBasis {
    pub fn with_shear_family(
        spec: &DomainSpec,
        k_max: usize,
        shear: ShearFamily,
    ) -> Result<Self> {
        check_k_max(k_max)?;
        let mut modes = Vec::new();
        let mut push3 = |normal: Scalar, shear: Scalar| {
            modes.push(StressMode {
                component: StressComponent::Xx,
                scalar: normal,
            });
            modes.push(StressMode {
                component: StressComponent::Xy,
                scalar: shear,
            });
            modes.push(StressMode {
                component: StressComponent::Yy,
                scalar: normal,
            });
        };
        match spec.mode {
            DomainMode::NoslipSquare => {
                for j in 1..=k_max {
                    for k in 1..=k_max {
                        let normal = Scalar::SinSin { j, k };
                        let s = match shear {
                            ShearFamily::Cosine => Scalar::CosCos { j: j - 1, k: k - 1 },
                            ShearFamily::Sine => normal,
                        };
                        push3(normal, s);
                    }
                }
            }
            DomainMode::PeriodicTorus => {
                push3(Scalar::Constant, Scalar::Constant);
                for (p, q) in half_plane_wavevectors(k_max) {
                    for sine in [false, true] {
                        let s = Scalar::Fourier { p, q, sine };
                        push3(s, s);
                    }
                }
            }
        }
        Ok(Self {
            domain: *spec,
            k_max,
            modes,
        })
    }

    pub fn m_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[StressMode] {
        &self.modes
    }

    pub fn value(&self, i: usize, p: Point) -> Sym2 {
        let mode = self.modes[i];
        let s = self.scalar(mode.scalar, p);
        match mode.component {
            StressComponent::Xx => Sym2::new(s, 0.0, 0.0),
            StressComponent::Xy => Sym2::new(0.0, FRAC_1_SQRT_2 * s, 0.0),
            StressComponent::Yy => Sym2::new(0.0, 0.0, s),
        }
    }

    /// Coefficients of the isotropic field `g(x)·I` with `g` the lowest
    /// normal-component scalar, normalized so the field has unit L² norm.
    pub fn isotropic_unit(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.m_modes()];
        let first = self.modes[0].scalar;
        for (i, m) in self.modes.iter().enumerate() {
            if m.scalar == first && m.component != StressComponent::Xy {
                b[i] = FRAC_1_SQRT_2;
            }
        }
        b
    }

    fn scalar(&self, s: Scalar, p: Point) -> f64 {
        let l = self.domain.side_length;
        match s {
            Scalar::SinSin { j, k } => {
                let kappa = PI / l;
                (2.0 / l) * (j as f64 * kappa * p[0]).sin() * (k as f64 * kappa * p[1]).sin()
            }
            Scalar::CosCos { j, k } => {
                let kappa = PI / l;
                let c = |m: usize, s: f64| {
                    if m == 0 {
                        1.0 / l.sqrt()
                    } else {
                        (2.0 / l).sqrt() * (m as f64 * kappa * s).cos()
                    }
                };
                c(j, p[0]) * c(k, p[1])
            }
            Scalar::Constant => 1.0 / l,
            Scalar::Fourier { p: kp, q: kq, sine } => {
                let kappa = 2.0 * PI / l;
                let theta = kappa * (kp as f64 * p[0] + kq as f64 * p[1]);
                let t = if sine { theta.sin() } else { theta.cos() };
                SQRT_2 / l * t
            }
        }
    }
}
