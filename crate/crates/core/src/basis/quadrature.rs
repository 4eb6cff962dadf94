use std::f64::consts::PI;

use super::{DomainMode, DomainSpec, Point};
use crate::error::{Error, Result};

/// Tensor-product quadrature on the computational domain.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// Points per axis.
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f` with a fixed summation order.
    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Tensor-product Gauss–Legendre on the square, uniform trapezoid on the
/// torus. `order` is the number of points per axis.
pub fn quadrature_grid(spec: &DomainSpec, order: usize) -> Result<QuadratureRule> {
    if order < 2 {
        return Err(Error::invalid(format!(
            "quadrature order must be at least 2, got {order}"
        )));
    }
    let l = spec.side_length;
    let (x1, w1): (Vec<f64>, Vec<f64>) = match spec.mode {
        DomainMode::NoslipSquare => {
            let (x, w) = gauss_legendre(order);
            (
                x.iter().map(|&z| 0.5 * l * (z + 1.0)).collect(),
                w.iter().map(|&wi| 0.5 * l * wi).collect(),
            )
        }
        DomainMode::PeriodicTorus => {
            let h = l / order as f64;
            ((0..order).map(|i| i as f64 * h).collect(), vec![h; order])
        }
    };
    let mut nodes = Vec::with_capacity(order * order);
    let mut weights = Vec::with_capacity(order * order);
    for (xi, wx) in x1.iter().zip(&w1) {
        for (yj, wy) in x1.iter().zip(&w1) {
            nodes.push([*xi, *yj]);
            weights.push(wx * wy);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        order,
    })
}
