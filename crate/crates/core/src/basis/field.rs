use rayon::prelude::*;

use super::{Point, StressBasis, Sym2, Vector2, VelocityBasis};
use crate::error::{Error, Result};

/// A finite family of fields that can be linearly combined pointwise.
pub trait FieldBasis: Sync {
    type Value: Copy + Send;

    fn size(&self) -> usize;
    fn zero(&self) -> Self::Value;
    fn mode_value(&self, i: usize, p: Point) -> Self::Value;
    /// `acc + c·v`
    fn axpy(&self, acc: Self::Value, c: f64, v: Self::Value) -> Self::Value;
}

impl FieldBasis for VelocityBasis {
    type Value = Vector2;

    fn size(&self) -> usize {
        self.n_modes()
    }
    fn zero(&self) -> Vector2 {
        [0.0; 2]
    }
    fn mode_value(&self, i: usize, p: Point) -> Vector2 {
        self.value(i, p)
    }
    fn axpy(&self, acc: Vector2, c: f64, v: Vector2) -> Vector2 {
        [acc[0] + c * v[0], acc[1] + c * v[1]]
    }
}

impl FieldBasis for StressBasis {
    type Value = Sym2;

    fn size(&self) -> usize {
        self.m_modes()
    }
    fn zero(&self) -> Sym2 {
        Sym2::ZERO
    }
    fn mode_value(&self, i: usize, p: Point) -> Sym2 {
        self.value(i, p)
    }
    fn axpy(&self, acc: Sym2, c: f64, v: Sym2) -> Sym2 {
        acc + v.scale(c)
    }
}

/// `Σ_j coeffs[j]·basis_j(p)` at each point. Points are evaluated in
/// parallel; each point's sum runs in mode order, so the result does not
/// depend on the schedule.
pub fn evaluate_field<B: FieldBasis>(
    coeffs: &[f64],
    basis: &B,
    points: &[Point],
) -> Result<Vec<B::Value>> {
    if coeffs.len() != basis.size() {
        return Err(Error::DimensionMismatch {
            context: "evaluate_field",
            expected: basis.size(),
            got: coeffs.len(),
        });
    }
    Ok(points
        .par_iter()
        .map(|&p| {
            coeffs
                .iter()
                .enumerate()
                .fold(basis.zero(), |acc, (j, &c)| {
                    basis.axpy(acc, c, basis.mode_value(j, p))
                })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_stress_basis, build_velocity_basis, DomainSpec};

    fn pts() -> Vec<Point> {
        vec![[0.1, 0.2], [0.5, 0.5], [0.9, 0.33], [0.0, 0.7]]
    }

    #[test]
    fn length_mismatch() {
        let b = build_velocity_basis(&DomainSpec::noslip_square(), 2).unwrap();
        assert!(matches!(
            evaluate_field(&[1.0; 3], &b, &pts()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_and_unit_coefficients() {
        let b = build_velocity_basis(&DomainSpec::noslip_square(), 2).unwrap();
        let z = evaluate_field(&[0.0; 4], &b, &pts()).unwrap();
        assert!(z.iter().all(|v| *v == [0.0, 0.0]));
        let e = evaluate_field(&[0.0, 0.0, 1.0, 0.0], &b, &pts()).unwrap();
        for (v, p) in e.iter().zip(pts()) {
            assert_eq!(*v, b.value(2, p));
        }
    }

    #[test]
    fn superposition() {
        let b = build_stress_basis(&DomainSpec::noslip_square(), 2).unwrap();
        let ones = vec![1.0; b.m_modes()];
        let sum = evaluate_field(&ones, &b, &pts()).unwrap();
        for (s, p) in sum.iter().zip(pts()) {
            let mut direct = Sym2::ZERO;
            for i in 0..b.m_modes() {
                direct = direct + b.value(i, p);
            }
            assert!((*s - direct).max_abs() < 1e-14);
        }
    }
}
