//! Finite-dimensional realizations of the weak-form bilinear and trilinear
//! terms, plus projection of initial data and forcing onto the bases.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{
    build_stress_basis, build_velocity_basis, quadrature_grid, DomainSpec, Point, QuadratureRule,
    StressBasis, Sym2, Tensor2, Vector2, VelocityBasis,
};
use crate::dynamics::Forcing;
use crate::error::{Error, Result};

/// Reynolds number, Weissenberg number and retardation parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidParams {
    pub reynolds: f64,
    pub weissenberg: f64,
    pub retardation: f64,
}

impl FluidParams {
    pub fn new(reynolds: f64, weissenberg: f64, retardation: f64) -> Result<Self> {
        let p = Self {
            reynolds,
            weissenberg,
            retardation,
        };
        let errs = p.violations();
        if errs.is_empty() {
            Ok(p)
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Every violated constraint, as human-readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.reynolds.is_finite() && self.reynolds > 0.0) {
            errs.push(format!("reynolds = {} violates Re > 0", self.reynolds));
        }
        if !(self.weissenberg.is_finite() && self.weissenberg > 0.0) {
            errs.push(format!("weissenberg = {} violates We > 0", self.weissenberg));
        }
        if !(self.retardation > 0.0 && self.retardation < 1.0) {
            errs.push(format!(
                "retardation = {} violates the constraint 0 < a < 1",
                self.retardation
            ));
        }
        errs
    }

    /// Coefficient `1 − a` of the Newtonian viscous term.
    pub fn solvent_viscosity(&self) -> f64 {
        1.0 - self.retardation
    }

    /// `We / 2a`, the weight of `‖τ‖²` in the total energy.
    pub fn stress_energy_weight(&self) -> f64 {
        self.weissenberg / (2.0 * self.retardation)
    }
}

/// Dense rank-3 convection tensor
/// `C[p][q][r] = Σ_l ∫ φ^q_l φ^r · ∂φ^p/∂x_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvectionTensor {
    n: usize,
    data: Vec<f64>,
}

impl ConvectionTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize, r: usize) -> f64 {
        self.data[(p * self.n + q) * self.n + r]
    }

    /// `out_p = Σ_{q,r} C[p][q][r] y_q z_r`.
    pub fn apply(&self, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_iterator(
            n,
            (0..n).map(|p| {
                let block = &self.data[p * n * n..(p + 1) * n * n];
                let mut acc = 0.0;
                for q in 0..n {
                    let row = &block[q * n..(q + 1) * n];
                    let inner: f64 = row.iter().zip(z.iter()).map(|(c, zr)| c * zr).sum();
                    acc += y[q] * inner;
                }
                acc
            }),
        )
    }

    /// `Σ_{p,q,r} C[p][q][r] x_p y_q z_r`.
    pub fn trilinear(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
        x.dot(&self.apply(y, z))
    }
}

/// Velocity basis sampled at the quadrature nodes.
#[derive(Clone, Debug)]
pub struct VelocityTable {
    pub values: Vec<Vec<Vector2>>,
    pub gradients: Vec<Vec<Tensor2>>,
}

impl VelocityTable {
    pub fn new(basis: &VelocityBasis, quad: &QuadratureRule) -> Self {
        let samples: Vec<Vec<_>> = (0..basis.n_modes())
            .into_par_iter()
            .map(|i| quad.nodes.iter().map(|&p| basis.sample(i, p)).collect())
            .collect();
        Self {
            values: samples
                .iter()
                .map(|s: &Vec<crate::basis::VelocitySample>| s.iter().map(|x| x.value).collect())
                .collect(),
            gradients: samples
                .iter()
                .map(|s| s.iter().map(|x| x.gradient).collect())
                .collect(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.values.len()
    }
}

/// Stress basis sampled at the quadrature nodes.
#[derive(Clone, Debug)]
pub struct StressTable {
    pub values: Vec<Vec<Sym2>>,
}

impl StressTable {
    pub fn new(basis: &StressBasis, quad: &QuadratureRule) -> Self {
        Self {
            values: (0..basis.m_modes())
                .into_par_iter()
                .map(|i| quad.nodes.iter().map(|&p| basis.value(i, p)).collect())
                .collect(),
        }
    }
}

fn symmetric_gram(
    n: usize,
    quad: &QuadratureRule,
    entry: impl Fn(usize, usize, usize) -> f64 + Sync,
) -> DMatrix<f64> {
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| (0..quad.len()).map(|g| quad.weights[g] * entry(i, j, g)).sum())
                .collect()
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            m[(i, i + off)] = v;
            m[(i + off, i)] = v;
        }
    }
    m
}

pub(crate) fn mass_from_table(t: &VelocityTable, quad: &QuadratureRule) -> DMatrix<f64> {
    symmetric_gram(t.n_modes(), quad, |i, j, g| {
        let (a, b) = (t.values[i][g], t.values[j][g]);
        a[0] * b[0] + a[1] * b[1]
    })
}

pub(crate) fn stiffness_from_table(t: &VelocityTable, quad: &QuadratureRule) -> DMatrix<f64> {
    symmetric_gram(t.n_modes(), quad, |i, j, g| {
        let (a, b) = (&t.gradients[i][g], &t.gradients[j][g]);
        a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
    })
}

pub(crate) fn convection_from_table(t: &VelocityTable, quad: &QuadratureRule) -> ConvectionTensor {
    let n = t.n_modes();
    let ng = quad.len();
    let blocks: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut block = Vec::with_capacity(n * n);
            let mut h = vec![[0.0f64; 2]; ng];
            for q in 0..n {
                // h[g] = w_g (φ^q·∇)φ^p at node g
                for (g, hg) in h.iter_mut().enumerate() {
                    let v = t.values[q][g];
                    let d = &t.gradients[p][g];
                    let w = quad.weights[g];
                    *hg = [
                        w * (v[0] * d[0][0] + v[1] * d[0][1]),
                        w * (v[0] * d[1][0] + v[1] * d[1][1]),
                    ];
                }
                for r in 0..n {
                    let vr = &t.values[r];
                    let s: f64 = h
                        .iter()
                        .zip(vr)
                        .map(|(hg, v)| hg[0] * v[0] + hg[1] * v[1])
                        .sum();
                    block.push(s);
                }
            }
            block
        })
        .collect();
    ConvectionTensor {
        n,
        data: blocks.concat(),
    }
}

pub(crate) fn coupling_from_tables(
    vt: &VelocityTable,
    st: &StressTable,
    quad: &QuadratureRule,
) -> DMatrix<f64> {
    let n = vt.n_modes();
    let m = st.values.len();
    let strains: Vec<Vec<Sym2>> = vt
        .gradients
        .iter()
        .map(|gs| gs.iter().map(Sym2::sym_part).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..quad.len())
                        .map(|g| quad.weights[g] * st.values[i][g].dot(&strains[j][g]))
                        .sum()
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(m, n, |i, j| rows[i][j])
}

/// Gram matrix `(φ^i, φ^j)`.
pub fn assemble_mass(basis: &VelocityBasis, quad: &QuadratureRule) -> DMatrix<f64> {
    mass_from_table(&VelocityTable::new(basis, quad), quad)
}

/// `(∇φ^i, ∇φ^j)`, without the `1 − a` factor.
pub fn assemble_stiffness(basis: &VelocityBasis, quad: &QuadratureRule) -> DMatrix<f64> {
    stiffness_from_table(&VelocityTable::new(basis, quad), quad)
}

pub fn assemble_convection(basis: &VelocityBasis, quad: &QuadratureRule) -> ConvectionTensor {
    convection_from_table(&VelocityTable::new(basis, quad), quad)
}

/// `D[i][j] = (ψ^i, E(φ^j))`. The momentum equation uses `Dᵀ`, the
/// constitutive equation uses `D`.
pub fn assemble_coupling(
    vbasis: &VelocityBasis,
    sbasis: &StressBasis,
    quad: &QuadratureRule,
) -> DMatrix<f64> {
    coupling_from_tables(
        &VelocityTable::new(vbasis, quad),
        &StressTable::new(sbasis, quad),
        quad,
    )
}

/// Assembled Galerkin system with the mass matrix factored once.
#[derive(Clone, Debug)]
pub struct GalerkinOperators {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub convection: ConvectionTensor,
    pub coupling: DMatrix<f64>,
    mass_factor: Cholesky<f64, Dyn>,
}

impl GalerkinOperators {
    pub fn from_parts(
        mass: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        convection: ConvectionTensor,
        coupling: DMatrix<f64>,
    ) -> Result<Self> {
        let n = mass.nrows();
        for (what, got) in [
            ("stiffness", stiffness.nrows()),
            ("convection", convection.dim()),
            ("coupling columns", coupling.ncols()),
        ] {
            if got != n {
                return Err(Error::DimensionMismatch {
                    context: what,
                    expected: n,
                    got,
                });
            }
        }
        let mass_factor = mass.clone().cholesky().ok_or(Error::SingularMass)?;
        Ok(Self {
            mass,
            stiffness,
            convection,
            coupling,
            mass_factor,
        })
    }

    pub fn n(&self) -> usize {
        self.mass.nrows()
    }

    pub fn m(&self) -> usize {
        self.coupling.nrows()
    }

    /// `M⁻¹ rhs` through the stored Cholesky factor.
    pub fn solve_mass(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.mass_factor.solve(rhs)
    }

    pub fn mass_factor(&self) -> &Cholesky<f64, Dyn> {
        &self.mass_factor
    }

    /// `‖v‖²_{L²} = aᵀ M a`.
    pub fn velocity_l2_sq(&self, a: &DVector<f64>) -> f64 {
        a.dot(&(&self.mass * a))
    }

    /// `‖∇v‖²_{L²} = aᵀ K a`.
    pub fn velocity_grad_sq(&self, a: &DVector<f64>) -> f64 {
        a.dot(&(&self.stiffness * a))
    }
}

pub type VectorField = Arc<dyn Fn(Point) -> Vector2 + Send + Sync>;
pub type TensorField = Arc<dyn Fn(Point) -> Sym2 + Send + Sync>;
pub type ForcingField = Arc<dyn Fn(Point, f64) -> Vector2 + Send + Sync>;

/// Initial velocity, initial stress and body force as pointwise functions.
#[derive(Clone)]
pub struct InitialData {
    pub velocity: VectorField,
    pub stress: TensorField,
    pub forcing: ForcingField,
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("InitialData { .. }")
    }
}

impl InitialData {
    pub fn rest() -> Self {
        Self {
            velocity: Arc::new(|_| [0.0; 2]),
            stress: Arc::new(|_| Sym2::ZERO),
            forcing: Arc::new(|_, _| [0.0; 2]),
        }
    }

    /// Same data with `ε·δv` added to the initial velocity.
    pub fn perturbed(&self, dv: VectorField, eps: f64) -> Self {
        let base = self.velocity.clone();
        Self {
            velocity: Arc::new(move |p| {
                let (v, d) = (base(p), dv(p));
                [v[0] + eps * d[0], v[1] + eps * d[1]]
            }),
            ..self.clone()
        }
    }

    /// Checks that every field is finite on the quadrature nodes, over the
    /// given forcing sample times.
    pub fn validate(&self, quad: &QuadratureRule, times: &[f64]) -> Result<()> {
        for &p in &quad.nodes {
            let v = (self.velocity)(p);
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(Error::NonFinite("initial velocity"));
            }
            if !(self.stress)(p).is_finite() {
                return Err(Error::NonFinite("initial stress"));
            }
            for &t in times {
                let f = (self.forcing)(p, t);
                if !(f[0].is_finite() && f[1].is_finite()) {
                    return Err(Error::NonFinite("forcing"));
                }
            }
        }
        Ok(())
    }
}

fn velocity_moments(
    field: impl Fn(Point) -> Vector2,
    table: &VelocityTable,
    quad: &QuadratureRule,
) -> DVector<f64> {
    let samples: Vec<Vector2> = quad.nodes.iter().map(|&p| field(p)).collect();
    DVector::from_iterator(
        table.n_modes(),
        table.values.iter().map(|phi| {
            samples
                .iter()
                .zip(phi)
                .zip(&quad.weights)
                .map(|((f, v), w)| w * (f[0] * v[0] + f[1] * v[1]))
                .sum()
        }),
    )
}

fn stress_moments(
    field: impl Fn(Point) -> Sym2,
    table: &StressTable,
    quad: &QuadratureRule,
) -> DVector<f64> {
    let samples: Vec<Sym2> = quad.nodes.iter().map(|&p| field(p)).collect();
    DVector::from_iterator(
        table.values.len(),
        table.values.iter().map(|psi| {
            samples
                .iter()
                .zip(psi)
                .zip(&quad.weights)
                .map(|((f, s), w)| w * f.dot(s))
                .sum()
        }),
    )
}

/// L²-best approximation in the velocity span: solves `M a = ((v0, φ^j))_j`.
pub fn project_velocity(
    v0: impl Fn(Point) -> Vector2,
    basis: &VelocityBasis,
    quad: &QuadratureRule,
    mass_factor: &Cholesky<f64, Dyn>,
) -> DVector<f64> {
    let rhs = velocity_moments(v0, &VelocityTable::new(basis, quad), quad);
    mass_factor.solve(&rhs)
}

/// `b_j = (τ0, ψ^j)`; the stress basis is orthonormal.
pub fn project_stress(
    tau0: impl Fn(Point) -> Sym2,
    basis: &StressBasis,
    quad: &QuadratureRule,
) -> DVector<f64> {
    stress_moments(tau0, &StressTable::new(basis, quad), quad)
}

/// `F_j(t) = (f(·, t), φ^j)`.
pub fn project_forcing(
    f: impl Fn(Point, f64) -> Vector2,
    t: f64,
    basis: &VelocityBasis,
    quad: &QuadratureRule,
) -> DVector<f64> {
    velocity_moments(|p| f(p, t), &VelocityTable::new(basis, quad), quad)
}

/// Bases, quadrature, nodal tables and assembled operators for one
/// resolution.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub domain: DomainSpec,
    pub k_max: usize,
    pub quad: QuadratureRule,
    pub velocity: VelocityBasis,
    pub stress: StressBasis,
    pub velocity_table: VelocityTable,
    pub stress_table: StressTable,
    pub ops: GalerkinOperators,
}

impl Discretization {
    /// `quad_order = None` picks [`DomainSpec::default_quadrature_order`].
    pub fn new(domain: DomainSpec, k_max: usize, quad_order: Option<usize>) -> Result<Self> {
        let velocity = build_velocity_basis(&domain, k_max)?;
        let stress = build_stress_basis(&domain, k_max)?;
        Self::from_bases(velocity, stress, quad_order)
    }

    pub fn from_bases(
        velocity: VelocityBasis,
        stress: StressBasis,
        quad_order: Option<usize>,
    ) -> Result<Self> {
        let domain = velocity.domain;
        let k_max = velocity.k_max;
        let order = quad_order.unwrap_or_else(|| domain.default_quadrature_order(k_max));
        let quad = quadrature_grid(&domain, order)?;
        let velocity_table = VelocityTable::new(&velocity, &quad);
        let stress_table = StressTable::new(&stress, &quad);
        let ops = GalerkinOperators::from_parts(
            mass_from_table(&velocity_table, &quad),
            stiffness_from_table(&velocity_table, &quad),
            convection_from_table(&velocity_table, &quad),
            coupling_from_tables(&velocity_table, &stress_table, &quad),
        )?;
        Ok(Self {
            domain,
            k_max,
            quad,
            velocity,
            stress,
            velocity_table,
            stress_table,
            ops,
        })
    }

    pub fn project_velocity(&self, v0: impl Fn(Point) -> Vector2) -> DVector<f64> {
        self.ops
            .solve_mass(&velocity_moments(v0, &self.velocity_table, &self.quad))
    }

    pub fn project_stress(&self, tau0: impl Fn(Point) -> Sym2) -> DVector<f64> {
        stress_moments(tau0, &self.stress_table, &self.quad)
    }

    pub fn project_forcing(&self, f: impl Fn(Point, f64) -> Vector2, t: f64) -> DVector<f64> {
        velocity_moments(|p| f(p, t), &self.velocity_table, &self.quad)
    }

    /// Validates and projects both initial fields.
    pub fn project_initial(&self, data: &InitialData) -> Result<(DVector<f64>, DVector<f64>)> {
        data.validate(&self.quad, &[0.0])?;
        let a = self.project_velocity(&*data.velocity);
        let b = self.project_stress(&*data.stress);
        Ok((a, b))
    }

    pub fn forcing(&self, field: ForcingField) -> ProjectedForcing {
        ProjectedForcing {
            field,
            weighted: self
                .velocity_table
                .values
                .iter()
                .map(|phi| {
                    phi.iter()
                        .zip(&self.quad.weights)
                        .map(|(v, w)| [w * v[0], w * v[1]])
                        .collect()
                })
                .collect(),
            nodes: self.quad.nodes.clone(),
        }
    }
}

/// A body force projected on the fly at whatever times the integrator asks
/// for.
pub struct ProjectedForcing {
    field: ForcingField,
    weighted: Vec<Vec<Vector2>>,
    nodes: Vec<Point>,
}

impl Forcing for ProjectedForcing {
    fn load(&self, t: f64) -> DVector<f64> {
        let samples: Vec<Vector2> = self.nodes.iter().map(|&p| (self.field)(p, t)).collect();
        DVector::from_iterator(
            self.weighted.len(),
            self.weighted.iter().map(|phi| {
                samples
                    .iter()
                    .zip(phi)
                    .map(|(f, v)| f[0] * v[0] + f[1] * v[1])
                    .sum()
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::DomainSpec;

    fn disc(k: usize) -> Discretization {
        Discretization::new(DomainSpec::noslip_square(), k, None).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FluidParams::new(1.0, 1.0, 0.5).is_ok());
        let e = FluidParams::new(1.0, 1.0, 1.5).unwrap_err().to_string();
        assert!(e.contains("0 < a < 1"), "{e}");
        assert!(FluidParams::new(0.0, 1.0, 0.5).is_err());
        assert!(FluidParams::new(1.0, -1.0, 0.5).is_err());
        assert!(FluidParams::new(1.0, 1.0, 0.0).is_err());
        assert_eq!(FluidParams::new(-1.0, 0.0, 2.0).unwrap_err().to_string().lines().count(), 4);
    }

    #[test]
    fn single_mode_mass_is_positive() {
        let d = disc(1);
        assert_eq!(d.ops.mass.shape(), (1, 1));
        assert!(d.ops.mass[(0, 0)] > 0.0);
    }

    #[test]
    fn mass_and_stiffness_spd() {
        let d = disc(3);
        for m in [&d.ops.mass, &d.ops.stiffness] {
            assert_eq!(*m, m.transpose());
            let eig = m.clone().symmetric_eigen();
            assert!(eig.eigenvalues.min() > 0.0);
        }
    }

    #[test]
    fn coupling_columns_nonzero() {
        let d = disc(2);
        for j in 0..d.ops.n() {
            assert!(d.ops.coupling.column(j).norm() > 1e-3);
        }
    }

    #[test]
    fn projection_of_basis_members() {
        let d = disc(2);
        let vb = d.velocity.clone();
        let a = d.project_velocity(|p| vb.value(0, p));
        assert!((a[0] - 1.0).abs() < 1e-10);
        assert!(a.iter().skip(1).all(|x| x.abs() < 1e-10));

        let a = d.project_velocity(|p| {
            let (u, v) = (vb.value(0, p), vb.value(1, p));
            [2.0 * u[0] + 3.0 * v[0], 2.0 * u[1] + 3.0 * v[1]]
        });
        let expect = [2.0, 3.0, 0.0, 0.0];
        for (x, e) in a.iter().zip(expect) {
            assert!((x - e).abs() < 1e-10);
        }
        let z = d.project_velocity(|_| [0.0, 0.0]);
        assert!(z.iter().all(|&x| x == 0.0));

        let sb = d.stress.clone();
        let b = d.project_stress(|p| sb.value(0, p));
        assert!((b[0] - 1.0).abs() < 1e-10);
        assert!(b.iter().skip(1).all(|x| x.abs() < 1e-10));
        assert!(d.project_stress(|_| Sym2::ZERO).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn bessel_inequality() {
        let d = disc(3);
        let tau0 = |[x, y]: Point| Sym2::new(x * y, (x - y).sin(), 1.0 + x * x);
        let b = d.project_stress(tau0);
        let norm_sq = d.quad.integrate(|p| tau0(p).dot(&tau0(p)));
        assert!(b.norm_squared() <= norm_sq + 1e-12);
    }

    #[test]
    fn forcing_projection() {
        let d = disc(2);
        assert!(d.project_forcing(|_, _| [0.0; 2], 0.3).iter().all(|&x| x == 0.0));
        let vb = d.velocity.clone();
        let f = d.project_forcing(|p, _| vb.value(0, p), 0.0);
        let e = d.ops.mass.column(0);
        assert!((f - e).amax() < 1e-10);
        // ∇(x² + y²) is orthogonal to divergence-free no-slip fields.
        let g = d.project_forcing(|[x, y], _| [2.0 * x, 2.0 * y], 0.0);
        assert!(g.amax() < 1e-9);
        let pf = d.forcing(Arc::new(move |p, t| {
            let v = vb.value(1, p);
            [t * v[0], t * v[1]]
        }));
        let l = pf.load(2.0);
        assert!((l - d.ops.mass.column(1) * 2.0).amax() < 1e-10);
    }

    #[test]
    fn validation_rejects_nan() {
        let d = disc(1);
        let mut data = InitialData::rest();
        assert!(d.project_initial(&data).is_ok());
        data.velocity = Arc::new(|_| [f64::NAN, 0.0]);
        assert!(matches!(d.project_initial(&data), Err(Error::NonFinite(_))));
    }
}
