use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::manufactured_solution;
use crate::basis::{DomainMode, DomainSpec, StressBasis, Sym2};
use crate::dynamics::{Scheme, SolverConfig};
use crate::error::{Error, Result};
use crate::operators::{Discretization, FluidParams, InitialData, TensorField, VectorField};

/// Reference for the `--help` output and the README.
pub const CONFIG_GRAMMAR: &str = r#"CONFIG FILE (TOML)

  seed = 42                      # optional, default 0; recorded in summary.json

  [params]                       # required
  reynolds = 1.0                 # Re > 0
  weissenberg = 1.0              # We > 0
  retardation = 0.5              # 0 < a < 1

  [domain]                       # optional
  mode = "noslip_square"         # or "periodic_torus"
  side_length = 1.0              # > 0; default 1 (square) or 2π (torus)

  [discretization]               # optional
  k_max = 2                      # ≥ 1
  quad_order = 21                # optional, ≥ 2; default 3(k_max+1)+12 (square), 4k_max+4 (torus)

  [solver]                       # optional
  t_final = 1.0                  # > 0
  dt = 0.001                     # > 0
  scheme = "rk4"                 # "rk4" | "imex" | "exact_stress"
  output_stride = 1              # ≥ 1

  [initial]                      # optional, default kind = "rest"
  kind = "rest"
  # kind = "isotropic_stress", c = 1.0       ‖τ0‖ = c, v0 = 0
  # kind = "single_mode", mode = 1, amplitude = 1.0
  #                                          v0 = amplitude·φ_mode (1-based index)
  # kind = "manufactured"                    v0 = v*, τ0 = 2a E(v*)   (square only)

  [forcing]                      # optional, default kind = "zero"
  kind = "zero"
  # kind = "manufactured"                    f = f* (square only)
  # kind = "analytic", name = "gradient", amplitude = 1.0
  #                                          f = amplitude·∇(cos 2πx/L cos 2πy/L)
  # kind = "analytic", name = "pulsed_mode", amplitude = 1.0
  #                                          f = amplitude·sin(2πt)·φ_1

  [output]                       # optional
  dir = "out"

  [study]                        # optional, used by the analysis commands
  energy_tolerance = 1e-5        # energy-check: max relative residual
  epsilon = 1e-6                 # stability: perturbation size
  perturb_mode = 1               # stability: perturbation direction φ_mode
  scaling_tolerance = 0.05       # stability: |δ_ε / δ_{ε/2} / 4 − 1|
  n_samples = 1000               # ladyzhenskaya
  k_list = [2, 4, 8]             # converge: strictly increasing
  dt_list = [0.01, 0.005, 0.0025]  # converge: strictly decreasing
  temporal_k = 2                 # converge: resolution of the dt study

Unknown keys are rejected. Every constraint violation is reported at once.
Precedence for overridable keys: command-line flag > OLDROYD_OUTPUT_DIR
(output dir only) > config file > default.

EXIT CODES
  0  all enabled checks passed
  1  a check failed
  2  configuration error
  3  numerical instability
"#;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub mode: DomainMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_length: Option<f64>,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self {
            mode: DomainMode::NoslipSquare,
            side_length: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
}

fn default_k_max() -> usize {
    2
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self {
            k_max: default_k_max(),
            quad_order: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub output_stride: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            dt: 1e-3,
            scheme: Scheme::Rk4,
            output_stride: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Rest {},
    IsotropicStress { c: f64 },
    SingleMode { mode: usize, amplitude: f64 },
    Manufactured {},
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection::Rest {}
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticForcing {
    Gradient,
    PulsedMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSection {
    Zero {},
    Manufactured {},
    Analytic { name: AnalyticForcing, amplitude: f64 },
}

impl Default for ForcingSection {
    fn default() -> Self {
        ForcingSection::Zero {}
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    pub energy_tolerance: f64,
    pub epsilon: f64,
    pub perturb_mode: usize,
    pub scaling_tolerance: f64,
    pub n_samples: usize,
    pub k_list: Vec<usize>,
    pub dt_list: Vec<f64>,
    pub temporal_k: usize,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            energy_tolerance: 1e-5,
            epsilon: 1e-6,
            perturb_mode: 1,
            scaling_tolerance: 0.05,
            n_samples: 1000,
            k_list: vec![2, 4, 8],
            dt_list: vec![0.01, 0.005, 0.0025],
            temporal_k: 2,
        }
    }
}

/// A complete run specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub params: FluidParams,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub study: StudySection,
}

/// Parses and validates. Syntax errors carry line and column; constraint
/// violations are all reported together.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run configs always serialize")
}

fn positive(name: &str, x: f64, errs: &mut Vec<String>) {
    if !(x.is_finite() && x > 0.0) {
        errs.push(format!("{name} = {x} must be positive and finite"));
    }
}

impl RunConfig {
    /// The documented minimal config: Re = 1, We = 1, a = 0.5, k_max = 2.
    pub fn minimal() -> Self {
        Self {
            seed: 0,
            params: FluidParams {
                reynolds: 1.0,
                weissenberg: 1.0,
                retardation: 0.5,
            },
            domain: DomainSection::default(),
            discretization: DiscretizationSection::default(),
            solver: SolverSection::default(),
            initial: InitialSection::default(),
            forcing: ForcingSection::default(),
            output: OutputSection::default(),
            study: StudySection::default(),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let square = self.domain.mode == DomainMode::NoslipSquare;
        if let Some(l) = self.domain.side_length {
            positive("domain.side_length", l, &mut errs);
        }
        let k = self.discretization.k_max;
        if k == 0 {
            errs.push("discretization.k_max must be ≥ 1".into());
        }
        if let Some(q) = self.discretization.quad_order {
            if q < 2 {
                errs.push(format!("discretization.quad_order = {q} must be ≥ 2"));
            }
        }
        errs.extend(self.solver_config().violations());
        let n = self.n_velocity_modes();
        let mode_ok = |m: usize| (1..=n).contains(&m);
        match self.initial {
            InitialSection::Rest {} => {}
            InitialSection::IsotropicStress { c } => {
                if !c.is_finite() {
                    errs.push(format!("initial.c = {c} must be finite"));
                }
            }
            InitialSection::SingleMode { mode, amplitude } => {
                if !mode_ok(mode) {
                    errs.push(format!("initial.mode = {mode} must lie in 1..={n}"));
                }
                if !amplitude.is_finite() {
                    errs.push(format!("initial.amplitude = {amplitude} must be finite"));
                }
            }
            InitialSection::Manufactured {} => {
                if !square {
                    errs.push("initial.kind = \"manufactured\" needs domain.mode = \"noslip_square\"".into());
                }
            }
        }
        match self.forcing {
            ForcingSection::Zero {} => {}
            ForcingSection::Manufactured {} => {
                if !square {
                    errs.push("forcing.kind = \"manufactured\" needs domain.mode = \"noslip_square\"".into());
                }
            }
            ForcingSection::Analytic { amplitude, .. } => {
                if !amplitude.is_finite() {
                    errs.push(format!("forcing.amplitude = {amplitude} must be finite"));
                }
            }
        }
        let s = &self.study;
        positive("study.energy_tolerance", s.energy_tolerance, &mut errs);
        positive("study.epsilon", s.epsilon, &mut errs);
        positive("study.scaling_tolerance", s.scaling_tolerance, &mut errs);
        if !mode_ok(s.perturb_mode) {
            errs.push(format!("study.perturb_mode = {} must lie in 1..={n}", s.perturb_mode));
        }
        if s.k_list.is_empty() || s.k_list.contains(&0) {
            errs.push("study.k_list must be non-empty with entries ≥ 1".into());
        }
        if s.k_list.windows(2).any(|w| w[0] >= w[1]) {
            errs.push("study.k_list must be strictly increasing".into());
        }
        if s.dt_list.is_empty() || s.dt_list.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
            errs.push("study.dt_list must be non-empty with positive entries".into());
        }
        if s.dt_list.windows(2).any(|w| w[0] <= w[1]) {
            errs.push("study.dt_list must be strictly decreasing".into());
        }
        if s.temporal_k == 0 {
            errs.push("study.temporal_k must be ≥ 1".into());
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        let default = match self.domain.mode {
            DomainMode::NoslipSquare => 1.0,
            DomainMode::PeriodicTorus => 2.0 * PI,
        };
        DomainSpec::new(self.domain.mode, self.domain.side_length.unwrap_or(default))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            params: self.params,
            t_final: self.solver.t_final,
            dt: self.solver.dt,
            scheme: self.solver.scheme,
            output_stride: self.solver.output_stride,
        }
    }

    fn n_velocity_modes(&self) -> usize {
        let k = self.discretization.k_max;
        match self.domain.mode {
            DomainMode::NoslipSquare => k * k,
            DomainMode::PeriodicTorus => 4 * k * (k + 1),
        }
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Discretization::new(
            self.domain_spec()?,
            self.discretization.k_max,
            self.discretization.quad_order,
        )
    }

    /// Initial fields and forcing selected by the `[initial]` and
    /// `[forcing]` sections.
    pub fn initial_data(&self, disc: &Discretization) -> Result<InitialData> {
        let mut data = InitialData::rest();
        let manufactured = || manufactured_solution(&self.params, &disc.velocity);
        match self.initial {
            InitialSection::Rest {} => {}
            InitialSection::IsotropicStress { c } => {
                data.stress = isotropic_field(&disc.stress, c);
            }
            InitialSection::SingleMode { mode, amplitude } => {
                data.velocity = mode_field(disc, mode - 1, amplitude);
            }
            InitialSection::Manufactured {} => {
                let ms = manufactured()?;
                data.velocity = ms.velocity();
                data.stress = ms.stress();
            }
        }
        data.forcing = match self.forcing {
            ForcingSection::Zero {} => data.forcing,
            ForcingSection::Manufactured {} => manufactured()?.forcing(),
            ForcingSection::Analytic {
                name: AnalyticForcing::Gradient,
                amplitude,
            } => {
                let w = 2.0 * PI / disc.domain.side_length;
                Arc::new(move |[x, y], _t| {
                    let (sx, cx) = (w * x).sin_cos();
                    let (sy, cy) = (w * y).sin_cos();
                    [-amplitude * w * sx * cy, -amplitude * w * cx * sy]
                })
            }
            ForcingSection::Analytic {
                name: AnalyticForcing::PulsedMode,
                amplitude,
            } => {
                let phi = mode_field(disc, 0, amplitude);
                Arc::new(move |p, t| {
                    let s = (2.0 * PI * t).sin();
                    let v = phi(p);
                    [s * v[0], s * v[1]]
                })
            }
        };
        Ok(data)
    }

    /// `amplitude · φ_mode` with a 1-based index, for perturbations.
    pub fn perturbation(&self, disc: &Discretization) -> VectorField {
        mode_field(disc, self.study.perturb_mode - 1, 1.0)
    }
}

fn mode_field(disc: &Discretization, i: usize, amplitude: f64) -> VectorField {
    let b = Arc::new(disc.velocity.clone());
    Arc::new(move |p| {
        let v = b.value(i, p);
        [amplitude * v[0], amplitude * v[1]]
    })
}

/// `c · g(x) I` with unit L² norm before scaling.
fn isotropic_field(basis: &StressBasis, c: f64) -> TensorField {
    let coeffs = basis.isotropic_unit();
    let b = Arc::new(basis.clone());
    Arc::new(move |p| {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .fold(Sym2::ZERO, |acc, (i, &w)| acc + b.value(i, p).scale(c * w))
    })
}
