//! Run configuration files and the commands behind the `oldroyd` binary.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_converge, cmd_energy_check, cmd_ladyzhenskaya, cmd_simulate, cmd_stability};
pub use config::{
    emit_config, parse_config, AnalyticForcing, DiscretizationSection, DomainSection,
    ForcingSection, InitialSection, OutputSection, RunConfig, SolverSection, StudySection,
    CONFIG_GRAMMAR,
};
pub use output::{fmt_float, write_csv, CheckStatus, FinalEnergies, RunSummary, CHECK_NAMES};

use crate::dynamics::Scheme;
use crate::error::{Error, Result};

/// Environment variable overriding `[output] dir`.
pub const OUTPUT_DIR_ENV: &str = "OLDROYD_OUTPUT_DIR";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INSTABILITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "oldroyd",
    version,
    about = "Galerkin simulation and verification of 2-D Oldroyd-type viscoelastic flow",
    after_long_help = CONFIG_GRAMMAR
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate and write trajectory.csv.
    Simulate(Common),
    /// Integrate, write energy.csv and check the energy balance.
    EnergyCheck(Common),
    /// Two-trajectory stability experiment; writes stability.csv.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Perturbation size (overrides study.epsilon).
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Ladyzhenskaya ratio for random fields; writes ratios.csv.
    Ladyzhenskaya {
        #[command(flatten)]
        common: Common,
        /// Number of random fields (overrides study.n_samples).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Convergence in k_max and dt; writes convergence.csv.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Comma-separated k_max values (overrides study.k_list).
        #[arg(long, value_delimiter = ',')]
        k_list: Option<Vec<usize>>,
        /// Comma-separated time steps (overrides study.dt_list).
        #[arg(long, value_delimiter = ',')]
        dt_list: Option<Vec<f64>>,
    },
}

/// Flags shared by every command. Each overrides the matching config key.
#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML); see `--help` for the grammar.
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, short, env = OUTPUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub output_stride: Option<usize>,
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    match s {
        "rk4" => Ok(Scheme::Rk4),
        "imex" => Ok(Scheme::Imex),
        "exact_stress" => Ok(Scheme::ExactStress),
        _ => Err(format!("unknown scheme {s:?} (rk4 | imex | exact_stress)")),
    }
}

impl Common {
    /// Reads the file and applies flag overrides, then validates.
    pub fn load(&self) -> Result<RunConfig> {
        let text = std::fs::read_to_string(&self.config).map_err(|e| {
            Error::Config(vec![format!("cannot read {}: {e}", self.config.display())])
        })?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(d) = &self.out {
            cfg.output.dir = d.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.k_max {
            cfg.discretization.k_max = k;
        }
        if let Some(dt) = self.dt {
            cfg.solver.dt = dt;
        }
        if let Some(t) = self.t_final {
            cfg.solver.t_final = t;
        }
        if let Some(s) = self.scheme {
            cfg.solver.scheme = s;
        }
        if let Some(s) = self.output_stride {
            cfg.solver.output_stride = s;
        }
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => EXIT_CONFIG,
        Error::Instability { .. } | Error::NonFinite(_) => EXIT_INSTABILITY,
        _ => EXIT_CHECK_FAILED,
    }
}

/// Loads the configuration and runs the command.
pub fn dispatch(command: &Command) -> Result<RunSummary> {
    match command {
        Command::Simulate(c) => cmd_simulate(&c.load()?),
        Command::EnergyCheck(c) => cmd_energy_check(&c.load()?),
        Command::Stability { common, epsilon } => {
            let mut cfg = common.load()?;
            if let Some(e) = epsilon {
                cfg.study.epsilon = *e;
                cfg.validate()?;
            }
            cmd_stability(&cfg)
        }
        Command::Ladyzhenskaya { common, samples } => {
            let mut cfg = common.load()?;
            if let Some(n) = samples {
                cfg.study.n_samples = *n;
            }
            cmd_ladyzhenskaya(&cfg)
        }
        Command::Converge {
            common,
            k_list,
            dt_list,
        } => {
            let mut cfg = common.load()?;
            if let Some(k) = k_list {
                cfg.study.k_list = k.clone();
            }
            if let Some(d) = dt_list {
                cfg.study.dt_list = d.clone();
            }
            cfg.validate()?;
            cmd_converge(&cfg)
        }
    }
}

/// Runs a parsed command line and returns the process exit code; messages
/// go to stderr.
pub fn run(cli: Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(summary) => {
            let dir = &summary.config.output.dir;
            for (name, status) in &summary.checks {
                if *status != CheckStatus::Skipped {
                    eprintln!("{name}: {status:?}");
                }
            }
            eprintln!("wrote {}", dir.display());
            if summary.any_failed() {
                EXIT_CHECK_FAILED
            } else {
                EXIT_PASS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
