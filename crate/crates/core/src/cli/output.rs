use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use crate::error::Result;

/// Full-precision, locale-independent: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Writes a CSV file with a header row and `\n` line endings.
pub fn write_csv<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

/// Every check that any command can run. All appear in every summary.
pub const CHECK_NAMES: [&str; 6] = [
    "energy",
    "stability",
    "stability_scaling",
    "ladyzhenskaya",
    "convergence_spatial",
    "convergence_temporal",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FinalEnergies {
    pub t: f64,
    pub kinetic: f64,
    pub stress_energy: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub config: RunConfig,
    /// The effective configuration in file syntax; parses back to `config`.
    pub config_toml: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub final_energies: Option<FinalEnergies>,
    pub max_energy_residual: Option<f64>,
    pub max_relative_energy_residual: Option<f64>,
    pub checks: BTreeMap<String, CheckStatus>,
    /// Command-specific results.
    pub details: serde_json::Value,
}

impl RunSummary {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            config_toml: super::config::emit_config(config),
            seed: config.seed,
            wall_time_s: 0.0,
            final_energies: None,
            max_energy_residual: None,
            max_relative_energy_residual: None,
            checks: CHECK_NAMES
                .iter()
                .map(|n| (n.to_string(), CheckStatus::Skipped))
                .collect(),
            details: serde_json::Value::Null,
        }
    }

    pub fn set_check(&mut self, name: &str, status: CheckStatus) {
        debug_assert!(CHECK_NAMES.contains(&name));
        self.checks.insert(name.to_string(), status);
    }

    pub fn any_failed(&self) -> bool {
        self.checks.values().any(|&s| s == CheckStatus::Fail)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
