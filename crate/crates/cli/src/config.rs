//! File configuration. Every section is optional and falls back to the
//! library defaults. The manifest written next to each output is itself a
//! valid configuration that reproduces the run.

use std::path::Path;

use anyhow::{Context, Result};
use noma_core::experiments::{AuditConfig, ExperimentConfig};
use noma_core::pair::Objective;
use noma_core::threshold::InverterKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub allocate: AllocateConfig,
    pub cdf: CdfConfig,
    pub sweep: ExperimentConfig,
    pub audit: AuditConfig,
    pub figure: FigureConfig,
    /// Written by the tool; ignored on input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub serving_distance: f64,
    pub interferer_distances: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocateConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_a: Option<LinkConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_b: Option<LinkConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub total_power: f64,
    pub objective: Objective,
}

impl Default for AllocateConfig {
    fn default() -> Self {
        AllocateConfig {
            phi_a: None,
            phi_b: None,
            link_a: None,
            link_b: None,
            mu: None,
            total_power: 1.0,
            objective: Objective::EqualRate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdfConfig {
    pub epsilon: f64,
    pub alpha: f64,
    pub theta_min_db: f64,
    pub theta_max_db: f64,
    pub points: usize,
    /// Power fraction of the first-decoded user. Absent means a single user
    /// with the whole budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub mu: f64,
    /// 0-based decoding position when `beta` is set.
    pub user: usize,
    pub inverter: InverterKind,
    /// Monte-Carlo realizations; 0 disables the sampled column.
    pub runs: usize,
    pub density: f64,
    pub mean_bs_count: f64,
    pub guard_fraction: f64,
    pub seed: u64,
}

impl Default for CdfConfig {
    fn default() -> Self {
        CdfConfig {
            epsilon: 1e-2,
            alpha: 4.0,
            theta_min_db: -40.0,
            theta_max_db: 10.0,
            points: 51,
            beta: None,
            mu: 0.1,
            user: 0,
            inverter: InverterKind::default(),
            runs: 5000,
            density: 1e-4,
            mean_bs_count: 1000.0,
            guard_fraction: 0.2,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureConfig {
    pub ids: Vec<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn apply_overrides(&mut self, seed: Option<u64>, runs: Option<usize>) {
        if let Some(seed) = seed {
            self.sweep.seed = seed;
            self.audit.seed = seed;
            self.cdf.seed = seed;
        }
        if let Some(runs) = runs {
            self.sweep.runs = runs;
            self.cdf.runs = runs;
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing manifest")
    }
}
