use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DeploymentConfig;
use crate::pair::Objective;

/// Rate-allocation scheme evaluated by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Superposition with thresholds from average link statistics.
    NomaCsifree,
    /// Equal time or frequency halves, same thresholds.
    OmaCsifree,
    /// Superposition with instantaneous fading and interference known.
    NomaBenchmark,
    /// Equal halves with instantaneous fading and interference known.
    OmaBenchmark,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::NomaCsifree,
        SchemeKind::OmaCsifree,
        SchemeKind::NomaBenchmark,
        SchemeKind::OmaBenchmark,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::NomaCsifree => "noma-csifree",
            SchemeKind::OmaCsifree => "oma-csifree",
            SchemeKind::NomaBenchmark => "noma-benchmark",
            SchemeKind::OmaBenchmark => "oma-benchmark",
        }
    }

    pub fn is_benchmark(self) -> bool {
        matches!(self, SchemeKind::NomaBenchmark | SchemeKind::OmaBenchmark)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid("scheme", format!("unknown scheme `{s}`")))
    }
}

/// Monte-Carlo sweep description. Defaults are desk-scale: the reference
/// study used 50000 runs and 1000 base stations on average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub seed: u64,
    /// Mean number of base stations per deployment; the window is sized
    /// from it for every density in `lambda_grid`.
    pub mean_bs_count: f64,
    pub guard_fraction: f64,
    pub total_power: f64,
    /// Target error probabilities `[UE A, UE B]`, one pair per grid point.
    pub epsilon: Vec<[f64; 2]>,
    pub mu_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub objectives: Vec<Objective>,
    pub schemes: Vec<SchemeKind>,
    /// Cap on rejection-sampling attempts for the second co-cell user.
    pub max_pair_attempts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            runs: 5000,
            seed: 1,
            mean_bs_count: 200.0,
            guard_fraction: 0.2,
            total_power: 1.0,
            epsilon: vec![[1e-2, 1e-2]],
            mu_grid: vec![0.1],
            alpha_grid: vec![4.0],
            lambda_grid: vec![1e-4],
            objectives: vec![Objective::EqualRate, Objective::MaxSumRate],
            schemes: SchemeKind::ALL.to_vec(),
            max_pair_attempts: 100_000,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 2 {
            return Err(Error::invalid(
                "runs",
                format!("need at least 2, got {}", self.runs),
            ));
        }
        let nonempty = [
            ("epsilon", self.epsilon.is_empty()),
            ("mu_grid", self.mu_grid.is_empty()),
            ("alpha_grid", self.alpha_grid.is_empty()),
            ("lambda_grid", self.lambda_grid.is_empty()),
            ("objectives", self.objectives.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ];
        if let Some((name, _)) = nonempty.iter().find(|(_, empty)| *empty) {
            return Err(Error::invalid(name, "grid is empty"));
        }
        for pair in &self.epsilon {
            for &e in pair {
                if !(e > 0.0 && e < 1.0) {
                    return Err(Error::invalid(
                        "epsilon",
                        format!("must lie in (0, 1), got {e}"),
                    ));
                }
            }
        }
        if let Some(mu) = self.mu_grid.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::invalid(
                "mu_grid",
                format!("must lie in [0, 1], got {mu}"),
            ));
        }
        if let Some(a) = self
            .alpha_grid
            .iter()
            .find(|a| !(**a > 2.0 && a.is_finite()))
        {
            return Err(Error::invalid(
                "alpha_grid",
                format!("must exceed 2, got {a}"),
            ));
        }
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            return Err(Error::invalid("total_power", "must be positive"));
        }
        if self.max_pair_attempts == 0 {
            return Err(Error::invalid("max_pair_attempts", "must be positive"));
        }
        for &l in &self.lambda_grid {
            self.deployment(l, 0)?;
        }
        Ok(())
    }

    /// Square deployment for density `lambda` holding `mean_bs_count` base
    /// stations on average.
    pub fn deployment(&self, lambda: f64, seed: u64) -> Result<DeploymentConfig> {
        DeploymentConfig::square_with_mean_count(
            lambda,
            self.mean_bs_count,
            self.guard_fraction,
            seed,
        )
    }
}
