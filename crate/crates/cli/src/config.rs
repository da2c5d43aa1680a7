use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use kmtlab_core::function_spaces::family;
use kmtlab_core::MAX_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Iid empirical bridge against the Gaussian bridge.
    KmtIid,
    /// Poisson-process bridge against Ŵ_n − F.
    BmPoisson,
    /// Poisson functional against white noise with drift √f, with corrector.
    Rootwhite,
    /// Random finite instances of the maximal-coupling corrector.
    Derandomizer,
    /// Norms and assumption checks of the densities.
    Norms,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::KmtIid => "kmt-iid",
            ExperimentKind::BmPoisson => "bm-poisson",
            ExperimentKind::Rootwhite => "rootwhite",
            ExperimentKind::Derandomizer => "derandomizer",
            ExperimentKind::Norms => "norms",
        }
    }
}

fn default_densities() -> Vec<String> {
    vec!["uniform".into()]
}

fn default_ns() -> Vec<u64> {
    vec![64, 256, 1024]
}

fn default_reps() -> u64 {
    100
}

fn default_thresholds() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.25).collect()
}

fn default_out() -> PathBuf {
    PathBuf::from("kmtlab-out")
}

fn default_atoms() -> usize {
    8
}

fn default_instances() -> usize {
    100
}

/// Experiment description, read from TOML.
///
/// `out` and `workers` affect where and how fast results are produced, not
/// what they are, so they are left out of the config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_densities")]
    pub densities: Vec<String>,
    #[serde(default = "default_ns")]
    pub ns: Vec<u64>,
    /// Grid depth; defaults to ⌈log₂ n⌉ + 2, or 6 for the root-white coupler.
    #[serde(default)]
    pub j: Option<u32>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    pub seed: u64,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_out", skip_serializing)]
    pub out: PathBuf,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    /// Largest atom count for derandomizer instances.
    #[serde(default = "default_atoms")]
    pub atoms: usize,
    /// Number of random derandomizer instances.
    #[serde(default = "default_instances")]
    pub instances: usize,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.densities.is_empty() {
            return bad("at least one density is required".into());
        }
        for id in &self.densities {
            family::by_id(id).map_err(|e| CliError::Config(format!("density '{id}': {e}")))?;
        }
        let sampled = !matches!(self.kind, ExperimentKind::Derandomizer | ExperimentKind::Norms);
        if sampled {
            if self.ns.is_empty() {
                return bad("ns must not be empty".into());
            }
            if let Some(&n) = self.ns.iter().find(|&&n| n < 4) {
                return bad(format!("every n must be at least 4, got {n}"));
            }
        }
        if let Some(j) = self.j {
            if j == 0 || j > MAX_DEPTH.min(kmtlab_core::process::MAX_PATH_DEPTH) {
                return bad(format!("j = {j} outside 1..={}", kmtlab_core::process::MAX_PATH_DEPTH));
            }
        }
        if self.kind == ExperimentKind::Derandomizer && !(2..=64).contains(&self.atoms) {
            return bad(format!("atoms = {} outside 2..=64", self.atoms));
        }
        if self.kind == ExperimentKind::Derandomizer && self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        if self.thresholds.iter().any(|t| t.is_nan()) {
            return bad("thresholds must be numbers".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form of the numeric settings.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Depth used for sample size `n`.
    pub fn depth_for(&self, n: u64) -> u32 {
        match (self.j, self.kind) {
            (Some(j), _) => j,
            (None, ExperimentKind::Rootwhite) => 6,
            (None, _) => kmtlab_core::default_depth(n).min(kmtlab_core::process::MAX_PATH_DEPTH),
        }
    }
}
