use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quasistatic::scenes::Scene;
use quasistatic::stepper::Termination;
use quasistatic::TrajectoryF64;

/// Record of one invocation and everything it wrote.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    /// SHA-256 of the canonical serialization of the scene actually run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene_hash: Option<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
    pub stats: RunStats,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
}

/// Wall-clock figures; the only part of a run that is not reproducible.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub solve_ms_mean: f64,
    pub solve_ms_max: f64,
    pub wall_seconds: f64,
}

impl RunStats {
    pub fn from_trajectories<'a>(trajs: impl IntoIterator<Item = &'a TrajectoryF64>, wall_seconds: f64) -> Self {
        let times: Vec<f64> = trajs.into_iter().flat_map(|t| t.solve_seconds()).collect();
        let n = times.len();
        RunStats {
            steps: n,
            solve_ms_mean: if n == 0 { 0.0 } else { times.iter().sum::<f64>() / n as f64 * 1e3 },
            solve_ms_max: times.iter().copied().fold(0.0, f64::max) * 1e3,
            wall_seconds,
        }
    }
}

pub fn scene_hash(scene: &Scene) -> String {
    let digest = Sha256::digest(scene.to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// `dir/name.csv` -> `dir/name.manifest.json`.
pub fn manifest_path_for(artifact: &Path) -> PathBuf {
    sibling(artifact, "manifest.json")
}

/// `dir/name.csv` -> `dir/name.<suffix>`.
pub fn sibling(artifact: &Path, suffix: &str) -> PathBuf {
    let stem = artifact.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    artifact.with_file_name(format!("{stem}.{suffix}"))
}
