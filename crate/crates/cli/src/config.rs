//! Run configuration.

use std::path::{Path, PathBuf};

use quasilocal_core::{EnergyRequest, MetricSpec, Method, PathChoice};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Resolutions accepted by the discrete solver; larger grids are refused
/// rather than left to exhaust memory.
pub const MIN_RADIAL: usize = 8;
pub const MIN_ANGULAR: usize = 16;
pub const MAX_NODES: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: MetricSpec,
    /// Boundary component labels; empty means the whole boundary.
    #[serde(default)]
    pub components: Vec<String>,
    /// `(n_r, n_θ)`.
    pub resolution: (usize, usize),
    #[serde(default)]
    pub path: PathChoice,
    /// The first entry is the reported energy; the rest must be available too.
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Adds wall-clock time to the report, which then is no longer
    /// byte-stable.
    #[serde(default)]
    pub record_runtime: bool,
}

fn default_methods() -> Vec<Method> {
    vec![Method::Bulk]
}

impl RunConfig {
    pub fn new(spec: MetricSpec, resolution: (usize, usize)) -> Self {
        Self {
            spec,
            components: Vec::new(),
            resolution,
            path: PathChoice::Auto,
            methods: default_methods(),
            output: None,
            seed: 0,
            record_runtime: false,
        }
    }

    /// Parses and validates; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            // serde_json appends its own "at line L column C"
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let (n_r, n_theta) = self.resolution;
        let closed_form_only = matches!(self.spec, MetricSpec::RotSym { n, .. } if n != 2);
        if !closed_form_only {
            if n_r < MIN_RADIAL || n_theta < MIN_ANGULAR || n_theta % 2 != 0 {
                return Err(CliError::Validation(format!(
                    "resolution ({n_r}, {n_theta}) needs n_r >= {MIN_RADIAL} and even n_theta >= {MIN_ANGULAR}"
                )));
            }
            if n_r.saturating_mul(n_theta) > MAX_NODES {
                return Err(CliError::Validation(format!("resolution ({n_r}, {n_theta}) exceeds {MAX_NODES} nodes")));
            }
        }
        if self.methods.is_empty() {
            return Err(CliError::Validation("methods must not be empty".into()));
        }
        Ok(())
    }

    pub fn request(&self) -> EnergyRequest {
        EnergyRequest {
            spec: self.spec.clone(),
            components: self.components.clone(),
            resolution: self.resolution,
            path: self.path,
            method: self.methods[0],
            seed: self.seed,
        }
    }
}
