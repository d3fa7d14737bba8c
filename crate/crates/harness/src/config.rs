//! Study configuration: a single schema covering the four studies,
//! ingested from TOML or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    /// H^1 error of the constructive approximant versus width.
    Approximation,
    /// Energy excess of trained networks versus sample count, with the
    /// width coupled as m = ceil(n^{1/3}).
    Generalization,
    /// Solution-to-source norm ratio versus the dimension bound.
    Regularity,
    /// Monte Carlo Rademacher estimates versus the analytic bounds.
    Complexity,
}

/// Knobs forwarded to the trainer by the generalization study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainOverrides {
    #[serde(default = "default_train_iters")]
    pub iters: usize,
    #[serde(default)]
    pub init: ritz_core::InitMode,
    #[serde(default)]
    pub step: Option<f64>,
}

fn default_train_iters() -> usize {
    300
}

impl Default for TrainOverrides {
    fn default() -> Self {
        TrainOverrides {
            iters: default_train_iters(),
            init: ritz_core::InitMode::default(),
            step: None,
        }
    }
}

/// Random sparse-series generator settings shared by the studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemGenerator {
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_max_freq")]
    pub max_freq: u32,
    /// Coefficients are uniform on [-1,1] scaled by `|k|_1^{-decay}`.
    #[serde(default = "default_decay")]
    pub decay: f64,
    /// Restrict modes to a single nonzero component (anisotropic targets).
    #[serde(default)]
    pub axis_aligned: bool,
}

fn default_modes() -> usize {
    4
}

fn default_max_freq() -> u32 {
    4
}

fn default_decay() -> f64 {
    1.0
}

impl Default for ProblemGenerator {
    fn default() -> Self {
        ProblemGenerator {
            modes: default_modes(),
            max_freq: default_max_freq(),
            decay: default_decay(),
            axis_aligned: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub dims: Vec<usize>,
    /// Network widths (approximation, complexity).
    #[serde(default)]
    pub widths: Vec<usize>,
    /// Sample counts (generalization, complexity).
    #[serde(default)]
    pub sample_counts: Vec<usize>,
    /// Smoothness orders (regularity).
    #[serde(default)]
    pub orders: Vec<f64>,
    /// Barron budgets (complexity).
    #[serde(default)]
    pub budgets: Vec<f64>,
    #[serde(default)]
    pub generator: ProblemGenerator,
    #[serde(default)]
    pub train: TrainOverrides,
    /// Acceptance band for the fitted slope, when the study declares one.
    #[serde(default)]
    pub slope_band: Option<(f64, f64)>,
    /// Monte Carlo draws per grid point (complexity).
    #[serde(default = "default_draws")]
    pub draws: usize,
}

fn default_draws() -> usize {
    16
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seed list must be nonempty".into()));
        }
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(HarnessError::Config(format!(
                    "{what} grid must be nonempty for this study kind"
                )))
            }
        };
        match self.kind {
            StudyKind::Approximation => {
                need(!self.dims.is_empty(), "dims")?;
                need(!self.widths.is_empty(), "widths")
            }
            StudyKind::Generalization => {
                need(!self.dims.is_empty(), "dims")?;
                need(!self.sample_counts.is_empty(), "sample_counts")
            }
            StudyKind::Regularity => {
                need(!self.dims.is_empty(), "dims")?;
                need(!self.orders.is_empty(), "orders")
            }
            StudyKind::Complexity => {
                need(!self.dims.is_empty(), "dims")?;
                need(!self.widths.is_empty(), "widths")?;
                need(!self.sample_counts.is_empty(), "sample_counts")?;
                need(!self.budgets.is_empty(), "budgets")
            }
        }
    }

    /// Reads TOML or JSON depending on the file extension.
    pub fn load(path: &Path) -> Result<StudyConfig, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let config: StudyConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?,
            _ => serde_json::from_str(&text)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Stable hash of the serialized configuration, carried by every row.
    pub fn hash(&self) -> u64 {
        let text = serde_json::to_string(self).expect("config serializes");
        ritz_core::rng::derive_key(0xC0FF_EE, &text)
    }
}
