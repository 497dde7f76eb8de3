//! Experiment configuration: parsing and up-front validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavexp_core::admissibility::validate_exponents;
use wavexp_core::{CatalogFunction, ModulusFamily, ModulusSpec, SpectralModel, TruncationScheme};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub wavelet: WaveletConfig,
    pub model: ModelConfig,
    pub modulus: ModulusConfig,
    pub schedule: Vec<TruncationScheme>,
    pub grid: GridConfig,
    pub parameters: Parameters,
    #[serde(default)]
    pub expand: ExpandConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletConfig {
    pub aux_order: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    SquaredExponential { variance: f64, length_scale: f64 },
    Matern { nu: f64, variance: f64, length_scale: f64 },
    Exponential { variance: f64, length_scale: f64 },
    Zero,
}

impl ModelConfig {
    pub fn build(&self) -> wavexp_core::Result<SpectralModel> {
        match *self {
            Self::SquaredExponential { variance, length_scale } => {
                SpectralModel::squared_exponential(variance, length_scale)
            }
            Self::Matern { nu, variance, length_scale } => SpectralModel::matern(nu, variance, length_scale),
            Self::Exponential { variance, length_scale } => SpectralModel::exponential(variance, length_scale),
            Self::Zero => Ok(SpectralModel::Zero),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusConfig {
    pub family: ModulusFamily,
    pub amplitude: f64,
    pub exponent: f64,
    /// Upper limit of the entropy integral as a fraction of `σ(T)`.
    #[serde(default = "default_entropy_fraction")]
    pub entropy_fraction: f64,
}

fn default_entropy_fraction() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub horizon: f64,
    /// Grid for sup-norm exceedance and the expansion demo.
    pub points: usize,
    /// Grid for mean-square error curves.
    pub mse_points: usize,
}

impl GridConfig {
    pub fn uniform(&self, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![0.0];
        }
        (0..points)
            .map(|i| self.horizon * i as f64 / (points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub alpha: f64,
    pub gamma: f64,
    /// Thresholds in units of `√R(0)`.
    pub eps: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub grid_check: bool,
    pub modulus_pairs: usize,
    pub inequality_samples: usize,
    pub decay_levels: Vec<u32>,
    pub decay_k_max: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandConfig {
    pub function: CatalogFunction,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        Self {
            function: CatalogFunction::GaussianBump { centre: 5.0, width: 0.5 },
        }
    }
}

/// The configuration shipped with the tool.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.json");

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every domain constraint of the downstream operations, checked before
    /// any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Validation(msg));
        wavexp_core::build_meyer_pair(self.wavelet.aux_order).map_err(validation)?;
        self.model.build().map_err(validation)?;
        if self.schedule.is_empty() {
            return invalid("schedule must list at least one scheme".into());
        }
        let g = &self.grid;
        if !(g.horizon.is_finite() && g.horizon > 0.0) {
            return invalid(format!("grid.horizon must be positive, got {}", g.horizon));
        }
        if g.points < 2 || g.mse_points < 2 {
            return invalid("grid.points and grid.mse_points must be at least 2".into());
        }
        let m = &self.modulus;
        ModulusSpec::new(m.family, m.amplitude, m.exponent, self.grid.horizon).map_err(validation)?;
        if !(m.entropy_fraction > 0.0 && m.entropy_fraction < 1.0) {
            return invalid(format!("modulus.entropy_fraction must lie in (0, 1), got {}", m.entropy_fraction));
        }
        let p = &self.parameters;
        validate_exponents(p.gamma, p.alpha).map_err(validation)?;
        if p.alpha > 1.0 {
            return invalid(format!("alpha must lie in (1/2, 1], got {}", p.alpha));
        }
        if p.eps.is_empty() || p.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return invalid("parameters.eps must be a non-empty list of positive thresholds".into());
        }
        if p.replicates < wavexp_core::sampler::MIN_REPLICATES {
            return invalid(format!(
                "parameters.replicates must be at least {}, got {}",
                wavexp_core::sampler::MIN_REPLICATES,
                p.replicates
            ));
        }
        if p.decay_k_max < 0 {
            return invalid(format!("parameters.decay_k_max must be non-negative, got {}", p.decay_k_max));
        }
        if let CatalogFunction::GaussianBump { centre, width } = self.expand.function {
            if !(centre.is_finite() && width.is_finite() && width > 0.0) {
                return invalid(format!("expand.function needs finite centre and positive width, got ({centre}, {width})"));
            }
        }
        Ok(())
    }

    /// Thresholds in absolute units.
    pub fn absolute_eps(&self, model: &SpectralModel) -> Vec<f64> {
        let sd = model.variance().sqrt();
        self.parameters.eps.iter().map(|e| e * sd).collect()
    }
}

fn validation(e: wavexp_core::Error) -> CliError {
    CliError::Validation(e.to_string())
}
