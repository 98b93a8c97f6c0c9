//! Experiment configuration: a JSON document with a required `"schema": 1` field.

use std::path::Path;

use definetti_core::definetti::DEFAULT_RANK_TOLERANCE;
use definetti_core::discord::{DiscordOptions, MeasurementAxis};
use definetti_core::linalg::Vec3;
use definetti_core::priors::{self, ParticleEnsemble};
use definetti_core::state::{BlochVector, DensityMatrix, Subsystem};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    UniformBall { count: usize, seed: u64 },
    UniformSphere { count: usize, seed: u64 },
    PointMass { points: Vec<BlochVector>, weights: Vec<f64> },
    /// Atoms at `offset · direction`; the direction is normalized on load.
    Line { direction: Vec3, offsets: Vec<f64>, weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    /// Any nonzero direction; normalized on use.
    pub axis: Vec3,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroTestSpec {
    #[serde(default = "default_side")]
    pub side: Subsystem,
    /// Two-qubit state to test; the prior's two-copy state when absent.
    #[serde(default)]
    pub state: Option<DensityMatrix>,
}

impl Default for ZeroTestSpec {
    fn default() -> Self {
        Self { side: Subsystem::A, state: None }
    }
}

fn default_side() -> Subsystem {
    Subsystem::A
}

fn default_steps() -> usize {
    1
}

fn default_copies() -> usize {
    2
}

fn default_threshold() -> Option<f64> {
    Some(definetti_core::bayes::DEFAULT_RESAMPLE_THRESHOLD)
}

fn default_rank_tolerance() -> f64 {
    DEFAULT_RANK_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub prior: PriorSpec,
    #[serde(default)]
    pub true_state: Option<BlochVector>,
    #[serde(default)]
    pub schedule: Vec<ScheduleEntry>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Seed of the simulated measurement outcomes and of resampling.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Number of copies for `definetti` output.
    #[serde(default = "default_copies")]
    pub copies: usize,
    /// Copies of the ensemble left unmeasured after tomography.
    #[serde(default)]
    pub remaining_copies: u64,
    /// `null` disables resampling.
    #[serde(default = "default_threshold")]
    pub resample_threshold: Option<f64>,
    #[serde(default)]
    pub discord: DiscordOptions,
    #[serde(default = "default_rank_tolerance")]
    pub rank_tolerance: f64,
    #[serde(default)]
    pub zerotest: ZeroTestSpec,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        // serde_json's message already ends with the line and column
        let cfg: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Config(format!("field `{}`: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        if !(1..=definetti_core::definetti::MAX_COPIES).contains(&self.copies) {
            return Err(invalid("copies", format!("must be in 1..={}", definetti_core::definetti::MAX_COPIES)));
        }
        if self.steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        if let Some(t) = self.resample_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid("resample_threshold", "must lie in [0, 1]"));
            }
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return Err(invalid("rank_tolerance", "must lie in (0, 1)"));
        }
        if self.discord.grid_size == 0 {
            return Err(invalid("discord.grid_size", "must be positive"));
        }
        if !(self.discord.angle_tol > 0.0) {
            return Err(invalid("discord.angle_tol", "must be positive"));
        }
        for (i, entry) in self.schedule.iter().enumerate() {
            MeasurementAxis::from_direction(entry.axis).map_err(|e| invalid(&format!("schedule[{i}].axis"), e))?;
        }
        if let Some(state) = &self.zerotest.state {
            if state.dim() != 4 {
                return Err(invalid("zerotest.state", "must be a two-qubit (4x4) state"));
            }
        }
        match self.prior {
            PriorSpec::UniformBall { count: 0, .. } | PriorSpec::UniformSphere { count: 0, .. } => {
                Err(invalid("prior.count", "must be positive"))
            }
            // sampled priors are valid for any positive count; finite supports are checked by building them
            PriorSpec::UniformBall { .. } | PriorSpec::UniformSphere { .. } => Ok(()),
            _ => self.build_prior().map(drop),
        }
    }

    /// Replaces every seed in the configuration.
    pub fn override_seeds(&mut self, seed: u64) {
        self.seed = Some(seed);
        if let PriorSpec::UniformBall { seed: s, .. } | PriorSpec::UniformSphere { seed: s, .. } = &mut self.prior {
            *s = seed;
        }
    }

    pub fn build_prior(&self) -> Result<ParticleEnsemble, CliError> {
        let built = match &self.prior {
            PriorSpec::UniformBall { count, seed } => priors::uniform_ball(*count, *seed),
            PriorSpec::UniformSphere { count, seed } => priors::uniform_sphere(*count, *seed),
            PriorSpec::PointMass { points, weights } => priors::point_mass(points.clone(), weights.clone()),
            PriorSpec::Line { direction, offsets, weights } => MeasurementAxis::from_direction(*direction)
                .and_then(|d| priors::line_prior(d.vector(), offsets, weights.clone())),
        };
        built.map_err(|e| invalid("prior", e))
    }

    pub fn require_true_state(&self) -> Result<BlochVector, CliError> {
        self.true_state.ok_or_else(|| invalid("true_state", "required by `tomo`"))
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| invalid("seed", "required by `tomo`"))
    }

    pub fn measurement_schedule(&self) -> Result<Vec<(MeasurementAxis, u64)>, CliError> {
        if self.schedule.is_empty() {
            return Err(invalid("schedule", "required by `tomo` and must be nonempty"));
        }
        // already validated
        Ok(self
            .schedule
            .iter()
            .map(|e| (MeasurementAxis::from_direction(e.axis).expect("validated axis"), e.shots))
            .collect())
    }

    /// SHA-256 of the canonical (sorted-key, compact) JSON of the effective configuration.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}
