//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beamspace::{BeamformerKind, SelectionPolicy};
use crate::covariance::{AngularSector, ArrayGeometry, GroupProfile, DEFAULT_QUADRATURE_POINTS};
use crate::error::{Error, Result};

/// Longest training sequence available from the Kasami set.
pub const MAX_TRAINING_LEN: usize = 63;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub elements: usize,
    #[serde(default = "half")]
    pub spacing: f64,
}

fn half() -> f64 {
    0.5
}

fn unit() -> f64 {
    1.0
}

fn quadrature() -> usize {
    DEFAULT_QUADRATURE_POINTS
}

fn pattern_step() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub id: usize,
    pub users: usize,
    /// One `[lower, upper]` azimuth pair in degrees per delay tap.
    pub sectors: Vec<[f64; 2]>,
    /// Power-delay profile; flat when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdp: Option<Vec<f64>>,
    /// Received power relative to the serving group.
    #[serde(default = "unit")]
    pub power: f64,
}

impl GroupConfig {
    pub fn profile(&self) -> Result<GroupProfile> {
        let sectors = self
            .sectors
            .iter()
            .map(|[lo, hi]| AngularSector::new(*lo, *hi))
            .collect::<Result<Vec<_>>>()?;
        match &self.pdp {
            Some(pdp) => GroupProfile::new(self.id, self.users, sectors, pdp.clone(), self.power),
            None => GroupProfile::uniform(self.id, self.users, sectors, self.power),
        }
    }
}

/// Which epochs carry a measurement update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Schedule {
    /// A pilot at every epoch.
    #[default]
    Continuous,
    /// The first `pilots_per_block` epochs of each block of `M` are trained,
    /// the rest are prediction only.
    TrainThenPredict { pilots_per_block: usize },
}

impl Schedule {
    pub fn is_training(&self, epoch: usize, block_len: usize) -> bool {
        match self {
            Self::Continuous => true,
            Self::TrainThenPredict { pilots_per_block } => epoch % block_len < *pilots_per_block,
        }
    }
}

/// How `η_n` is generated in the trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceModel {
    /// `η ~ CN(0, R_η)`.
    #[default]
    Gaussian,
    /// Interfering users with their own channels and QPSK symbols.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub array: ArrayConfig,
    pub serving: GroupConfig,
    #[serde(default)]
    pub interferers: Vec<GroupConfig>,
    /// `E_s / N_0` in dB.
    pub snr_db: f64,
    #[serde(default = "unit")]
    pub noise_power: f64,
    pub alpha: f64,
    /// Beamformer update interval `M`.
    pub block_len: usize,
    /// Number of epochs `T`.
    pub training_len: usize,
    pub dimensions: Vec<usize>,
    pub beamformers: Vec<BeamformerKind>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub selection: SelectionPolicy,
    #[serde(default)]
    pub interference: InterferenceModel,
    #[serde(default = "quadrature")]
    pub quadrature_points: usize,
    /// Azimuth step of the beam-pattern grid in degrees.
    #[serde(default = "pattern_step")]
    pub pattern_step: f64,
    /// Track `ln det P` per epoch.
    #[serde(default = "yes")]
    pub track_log_det: bool,
    /// Also write `plot.py`.
    #[serde(default)]
    pub plot_script: bool,
}

const INTERFERER_SECTORS: [[f64; 2]; 7] = [
    [-29.0, -26.0],
    [-21.0, -19.0],
    [-12.0, -9.0],
    [-5.5, -3.5],
    [9.5, 12.5],
    [15.0, 17.0],
    [24.0, 27.0],
];

impl ExperimentConfig {
    /// Eight-group ULA scenario: a two-user serving group with taps in
    /// `[-1°, 1°]`, `[-1°, 1°]`, `[5°, 7°]` and seven three-user interfering
    /// groups, 30 dB, `M = 5`, `α = 0.9999`, `N = 100`.
    pub fn paper() -> Self {
        let interferers = INTERFERER_SECTORS
            .iter()
            .enumerate()
            .map(|(i, s)| GroupConfig {
                id: i + 1,
                users: 3,
                sectors: vec![*s; 3],
                pdp: None,
                power: 1.0,
            })
            .collect();
        Self {
            array: ArrayConfig {
                elements: 100,
                spacing: 0.5,
            },
            serving: GroupConfig {
                id: 0,
                users: 2,
                sectors: vec![[-1.0, 1.0], [-1.0, 1.0], [5.0, 7.0]],
                pdp: None,
                power: 1.0,
            },
            interferers,
            snr_db: 30.0,
            noise_power: 1.0,
            alpha: 0.9999,
            block_len: 5,
            training_len: 50,
            dimensions: vec![2, 4, 6, 8, 10, 12],
            beamformers: vec![
                BeamformerKind::SequentialGeb,
                BeamformerKind::FixedGeb,
                BeamformerKind::Dft,
            ],
            trials: 20,
            seed: 1,
            schedule: Schedule::Continuous,
            selection: SelectionPolicy::SpanAware,
            interference: InterferenceModel::Gaussian,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
            pattern_step: 0.5,
            track_log_det: true,
            plot_script: false,
        }
    }

    /// The same scenario on a 32-element array.
    pub fn desk() -> Self {
        Self {
            array: ArrayConfig {
                elements: 32,
                spacing: 0.5,
            },
            dimensions: vec![2, 4, 6, 8, 12],
            ..Self::paper()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper" => Ok(Self::paper()),
            "desk" => Ok(Self::desk()),
            other => Err(Error::Config(format!("unknown preset '{other}'"))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// `E_s = N_0 · 10^{snr/10}`.
    pub fn symbol_energy(&self) -> f64 {
        self.noise_power * 10f64.powf(self.snr_db / 10.0)
    }

    /// Number of beamformer blocks covering the training period.
    pub fn block_count(&self) -> usize {
        self.training_len.div_ceil(self.block_len.max(1))
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.array.elements, self.array.spacing)
    }

    /// Checks every constraint that does not need linear algebra.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.geometry()?;
        let serving = self.serving.profile()?;
        for g in &self.interferers {
            g.profile()?;
            if g.id == self.serving.id {
                return bad(format!("interferer id {} equals the serving group id", g.id));
            }
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return bad("noise_power must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.block_len == 0 {
            return bad("block_len must be positive".into());
        }
        if self.training_len == 0 || self.training_len > MAX_TRAINING_LEN {
            return bad(format!(
                "training_len must lie in 1..={MAX_TRAINING_LEN}, got {}",
                self.training_len
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.quadrature_points == 0 {
            return bad("quadrature_points must be positive".into());
        }
        if !(self.pattern_step > 0.0 && self.pattern_step < 90.0) {
            return bad("pattern_step must lie in (0, 90)".into());
        }
        if self.beamformers.is_empty() {
            return bad("at least one beamformer is required".into());
        }
        if let Schedule::TrainThenPredict { pilots_per_block } = self.schedule {
            if pilots_per_block == 0 || pilots_per_block > self.block_len {
                return bad(format!(
                    "pilots_per_block must lie in 1..={}, got {pilots_per_block}",
                    self.block_len
                ));
            }
        }
        let n = self.array.elements;
        let state_dirs = n * serving.memory();
        let needs_dims = self
            .beamformers
            .iter()
            .any(|k| *k != BeamformerKind::Identity);
        if needs_dims && self.dimensions.is_empty() {
            return bad("dimensions must not be empty".into());
        }
        for &d in &self.dimensions {
            if d == 0 {
                return bad("dimensions must be positive".into());
            }
            for kind in &self.beamformers {
                let limit = match kind {
                    BeamformerKind::SequentialGeb | BeamformerKind::FixedGeb => state_dirs,
                    BeamformerKind::Dft => n,
                    BeamformerKind::Identity => usize::MAX,
                };
                if d > limit {
                    return bad(format!(
                        "dimension {d} exceeds {limit} for beamformer {}",
                        kind.label()
                    ));
                }
            }
        }
        Ok(())
    }
}
