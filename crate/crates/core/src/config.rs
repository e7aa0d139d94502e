//! Experiment configuration: one TOML document fully determines a run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::labels::{build_label_registry, SensorFamily, SensorLabel, SensorSource};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the default output root (`runs/`).
pub const OUTPUT_ROOT_ENV: &str = "FAVTGAN_OUTPUT_ROOT";

/// How sensor labels and noise are wired into the two networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningMode {
    /// G sees a sampled label c_f, D sees the true label c_r.
    Baseline,
    /// G and D both see c_r.
    NoNoise,
    /// Only G is conditioned, on a sampled label c_f.
    NoisyLabels,
    /// Only G is conditioned, on c_r plus one Gaussian noise channel.
    GaussianNoise,
    /// Unmodified pix2pix: no label channels and no auxiliary loss.
    PlainPix2pix,
}

impl ConditioningMode {
    pub const ALL: [ConditioningMode; 5] = [
        ConditioningMode::Baseline,
        ConditioningMode::NoNoise,
        ConditioningMode::NoisyLabels,
        ConditioningMode::GaussianNoise,
        ConditioningMode::PlainPix2pix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditioningMode::Baseline => "baseline",
            ConditioningMode::NoNoise => "no_noise",
            ConditioningMode::NoisyLabels => "noisy_labels",
            ConditioningMode::GaussianNoise => "gaussian_noise",
            ConditioningMode::PlainPix2pix => "plain_pix2pix",
        }
    }

    /// Whether the auxiliary sensor classifier (and its loss terms) is active.
    pub fn uses_aux(self) -> bool {
        self != ConditioningMode::PlainPix2pix
    }

    /// Whether the generator conditions on a uniformly sampled label.
    pub fn samples_fake_label(self) -> bool {
        matches!(self, ConditioningMode::Baseline | ConditioningMode::NoisyLabels)
    }

    /// Whether the discriminator receives label channels as input.
    pub fn conditions_discriminator(self) -> bool {
        matches!(self, ConditioningMode::Baseline | ConditioningMode::NoNoise)
    }

    /// Number of condition channels fed to the generator.
    pub fn generator_channels(self, n_labels: usize) -> usize {
        match self {
            ConditioningMode::PlainPix2pix => 0,
            ConditioningMode::GaussianNoise => n_labels + 1,
            _ => n_labels,
        }
    }

    /// Number of condition channels fed to the discriminator.
    pub fn discriminator_channels(self, n_labels: usize) -> usize {
        if self.conditions_discriminator() {
            n_labels
        } else {
            0
        }
    }
}

impl fmt::Display for ConditioningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConditioningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConditioningMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Validation(format!("unknown conditioning mode `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOrder {
    DThenG,
    GThenD,
}

/// Which label conditions the generator at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalLabel {
    TrueLabel,
    Sampled,
}

impl FromStr for EvalLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true_label" => Ok(EvalLabel::TrueLabel),
            "sampled" => Ok(EvalLabel::Sampled),
            other => Err(Error::Validation(format!("unknown eval label policy `{other}`"))),
        }
    }
}

/// How SSIM treats the three channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsimChannelPolicy {
    /// SSIM per channel, averaged.
    Average,
    /// SSIM on BT.601 luma.
    Luminance,
}

impl FromStr for SsimChannelPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(SsimChannelPolicy::Average),
            "luminance" => Ok(SsimChannelPolicy::Luminance),
            other => Err(Error::Validation(format!("unknown ssim channel policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn dtype(self) -> candle_core::DType {
        match self {
            Precision::F32 => candle_core::DType::F32,
            Precision::F64 => candle_core::DType::F64,
        }
    }
}

/// Network sizes. The defaults are the 256×256 pix2pix pair: an 8-stage
/// U-NET with widths 64→512 and a 4-stage PatchGAN trunk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArchConfig {
    pub generator_depth: usize,
    pub base_width: usize,
    pub max_width: usize,
    pub discriminator_stages: usize,
    pub instance_norm: bool,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            generator_depth: 8,
            base_width: 64,
            max_width: 512,
            discriminator_stages: 4,
            instance_norm: true,
        }
    }
}

impl ArchConfig {
    /// Width of encoder/trunk stage `i` (0-based): base doubling up to the cap.
    pub fn width(&self, stage: usize) -> usize {
        let w = self.base_width.saturating_mul(1usize << stage.min(30));
        w.min(self.max_width)
    }
}

/// One dataset taking part in an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub sensor_family: SensorFamily,
    pub manifest: PathBuf,
}

impl SensorSource for DatasetEntry {
    fn dataset_name(&self) -> &str {
        &self.name
    }
    fn sensor_family(&self) -> SensorFamily {
        self.sensor_family
    }
}

fn d_schema() -> u32 {
    SCHEMA_VERSION
}
fn d_epochs() -> usize {
    2000
}
fn d_batch() -> usize {
    12
}
fn d_lr() -> f64 {
    0.00002
}
fn d_beta1() -> f64 {
    0.5
}
fn d_beta2() -> f64 {
    0.999
}
fn d_decay() -> usize {
    100
}
fn d_lambda() -> f64 {
    100.0
}
fn d_channels() -> usize {
    3
}
fn d_size() -> usize {
    256
}
fn d_smooth() -> f64 {
    0.9
}
fn d_every() -> usize {
    50
}
fn d_order() -> UpdateOrder {
    UpdateOrder::DThenG
}
fn d_eval_label() -> EvalLabel {
    EvalLabel::TrueLabel
}
fn d_ssim() -> SsimChannelPolicy {
    SsimChannelPolicy::Average
}
fn d_precision() -> Precision {
    Precision::F32
}
fn d_sample_count() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "d_schema")]
    pub schema_version: u32,
    pub name: String,
    pub mode: ConditioningMode,
    #[serde(default = "d_epochs")]
    pub epochs: usize,
    #[serde(default = "d_batch")]
    pub batch_size: usize,
    #[serde(default = "d_lr")]
    pub learning_rate: f64,
    #[serde(default = "d_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "d_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "d_decay")]
    pub decay_epoch: usize,
    #[serde(default = "d_lambda")]
    pub lambda_l1: f64,
    #[serde(default = "d_channels")]
    pub channels: usize,
    #[serde(default = "d_size")]
    pub image_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_smooth")]
    pub smoothed_real_target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "d_order")]
    pub update_order: UpdateOrder,
    #[serde(default = "d_eval_label")]
    pub eval_label: EvalLabel,
    #[serde(default = "d_ssim")]
    pub ssim_channel_policy: SsimChannelPolicy,
    #[serde(default = "d_every")]
    pub sample_every_epochs: usize,
    #[serde(default = "d_sample_count")]
    pub sample_count: usize,
    #[serde(default = "d_every")]
    pub checkpoint_every_epochs: usize,
    #[serde(default = "d_precision")]
    pub precision: Precision,
    #[serde(default)]
    pub arch: ArchConfig,
    pub datasets: Vec<DatasetEntry>,
}

impl ExperimentConfig {
    /// A config with every hyperparameter at its default.
    pub fn new(name: impl Into<String>, mode: ConditioningMode, datasets: Vec<DatasetEntry>) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            mode,
            epochs: d_epochs(),
            batch_size: d_batch(),
            learning_rate: d_lr(),
            adam_beta1: d_beta1(),
            adam_beta2: d_beta2(),
            decay_epoch: d_decay(),
            lambda_l1: d_lambda(),
            channels: d_channels(),
            image_size: d_size(),
            seed: 0,
            smoothed_real_target: d_smooth(),
            output_dir: None,
            update_order: d_order(),
            eval_label: d_eval_label(),
            ssim_channel_policy: d_ssim(),
            sample_every_epochs: d_every(),
            sample_count: d_sample_count(),
            checkpoint_every_epochs: d_every(),
            precision: d_precision(),
            arch: ArchConfig::default(),
            datasets,
        }
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    /// Label registry derived from the dataset list order.
    pub fn registry(&self) -> Result<Vec<SensorLabel>> {
        build_label_registry(&self.datasets)
    }

    pub fn n_labels(&self) -> usize {
        self.datasets.len()
    }

    /// Stable digest of everything that affects training. `output_dir` is
    /// excluded so a run directory can be moved and resumed.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = None;
        let digest = Sha256::digest(canon.to_toml_string().as_bytes());
        hex::encode(&digest[..16])
    }

    /// Run directory: `output_dir` when set, otherwise `<root>/<name>` where
    /// root is `$FAVTGAN_OUTPUT_ROOT` or `runs`.
    pub fn run_dir(&self) -> PathBuf {
        match &self.output_dir {
            Some(p) => p.clone(),
            None => {
                let root = std::env::var_os(OUTPUT_ROOT_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("runs"));
                root.join(&self.name)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(Error::Validation(msg))
        }
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be > 0 (got {})", self.learning_rate));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return bad(format!("{name} must satisfy 0 <= {name} < 1 (got {b})"));
            }
        }
        if self.decay_epoch >= self.epochs {
            return bad(format!(
                "decay_epoch < epochs violated ({} >= {})",
                self.decay_epoch, self.epochs
            ));
        }
        if !(self.lambda_l1.is_finite() && self.lambda_l1 > 0.0) {
            return bad(format!("lambda_l1 must be > 0 (got {})", self.lambda_l1));
        }
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed must be <= {} (got {})", i64::MAX, self.seed));
        }
        if self.channels != 3 {
            return bad(format!("channels must be 3 (got {})", self.channels));
        }
        if !(self.smoothed_real_target > 0.0 && self.smoothed_real_target <= 1.0) {
            return bad(format!(
                "smoothed_real_target must lie in (0, 1] (got {})",
                self.smoothed_real_target
            ));
        }
        if self.sample_every_epochs == 0 || self.checkpoint_every_epochs == 0 {
            return bad("sample_every_epochs and checkpoint_every_epochs must be positive".into());
        }
        let a = &self.arch;
        if a.generator_depth < 2 || a.generator_depth > 12 {
            return bad(format!(
                "arch.generator_depth must lie in 2..=12 (got {})",
                a.generator_depth
            ));
        }
        if a.base_width == 0 || a.max_width < a.base_width {
            return bad("arch widths must satisfy 0 < base_width <= max_width".into());
        }
        if a.discriminator_stages == 0 {
            return bad("arch.discriminator_stages must be positive".into());
        }
        let g_factor = 1usize << a.generator_depth;
        if self.image_size == 0 || !self.image_size.is_multiple_of(g_factor) {
            return bad(format!(
                "image_size {} must be a positive multiple of 2^generator_depth = {g_factor}",
                self.image_size
            ));
        }
        if self.image_size >> a.discriminator_stages == 0 {
            return bad(format!(
                "image_size {} is too small for {} discriminator stages",
                self.image_size, a.discriminator_stages
            ));
        }
        if self.datasets.is_empty() {
            return bad("at least one dataset is required".into());
        }
        let registry = self.registry().map_err(|e| Error::Validation(e.to_string()))?;
        if registry.len() != self.datasets.len() {
            return bad("number of sensor labels must equal number of datasets".into());
        }
        Ok(())
    }
}

/// Read, parse and validate an experiment config.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text, path)
}
