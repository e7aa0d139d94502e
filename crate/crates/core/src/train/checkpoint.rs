//! Checkpoint container: a safetensors file holding network parameters and
//! Adam moments, with the run header (format version, config, config hash,
//! registry, progress counters, RNG state) in the safetensors metadata.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use candle_core::{Device, Tensor};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use crate::config::ExperimentConfig;
use crate::error::{CheckpointError, Error, Result};
use crate::labels::SensorLabel;

pub const CHECKPOINT_VERSION: u32 = 1;
const META_KEY: &str = "favtgan.header";

/// Everything needed to continue a run bit-identically.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub registry: Vec<SensorLabel>,
    pub epoch: usize,
    pub step: u64,
    pub step_in_epoch: usize,
    pub rng: ChaCha8Rng,
    pub g_params: Vec<(String, Tensor)>,
    pub d_params: Vec<(String, Tensor)>,
    pub g_adam: AdamState,
    pub d_adam: AdamState,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config_toml: String,
    config_hash: String,
    registry: Vec<SensorLabel>,
    epoch: usize,
    step: u64,
    step_in_epoch: usize,
    rng: ChaCha8Rng,
    g_names: Vec<String>,
    d_names: Vec<String>,
    g_adam_step: u64,
    d_adam_step: u64,
}

fn corrupt(path: &Path, msg: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: path.to_path_buf(),
        kind: CheckpointError::Corrupt(msg.into()),
    }
}

impl Checkpoint {
    /// Write atomically: serialize to a sibling temp file, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = Header {
            format_version: CHECKPOINT_VERSION,
            config_toml: self.config.to_toml_string(),
            config_hash: self.config_hash.clone(),
            registry: self.registry.clone(),
            epoch: self.epoch,
            step: self.step,
            step_in_epoch: self.step_in_epoch,
            rng: self.rng.clone(),
            g_names: self.g_params.iter().map(|(n, _)| n.clone()).collect(),
            d_names: self.d_params.iter().map(|(n, _)| n.clone()).collect(),
            g_adam_step: self.g_adam.step,
            d_adam_step: self.d_adam.step,
        };
        let mut tensors: Vec<(String, &Tensor)> = Vec::new();
        for (prefix, params, adam) in [("g", &self.g_params, &self.g_adam), ("d", &self.d_params, &self.d_adam)] {
            for (i, (name, t)) in params.iter().enumerate() {
                tensors.push((format!("{prefix}.param.{name}"), t));
                tensors.push((format!("{prefix}.adam_m.{name}"), &adam.m[i]));
                tensors.push((format!("{prefix}.adam_v.{name}"), &adam.v[i]));
            }
        }
        let meta = HashMap::from([(
            META_KEY.to_string(),
            serde_json::to_string(&header).expect("header serializes"),
        )]);
        let bytes = safetensors::serialize(tensors, Some(meta))
            .map_err(|e| corrupt(path, format!("serialization failed: {e}")))?;

        let tmp = tmp_path(path);
        std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let (_, meta) = safetensors::SafeTensors::read_metadata(&bytes).map_err(|e| corrupt(path, e.to_string()))?;
        let raw = meta
            .metadata()
            .as_ref()
            .and_then(|m| m.get(META_KEY))
            .ok_or_else(|| corrupt(path, "missing run header"))?;
        let header: Header = serde_json::from_str(raw).map_err(|e| corrupt(path, format!("bad header: {e}")))?;
        if header.format_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint {
                path: path.to_path_buf(),
                kind: CheckpointError::Version {
                    found: header.format_version,
                    expected: CHECKPOINT_VERSION,
                },
            });
        }
        let config = ExperimentConfig::from_toml_str(&header.config_toml, path)
            .map_err(|e| corrupt(path, format!("embedded config: {e}")))?;
        if config.hash() != header.config_hash {
            return Err(corrupt(path, "embedded config does not match its hash"));
        }
        let mut tensors = candle_core::safetensors::load_buffer(&bytes, &Device::Cpu)
            .map_err(|e| corrupt(path, e.to_string()))?;
        let dtype = config.precision.dtype();
        let mut take = |key: String| -> Result<Tensor> {
            let t = tensors
                .remove(&key)
                .ok_or_else(|| corrupt(path, format!("missing tensor {key}")))?;
            if t.dtype() != dtype {
                return Err(corrupt(path, format!("tensor {key} has dtype {:?}", t.dtype())));
            }
            Ok(t)
        };
        let mut unpack = |prefix: &str, names: &[String], step: u64| -> Result<(Vec<(String, Tensor)>, AdamState)> {
            let mut params = Vec::with_capacity(names.len());
            let mut m = Vec::with_capacity(names.len());
            let mut v = Vec::with_capacity(names.len());
            for name in names {
                params.push((name.clone(), take(format!("{prefix}.param.{name}"))?));
                m.push(take(format!("{prefix}.adam_m.{name}"))?);
                v.push(take(format!("{prefix}.adam_v.{name}"))?);
            }
            Ok((params, AdamState { step, m, v }))
        };
        let (g_params, g_adam) = unpack("g", &header.g_names, header.g_adam_step)?;
        let (d_params, d_adam) = unpack("d", &header.d_names, header.d_adam_step)?;
        Ok(Checkpoint {
            config,
            config_hash: header.config_hash,
            registry: header.registry,
            epoch: header.epoch,
            step: header.step,
            step_in_epoch: header.step_in_epoch,
            rng: header.rng,
            g_params,
            d_params,
            g_adam,
            d_adam,
        })
    }

    /// Refuse to continue under a config other than the one that wrote us.
    pub fn check_config(&self, config: &ExperimentConfig, path: &Path) -> Result<()> {
        let expected = config.hash();
        if expected != self.config_hash {
            return Err(Error::Checkpoint {
                path: path.to_path_buf(),
                kind: CheckpointError::HashMismatch {
                    found: self.config_hash.clone(),
                    expected,
                },
            });
        }
        Ok(())
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}
