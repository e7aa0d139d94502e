//! Label and noise conditioning channels.
//!
//! | mode            | generator input        | discriminator input |
//! |-----------------|------------------------|---------------------|
//! | baseline        | one-hot(c_f)           | one-hot(label)      |
//! | no_noise        | one-hot(c_r)           | one-hot(label)      |
//! | noisy_labels    | one-hot(c_f)           | none                |
//! | gaussian_noise  | one-hot(c_r) ⊕ z       | none                |
//! | plain_pix2pix   | none                   | none                |
//!
//! `c_f` is drawn uniformly over all labels. For the discriminator, `label`
//! is whatever label the pair is presented with: `c_r` for real pairs and
//! the generator's conditioning label for generated pairs.

use candle_core::{DType, Device, Tensor};
use ndarray::{s, Array3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::ConditioningMode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Generator,
    Discriminator,
}

/// `[k, S, S]` condition channels for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionTensor {
    pub channels: Array3<f32>,
    /// Label encoded in the one-hot channels, if any.
    pub label: Option<usize>,
}

impl ConditionTensor {
    pub fn n_channels(&self) -> usize {
        self.channels.dim().0
    }
}

pub fn make_condition(
    label: usize,
    n_labels: usize,
    mode: ConditioningMode,
    role: Role,
    size: usize,
    rng: &mut impl Rng,
) -> Result<ConditionTensor> {
    if label >= n_labels {
        return Err(Error::Registry(format!(
            "label {label} out of range for {n_labels} labels"
        )));
    }
    use ConditioningMode::*;
    let (encoded, noise) = match (mode, role) {
        (PlainPix2pix, _) => (None, false),
        (Baseline | NoisyLabels, Role::Generator) => (Some(rng.random_range(0..n_labels)), false),
        (NoNoise, Role::Generator) => (Some(label), false),
        (GaussianNoise, Role::Generator) => (Some(label), true),
        (Baseline | NoNoise, Role::Discriminator) => (Some(label), false),
        (NoisyLabels | GaussianNoise, Role::Discriminator) => (None, false),
    };
    let k = encoded.map_or(0, |_| n_labels) + usize::from(noise);
    let mut channels = Array3::<f32>::zeros((k, size, size));
    if let Some(l) = encoded {
        channels.slice_mut(s![l, .., ..]).fill(1.0);
    }
    if noise {
        for v in channels.slice_mut(s![k - 1, .., ..]).iter_mut() {
            *v = rng.sample::<f32, _>(StandardNormal);
        }
    }
    Ok(ConditionTensor {
        channels,
        label: encoded,
    })
}

/// Stack per-sample conditions into `[N, k, S, S]`; `None` when `k == 0`.
pub fn stack_conditions(conds: &[ConditionTensor], dtype: DType, device: &Device) -> Result<Option<Tensor>> {
    let Some(first) = conds.first() else {
        return Ok(None);
    };
    let (k, h, w) = first.channels.dim();
    if k == 0 {
        return Ok(None);
    }
    let mut data = Vec::with_capacity(conds.len() * k * h * w);
    for c in conds {
        if c.channels.dim() != (k, h, w) {
            return Err(Error::Shape("condition tensors differ in shape".into()));
        }
        data.extend(c.channels.iter().copied());
    }
    Ok(Some(
        Tensor::from_vec(data, (conds.len(), k, h, w), device)?.to_dtype(dtype)?,
    ))
}
