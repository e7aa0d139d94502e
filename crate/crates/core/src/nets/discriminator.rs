use candle_core::{DType, Device, Tensor};

use super::{instance_norm, leaky_relu, Conv2d, Init, Linear, ParamStore};
use crate::config::ArchConfig;
use crate::error::{Error, Result};

/// Both heads of the discriminator for a batch.
#[derive(Debug, Clone)]
pub struct DiscOutput {
    /// Real/fake scores, `[N, 1, S / 2^stages, S / 2^stages]`.
    pub patch: Tensor,
    /// Sensor-class logits `[N, n_labels]`; absent without an auxiliary head.
    pub logits: Option<Tensor>,
}

/// PatchGAN discriminator with an auxiliary sensor classifier.
///
/// A shared trunk of stride-2 convolutions feeds two final layers: a
/// 1-channel convolution producing the patch map, and global average pooling
/// followed by a linear layer producing class logits.
pub struct Discriminator {
    trunk: Vec<(Conv2d, bool)>,
    patch_head: Conv2d,
    aux_head: Option<Linear>,
    params: ParamStore,
    cond_channels: usize,
    stages: usize,
}

impl Discriminator {
    /// `n_labels == 0` builds no auxiliary head.
    pub fn new(
        arch: &ArchConfig,
        cond_channels: usize,
        n_labels: usize,
        seed: u64,
        dtype: DType,
        device: &Device,
    ) -> Result<Self> {
        let stages = arch.discriminator_stages;
        let mut params = ParamStore::default();
        let mut init = Init::new(seed, dtype, device.clone());
        let mut trunk = Vec::with_capacity(stages);
        let mut c_in = 6 + cond_channels;
        for i in 0..stages {
            let c_out = arch.width(i);
            let conv = Conv2d::new(&mut params, &mut init, &format!("trunk{i}"), c_in, c_out, 4, 2, 1, true)?;
            trunk.push((conv, arch.instance_norm && i != 0));
            c_in = c_out;
        }
        let patch_head = Conv2d::new(&mut params, &mut init, "patch", c_in, 1, 4, 1, 1, false)?;
        let aux_head = if n_labels > 0 {
            Some(Linear::new(&mut params, &mut init, "aux", c_in, n_labels)?)
        } else {
            None
        };
        Ok(Discriminator {
            trunk,
            patch_head,
            aux_head,
            params,
            cond_channels,
            stages,
        })
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn cond_channels(&self) -> usize {
        self.cond_channels
    }

    /// `x`: `[N, 6 + k, S, S]` (visible ⊕ thermal ⊕ condition).
    pub fn forward(&self, x: &Tensor) -> Result<DiscOutput> {
        let (_, c, h, w) = x.dims4().map_err(|e| Error::Shape(e.to_string()))?;
        if c != 6 + self.cond_channels {
            return Err(Error::Shape(format!(
                "discriminator expects {} input channels, got {c}",
                6 + self.cond_channels
            )));
        }
        let factor = 1usize << self.stages;
        if h != w || h % factor != 0 {
            return Err(Error::Shape(format!(
                "discriminator input must be square with side a multiple of {factor}, got {h}x{w}"
            )));
        }
        let mut f = x.clone();
        for (conv, norm) in &self.trunk {
            f = conv.forward(&f)?;
            if *norm {
                f = instance_norm(&f)?;
            }
            f = leaky_relu(&f, 0.2)?;
        }
        let padded = f.pad_with_zeros(2, 1, 0)?.pad_with_zeros(3, 1, 0)?;
        let patch = self.patch_head.forward(&padded)?;
        let logits = match &self.aux_head {
            Some(head) => Some(head.forward(&f.mean((2, 3))?)?),
            None => None,
        };
        Ok(DiscOutput { patch, logits })
    }
}
