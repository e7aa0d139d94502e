use candle_core::{DType, Device, Tensor};

use super::{instance_norm, leaky_relu, Conv2d, ConvTranspose2d, Init, ParamStore};
use crate::config::ArchConfig;
use crate::error::{Error, Result};

struct Down {
    conv: Conv2d,
    norm: bool,
}

struct Up {
    deconv: ConvTranspose2d,
    norm: bool,
}

/// U-NET generator: `depth` stride-2 encoder stages, `depth - 1` transposed
/// decoder stages and an upsample+conv output stage with `tanh`.
///
/// Decoder stage `j` (0-based) concatenates the output of encoder stage
/// `depth - 2 - j`, so the outermost encoder features feed the last decoder
/// stage.
pub struct Generator {
    downs: Vec<Down>,
    ups: Vec<Up>,
    out: Conv2d,
    params: ParamStore,
    cond_channels: usize,
    depth: usize,
}

impl Generator {
    pub fn new(arch: &ArchConfig, cond_channels: usize, seed: u64, dtype: DType, device: &Device) -> Result<Self> {
        let depth = arch.generator_depth;
        let mut params = ParamStore::default();
        let mut init = Init::new(seed, dtype, device.clone());
        let mut downs = Vec::with_capacity(depth);
        let mut c_in = 3 + cond_channels;
        for i in 0..depth {
            let c_out = arch.width(i);
            let conv = Conv2d::new(&mut params, &mut init, &format!("down{i}"), c_in, c_out, 4, 2, 1, false)?;
            downs.push(Down {
                conv,
                norm: arch.instance_norm && i != 0 && i != depth - 1,
            });
            c_in = c_out;
        }
        let mut ups = Vec::with_capacity(depth - 1);
        for j in 0..depth - 1 {
            let skip = arch.width(depth - 2 - j);
            let deconv = ConvTranspose2d::new(&mut params, &mut init, &format!("up{j}"), c_in, skip, 4, 2, 1)?;
            ups.push(Up {
                deconv,
                norm: arch.instance_norm,
            });
            c_in = 2 * skip;
        }
        let out = Conv2d::new(&mut params, &mut init, "out", c_in, 3, 4, 1, 1, true)?;
        Ok(Generator {
            downs,
            ups,
            out,
            params,
            cond_channels,
            depth,
        })
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn cond_channels(&self) -> usize {
        self.cond_channels
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        let (_, c, h, w) = x.dims4().map_err(|e| Error::Shape(e.to_string()))?;
        let factor = 1usize << self.depth;
        if c != 3 + self.cond_channels {
            return Err(Error::Shape(format!(
                "generator expects {} input channels (3 image + {} condition), got {c}",
                3 + self.cond_channels,
                self.cond_channels
            )));
        }
        if h != w || h == 0 || h % factor != 0 {
            return Err(Error::Shape(format!(
                "generator input must be square with side a multiple of {factor}, got {h}x{w}"
            )));
        }
        Ok(())
    }

    /// `[N, 3 + k, S, S]` (image ⊕ condition) → `[N, 3, S, S]` in `[-1, 1]`.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.forward_impl(x, true)
    }

    /// Forward pass with every skip tensor replaced by zeros of the same shape.
    pub fn forward_without_skips(&self, x: &Tensor) -> Result<Tensor> {
        self.forward_impl(x, false)
    }

    fn forward_impl(&self, x: &Tensor, skips: bool) -> Result<Tensor> {
        self.check_input(x)?;
        let mut feats = Vec::with_capacity(self.depth);
        let mut h = x.clone();
        for d in &self.downs {
            h = d.conv.forward(&h)?;
            if d.norm {
                h = instance_norm(&h)?;
            }
            h = leaky_relu(&h, 0.2)?;
            feats.push(h.clone());
        }
        for (j, u) in self.ups.iter().enumerate() {
            h = u.deconv.forward(&h)?;
            if u.norm {
                h = instance_norm(&h)?;
            }
            h = h.relu()?;
            let skip = &feats[self.depth - 2 - j];
            let skip = if skips { skip.clone() } else { skip.zeros_like()? };
            h = Tensor::cat(&[&h, &skip], 1)?;
        }
        let (_, _, s, _) = h.dims4()?;
        let h = h.upsample_nearest2d(2 * s, 2 * s)?;
        // asymmetric (left/top) zero pad so a k=4, p=1 conv preserves size
        let h = h.pad_with_zeros(2, 1, 0)?.pad_with_zeros(3, 1, 0)?;
        Ok(self.out.forward(&h)?.tanh()?)
    }
}
