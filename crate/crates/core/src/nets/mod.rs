//! Generator and discriminator networks plus the layers they are built from.
//!
//! Parameters live in an ordered [`ParamStore`] so that initialization,
//! checkpointing and optimizer state all iterate in one fixed order.

mod condition;
mod discriminator;
mod generator;

pub use self::condition::{make_condition, stack_conditions, ConditionTensor, Role};
pub use self::discriminator::{DiscOutput, Discriminator};
pub use self::generator::Generator;

use candle_core::{DType, Device, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{ConditioningMode, EvalLabel};
use crate::data::ImageArray;
use crate::error::{Error, Result};

/// Standard deviation of the zero-mean normal weight initializer.
pub const INIT_STD: f64 = 0.02;

/// Ordered, named collection of trainable tensors.
#[derive(Debug, Clone, Default)]
pub struct ParamStore {
    entries: Vec<(String, Var)>,
}

impl ParamStore {
    pub fn push(&mut self, name: String, var: Var) -> Var {
        debug_assert!(self.get(&name).is_none(), "duplicate parameter {name}");
        self.entries.push((name, var.clone()));
        var
    }

    pub fn get(&self, name: &str) -> Option<&Var> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Var)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.entries.iter().map(|(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.vars().map(|v| v.elem_count()).sum()
    }
}

/// Seeded parameter factory shared by all layers of one network.
pub struct Init {
    rng: ChaCha8Rng,
    pub dtype: DType,
    pub device: Device,
}

impl Init {
    pub fn new(seed: u64, dtype: DType, device: Device) -> Self {
        Init {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dtype,
            device,
        }
    }

    pub fn normal(&mut self, shape: &[usize], std: f64) -> Result<Var> {
        let n: usize = shape.iter().product();
        let dist = Normal::new(0.0, std).expect("valid std");
        let data: Vec<f64> = (0..n).map(|_| dist.sample(&mut self.rng)).collect();
        let t = Tensor::from_vec(data, shape, &self.device)?.to_dtype(self.dtype)?;
        Ok(Var::from_tensor(&t)?)
    }

    pub fn zeros(&self, shape: &[usize]) -> Result<Var> {
        Ok(Var::zeros(shape, self.dtype, &self.device)?)
    }
}

/// Total trainable parameter count of a network.
pub fn count_parameters(params: &ParamStore) -> usize {
    params.count()
}

#[derive(Debug, Clone)]
pub struct Conv2d {
    pub weight: Var,
    pub bias: Option<Var>,
    pub stride: usize,
    pub padding: usize,
}

impl Conv2d {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        store: &mut ParamStore,
        init: &mut Init,
        name: &str,
        c_in: usize,
        c_out: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        bias: bool,
    ) -> Result<Self> {
        let weight = store.push(format!("{name}.weight"), init.normal(&[c_out, c_in, kernel, kernel], INIT_STD)?);
        let bias = if bias {
            Some(store.push(format!("{name}.bias"), init.zeros(&[c_out])?))
        } else {
            None
        };
        Ok(Conv2d {
            weight,
            bias,
            stride,
            padding,
        })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let y = x.conv2d(&self.weight, self.padding, self.stride, 1, 1)?;
        add_channel_bias(y, self.bias.as_ref())
    }
}

/// Transposed convolution; weight layout `[c_in, c_out, k, k]`.
#[derive(Debug, Clone)]
pub struct ConvTranspose2d {
    pub weight: Var,
    pub stride: usize,
    pub padding: usize,
}

impl ConvTranspose2d {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        store: &mut ParamStore,
        init: &mut Init,
        name: &str,
        c_in: usize,
        c_out: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    ) -> Result<Self> {
        let weight = store.push(format!("{name}.weight"), init.normal(&[c_in, c_out, kernel, kernel], INIT_STD)?);
        Ok(ConvTranspose2d {
            weight,
            stride,
            padding,
        })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(x.conv_transpose2d(&self.weight, self.padding, 0, self.stride, 1)?)
    }
}

#[derive(Debug, Clone)]
pub struct Linear {
    pub weight: Var,
    pub bias: Var,
}

impl Linear {
    pub fn new(store: &mut ParamStore, init: &mut Init, name: &str, d_in: usize, d_out: usize) -> Result<Self> {
        let weight = store.push(format!("{name}.weight"), init.normal(&[d_out, d_in], INIT_STD)?);
        let bias = store.push(format!("{name}.bias"), init.zeros(&[d_out])?);
        Ok(Linear { weight, bias })
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(x.matmul(&self.weight.t()?)?.broadcast_add(&self.bias)?)
    }
}

fn add_channel_bias(y: Tensor, bias: Option<&Var>) -> Result<Tensor> {
    match bias {
        Some(b) => Ok(y.broadcast_add(&b.reshape((1, b.dim(0)?, 1, 1))?)?),
        None => Ok(y),
    }
}

/// Per-sample, per-channel normalization over the spatial dims (no affine).
pub fn instance_norm(x: &Tensor) -> Result<Tensor> {
    const EPS: f64 = 1e-5;
    let mean = x.mean_keepdim(3)?.mean_keepdim(2)?;
    let centred = x.broadcast_sub(&mean)?;
    let var = centred.sqr()?.mean_keepdim(3)?.mean_keepdim(2)?;
    Ok(centred.broadcast_div(&(var + EPS)?.sqrt()?)?)
}

pub fn leaky_relu(x: &Tensor, slope: f64) -> Result<Tensor> {
    Ok((x.relu()? - (x.neg()?.relu()? * slope)?)?)
}

/// Stack `[3, H, W]` arrays into an `[N, 3, H, W]` tensor.
pub fn stack_images(images: &[&ImageArray], dtype: DType, device: &Device) -> Result<Tensor> {
    let first = images.first().ok_or_else(|| Error::Shape("empty batch".into()))?;
    let (c, h, w) = first.dim();
    let mut data = Vec::with_capacity(images.len() * c * h * w);
    for img in images {
        if img.dim() != (c, h, w) {
            return Err(Error::Shape(format!("batch mixes {:?} and {:?}", (c, h, w), img.dim())));
        }
        data.extend(img.iter().copied());
    }
    Ok(Tensor::from_vec(data, (images.len(), c, h, w), device)?.to_dtype(dtype)?)
}

/// Split an `[N, 3, H, W]` tensor back into per-sample arrays.
pub fn unstack_images(t: &Tensor) -> Result<Vec<ImageArray>> {
    let (n, c, h, w) = t.dims4()?;
    let flat: Vec<f32> = t.to_dtype(DType::F32)?.flatten_all()?.to_vec1()?;
    Ok(flat
        .chunks(c * h * w)
        .take(n)
        .map(|chunk| ImageArray::from_shape_vec((c, h, w), chunk.to_vec()).expect("chunk shape"))
        .collect())
}

/// Concatenate condition channels onto images when there are any.
pub fn with_condition(images: &Tensor, cond: Option<&Tensor>) -> Result<Tensor> {
    match cond {
        Some(c) => Ok(Tensor::cat(&[images, c], 1)?),
        None => Ok(images.clone()),
    }
}

/// Generate thermal images for evaluation or sample grids.
///
/// With [`EvalLabel::TrueLabel`] the generator is conditioned on each pair's
/// real label even in modes that sample labels during training; Gaussian
/// noise, when the mode uses it, is still drawn from `rng`.
#[allow(clippy::too_many_arguments)]
pub fn translate(
    generator: &Generator,
    mode: ConditioningMode,
    n_labels: usize,
    visible: &[&ImageArray],
    labels: &[usize],
    policy: EvalLabel,
    rng: &mut impl Rng,
    dtype: DType,
    device: &Device,
) -> Result<Vec<ImageArray>> {
    if visible.len() != labels.len() {
        return Err(Error::Shape(format!("{} images but {} labels", visible.len(), labels.len())));
    }
    let wiring = if policy == EvalLabel::TrueLabel && mode.samples_fake_label() {
        ConditioningMode::NoNoise
    } else {
        mode
    };
    const CHUNK: usize = 8;
    let mut out = Vec::with_capacity(visible.len());
    for (imgs, labs) in visible.chunks(CHUNK).zip(labels.chunks(CHUNK)) {
        let size = imgs[0].dim().1;
        let conds = labs
            .iter()
            .map(|&l| make_condition(l, n_labels, wiring, Role::Generator, size, rng))
            .collect::<Result<Vec<_>>>()?;
        let x = stack_images(imgs, dtype, device)?;
        let cond = stack_conditions(&conds, dtype, device)?;
        let y = generator.forward(&with_condition(&x, cond.as_ref())?)?;
        out.extend(unstack_images(&y)?);
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) fn normal_tensor(shape: &[usize], dtype: DType, seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..shape.iter().product()).map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng)).collect();
    Tensor::from_vec(v, shape, &Device::Cpu).unwrap().to_dtype(dtype).unwrap()
}
