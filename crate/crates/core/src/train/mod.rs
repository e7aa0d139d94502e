//! The alternating G/D training engine.

mod adam;
mod checkpoint;
mod metrics_log;
mod run;
mod schedule;

pub use self::adam::{Adam, AdamState, ADAM_EPS};
pub use self::checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use self::metrics_log::{MetricsLog, METRICS_HEADER};
pub use self::run::{load_manifests, load_run_data, sample_grid, train, RunData};
pub use self::schedule::lr_schedule;

use candle_core::{DType, Device, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConditioningMode, ExperimentConfig, UpdateOrder};
use crate::data::{Batch, BatchStream};
use crate::error::{Error, Result};
use crate::labels::SensorLabel;
use crate::nets::{
    make_condition, stack_conditions, stack_images, with_condition, Discriminator, Generator, ParamStore, Role,
};
use crate::objectives::{
    adv_loss_d, adv_loss_g, aux_loss, discriminator_objective, generator_objective, l1_loss, scalar, total_d,
    total_g, DiscriminatorLossBreakdown, GeneratorLossBreakdown,
};

/// Every loss component of one optimizer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub step: u64,
    pub epoch: usize,
    pub lr: f64,
    pub g: GeneratorLossBreakdown,
    pub d: DiscriminatorLossBreakdown,
}

/// Derive independent sub-seeds from the experiment seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const G_INIT_STREAM: u64 = 1;
const D_INIT_STREAM: u64 = 2;
const COND_STREAM: u64 = 3;

/// Networks, optimizers and progress counters of a run.
pub struct TrainState {
    /// Epoch currently being trained (0-based).
    pub epoch: usize,
    /// Optimizer steps completed over the whole run.
    pub step: u64,
    /// Batches of `epoch` already consumed.
    pub step_in_epoch: usize,
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub g_opt: Adam,
    pub d_opt: Adam,
    /// Draws noisy labels and Gaussian noise.
    pub rng: ChaCha8Rng,
    pub config_hash: String,
}

/// Build the generator and discriminator an experiment config describes.
pub fn build_networks(config: &ExperimentConfig, device: &Device) -> Result<(Generator, Discriminator)> {
    let n = config.n_labels();
    let dtype = config.precision.dtype();
    let g = Generator::new(
        &config.arch,
        config.mode.generator_channels(n),
        derive_seed(config.seed, G_INIT_STREAM),
        dtype,
        device,
    )?;
    let aux_labels = if config.mode.uses_aux() { n } else { 0 };
    let d = Discriminator::new(
        &config.arch,
        config.mode.discriminator_channels(n),
        aux_labels,
        derive_seed(config.seed, D_INIT_STREAM),
        dtype,
        device,
    )?;
    Ok((g, d))
}

/// Copy saved tensors into a network's parameters, checking names and shapes.
pub fn load_params(store: &ParamStore, saved: &[(String, Tensor)]) -> Result<()> {
    if store.len() != saved.len() {
        return Err(Error::Shape(format!(
            "checkpoint holds {} tensors, network has {}",
            saved.len(),
            store.len()
        )));
    }
    for ((name, var), (saved_name, t)) in store.iter().zip(saved) {
        if name != saved_name || var.dims() != t.dims() {
            return Err(Error::Shape(format!(
                "checkpoint tensor {saved_name} {:?} does not match parameter {name} {:?}",
                t.dims(),
                var.dims()
            )));
        }
    }
    for (var, (_, t)) in store.vars().zip(saved) {
        var.set(&t.to_device(var.device())?)?;
    }
    Ok(())
}

fn snapshot(store: &ParamStore) -> Result<Vec<(String, Tensor)>> {
    store
        .iter()
        .map(|(n, v)| Ok((n.to_string(), v.as_tensor().copy()?)))
        .collect()
}

/// Conditioning for one batch: generator input channels, the label each
/// generated image was conditioned on, and the discriminator channels for
/// real and generated pairs.
struct BatchConditioning {
    g_cond: Option<Tensor>,
    real_labels: Vec<usize>,
    gen_labels: Vec<usize>,
    d_real_cond: Option<Tensor>,
    d_fake_cond: Option<Tensor>,
}

pub struct Trainer {
    config: ExperimentConfig,
    registry: Vec<SensorLabel>,
    device: Device,
    dtype: DType,
    pub state: TrainState,
}

impl Trainer {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let device = Device::Cpu;
        let (generator, discriminator) = build_networks(config, &device)?;
        let g_opt = Adam::new(generator.params(), config.learning_rate, config.adam_beta1, config.adam_beta2)?;
        let d_opt = Adam::new(discriminator.params(), config.learning_rate, config.adam_beta1, config.adam_beta2)?;
        Ok(Trainer {
            registry: config.registry()?,
            dtype: config.precision.dtype(),
            device,
            state: TrainState {
                epoch: 0,
                step: 0,
                step_in_epoch: 0,
                generator,
                discriminator,
                g_opt,
                d_opt,
                rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, COND_STREAM)),
                config_hash: config.hash(),
            },
            config: config.clone(),
        })
    }

    /// Rebuild a trainer from a checkpoint written under the same config.
    pub fn from_checkpoint(config: &ExperimentConfig, ckpt: &Checkpoint, ckpt_path: &std::path::Path) -> Result<Self> {
        ckpt.check_config(config, ckpt_path)?;
        let mut t = Trainer::new(config)?;
        load_params(t.state.generator.params(), &ckpt.g_params)?;
        load_params(t.state.discriminator.params(), &ckpt.d_params)?;
        t.state.g_opt.restore(t.state.generator.params(), ckpt.g_adam.clone())?;
        t.state.d_opt.restore(t.state.discriminator.params(), ckpt.d_adam.clone())?;
        t.state.epoch = ckpt.epoch;
        t.state.step = ckpt.step;
        t.state.step_in_epoch = ckpt.step_in_epoch;
        t.state.rng = ckpt.rng.clone();
        Ok(t)
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        let s = &self.state;
        Ok(Checkpoint {
            config: self.config.clone(),
            config_hash: s.config_hash.clone(),
            registry: self.registry.clone(),
            epoch: s.epoch,
            step: s.step,
            step_in_epoch: s.step_in_epoch,
            rng: s.rng.clone(),
            g_params: snapshot(s.generator.params())?,
            d_params: snapshot(s.discriminator.params())?,
            g_adam: s.g_opt.state().clone(),
            d_adam: s.d_opt.state().clone(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn registry(&self) -> &[SensorLabel] {
        &self.registry
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    pub fn dtype(&self) -> DType {
        self.dtype
    }

    fn conditioning(&mut self, batch: &Batch) -> Result<BatchConditioning> {
        let mode = self.config.mode;
        let n = self.registry.len();
        let size = self.config.image_size;
        let rng = &mut self.state.rng;
        let real_labels: Vec<usize> = batch.pairs.iter().map(|p| p.label).collect();
        let g_conds = real_labels
            .iter()
            .map(|&l| make_condition(l, n, mode, Role::Generator, size, rng))
            .collect::<Result<Vec<_>>>()?;
        let gen_labels: Vec<usize> = g_conds
            .iter()
            .zip(&real_labels)
            .map(|(c, &r)| c.label.unwrap_or(r))
            .collect();
        let d_cond = |labels: &[usize], rng: &mut ChaCha8Rng| -> Result<Vec<_>> {
            labels
                .iter()
                .map(|&l| make_condition(l, n, mode, Role::Discriminator, size, rng))
                .collect()
        };
        let d_real = d_cond(&real_labels, rng)?;
        let d_fake = d_cond(&gen_labels, rng)?;
        Ok(BatchConditioning {
            g_cond: stack_conditions(&g_conds, self.dtype, &self.device)?,
            d_real_cond: stack_conditions(&d_real, self.dtype, &self.device)?,
            d_fake_cond: stack_conditions(&d_fake, self.dtype, &self.device)?,
            real_labels,
            gen_labels,
        })
    }

    /// One D update on real and generated pairs and one G update, in the
    /// configured order. Labels for the auxiliary terms: `c_r` for real
    /// pairs, the generator's conditioning label for generated pairs.
    pub fn train_step(&mut self, batch: &Batch) -> Result<LossReport> {
        let lr = lr_schedule(
            self.state.epoch,
            self.config.learning_rate,
            self.config.epochs,
            self.config.decay_epoch,
        );
        self.state.g_opt.lr = lr;
        self.state.d_opt.lr = lr;
        let step = self.state.step + 1;
        let non_finite = |e: Error| match e {
            Error::NonFinite { what, .. } => Error::NonFinite {
                what,
                step,
                pair_ids: batch.pair_ids(),
            },
            other => other,
        };

        let visible: Vec<_> = batch.pairs.iter().map(|p| &p.visible).collect();
        let thermal: Vec<_> = batch.pairs.iter().map(|p| &p.thermal).collect();
        let a = stack_images(&visible, self.dtype, &self.device)?;
        let b = stack_images(&thermal, self.dtype, &self.device)?;
        let cond = self.conditioning(batch)?;
        let fake = self.state.generator.forward(&with_condition(&a, cond.g_cond.as_ref())?)?;

        let (g, d) = match self.config.update_order {
            UpdateOrder::DThenG => {
                let d = self.d_step(&a, &b, &fake.detach(), &cond).map_err(non_finite)?;
                let g = self.g_step(&a, &b, &fake, &cond).map_err(non_finite)?;
                (g, d)
            }
            UpdateOrder::GThenD => {
                let g = self.g_step(&a, &b, &fake, &cond).map_err(non_finite)?;
                let d = self.d_step(&a, &b, &fake.detach(), &cond).map_err(non_finite)?;
                (g, d)
            }
        };
        for (what, v) in [("generator loss", g.total), ("discriminator loss", d.total)] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: what.into(),
                    step,
                    pair_ids: batch.pair_ids(),
                });
            }
        }
        self.state.step = step;
        self.state.step_in_epoch += 1;
        Ok(LossReport {
            step,
            epoch: self.state.epoch,
            lr,
            g,
            d,
        })
    }

    fn d_input(a: &Tensor, b: &Tensor, cond: Option<&Tensor>) -> Result<Tensor> {
        with_condition(&Tensor::cat(&[a, b], 1)?, cond)
    }

    fn d_step(&mut self, a: &Tensor, b: &Tensor, fake: &Tensor, c: &BatchConditioning) -> Result<DiscriminatorLossBreakdown> {
        let target = self.config.smoothed_real_target;
        let disc = &self.state.discriminator;
        let real_out = disc.forward(&Self::d_input(a, b, c.d_real_cond.as_ref())?)?;
        let fake_out = disc.forward(&Self::d_input(a, fake, c.d_fake_cond.as_ref())?)?;
        let (adv_real, adv_fake) = adv_loss_d(&real_out.patch, &fake_out.patch, target)?;
        let aux = match (&real_out.logits, &fake_out.logits) {
            (Some(lr), Some(lf)) if self.config.mode.uses_aux() => {
                Some((aux_loss(lr, &c.real_labels)?, aux_loss(lf, &c.gen_labels)?))
            }
            _ => None,
        };
        let objective = discriminator_objective(&adv_real, &adv_fake, aux.as_ref().map(|(r, f)| (r, f)))?;
        let grads = objective.backward()?;
        self.state.d_opt.step(disc.params(), &grads)?;
        let (aux_real, aux_fake) = match &aux {
            Some((r, f)) => (scalar(r)?, scalar(f)?),
            None => (0.0, 0.0),
        };
        Ok(total_d(scalar(&adv_real)?, scalar(&adv_fake)?, aux_real, aux_fake, self.config.mode))
    }

    fn g_step(&mut self, a: &Tensor, b: &Tensor, fake: &Tensor, c: &BatchConditioning) -> Result<GeneratorLossBreakdown> {
        let out = self
            .state
            .discriminator
            .forward(&Self::d_input(a, fake, c.d_fake_cond.as_ref())?)?;
        let adv = adv_loss_g(&out.patch, self.config.smoothed_real_target)?;
        let aux = match &out.logits {
            Some(l) if self.config.mode.uses_aux() => Some(aux_loss(l, &c.gen_labels)?),
            _ => None,
        };
        let l1 = l1_loss(b, fake)?;
        let objective = generator_objective(&adv, aux.as_ref(), &l1, self.config.lambda_l1)?;
        let grads = objective.backward()?;
        self.state.g_opt.step(self.state.generator.params(), &grads)?;
        let aux = match &aux {
            Some(t) => scalar(t)?,
            None => 0.0,
        };
        Ok(total_g(scalar(&adv)?, aux, scalar(&l1)?, self.config.lambda_l1, self.config.mode))
    }

    /// Train on the next batch of the schedule, rolling over to the next
    /// epoch when the current one is exhausted. Returns the report and
    /// whether this step finished an epoch.
    pub fn advance(&mut self, stream: &BatchStream) -> Result<(LossReport, bool)> {
        let batch = stream
            .epoch(self.state.epoch)
            .nth(self.state.step_in_epoch)
            .ok_or_else(|| Error::Validation("batch schedule exhausted".into()))?;
        let report = self.train_step(&batch)?;
        let finished = self.state.step_in_epoch >= stream.batches_per_epoch();
        if finished {
            self.state.epoch += 1;
            self.state.step_in_epoch = 0;
        }
        Ok((report, finished))
    }

    pub fn mode(&self) -> ConditioningMode {
        self.config.mode
    }
}
