//! Visible-to-thermal face translation with a sensor-label conditioned
//! pix2pix GAN.
//!
//! The crate covers the whole experiment lifecycle:
//!
//! - [`config`] and [`labels`]: declarative experiment configs and the
//!   sensor-label registry,
//! - [`data`]: paired dataset manifests, loading, combination, batching and
//!   synthetic data,
//! - [`nets`]: the U-NET generator, the PatchGAN discriminator with its
//!   auxiliary sensor classifier, and label/noise conditioning,
//! - [`objectives`]: least-squares adversarial, cross-entropy auxiliary and
//!   L1 losses,
//! - [`train`]: Adam, the learning-rate schedule, checkpoints and the
//!   alternating training loop,
//! - [`eval`]: SSIM/PSNR, relative-change reports and evaluation runs,
//! - [`cli`]: the `favtgan` command line.

pub mod cli;
pub mod config;
pub mod data;
mod error;
pub mod eval;
pub mod labels;
pub mod nets;
pub mod objectives;
pub mod train;

pub use error::{CheckpointError, Error, Result};
