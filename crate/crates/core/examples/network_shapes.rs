//! Build the default generator and discriminator for 256x256 inputs and
//! print their output shapes and parameter counts per conditioning mode.
//!
//! Run with `cargo run --release --example network_shapes`.

use candle_core::{DType, Device, Tensor};

use favtgan::config::{ArchConfig, ConditioningMode};
use favtgan::nets::{Discriminator, Generator};

fn main() -> favtgan::Result<()> {
    let dev = Device::Cpu;
    let arch = ArchConfig::default();
    let n_labels = 2;
    for mode in ConditioningMode::ALL {
        let kg = mode.generator_channels(n_labels);
        let kd = mode.discriminator_channels(n_labels);
        let aux = if mode.uses_aux() { n_labels } else { 0 };
        let g = Generator::new(&arch, kg, 0, DType::F32, &dev)?;
        let d = Discriminator::new(&arch, kd, aux, 1, DType::F32, &dev)?;
        let x = Tensor::zeros((1, 3 + kg, 256, 256), DType::F32, &dev)?;
        let y = g.forward(&x)?;
        let pair = Tensor::zeros((1, 6 + kd, 256, 256), DType::F32, &dev)?;
        let out = d.forward(&pair)?;
        println!(
            "{:<15} G in {:?} -> {:?} ({} params) | D in {:?} -> patch {:?}, logits {:?} ({} params)",
            mode.as_str(),
            x.dims(),
            y.dims(),
            g.params().count(),
            pair.dims(),
            out.patch.dims(),
            out.logits.as_ref().map(|l| l.dims().to_vec()),
            d.params().count()
        );
    }
    Ok(())
}
