#![allow(dead_code)]

use std::path::{Path, PathBuf};

use favtgan::config::{ArchConfig, ConditioningMode, DatasetEntry, ExperimentConfig};
use favtgan::data::{synthesize_dataset, SynthOptions, SynthRule};
use favtgan::labels::SensorFamily;

/// Synthesize `n` channel-inversion pairs with `n_test` of them held out.
pub fn synth(root: &Path, name: &str, family: SensorFamily, seed: u64, n: usize, n_test: usize, size: usize) -> DatasetEntry {
    let mut opts = SynthOptions::new(n, size, seed, SynthRule::ChannelInversion);
    opts.test_fraction = n_test as f64 / n as f64;
    opts.dataset_name = name.into();
    opts.sensor_family = family;
    let dir = root.join(name);
    synthesize_dataset(&opts, &dir).expect("synthesize");
    DatasetEntry {
        name: name.into(),
        sensor_family: family,
        manifest: dir.join("manifest.toml"),
    }
}

/// Two synthetic sensors with 8 train and 2 test pairs each: 16 train pairs total.
pub fn two_sensor_fixture(root: &Path, size: usize) -> Vec<DatasetEntry> {
    vec![
        synth(root, "synth_a", SensorFamily::Microbolometer, 1, 10, 2, size),
        synth(root, "synth_b", SensorFamily::BstFerroelectric, 2, 10, 2, size),
    ]
}

pub fn tiny_arch() -> ArchConfig {
    ArchConfig {
        generator_depth: 4,
        base_width: 4,
        max_width: 16,
        discriminator_stages: 2,
        instance_norm: true,
    }
}

pub fn smoke_arch() -> ArchConfig {
    ArchConfig {
        generator_depth: 6,
        base_width: 8,
        max_width: 32,
        discriminator_stages: 3,
        instance_norm: true,
    }
}

/// A small, fast config writing into `out`.
pub fn tiny_config(name: &str, mode: ConditioningMode, datasets: Vec<DatasetEntry>, out: PathBuf) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(name, mode, datasets);
    cfg.image_size = 16;
    cfg.epochs = 5;
    cfg.decay_epoch = 2;
    cfg.learning_rate = 2e-4;
    cfg.sample_every_epochs = 2;
    cfg.checkpoint_every_epochs = 2;
    cfg.arch = tiny_arch();
    cfg.output_dir = Some(out);
    cfg
}
