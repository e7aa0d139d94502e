//! Train a short run, resume a copy from its mid-run checkpoint and show
//! that both produce the same metrics log.
//!
//! Run with `cargo run --release --example resume_training`.

use favtgan::config::{ArchConfig, ConditioningMode, DatasetEntry, ExperimentConfig};
use favtgan::data::{synthesize_dataset, SynthOptions, SynthRule};
use favtgan::labels::SensorFamily;
use favtgan::train::train;

fn main() -> favtgan::Result<()> {
    let root = std::env::temp_dir().join("favtgan_resume");
    let mut opts = SynthOptions::new(12, 32, 5, SynthRule::BlurPlusBias);
    opts.dataset_name = "synth".into();
    synthesize_dataset(&opts, &root.join("synth"))?;
    let datasets = vec![DatasetEntry {
        name: "synth".into(),
        sensor_family: SensorFamily::Synthetic,
        manifest: root.join("synth/manifest.toml"),
    }];
    let mut cfg = ExperimentConfig::new("resume_demo", ConditioningMode::Baseline, datasets);
    cfg.image_size = 32;
    cfg.batch_size = 4;
    cfg.epochs = 4;
    cfg.decay_epoch = 2;
    cfg.checkpoint_every_epochs = 2;
    cfg.arch = ArchConfig {
        generator_depth: 5,
        base_width: 8,
        max_width: 32,
        discriminator_stages: 2,
        instance_norm: true,
    };

    cfg.output_dir = Some(root.join("full"));
    let full = train(&cfg, None)?;

    cfg.output_dir = Some(root.join("resumed"));
    std::fs::create_dir_all(root.join("resumed")).expect("run dir");
    std::fs::copy(full.join("metrics.log"), root.join("resumed/metrics.log")).expect("copy log");
    let resumed = train(&cfg, Some(&full.join("checkpoints/epoch_00002.safetensors")))?;

    let a = std::fs::read_to_string(full.join("metrics.log")).expect("log");
    let b = std::fs::read_to_string(resumed.join("metrics.log")).expect("log");
    println!("{} steps logged; resumed log identical: {}", a.lines().count() - 1, a == b);
    Ok(())
}
