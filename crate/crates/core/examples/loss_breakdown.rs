//! Run a few optimizer steps in every conditioning mode and print each
//! loss component of the generator and discriminator objectives.
//!
//! Run with `cargo run --release --example loss_breakdown`.

use favtgan::config::{ArchConfig, ConditioningMode, DatasetEntry, ExperimentConfig};
use favtgan::data::{batch_iterator, synthesize_dataset, SynthOptions, SynthRule};
use favtgan::labels::SensorFamily;
use favtgan::train::{load_run_data, Trainer};

fn main() -> favtgan::Result<()> {
    let root = std::env::temp_dir().join("favtgan_loss_breakdown");
    let mut datasets = Vec::new();
    for (seed, name, family) in [
        (1, "synth_a", SensorFamily::Microbolometer),
        (2, "synth_b", SensorFamily::BstFerroelectric),
    ] {
        let mut opts = SynthOptions::new(8, 32, seed, SynthRule::ChannelInversion);
        opts.dataset_name = name.into();
        opts.sensor_family = family;
        synthesize_dataset(&opts, &root.join(name))?;
        datasets.push(DatasetEntry {
            name: name.into(),
            sensor_family: family,
            manifest: root.join(name).join("manifest.toml"),
        });
    }
    println!(
        "{:<15} {:>4} {:>8} {:>8} {:>8} {:>9} | {:>8} {:>8} {:>8} {:>8} {:>8}",
        "mode", "step", "g_adv", "g_aux", "g_l1", "g_total", "d_adv_r", "d_adv_f", "d_aux_r", "d_aux_f", "d_total"
    );
    for mode in ConditioningMode::ALL {
        let mut cfg = ExperimentConfig::new(mode.as_str(), mode, datasets.clone());
        cfg.image_size = 32;
        cfg.batch_size = 4;
        cfg.epochs = 10;
        cfg.decay_epoch = 5;
        cfg.arch = ArchConfig {
            generator_depth: 5,
            base_width: 8,
            max_width: 32,
            discriminator_stages: 2,
            instance_norm: true,
        };
        let data = load_run_data(&cfg)?;
        let stream = batch_iterator(&data.train, cfg.batch_size, cfg.seed, true)?;
        let mut trainer = Trainer::new(&cfg)?;
        for _ in 0..3 {
            let r = trainer.advance(&stream)?.0;
            println!(
                "{:<15} {:>4} {:>8.4} {:>8.4} {:>8.4} {:>9.4} | {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                mode.as_str(),
                r.step,
                r.g.adv,
                r.g.aux,
                r.g.l1,
                r.g.total,
                r.d.adv_real,
                r.d.adv_fake,
                r.d.aux_real,
                r.d.aux_fake,
                r.d.total
            );
        }
    }
    Ok(())
}
