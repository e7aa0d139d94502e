//! Train every conditioning mode briefly on a synthetic two-sensor dataset
//! and report how far the L1 loss and test SSIM move.
//!
//! Run with `cargo run --release --example smoke_train -- [steps]`.

use std::path::Path;
use std::time::Instant;

use favtgan::config::{ArchConfig, ConditioningMode, DatasetEntry, ExperimentConfig};
use favtgan::data::{batch_iterator, synthesize_dataset, DatasetManifest, SynthOptions, SynthRule};
use favtgan::eval::{evaluate, EvalOptions, Source};
use favtgan::labels::SensorFamily;
use favtgan::train::{load_run_data, Trainer};

fn dataset(root: &Path, name: &str, family: SensorFamily, seed: u64) -> favtgan::Result<DatasetEntry> {
    let mut opts = SynthOptions::new(10, 64, seed, SynthRule::ChannelInversion);
    opts.test_fraction = 0.2;
    opts.dataset_name = name.into();
    opts.sensor_family = family;
    synthesize_dataset(&opts, &root.join(name))?;
    Ok(DatasetEntry {
        name: name.into(),
        sensor_family: family,
        manifest: root.join(name).join("manifest.toml"),
    })
}

fn main() -> favtgan::Result<()> {
    let steps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let root = std::env::temp_dir().join("favtgan_smoke");
    let datasets = vec![
        dataset(&root, "synth_a", SensorFamily::Microbolometer, 1)?,
        dataset(&root, "synth_b", SensorFamily::BstFerroelectric, 2)?,
    ];
    let manifests: Vec<DatasetManifest> = datasets
        .iter()
        .map(|d| DatasetManifest::load(&d.manifest))
        .collect::<favtgan::Result<_>>()?;

    for mode in ConditioningMode::ALL {
        let mut cfg = ExperimentConfig::new(format!("smoke_{mode}"), mode, datasets.clone());
        cfg.image_size = 64;
        cfg.batch_size = 4;
        cfg.learning_rate = 2e-4;
        cfg.epochs = 1000;
        cfg.decay_epoch = 500;
        cfg.arch = ArchConfig {
            generator_depth: 6,
            base_width: 8,
            max_width: 32,
            discriminator_stages: 3,
            instance_norm: true,
        };
        cfg.output_dir = Some(root.join("runs").join(mode.as_str()));
        std::fs::create_dir_all(cfg.run_dir()).expect("run dir");

        let data = load_run_data(&cfg)?;
        let stream = batch_iterator(&data.train, cfg.batch_size, cfg.seed, true)?;
        let mut trainer = Trainer::new(&cfg)?;
        let before = cfg.run_dir().join("untrained.safetensors");
        trainer.checkpoint()?.save(&before)?;

        let start = Instant::now();
        let mut l1 = Vec::new();
        while trainer.state.step < steps {
            l1.push(trainer.advance(&stream)?.0.g.l1);
        }
        let after = cfg.run_dir().join("trained.safetensors");
        trainer.checkpoint()?.save(&after)?;

        let ssim = |p: &Path| -> favtgan::Result<f64> {
            let reports = evaluate(Source::Checkpoint(p), &manifests, &EvalOptions::default())?.reports;
            Ok(reports.iter().map(|r| r.mean_ssim).sum::<f64>() / reports.len() as f64)
        };
        let tail = &l1[l1.len().saturating_sub(20)..];
        println!(
            "{:<15} {:>6.1}s  l1 first {:.4} last-20 mean {:.4}  ssim {:.3} -> {:.3}",
            mode.as_str(),
            start.elapsed().as_secs_f64(),
            l1[0],
            tail.iter().sum::<f64>() / tail.len() as f64,
            ssim(&before)?,
            ssim(&after)?
        );
    }
    Ok(())
}
