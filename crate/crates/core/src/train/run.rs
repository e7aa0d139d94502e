use std::path::{Path, PathBuf};

use ndarray::{s, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, Checkpoint, MetricsLog, Trainer};
use crate::config::ExperimentConfig;
use crate::data::{batch_iterator, combine, image, CombinedDataset, DatasetManifest, ImageArray, ImagePair, Split};
use crate::error::{Error, Result};
use crate::nets::translate;

const SAMPLE_STREAM: u64 = 4;

/// Manifests and loaded splits for one experiment.
#[derive(Debug, Clone)]
pub struct RunData {
    pub manifests: Vec<DatasetManifest>,
    pub train: CombinedDataset,
    pub test: CombinedDataset,
}

/// Load every manifest a config names and check it against its entry.
pub fn load_manifests(config: &ExperimentConfig) -> Result<Vec<DatasetManifest>> {
    config
        .datasets
        .iter()
        .map(|entry| {
            let m = DatasetManifest::load(&entry.manifest)?;
            if m.dataset_name != entry.name || m.sensor_family != entry.sensor_family {
                return Err(Error::Manifest(format!(
                    "{} describes {} ({}) but the config expects {} ({})",
                    entry.manifest.display(),
                    m.dataset_name,
                    m.sensor_family,
                    entry.name,
                    entry.sensor_family
                )));
            }
            m.require_both_splits()?;
            m.check_files()?;
            Ok(m)
        })
        .collect()
}

pub fn load_run_data(config: &ExperimentConfig) -> Result<RunData> {
    let registry = config.registry()?;
    let manifests = load_manifests(config)?;
    let with = |split: Split| -> Vec<(&DatasetManifest, Split)> { manifests.iter().map(|m| (m, split)).collect() };
    let train = combine(&with(Split::Train), &registry, config.image_size)?;
    let test = combine(&with(Split::Test), &registry, config.image_size)?;
    Ok(RunData {
        manifests,
        train,
        test,
    })
}

/// One row per pair: visible | real thermal | generated thermal.
pub fn sample_grid(trainer: &Trainer, pairs: &[&ImagePair]) -> Result<ImageArray> {
    let first = pairs.first().ok_or_else(|| Error::Shape("no pairs to sample".into()))?;
    let config = trainer.config();
    let (c, size, _) = first.visible.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, SAMPLE_STREAM));
    let visible: Vec<&ImageArray> = pairs.iter().map(|p| &p.visible).collect();
    let labels: Vec<usize> = pairs.iter().map(|p| p.label).collect();
    let generated = translate(
        &trainer.state.generator,
        config.mode,
        trainer.registry().len(),
        &visible,
        &labels,
        config.eval_label,
        &mut rng,
        trainer.dtype(),
        trainer.device(),
    )?;
    let mut grid = Array3::<f32>::zeros((c, size * pairs.len(), size * 3));
    for (row, (pair, fake)) in pairs.iter().zip(&generated).enumerate() {
        let y = row * size;
        for (col, img) in [&pair.visible, &pair.thermal, fake].into_iter().enumerate() {
            grid.slice_mut(s![.., y..y + size, col * size..(col + 1) * size]).assign(img);
        }
    }
    Ok(grid)
}

fn epoch_file(dir: &Path, epoch: usize, ext: &str) -> PathBuf {
    dir.join(format!("epoch_{epoch:05}.{ext}"))
}

/// Train an experiment to completion and return its run directory.
///
/// The run directory receives `config.lock`, `metrics.log`, periodic
/// checkpoints under `checkpoints/` (plus `final.safetensors`) and sample
/// grids under `samples/`. With `resume`, training continues from the given
/// checkpoint, which must have been written under the same config.
pub fn train(config: &ExperimentConfig, resume: Option<&Path>) -> Result<PathBuf> {
    config.validate()?;
    let mut trainer = match resume {
        Some(path) => Trainer::from_checkpoint(config, &Checkpoint::load(path)?, path)?,
        None => Trainer::new(config)?,
    };
    let data = load_run_data(config)?;

    let run_dir = config.run_dir();
    let ckpt_dir = run_dir.join("checkpoints");
    let sample_dir = run_dir.join("samples");
    for d in [&ckpt_dir, &sample_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    config.save(&run_dir.join("config.lock"))?;
    let log_path = run_dir.join("metrics.log");
    let mut log = match resume {
        Some(_) => MetricsLog::resume(&log_path, trainer.state.step)?,
        None => MetricsLog::create(&log_path)?,
    };

    let stream = batch_iterator(&data.train, config.batch_size, config.seed, true)?;
    let samples: Vec<&ImagePair> = data.test.pairs.iter().take(config.sample_count).collect();
    log::info!(
        "{}: {} train pairs, {} batches per epoch, starting at epoch {} step {}",
        config.name,
        data.train.len(),
        stream.batches_per_epoch(),
        trainer.state.epoch,
        trainer.state.step
    );

    while trainer.state.epoch < config.epochs {
        let (report, finished) = trainer.advance(&stream)?;
        log.record(&report)?;
        if !finished {
            continue;
        }
        let done = trainer.state.epoch;
        log::info!(
            "epoch {done}/{}: g_total {:.4} (l1 {:.4}), d_total {:.4}",
            config.epochs,
            report.g.total,
            report.g.l1,
            report.d.total
        );
        log.flush()?;
        if !samples.is_empty() && (done % config.sample_every_epochs == 0 || done == config.epochs) {
            image::save_png(&sample_grid(&trainer, &samples)?, &epoch_file(&sample_dir, done, "png"))?;
        }
        if done % config.checkpoint_every_epochs == 0 {
            trainer.checkpoint()?.save(&epoch_file(&ckpt_dir, done, "safetensors"))?;
        }
    }
    log.flush()?;
    trainer.checkpoint()?.save(&ckpt_dir.join("final.safetensors"))?;
    Ok(run_dir)
}
