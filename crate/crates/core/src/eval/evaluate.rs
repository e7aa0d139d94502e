use std::path::Path;

use candle_core::Device;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::{psnr, ssim_with_policy};
use super::report::EvalReport;
use crate::config::{EvalLabel, ExperimentConfig, SsimChannelPolicy};
use crate::data::image::to_8bit_f64;
use crate::data::{load_dataset, DatasetManifest, ImageArray, ImagePair, Split};
use crate::error::{Error, Result};
use crate::labels::SensorLabel;
use crate::nets::{translate, Generator};
use crate::train::{build_networks, derive_seed, load_params, Checkpoint};

const EVAL_STREAM: u64 = 5;

/// Where the generated thermal images come from.
pub enum Source<'a> {
    /// The generator stored in a checkpoint.
    Checkpoint(&'a Path),
    /// The real thermal images themselves; an upper bound for the metrics.
    Oracle,
}

/// Overrides for the settings recorded in the run's config.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub eval_label: Option<EvalLabel>,
    pub ssim_channel_policy: Option<SsimChannelPolicy>,
    /// Image size for oracle evaluation (checkpoints use their own).
    pub image_size: Option<usize>,
    pub run_id: Option<String>,
    pub experiment: Option<String>,
}

/// Per-image metrics of one evaluated pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub pair_id: String,
    pub ssim: f64,
    pub psnr: f64,
}

pub struct Evaluation {
    pub reports: Vec<EvalReport>,
    pub scores: Vec<Vec<PairScore>>,
}

struct LoadedRun {
    config: ExperimentConfig,
    registry: Vec<SensorLabel>,
    generator: Generator,
}

fn load_run(path: &Path) -> Result<LoadedRun> {
    let ckpt = Checkpoint::load(path)?;
    let (generator, _) = build_networks(&ckpt.config, &Device::Cpu)?;
    load_params(generator.params(), &ckpt.g_params)?;
    Ok(LoadedRun {
        config: ckpt.config,
        registry: ckpt.registry,
        generator,
    })
}

/// Check every manifest names a dataset of the run's registry with the same
/// sensor family; returns the label of each.
pub fn check_registry(registry: &[SensorLabel], manifests: &[DatasetManifest]) -> Result<Vec<usize>> {
    let known = || {
        registry
            .iter()
            .map(|l| format!("{}={} ({})", l.id, l.dataset_name, l.sensor_family))
            .collect::<Vec<_>>()
            .join(", ")
    };
    if manifests.len() > registry.len() {
        return Err(Error::Registry(format!(
            "run was trained on {} labels [{}] but {} datasets were given",
            registry.len(),
            known(),
            manifests.len()
        )));
    }
    manifests
        .iter()
        .map(|m| match registry.iter().find(|l| l.dataset_name == m.dataset_name) {
            Some(l) if l.sensor_family == m.sensor_family => Ok(l.id),
            Some(l) => Err(Error::Registry(format!(
                "{} is {} in the manifest but {} in the run",
                m.dataset_name, m.sensor_family, l.sensor_family
            ))),
            None => Err(Error::Registry(format!(
                "{} is not one of the run's labels [{}]",
                m.dataset_name,
                known()
            ))),
        })
        .collect()
}

/// Arithmetic mean of SSIM and of finite PSNR values.
pub fn mean_scores(scores: &[PairScore], dataset: &str) -> (f64, f64) {
    let n = scores.len() as f64;
    let mean_ssim = scores.iter().map(|s| s.ssim).sum::<f64>() / n;
    let finite: Vec<f64> = scores.iter().map(|s| s.psnr).filter(|p| p.is_finite()).collect();
    if finite.len() < scores.len() {
        log::warn!(
            "{dataset}: {} of {} pairs are pixel-identical (infinite PSNR) and are left out of the PSNR mean",
            scores.len() - finite.len(),
            scores.len()
        );
    }
    let mean_psnr = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    (mean_ssim, mean_psnr)
}

/// Score generated images against the real thermal images in 8-bit range.
pub fn score_pairs(pairs: &[ImagePair], generated: &[ImageArray], policy: SsimChannelPolicy) -> Result<Vec<PairScore>> {
    pairs
        .par_iter()
        .zip(generated)
        .map(|(pair, fake)| {
            let real = to_8bit_f64(&pair.thermal);
            let fake = to_8bit_f64(fake);
            Ok(PairScore {
                pair_id: pair.pair_id.clone(),
                ssim: ssim_with_policy(&real, &fake, policy)?,
                psnr: psnr(&real, &fake)?,
            })
        })
        .collect()
}

/// Evaluate the test split of each manifest separately.
pub fn evaluate(source: Source, manifests: &[DatasetManifest], options: &EvalOptions) -> Result<Evaluation> {
    if manifests.is_empty() {
        return Err(Error::Validation("at least one manifest is required".into()));
    }
    let run = match source {
        Source::Checkpoint(path) => Some(load_run(path)?),
        Source::Oracle => None,
    };
    let labels = match &run {
        Some(r) => check_registry(&r.registry, manifests)?,
        None => vec![0; manifests.len()],
    };
    let image_size = match &run {
        Some(r) => r.config.image_size,
        None => options.image_size.unwrap_or(256),
    };
    let policy = options
        .ssim_channel_policy
        .or(run.as_ref().map(|r| r.config.ssim_channel_policy))
        .unwrap_or(SsimChannelPolicy::Average);
    let run_id = options.run_id.clone().unwrap_or_else(|| match &run {
        Some(r) => r.config.name.clone(),
        None => "oracle".into(),
    });
    let experiment = options.experiment.clone().unwrap_or_else(|| match &run {
        Some(r) => r.config.mode.as_str().to_string(),
        None => "oracle".into(),
    });
    let trained_on = match &run {
        Some(r) => r.registry.iter().map(|l| l.dataset_name.as_str()).collect::<Vec<_>>().join("+"),
        None => "-".into(),
    };

    let mut reports = Vec::with_capacity(manifests.len());
    let mut all_scores = Vec::with_capacity(manifests.len());
    for (manifest, &label) in manifests.iter().zip(&labels) {
        let mut pairs = load_dataset(manifest, Split::Test, image_size)?;
        pairs.iter_mut().for_each(|p| p.label = label);
        let generated = match &run {
            Some(r) => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(r.config.seed, EVAL_STREAM));
                let visible: Vec<&ImageArray> = pairs.iter().map(|p| &p.visible).collect();
                let labels: Vec<usize> = pairs.iter().map(|p| p.label).collect();
                translate(
                    &r.generator,
                    r.config.mode,
                    r.registry.len(),
                    &visible,
                    &labels,
                    options.eval_label.unwrap_or(r.config.eval_label),
                    &mut rng,
                    r.config.precision.dtype(),
                    &Device::Cpu,
                )?
            }
            None => pairs.iter().map(|p| p.thermal.clone()).collect(),
        };
        let scores = score_pairs(&pairs, &generated, policy)?;
        let (mean_ssim, mean_psnr) = mean_scores(&scores, &manifest.dataset_name);
        reports.push(EvalReport {
            run_id: run_id.clone(),
            dataset_name: manifest.dataset_name.clone(),
            trained_on: trained_on.clone(),
            experiment: experiment.clone(),
            mean_ssim,
            mean_psnr,
            n_images: scores.len(),
            baseline_run_id: None,
            ssim_pct: None,
            psnr_pct: None,
            reference_ssim_pct: None,
            reference_psnr_pct: None,
        });
        all_scores.push(scores);
    }
    Ok(Evaluation {
        reports,
        scores: all_scores,
    })
}
