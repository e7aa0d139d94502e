//! Paired visible/thermal data: manifests, loading, combination and batching.

mod batch;
pub mod image;
mod manifest;
pub mod synth;

use rayon::prelude::*;

pub use self::batch::{batch_iterator, epoch_permutation, Batch, BatchStream};
pub use self::image::ImageArray;
pub use self::manifest::{DatasetManifest, PairRecord, Split};
pub use self::synth::{synthesize_dataset, SynthOptions, SynthRule};

use crate::error::{Error, Result};
use crate::labels::{label_for, SensorLabel};

/// An aligned visible/thermal pair, both `[3, H, W]` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePair {
    pub visible: ImageArray,
    pub thermal: ImageArray,
    pub label: usize,
    pub pair_id: String,
    pub dataset: String,
}

/// Load one split of a dataset, resized to `image_size` and normalized.
///
/// Pairs come back in manifest order with label 0; [`combine`] stamps the
/// registry label.
pub fn load_dataset(manifest: &DatasetManifest, split: Split, image_size: usize) -> Result<Vec<ImagePair>> {
    let records: Vec<&PairRecord> = manifest.split(split).collect();
    if records.is_empty() {
        return Err(Error::Manifest(format!(
            "{}: requested {split} split is empty",
            manifest.dataset_name
        )));
    }
    records
        .par_iter()
        .map(|rec| load_pair(manifest, rec, image_size))
        .collect()
}

fn load_pair(manifest: &DatasetManifest, rec: &PairRecord, image_size: usize) -> Result<ImagePair> {
    let visible = image::load_rgb(&manifest.resolve(&rec.visible_path), &rec.pair_id)?;
    let thermal = image::load_rgb(&manifest.resolve(&rec.thermal_path), &rec.pair_id)?;
    if visible.dimensions() != thermal.dimensions() {
        log::warn!(
            "{}/{}: visible {:?} and thermal {:?} differ in size; resizing both",
            manifest.dataset_name,
            rec.pair_id,
            visible.dimensions(),
            thermal.dimensions()
        );
    }
    Ok(ImagePair {
        visible: image::rgb_to_array(&image::resize_square(visible, image_size)),
        thermal: image::rgb_to_array(&image::resize_square(thermal, image_size)),
        label: 0,
        pair_id: rec.pair_id.clone(),
        dataset: manifest.dataset_name.clone(),
    })
}

/// Several datasets concatenated, each pair stamped with its sensor label.
#[derive(Debug, Clone)]
pub struct CombinedDataset {
    pub pairs: Vec<ImagePair>,
    pub registry: Vec<SensorLabel>,
    pub split: Split,
}

impl CombinedDataset {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs belonging to one constituent dataset, in order.
    pub fn for_dataset<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ImagePair> + 'a {
        self.pairs.iter().filter(move |p| p.dataset == name)
    }
}

/// Concatenate datasets in list order, then manifest order.
pub fn combine(
    datasets: &[(&DatasetManifest, Split)],
    registry: &[SensorLabel],
    image_size: usize,
) -> Result<CombinedDataset> {
    let split = match datasets.first() {
        Some((_, s)) => *s,
        None => return Err(Error::Manifest("nothing to combine".into())),
    };
    if let Some((m, s)) = datasets.iter().find(|(_, s)| *s != split) {
        return Err(Error::Manifest(format!(
            "{}: mixed splits in one combination ({split} vs {s})",
            m.dataset_name
        )));
    }
    let mut pairs = Vec::new();
    for (manifest, split) in datasets {
        let label = label_for(registry, &manifest.dataset_name)?;
        if label.sensor_family != manifest.sensor_family {
            return Err(Error::Registry(format!(
                "dataset `{}` is registered as {} but its manifest says {}",
                manifest.dataset_name, label.sensor_family, manifest.sensor_family
            )));
        }
        let mut loaded = load_dataset(manifest, *split, image_size)?;
        for p in &mut loaded {
            p.label = label.id;
        }
        pairs.extend(loaded);
    }
    Ok(CombinedDataset {
        pairs,
        registry: registry.to_vec(),
        split,
    })
}
