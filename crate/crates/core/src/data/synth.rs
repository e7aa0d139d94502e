//! Synthetic paired datasets with a known visible→thermal rule.
//!
//! Visible images are smooth gradients overlaid with soft ellipses; the
//! thermal half is a fixed pixelwise function of the visible half, so small
//! networks can memorize the mapping in a few hundred steps.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::manifest::{DatasetManifest, PairRecord, Split};
use crate::error::{Error, Result};
use crate::labels::SensorFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthRule {
    /// `t = 255 - v` per channel.
    ChannelInversion,
    /// 3×3 binomial blur plus a +24 bias, saturating.
    BlurPlusBias,
    /// Square-root curve on BT.601 luma, replicated to three channels.
    IntensityRemap,
}

impl SynthRule {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthRule::ChannelInversion => "channel_inversion",
            SynthRule::BlurPlusBias => "blur_plus_bias",
            SynthRule::IntensityRemap => "intensity_remap",
        }
    }

    pub fn apply(self, visible: &RgbImage) -> RgbImage {
        match self {
            SynthRule::ChannelInversion => {
                RgbImage::from_fn(visible.width(), visible.height(), |x, y| {
                    let p = visible.get_pixel(x, y).0;
                    Rgb([255 - p[0], 255 - p[1], 255 - p[2]])
                })
            }
            SynthRule::BlurPlusBias => blur_plus_bias(visible),
            SynthRule::IntensityRemap => {
                let lut: Vec<u8> = (0..=255u32)
                    .map(|v| (255.0 * (v as f64 / 255.0).sqrt()).round() as u8)
                    .collect();
                RgbImage::from_fn(visible.width(), visible.height(), |x, y| {
                    let p = visible.get_pixel(x, y).0;
                    let luma = (77 * p[0] as u32 + 150 * p[1] as u32 + 29 * p[2] as u32 + 128) >> 8;
                    let t = lut[luma.min(255) as usize];
                    Rgb([t, t, t])
                })
            }
        }
    }
}

impl fmt::Display for SynthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SynthRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            SynthRule::ChannelInversion,
            SynthRule::BlurPlusBias,
            SynthRule::IntensityRemap,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| Error::Validation(format!("unknown synthesis rule `{s}`")))
    }
}

fn blur_plus_bias(img: &RgbImage) -> RgbImage {
    const K: [u32; 3] = [1, 2, 1];
    let (w, h) = (img.width() as i64, img.height() as i64);
    let at = |x: i64, y: i64, c: usize| img.get_pixel(x.clamp(0, w - 1) as u32, y.clamp(0, h - 1) as u32).0[c] as u32;
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = 0u32;
            for (dy, ky) in K.iter().enumerate() {
                for (dx, kx) in K.iter().enumerate() {
                    acc += ky * kx * at(x as i64 + dx as i64 - 1, y as i64 + dy as i64 - 1, c);
                }
            }
            *o = ((acc + 8) / 16 + 24).min(255) as u8;
        }
        Rgb(out)
    })
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub n_pairs: usize,
    pub image_size: usize,
    pub seed: u64,
    pub rule: SynthRule,
    /// Fraction of pairs (rounded) placed in the test split, taken from the end.
    pub test_fraction: f64,
    pub dataset_name: String,
    pub sensor_family: SensorFamily,
}

impl SynthOptions {
    pub fn new(n_pairs: usize, image_size: usize, seed: u64, rule: SynthRule) -> Self {
        SynthOptions {
            n_pairs,
            image_size,
            seed,
            rule,
            test_fraction: 0.25,
            dataset_name: "synthetic".into(),
            sensor_family: SensorFamily::Synthetic,
        }
    }

    pub fn n_test(&self) -> usize {
        ((self.n_pairs as f64) * self.test_fraction).round() as usize
    }
}

/// A smooth random scene: two-colour gradient plus soft ellipses.
pub fn synth_visible(rng: &mut impl Rng, size: usize) -> RgbImage {
    let c0: [f64; 3] = std::array::from_fn(|_| rng.random_range(20.0..235.0));
    let c1: [f64; 3] = std::array::from_fn(|_| rng.random_range(20.0..235.0));
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let n_blobs = rng.random_range(2..=5);
    let blobs: Vec<([f64; 2], [f64; 2], [f64; 3])> = (0..n_blobs)
        .map(|_| {
            let centre = [rng.random_range(0.15..0.85), rng.random_range(0.15..0.85)];
            let radii = [rng.random_range(0.08..0.3), rng.random_range(0.08..0.3)];
            let colour = std::array::from_fn(|_| rng.random_range(0.0..255.0));
            (centre, radii, colour)
        })
        .collect();
    let (dx, dy) = (angle.cos(), angle.sin());
    let s = size as f64;
    let mut img = RgbImage::new(size as u32, size as u32);
    for (x, y, px) in img.enumerate_pixels_mut() {
        let u = (x as f64 + 0.5) / s;
        let v = (y as f64 + 0.5) / s;
        let t = ((u - 0.5) * dx + (v - 0.5) * dy + 0.71) / 1.42;
        let mut rgb: [f64; 3] = std::array::from_fn(|c| c0[c] * (1.0 - t) + c1[c] * t);
        for (centre, radii, colour) in &blobs {
            let r2 = ((u - centre[0]) / radii[0]).powi(2) + ((v - centre[1]) / radii[1]).powi(2);
            let alpha = 1.0 / (1.0 + (8.0 * (r2 - 1.0)).exp());
            for c in 0..3 {
                rgb[c] = rgb[c] * (1.0 - alpha) + colour[c] * alpha;
            }
        }
        *px = Rgb(rgb.map(|v| v.round().clamp(0.0, 255.0) as u8));
    }
    img
}

/// Write `visible/`, `thermal/` and `manifest.toml` under `out_dir`.
pub fn synthesize_dataset(opts: &SynthOptions, out_dir: &Path) -> Result<DatasetManifest> {
    if opts.n_pairs == 0 {
        return Err(Error::Validation("n_pairs must be positive".into()));
    }
    if opts.image_size == 0 {
        return Err(Error::Validation("image_size must be positive".into()));
    }
    if !(0.0..=1.0).contains(&opts.test_fraction) {
        return Err(Error::Validation("test_fraction must lie in [0, 1]".into()));
    }
    for dir in [out_dir.to_path_buf(), out_dir.join("visible"), out_dir.join("thermal")] {
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let n_train = opts.n_pairs - opts.n_test();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pairs = Vec::with_capacity(opts.n_pairs);
    for i in 0..opts.n_pairs {
        let pair_id = format!("pair_{i:05}");
        let visible = synth_visible(&mut rng, opts.image_size);
        let thermal = opts.rule.apply(&visible);
        let visible_path = PathBuf::from("visible").join(format!("{pair_id}.png"));
        let thermal_path = PathBuf::from("thermal").join(format!("{pair_id}.png"));
        visible.save(out_dir.join(&visible_path))?;
        thermal.save(out_dir.join(&thermal_path))?;
        pairs.push(PairRecord {
            pair_id,
            visible_path,
            thermal_path,
            split: if i < n_train { Split::Train } else { Split::Test },
        });
    }
    let manifest = DatasetManifest {
        dataset_name: opts.dataset_name.clone(),
        sensor_family: opts.sensor_family,
        pairs,
        base_dir: out_dir.to_path_buf(),
    };
    manifest.save(&out_dir.join("manifest.toml"))?;
    Ok(manifest)
}
