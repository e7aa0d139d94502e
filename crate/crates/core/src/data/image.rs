//! 8-bit image <-> normalized `[-1, 1]` CHW arrays.

use std::path::Path;

use image::imageops::FilterType;
use image::RgbImage;
use ndarray::Array3;

use crate::error::{Error, Result};

/// Channels-first image with values in `[-1, 1]`.
pub type ImageArray = Array3<f32>;

#[inline]
pub fn normalize_u8(v: u8) -> f32 {
    v as f32 / 127.5 - 1.0
}

#[inline]
pub fn denormalize(x: f32) -> u8 {
    ((x + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8
}

pub fn rgb_to_array(img: &RgbImage) -> ImageArray {
    let (w, h) = img.dimensions();
    let (w, h) = (w as usize, h as usize);
    let mut out = Array3::<f32>::zeros((3, h, w));
    for (x, y, px) in img.enumerate_pixels() {
        for c in 0..3 {
            out[[c, y as usize, x as usize]] = normalize_u8(px.0[c]);
        }
    }
    out
}

pub fn array_to_rgb(arr: &ImageArray) -> RgbImage {
    let (c, h, w) = arr.dim();
    assert_eq!(c, 3, "expected a 3-channel array");
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let (x, y) = (x as usize, y as usize);
        image::Rgb([
            denormalize(arr[[0, y, x]]),
            denormalize(arr[[1, y, x]]),
            denormalize(arr[[2, y, x]]),
        ])
    })
}

/// Map a normalized array to the `[0, 255]` metric domain (rounded to 8-bit).
pub fn to_8bit_f64(arr: &ImageArray) -> Array3<f64> {
    arr.mapv(|x| denormalize(x) as f64)
}

/// Decode any supported format to 3-channel RGB. Grayscale is replicated.
pub fn load_rgb(path: &Path, pair_id: &str) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| Error::Decode {
        pair_id: pair_id.to_string(),
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(img.to_rgb8())
}

/// Bicubic (Catmull-Rom) resize to `size`×`size`; no-op when already square at `size`.
pub fn resize_square(img: RgbImage, size: usize) -> RgbImage {
    let s = size as u32;
    if img.dimensions() == (s, s) {
        img
    } else {
        image::imageops::resize(&img, s, s, FilterType::CatmullRom)
    }
}

pub fn save_png(arr: &ImageArray, path: &Path) -> Result<()> {
    array_to_rgb(arr).save(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_8bit_value_round_trips() {
        for v in 0..=255u8 {
            let x = normalize_u8(v);
            assert!((-1.0..=1.0).contains(&x));
            assert_eq!(denormalize(x), v);
        }
    }

    #[test]
    fn image_round_trip() {
        let img = RgbImage::from_fn(5, 3, |x, y| image::Rgb([x as u8 * 40, y as u8 * 90, 255]));
        let arr = rgb_to_array(&img);
        assert_eq!(arr.dim(), (3, 3, 5));
        assert_eq!(array_to_rgb(&arr), img);
    }

    #[test]
    fn resize_is_identity_at_target() {
        let img = RgbImage::from_pixel(8, 8, image::Rgb([1, 2, 3]));
        assert_eq!(resize_square(img.clone(), 8), img);
        assert_eq!(resize_square(img, 4).dimensions(), (4, 4));
    }
}
