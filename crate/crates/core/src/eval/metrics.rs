//! SSIM and PSNR on 8-bit-range images shaped `[C, H, W]`.

use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::config::SsimChannelPolicy;
use crate::error::{Error, Result};

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
pub const DYNAMIC_RANGE: f64 = 255.0;

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - half;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

fn check_shapes(x: &Array3<f64>, y: &Array3<f64>) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::Shape(format!("metric operands differ: {:?} vs {:?}", x.dim(), y.dim())));
    }
    Ok(())
}

/// Separable "valid" filtering with the Gaussian window.
fn filter_valid(img: &ArrayView2<f64>, taps: &[f64; SSIM_WINDOW]) -> Array2<f64> {
    let (h, w) = img.dim();
    let (oh, ow) = (h + 1 - SSIM_WINDOW, w + 1 - SSIM_WINDOW);
    let mut rows = Array2::<f64>::zeros((h, ow));
    for r in 0..h {
        for c in 0..ow {
            rows[[r, c]] = taps.iter().enumerate().map(|(k, t)| t * img[[r, c + k]]).sum();
        }
    }
    let mut out = Array2::<f64>::zeros((oh, ow));
    for r in 0..oh {
        for c in 0..ow {
            out[[r, c]] = taps.iter().enumerate().map(|(k, t)| t * rows[[r + k, c]]).sum();
        }
    }
    out
}

/// Mean SSIM of one channel over every fully contained window.
pub fn ssim_plane(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<f64> {
    let (h, w) = x.dim();
    if y.dim() != (h, w) {
        return Err(Error::Shape(format!("metric operands differ: {:?} vs {:?}", x.dim(), y.dim())));
    }
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::Shape(format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}")));
    }
    let taps = gaussian_taps();
    let c1 = (SSIM_K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * DYNAMIC_RANGE).powi(2);
    let mu_x = filter_valid(x, &taps);
    let mu_y = filter_valid(y, &taps);
    let xx = filter_valid(&(x * x).view(), &taps);
    let yy = filter_valid(&(y * y).view(), &taps);
    let xy = filter_valid(&(x * y).view(), &taps);
    let mut sum = 0.0;
    for ((((&mx, &my), &exx), &eyy), &exy) in mu_x.iter().zip(&mu_y).zip(&xx).zip(&yy).zip(&xy) {
        let vx = exx - mx * mx;
        let vy = eyy - my * my;
        let cov = exy - mx * my;
        sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(sum / mu_x.len() as f64)
}

/// BT.601 luma of a 3-channel image.
pub fn luminance(img: &Array3<f64>) -> Array2<f64> {
    let c = img.index_axis(Axis(0), 0).to_owned() * 0.299;
    c + &(img.index_axis(Axis(0), 1).to_owned() * 0.587) + &(img.index_axis(Axis(0), 2).to_owned() * 0.114)
}

/// SSIM with the per-channel average policy.
pub fn ssim(x: &Array3<f64>, y: &Array3<f64>) -> Result<f64> {
    ssim_with_policy(x, y, SsimChannelPolicy::Average)
}

pub fn ssim_with_policy(x: &Array3<f64>, y: &Array3<f64>, policy: SsimChannelPolicy) -> Result<f64> {
    check_shapes(x, y)?;
    match policy {
        SsimChannelPolicy::Average => {
            let n = x.dim().0;
            if n == 0 {
                return Err(Error::Shape("image has no channels".into()));
            }
            let mut total = 0.0;
            for (cx, cy) in x.outer_iter().zip(y.outer_iter()) {
                total += ssim_plane(&cx, &cy)?;
            }
            Ok(total / n as f64)
        }
        SsimChannelPolicy::Luminance => {
            if x.dim().0 != 3 {
                return Err(Error::Shape(format!("luminance SSIM needs 3 channels, got {}", x.dim().0)));
            }
            ssim_plane(&luminance(x).view(), &luminance(y).view())
        }
    }
}

/// `10·log10(255² / MSE)` over all channels; `+inf` for identical images.
pub fn psnr(x: &Array3<f64>, y: &Array3<f64>) -> Result<f64> {
    check_shapes(x, y)?;
    if x.is_empty() {
        return Err(Error::Shape("empty image".into()));
    }
    let mse = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (DYNAMIC_RANGE * DYNAMIC_RANGE / mse).log10())
}
