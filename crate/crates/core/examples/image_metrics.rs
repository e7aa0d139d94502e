//! SSIM and PSNR of a synthetic scene against progressively noisier copies,
//! with both SSIM channel policies.
//!
//! Run with `cargo run --example image_metrics`.

use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use favtgan::config::SsimChannelPolicy;
use favtgan::data::image::{rgb_to_array, to_8bit_f64};
use favtgan::data::synth::synth_visible;
use favtgan::eval::{psnr, ssim_with_policy};

fn main() -> favtgan::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let clean = to_8bit_f64(&rgb_to_array(&synth_visible(&mut rng, 128)));
    println!("{:>6} {:>10} {:>10} {:>10}", "noise", "ssim avg", "ssim luma", "psnr dB");
    for amp in [0.0, 2.0, 8.0, 32.0, 64.0] {
        let noisy: Array3<f64> = clean.mapv(|v| (v + amp * rng.random_range(-1.0..=1.0)).round().clamp(0.0, 255.0));
        println!(
            "{amp:>6} {:>10.4} {:>10.4} {:>10.3}",
            ssim_with_policy(&clean, &noisy, SsimChannelPolicy::Average)?,
            ssim_with_policy(&clean, &noisy, SsimChannelPolicy::Luminance)?,
            psnr(&clean, &noisy)?
        );
    }
    Ok(())
}
