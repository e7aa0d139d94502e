//! Write a small paired dataset for each synthetic visible-to-thermal rule
//! and check the rule holds on the files read back.
//!
//! Run with `cargo run --example synth_dataset`.

use favtgan::data::{load_dataset, synthesize_dataset, Split, SynthOptions, SynthRule};
use favtgan::labels::SensorFamily;

fn main() -> favtgan::Result<()> {
    let root = std::env::temp_dir().join("favtgan_synth_dataset");
    for (i, rule) in [SynthRule::ChannelInversion, SynthRule::BlurPlusBias, SynthRule::IntensityRemap]
        .into_iter()
        .enumerate()
    {
        let mut opts = SynthOptions::new(16, 32, i as u64, rule);
        opts.dataset_name = rule.as_str().into();
        opts.sensor_family = SensorFamily::Synthetic;
        let dir = root.join(rule.as_str());
        let manifest = synthesize_dataset(&opts, &dir)?;
        let test = load_dataset(&manifest, Split::Test, 32)?;
        // pixels are in [-1, 1]; inversion maps v to -v exactly
        let max_inversion_error = test
            .iter()
            .flat_map(|p| p.visible.iter().zip(p.thermal.iter()))
            .map(|(v, t)| (v + t).abs())
            .fold(0.0f32, f32::max);
        println!(
            "{:<18} train {:>2}  test {:>2}  |visible + thermal| max {:.3}  -> {}",
            rule.as_str(),
            manifest.split_len(Split::Train),
            manifest.split_len(Split::Test),
            max_inversion_error,
            dir.join("manifest.toml").display()
        );
    }
    Ok(())
}
