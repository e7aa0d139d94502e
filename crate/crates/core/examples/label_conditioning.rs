//! Show which condition channels the generator and discriminator receive in
//! each conditioning mode, for a two-sensor experiment.
//!
//! Run with `cargo run --example label_conditioning`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use favtgan::config::ConditioningMode;
use favtgan::nets::{make_condition, ConditionTensor, Role};

fn describe(c: &ConditionTensor) -> String {
    let noise = c.n_channels() > c.label.map_or(0, |_| 2);
    match (c.label, noise) {
        (None, false) => "nothing".into(),
        (Some(l), false) => format!("one-hot label {l}"),
        (Some(l), true) => format!("one-hot label {l} + N(0,1) noise"),
        (None, true) => "noise only".into(),
    }
}

fn main() -> favtgan::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let true_label = 1;
    println!("true sensor label {true_label} of 2\n");
    for mode in ConditioningMode::ALL {
        println!("{mode}:");
        for (role, name) in [(Role::Generator, "G"), (Role::Discriminator, "D")] {
            let draws: Vec<String> = (0..4)
                .map(|_| make_condition(true_label, 2, mode, role, 8, &mut rng).map(|c| describe(&c)))
                .collect::<favtgan::Result<_>>()?;
            let k = make_condition(true_label, 2, mode, role, 8, &mut rng)?.n_channels();
            println!("  {name} +{k} channels, 4 draws: {}", draws.join(" | "));
        }
        println!(
            "  aux classifier: {}",
            if mode.uses_aux() { "yes, 2 classes" } else { "no" }
        );
    }
    Ok(())
}
