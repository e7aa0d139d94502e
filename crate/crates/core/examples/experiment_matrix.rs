//! Load every experiment config shipped in `configs/` and summarize how each
//! one wires its datasets, labels and networks.
//!
//! Run with `cargo run --example experiment_matrix`.

use std::path::Path;

use favtgan::config::load_config;

fn main() -> favtgan::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .expect("configs directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    println!(
        "{:<20} {:<15} {:<28} {:>4} {:>4} {:>4} {:>6}",
        "config", "mode", "datasets", "G+", "D+", "aux", "epochs"
    );
    for path in paths {
        let cfg = load_config(&path)?;
        let n = cfg.n_labels();
        let names: Vec<String> = cfg
            .registry()?
            .iter()
            .map(|l| format!("{}={}", l.id, l.dataset_name))
            .collect();
        println!(
            "{:<20} {:<15} {:<28} {:>4} {:>4} {:>4} {:>6}",
            cfg.name,
            cfg.mode.as_str(),
            names.join(","),
            cfg.mode.generator_channels(n),
            cfg.mode.discriminator_channels(n),
            if cfg.mode.uses_aux() { n } else { 0 },
            cfg.epochs
        );
    }
    Ok(())
}
