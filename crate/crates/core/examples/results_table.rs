//! Render evaluation records as the grouped results table and as CSV,
//! filling in relative change against each dataset's baseline run.
//!
//! Run with `cargo run --example results_table -- [records.csv]`.

use std::path::PathBuf;

use favtgan::eval::{emit_report, read_records, resolve_baselines, ReportFormat};

fn main() -> favtgan::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/reference_records.csv")
    });
    let mut records = read_records(&path)?;
    resolve_baselines(&mut records)?;
    print!("{}", emit_report(&records, ReportFormat::TextTable)?);
    println!();
    print!("{}", emit_report(&records, ReportFormat::Csv)?);
    Ok(())
}
