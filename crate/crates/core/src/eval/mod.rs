//! Image-quality metrics, evaluation runs and Table-style reports.
//!
//! Metrics are computed on images mapped back to the 8-bit range with a
//! dynamic range of 255.

mod evaluate;
pub mod metrics;
mod report;

pub use self::evaluate::{
    check_registry, evaluate, mean_scores, score_pairs, EvalOptions, Evaluation, PairScore, Source,
};
pub use self::metrics::{psnr, ssim, ssim_with_policy};
pub use self::report::{
    apply_baseline, discrepancy_notes, emit_report, group_by_dataset, percent_change, read_records,
    relative_change, resolve_baselines, write_records, EvalReport, ReportFormat, FORMULA_FOOTNOTE,
};
