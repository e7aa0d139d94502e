use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::LossReport;
use crate::error::{Error, Result};

pub const METRICS_HEADER: &str =
    "step\tepoch\tlr\tg_adv\tg_aux\tg_l1\tg_total\td_adv_real\td_adv_fake\td_aux_real\td_aux_fake\td_total";

/// Append-only, tab-delimited per-step loss log.
pub struct MetricsLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl MetricsLog {
    /// Start a fresh log, replacing any existing file.
    pub fn create(path: &Path) -> Result<Self> {
        let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(f, "{METRICS_HEADER}").map_err(|e| Error::io(path, e))?;
        Ok(MetricsLog {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
        })
    }

    /// Reopen a log for a resumed run, dropping rows past `step`.
    pub fn resume(path: &Path, step: u64) -> Result<Self> {
        if !path.exists() {
            return Self::create(path);
        }
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut kept = String::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let keep = i == 0
                || line
                    .split('\t')
                    .next()
                    .and_then(|s| s.parse::<u64>().ok())
                    .is_some_and(|s| s <= step);
            if keep {
                kept.push_str(&line);
                kept.push('\n');
            }
        }
        std::fs::write(path, kept).map_err(|e| Error::io(path, e))?;
        let f = OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(MetricsLog {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
        })
    }

    pub fn record(&mut self, r: &LossReport) -> Result<()> {
        let values = [
            r.lr,
            r.g.adv,
            r.g.aux,
            r.g.l1,
            r.g.total,
            r.d.adv_real,
            r.d.adv_fake,
            r.d.aux_real,
            r.d.aux_fake,
            r.d.total,
        ];
        let mut line = format!("{}\t{}", r.step, r.epoch);
        for v in values {
            line.push_str(&format!("\t{v:.9e}"));
        }
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}
