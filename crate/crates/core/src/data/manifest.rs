//! Explicit paired-file listings, one per dataset.
//!
//! ```toml
//! dataset_name = "Eurecom"
//! sensor_family = "microbolometer"
//!
//! [[pairs]]
//! pair_id = "s01_expr_0001"
//! visible_path = "visible/s01_expr_0001.png"
//! thermal_path = "thermal/s01_expr_0001.png"
//! split = "train"
//! ```
//!
//! Relative paths resolve against the manifest's own directory.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{SensorFamily, SensorSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Validation(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    pub pair_id: String,
    pub visible_path: PathBuf,
    pub thermal_path: PathBuf,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub dataset_name: String,
    pub sensor_family: SensorFamily,
    #[serde(default)]
    pub pairs: Vec<PairRecord>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl SensorSource for DatasetManifest {
    fn dataset_name(&self) -> &str {
        &self.dataset_name
    }
    fn sensor_family(&self) -> SensorFamily {
        self.sensor_family
    }
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: DatasetManifest = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Unique pair ids and a non-empty dataset name.
    pub fn validate(&self) -> Result<()> {
        if self.dataset_name.trim().is_empty() {
            return Err(Error::Manifest("dataset_name must not be empty".into()));
        }
        let mut seen = HashSet::new();
        for p in &self.pairs {
            if !seen.insert(p.pair_id.as_str()) {
                return Err(Error::Manifest(format!(
                    "{}: duplicate pair_id `{}`",
                    self.dataset_name, p.pair_id
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &PairRecord> {
        self.pairs.iter().filter(move |p| p.split == split)
    }

    pub fn split_len(&self, split: Split) -> usize {
        self.split(split).count()
    }

    /// Every referenced file must exist.
    pub fn check_files(&self) -> Result<()> {
        for p in &self.pairs {
            for path in [&p.visible_path, &p.thermal_path] {
                let full = self.resolve(path);
                if !full.is_file() {
                    return Err(Error::Manifest(format!(
                        "{}: pair `{}` references missing file {}",
                        self.dataset_name,
                        p.pair_id,
                        full.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Training experiments need both splits populated.
    pub fn require_both_splits(&self) -> Result<()> {
        for split in [Split::Train, Split::Test] {
            if self.split_len(split) == 0 {
                return Err(Error::Manifest(format!(
                    "{}: {split} split is empty",
                    self.dataset_name
                )));
            }
        }
        Ok(())
    }
}
