//! Thermal sensor labels and the per-experiment label registry.
//!
//! Every dataset in an experiment is tagged with the sensor that captured
//! its thermal half. Ids are contiguous from 0 in the order datasets are
//! listed, so a two-dataset experiment always uses `{0, 1}`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical thermal sensor technology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorFamily {
    /// Uncooled VOx microbolometer (FLIR cameras: Eurecom, ADAS).
    Microbolometer,
    /// BST ferroelectric (Raytheon cameras: Iris, OSU).
    BstFerroelectric,
    /// Generated data with no physical sensor.
    Synthetic,
}

impl SensorFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorFamily::Microbolometer => "microbolometer",
            SensorFamily::BstFerroelectric => "bst_ferroelectric",
            SensorFamily::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for SensorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "microbolometer" => Ok(SensorFamily::Microbolometer),
            "bst_ferroelectric" => Ok(SensorFamily::BstFerroelectric),
            "synthetic" => Ok(SensorFamily::Synthetic),
            other => Err(Error::Validation(format!("unknown sensor family `{other}`"))),
        }
    }
}

/// A sensor class id together with the dataset it was assigned to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorLabel {
    pub id: usize,
    pub dataset_name: String,
    pub sensor_family: SensorFamily,
}

/// Anything that names a dataset and its sensor.
pub trait SensorSource {
    fn dataset_name(&self) -> &str;
    fn sensor_family(&self) -> SensorFamily;
}

/// Assign label ids by list order, starting at 0.
pub fn build_label_registry<S: SensorSource>(sources: &[S]) -> Result<Vec<SensorLabel>> {
    if sources.is_empty() {
        return Err(Error::Registry("at least one dataset is required".into()));
    }
    let mut seen = HashSet::new();
    sources
        .iter()
        .enumerate()
        .map(|(id, s)| {
            if !seen.insert(s.dataset_name()) {
                return Err(Error::Registry(format!(
                    "duplicate dataset name `{}`",
                    s.dataset_name()
                )));
            }
            Ok(SensorLabel {
                id,
                dataset_name: s.dataset_name().to_string(),
                sensor_family: s.sensor_family(),
            })
        })
        .collect()
}

/// Look up the label assigned to `dataset_name`.
pub fn label_for<'a>(registry: &'a [SensorLabel], dataset_name: &str) -> Result<&'a SensorLabel> {
    registry
        .iter()
        .find(|l| l.dataset_name == dataset_name)
        .ok_or_else(|| Error::Registry(format!("dataset `{dataset_name}` is not registered")))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Src(&'static str, SensorFamily);

    impl SensorSource for Src {
        fn dataset_name(&self) -> &str {
            self.0
        }
        fn sensor_family(&self) -> SensorFamily {
            self.1
        }
    }

    #[test]
    fn faces_and_cityscapes_share_microbolometer() {
        let reg = build_label_registry(&[
            Src("Eurecom", SensorFamily::Microbolometer),
            Src("ADAS", SensorFamily::Microbolometer),
        ])
        .unwrap();
        assert_eq!(
            reg,
            vec![
                SensorLabel {
                    id: 0,
                    dataset_name: "Eurecom".into(),
                    sensor_family: SensorFamily::Microbolometer
                },
                SensorLabel {
                    id: 1,
                    dataset_name: "ADAS".into(),
                    sensor_family: SensorFamily::Microbolometer
                },
            ]
        );
    }

    #[test]
    fn iris_osu_are_ferroelectric() {
        let reg = build_label_registry(&[
            Src("Iris", SensorFamily::BstFerroelectric),
            Src("OSU", SensorFamily::BstFerroelectric),
        ])
        .unwrap();
        assert_eq!(reg.iter().map(|l| l.id).collect::<Vec<_>>(), vec![0, 1]);
        assert!(reg
            .iter()
            .all(|l| l.sensor_family == SensorFamily::BstFerroelectric));
        assert_eq!(reg[1].dataset_name, "OSU");
    }

    #[test]
    fn singleton_and_errors() {
        let reg = build_label_registry(&[Src("synthetic", SensorFamily::Synthetic)]).unwrap();
        assert_eq!(reg.len(), 1);
        assert_eq!(reg[0].id, 0);

        let empty: [Src; 0] = [];
        assert!(build_label_registry(&empty).is_err());
        let dup = build_label_registry(&[
            Src("Iris", SensorFamily::BstFerroelectric),
            Src("Iris", SensorFamily::BstFerroelectric),
        ]);
        assert!(matches!(dup, Err(Error::Registry(_))));
    }

    #[test]
    fn assignment_is_pure_in_order() {
        let srcs = [
            Src("b", SensorFamily::Synthetic),
            Src("a", SensorFamily::Synthetic),
            Src("c", SensorFamily::Synthetic),
        ];
        assert_eq!(
            build_label_registry(&srcs).unwrap(),
            build_label_registry(&srcs).unwrap()
        );
        assert_eq!(label_for(&build_label_registry(&srcs).unwrap(), "a").unwrap().id, 1);
    }
}
