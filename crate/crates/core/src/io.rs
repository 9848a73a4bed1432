//! JSON dataset, configuration and model files.
//!
//! Floats are written in shortest round-trip decimal form, so saving and
//! reloading a dataset reproduces every coordinate bit for bit.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::inference::LabelledDataset;
use crate::nelder_mead::SimplexSettings;
use crate::nuisance::{ClassModel, GammaParams, McConfig};
use crate::shape::{DataShape, Regulators};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub schema_version: u32,
    pub shapes: Vec<ShapeRecord>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

fn check_schema(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "schema error: unsupported schema_version {version} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

impl DatasetFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Format(format!("parse error: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        let mut seen = HashSet::new();
        for r in &self.shapes {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Format(format!("duplicate shape id {:?}", r.id)));
            }
            if r.points.len() < 2 {
                return Err(Error::Format(format!(
                    "schema error: shape {:?} has {} point(s), at least 2 are required",
                    r.id,
                    r.points.len()
                )));
            }
            if r.points.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!("schema error: shape {:?} has a non-finite coordinate", r.id)));
            }
        }
        Ok(())
    }

    pub fn from_shapes(ids: Vec<String>, labels: Vec<Option<String>>, shapes: &[DataShape]) -> Result<Self> {
        if ids.len() != shapes.len() || labels.len() != shapes.len() {
            return Err(invalid("ids, labels and shapes must have the same length"));
        }
        let file = Self {
            schema_version: SCHEMA_VERSION,
            shapes: ids
                .into_iter()
                .zip(labels)
                .zip(shapes)
                .map(|((id, label), s)| ShapeRecord {
                    id,
                    label,
                    points: s.points().iter().map(|p| [p.re, p.im]).collect(),
                })
                .collect(),
        };
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset serializes");
        s.push('\n');
        s
    }

    pub fn shapes(&self) -> Result<Vec<DataShape>> {
        self.shapes
            .iter()
            .map(|r| {
                let xy: Vec<(f64, f64)> = r.points.iter().map(|p| (p[0], p[1])).collect();
                DataShape::from_xy(&xy).map_err(|e| Error::Format(format!("shape {:?}: {e}", r.id)))
            })
            .collect()
    }

    /// Labelled view; unlabelled shapes take `default_label` or fail.
    pub fn labelled(&self, default_label: Option<&str>) -> Result<LabelledDataset> {
        let labels = self
            .shapes
            .iter()
            .map(|r| match (&r.label, default_label) {
                (Some(l), _) => Ok(l.clone()),
                (None, Some(d)) => Ok(d.to_string()),
                (None, None) => Err(Error::Format(format!("shape {:?} has no label", r.id))),
            })
            .collect::<Result<Vec<_>>>()?;
        LabelledDataset::new(self.shapes()?, labels)
    }
}

pub fn read_dataset_file(path: &Path) -> Result<DatasetFile> {
    DatasetFile::parse(&read(path)?)
}

/// Loads a dataset in which every shape is labelled.
pub fn load_dataset(path: &Path) -> Result<LabelledDataset> {
    read_dataset_file(path)?.labelled(None)
}

pub fn save_dataset(path: &Path, file: &DatasetFile) -> Result<()> {
    file.validate()?;
    write(path, &file.to_json())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub label: String,
    pub k: f64,
    pub theta: f64,
    /// Prior class probability; all classes or none must set it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxes {
    pub k: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Settings for the `simulate` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSettings {
    pub shapes_per_class: usize,
    /// Scale of the similarity transform applied to every shape.
    pub scale: f64,
    /// Translations are uniform in `[-spread, spread]²`.
    pub translation_spread: f64,
    /// Uniformly random rotation of every shape.
    pub random_rotation: bool,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            shapes_per_class: 10,
            scale: 1.0,
            translation_spread: 1.0,
            random_rotation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub regulators: Regulators,
    #[serde(default)]
    pub mc: McConfig,
    pub classes: Vec<ClassSpec>,
    #[serde(default)]
    pub optimizer: SimplexSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridAxes>,
    #[serde(default)]
    pub simulation: SimulationSettings,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Format(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.regulators.validate()?;
        if self.mc.m_samples == 0 {
            return Err(invalid("mc.m_samples must be positive"));
        }
        self.optimizer.validate()?;
        if self.classes.is_empty() {
            return Err(invalid("config defines no classes"));
        }
        let mut seen = HashSet::new();
        for c in &self.classes {
            if !seen.insert(c.label.as_str()) {
                return Err(invalid(format!("duplicate class label {:?}", c.label)));
            }
            GammaParams::new(c.k, c.theta)?;
        }
        let given = self.classes.iter().filter(|c| c.prior.is_some()).count();
        if given != 0 && given != self.classes.len() {
            return Err(invalid("either every class or no class sets a prior"));
        }
        if given > 0 {
            let priors = self.priors();
            if priors.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(invalid("class priors must be >= 0 and sum to 1"));
            }
        }
        if let Some(g) = &self.grid {
            for (name, axis) in [("grid.k", &g.k), ("grid.theta", &g.theta)] {
                if axis.is_empty() || axis.iter().any(|v| !(v.is_finite() && *v > 0.0)) || axis.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(invalid(format!("{name} must be nonempty, positive and strictly increasing")));
                }
            }
        }
        let s = &self.simulation;
        if !(s.scale.is_finite() && s.scale > 0.0) || !(s.translation_spread.is_finite() && s.translation_spread >= 0.0) {
            return Err(invalid("simulation scale must be > 0 and translation_spread >= 0"));
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.label.as_str()).collect()
    }

    pub fn models(&self) -> Result<Vec<ClassModel>> {
        self.classes.iter().map(|c| ClassModel::rectangle(c.label.clone(), c.k, c.theta)).collect()
    }

    pub fn model(&self, label: &str) -> Result<ClassModel> {
        let c = self
            .classes
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| invalid(format!("class {label:?} is not defined in the config")))?;
        ClassModel::rectangle(c.label.clone(), c.k, c.theta)
    }

    /// Class priors; uniform when none are given.
    pub fn priors(&self) -> Vec<f64> {
        let n = self.classes.len() as f64;
        self.classes.iter().map(|c| c.prior.unwrap_or(1.0 / n)).collect()
    }

    /// SHA-256 of the canonical JSON form, in hex.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::parse(&read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedModel {
    pub label: String,
    pub k: f64,
    pub theta: f64,
    pub prior: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loglik: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_err: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub config_digest: String,
    pub seed: u64,
    pub models: Vec<FittedModel>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| Error::Format(format!("parse error: {e}")))?;
        check_schema(file.schema_version)?;
        if file.models.is_empty() {
            return Err(Error::Format("schema error: model file lists no models".into()));
        }
        for m in &file.models {
            GammaParams::new(m.k, m.theta).map_err(|e| Error::Format(format!("model {:?}: {e}", m.label)))?;
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serializes");
        s.push('\n');
        s
    }

    pub fn class_models(&self) -> Result<Vec<ClassModel>> {
        self.models.iter().map(|m| ClassModel::rectangle(m.label.clone(), m.k, m.theta)).collect()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.models.iter().map(|m| m.prior).collect()
    }
}

pub fn load_models(path: &Path) -> Result<ModelFile> {
    ModelFile::parse(&read(path)?)
}

pub fn save_models(path: &Path, file: &ModelFile) -> Result<()> {
    write(path, &file.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_dataset() {
        let text = r#"{"schema_version": 1, "shapes": [{"id": "a", "points": [[0, 0], [1, 0.5]]}]}"#;
        let f = DatasetFile::parse(text).unwrap();
        assert_eq!(f.shapes().unwrap().len(), 1);
        assert!(f.labelled(None).is_err());
        assert_eq!(f.labelled(Some("x")).unwrap().labels(), ["x"]);
    }

    #[test]
    fn dataset_errors_are_distinct() {
        let msg = |t: &str| DatasetFile::parse(t).unwrap_err().to_string();
        let one = msg(r#"{"schema_version": 1, "shapes": [{"id": "lonely", "points": [[0, 0]]}]}"#);
        assert!(one.contains("\"lonely\"") && one.contains("at least 2"), "{one}");
        let dup = msg(r#"{"schema_version": 1, "shapes": [{"id": "a", "points": [[0,0],[1,1]]}, {"id": "a", "points": [[0,0],[1,1]]}]}"#);
        assert!(dup.contains("duplicate") && dup.contains("\"a\""), "{dup}");
        assert!(msg("{not json").starts_with("parse error"));
        assert!(msg(r#"{"schema_version": 7, "shapes": []}"#).contains("schema_version"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let s = DataShape::from_xy(&[(0.1, 1.0 / 3.0), (-2.5e-300, 7.0)]).unwrap();
        let f = DatasetFile::from_shapes(vec!["s".into()], vec![Some("c".into())], &[s.clone()]).unwrap();
        save_dataset(&path, &f).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back.shapes()[0], s);
        assert_eq!(back.labels(), ["c"]);
    }

    proptest! {
        #[test]
        fn coordinates_round_trip_bit_exact(coords in prop::collection::vec((-1e6f64..1e6, -1e-8f64..1e-8), 2..10)) {
            let s = DataShape::from_xy(&coords).unwrap();
            let f = DatasetFile::from_shapes(vec!["x".into()], vec![None], &[s.clone()]).unwrap();
            let back = DatasetFile::parse(&f.to_json()).unwrap().shapes().unwrap();
            for (a, b) in back[0].points().iter().zip(s.points()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    const CONFIG: &str = r#"{
        "mc": {"m_samples": 64, "seed": 5},
        "classes": [{"label": "a", "k": 4, "theta": 0.5}, {"label": "b", "k": 2, "theta": 1}],
        "grid": {"k": [1, 2], "theta": [0.5]}
    }"#;

    #[test]
    fn config_defaults_and_digest() {
        let c = RunConfig::parse(CONFIG).unwrap();
        assert_eq!(c.regulators, Regulators::default());
        assert_eq!(c.priors(), vec![0.5, 0.5]);
        assert_eq!(c.model("b").unwrap().aspect().k, 2.0);
        assert!(c.model("z").is_err());
        let again = RunConfig::parse(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c.digest(), again.digest());
        let mut other = c.clone();
        other.mc.seed = 6;
        assert_ne!(c.digest(), other.digest());
        assert_eq!(c.digest().len(), 64);
    }

    #[test]
    fn config_validation() {
        let bad = [
            r#"{"classes": []}"#,
            r#"{"classes": [{"label": "a", "k": -1, "theta": 1}]}"#,
            r#"{"classes": [{"label": "a", "k": 1, "theta": 1}, {"label": "a", "k": 1, "theta": 1}]}"#,
            r#"{"classes": [{"label": "a", "k": 1, "theta": 1, "prior": 0.4}, {"label": "b", "k": 1, "theta": 1}]}"#,
            r#"{"classes": [{"label": "a", "k": 1, "theta": 1, "prior": 0.4}]}"#,
            r#"{"classes": [{"label": "a", "k": 1, "theta": 1}], "grid": {"k": [2, 1], "theta": [1]}}"#,
            r#"{"classes": [{"label": "a", "k": 1, "theta": 1}], "typo": 1}"#,
        ];
        for b in bad {
            assert!(RunConfig::parse(b).is_err(), "{b}");
        }
    }

    #[test]
    fn model_file_round_trip() {
        let m = ModelFile {
            schema_version: SCHEMA_VERSION,
            config_digest: "abc".into(),
            seed: 3,
            models: vec![FittedModel {
                label: "a".into(),
                k: 4.5,
                theta: 0.25,
                prior: 1.0,
                loglik: Some(-12.5),
                std_err: Some(0.1),
                iterations: Some(30),
                converged: Some(true),
            }],
        };
        let back = ModelFile::parse(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.class_models().unwrap()[0].aspect().theta, 0.25);
    }
}
