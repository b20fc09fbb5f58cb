//! Versioned model artifacts.
//!
//! A saved model is a self-describing JSON document carrying the spec, the
//! task and label index, the fitted feature pipeline, and the numeric model
//! state. Loading a document with a different format version fails closed.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::TaskKind;
use crate::error::{Result, TriageError};
use crate::features::{FittedPipeline, SavedPipeline};
use crate::learners::ClassifierModel;
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Everything needed to serve predictions: pipeline, model, label space.
#[derive(Serialize, Deserialize)]
pub struct ModelArtifact<F: Scalar> {
    pub format_version: u32,
    pub task: TaskKind,
    pub label_index: BTreeMap<String, usize>,
    pub pipeline: SavedPipeline,
    pub model: ClassifierModel<F>,
    /// Free-form run metadata (resolved config, input hashes).
    #[serde(default)]
    pub metadata: serde_json::Value,
}

impl<F: Scalar> ModelArtifact<F> {
    pub fn new(
        task: TaskKind,
        label_index: BTreeMap<String, usize>,
        pipeline: &FittedPipeline,
        model: ClassifierModel<F>,
    ) -> Self {
        ModelArtifact {
            format_version: MODEL_FORMAT_VERSION,
            task,
            label_index,
            pipeline: pipeline.to_saved(),
            model,
            metadata: serde_json::Value::Null,
        }
    }

    /// Label names indexed by code.
    pub fn label_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.label_index.len()];
        for (name, &code) in &self.label_index {
            names[code] = name.clone();
        }
        names
    }

    pub fn save<W: Write>(&self, mut writer: W) -> Result<()> {
        let mut doc = serde_json::to_string_pretty(self)?;
        doc.push('\n');
        writer.write_all(doc.as_bytes())?;
        Ok(())
    }

    /// Loads an artifact, failing closed on any other format version.
    pub fn load<R: Read>(mut reader: R) -> Result<Self> {
        let mut raw = String::new();
        reader.read_to_string(&mut raw)?;
        let value: serde_json::Value = serde_json::from_str(&raw)?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .unwrap_or(0) as u32;
        if found != MODEL_FORMAT_VERSION {
            return Err(TriageError::VersionMismatch {
                found,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_value(value)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::IssueRecord;
    use crate::features::{FeatureConfig, PipelineSpec};
    use crate::learners::{fit, Algorithm, ModelSpec};

    fn tiny_artifact() -> ModelArtifact<f64> {
        let records = vec![
            IssueRecord {
                summary: "Server error on login".into(),
                description: "null pointer".into(),
                assignee_role: Some("Developer".into()),
                assignee_seniority: Some("Mid".into()),
                ..IssueRecord::default()
            },
            IssueRecord {
                summary: "Test request for build".into(),
                description: "please verify".into(),
                assignee_role: Some("Tester".into()),
                ..IssueRecord::default()
            },
        ];
        let refs: Vec<&IssueRecord> = records.iter().collect();
        let pipeline = PipelineSpec::new(FeatureConfig::default()).fit(&refs).unwrap();
        let x = pipeline.transform::<f64>(&refs).unwrap();
        let model = fit(&ModelSpec::new(Algorithm::GaussianNb), &x, &[0, 1]).unwrap();
        let mut label_index = BTreeMap::new();
        label_index.insert("Developer".to_string(), 0);
        label_index.insert("Tester".to_string(), 1);
        ModelArtifact::new(TaskKind::TeamAssignment, label_index, &pipeline, model)
    }

    #[test]
    fn save_load_round_trip_preserves_predictions() {
        let artifact = tiny_artifact();
        let mut buf = Vec::new();
        artifact.save(&mut buf).unwrap();
        let loaded = ModelArtifact::<f64>::load(&buf[..]).unwrap();
        assert_eq!(loaded.label_names(), vec!["Developer", "Tester"]);

        let record = IssueRecord {
            summary: "please test the server".into(),
            description: "request".into(),
            ..IssueRecord::default()
        };
        let pipeline = artifact.pipeline.clone().restore().unwrap();
        let x = pipeline.transform::<f64>(&[&record]).unwrap();
        let a = artifact.model.predict_proba(&x).unwrap();
        let pipeline2 = loaded.pipeline.clone().restore().unwrap();
        let x2 = pipeline2.transform::<f64>(&[&record]).unwrap();
        let b = loaded.model.predict_proba(&x2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn version_mismatch_fails_closed() {
        let artifact = tiny_artifact();
        let mut buf = Vec::new();
        artifact.save(&mut buf).unwrap();
        let tampered = String::from_utf8(buf)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 99");
        let err = ModelArtifact::<f64>::load(tampered.as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            TriageError::VersionMismatch {
                found: 99,
                expected: MODEL_FORMAT_VERSION
            }
        ));
    }
}
