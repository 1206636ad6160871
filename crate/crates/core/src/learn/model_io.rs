//! Versioned, self-describing model documents (JSON text).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::featurize::{FeatureSchema, WindowSpec};
use crate::sensor_data::ActivityLabel;

use super::forest::{RandomForestModel, TrainMeta};
use super::tree::DecisionTree;
use super::ForestParams;

/// Bumped on any incompatible change to the document layout.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("unsupported model format version {found} (this build reads version {supported})")]
    VersionMismatch { found: u64, supported: u32 },
    #[error("corrupt model document: {0}")]
    Corrupt(String),
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    model_type: String,
    model_version: String,
    classes: Vec<String>,
    feature_schema: FeatureSchema,
    window: WindowSpec,
    params: ForestParams,
    dataset_fingerprint: String,
    n_train_windows: usize,
    trees: Vec<DecisionTree>,
}

/// Serializes a trained forest. The document embeds the feature schema and
/// window spec so inference can verify compatibility before predicting.
pub fn save_model(model: &RandomForestModel) -> String {
    let doc = ModelDocument {
        format_version: MODEL_FORMAT_VERSION,
        model_type: "random_forest".into(),
        model_version: model.train_meta.model_version.clone(),
        classes: model.classes.iter().map(|c| c.to_string()).collect(),
        feature_schema: model.feature_schema.clone(),
        window: model.window,
        params: model.params,
        dataset_fingerprint: model.train_meta.dataset_fingerprint.clone(),
        n_train_windows: model.train_meta.n_train_windows,
        trees: model.trees.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("model document serializes")
}

/// Parses and validates a model document. Load followed by save round-trips
/// predictions exactly: tree thresholds survive JSON via shortest-repr
/// float formatting.
pub fn load_model(text: &str) -> Result<RandomForestModel, ModelIoError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ModelIoError::Corrupt("missing format_version".into()))?;
    if found != MODEL_FORMAT_VERSION as u64 {
        return Err(ModelIoError::VersionMismatch {
            found,
            supported: MODEL_FORMAT_VERSION,
        });
    }

    let doc: ModelDocument =
        serde_json::from_value(value).map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    if doc.model_type != "random_forest" {
        return Err(ModelIoError::Corrupt(format!(
            "unsupported model_type {:?}",
            doc.model_type
        )));
    }
    let expected_classes: Vec<String> =
        ActivityLabel::ALL.iter().map(|c| c.to_string()).collect();
    if doc.classes != expected_classes {
        return Err(ModelIoError::Corrupt(format!(
            "class list {:?} does not match {:?}",
            doc.classes, expected_classes
        )));
    }
    if doc.feature_schema.is_empty() {
        return Err(ModelIoError::Corrupt("empty feature schema".into()));
    }
    if doc.trees.is_empty() {
        return Err(ModelIoError::Corrupt("document contains no trees".into()));
    }
    doc.window
        .check()
        .map_err(|e| ModelIoError::Corrupt(e.to_string()))?;
    for (i, tree) in doc.trees.iter().enumerate() {
        tree.validate_structure(doc.feature_schema.len())
            .map_err(|e| ModelIoError::Corrupt(format!("tree {i}: {e}")))?;
    }

    Ok(RandomForestModel {
        trees: doc.trees,
        classes: ActivityLabel::ALL,
        feature_schema: doc.feature_schema,
        window: doc.window,
        params: doc.params,
        train_meta: TrainMeta {
            dataset_fingerprint: doc.dataset_fingerprint,
            n_train_windows: doc.n_train_windows,
            model_version: doc.model_version,
        },
    })
}
