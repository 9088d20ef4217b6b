use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::{
    Algorithm, DecisionTreeModel, LearnError, NaiveBayesModel, Posterior, RippleDownModel,
    RuleListModel, SimpleLogisticModel,
};
use crate::features::SampleMatrix;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelPayload {
    NaiveBayes(NaiveBayesModel),
    SimpleLogistic(SimpleLogisticModel),
    DecisionTree(DecisionTreeModel),
    Ridor(RippleDownModel),
    Part(RuleListModel),
}

macro_rules! payload_from {
    ($($ty:ty => $variant:ident),* $(,)?) => {$(
        impl From<$ty> for ModelPayload {
            fn from(m: $ty) -> Self {
                ModelPayload::$variant(m)
            }
        }
    )*};
}

payload_from! {
    NaiveBayesModel => NaiveBayes,
    SimpleLogisticModel => SimpleLogistic,
    DecisionTreeModel => DecisionTree,
    RippleDownModel => Ridor,
    RuleListModel => Part,
}

impl ModelPayload {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Self::NaiveBayes(_) => Algorithm::Nb,
            Self::SimpleLogistic(_) => Algorithm::Sl,
            Self::DecisionTree(_) => Algorithm::Dt,
            Self::Ridor(_) => Algorithm::Ridor,
            Self::Part(_) => Algorithm::Part,
        }
    }

    fn decode(algorithm: Algorithm, value: Value) -> Result<Self, serde_json::Error> {
        Ok(match algorithm {
            Algorithm::Nb => Self::NaiveBayes(serde_json::from_value(value)?),
            Algorithm::Sl => Self::SimpleLogistic(serde_json::from_value(value)?),
            Algorithm::Dt => Self::DecisionTree(serde_json::from_value(value)?),
            Algorithm::Ridor => Self::Ridor(serde_json::from_value(value)?),
            Algorithm::Part => Self::Part(serde_json::from_value(value)?),
        })
    }

    fn validate(&self, width: usize) -> Result<(), String> {
        match self {
            Self::NaiveBayes(m) => m.validate(width),
            Self::SimpleLogistic(m) => m.validate(width),
            Self::DecisionTree(m) => m.validate(width),
            Self::Ridor(m) => m.validate(width),
            Self::Part(m) => m.validate(width),
        }
    }
}

/// A trained classifier tied to the catalog layout it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub catalog_version: String,
    pub width: usize,
    pub payload: ModelPayload,
}

#[derive(Serialize)]
struct ModelFile<'a> {
    schema_version: u32,
    algorithm: Algorithm,
    catalog_version: &'a str,
    width: usize,
    payload: &'a ModelPayload,
}

impl TrainedModel {
    pub fn new(m: &SampleMatrix, payload: ModelPayload) -> Self {
        Self {
            catalog_version: m.catalog().version().to_string(),
            width: m.width(),
            payload,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.payload.algorithm()
    }

    pub fn predict(&self, bits: &[bool]) -> Result<Posterior, LearnError> {
        if bits.len() != self.width {
            return Err(LearnError::DimensionMismatch {
                expected: self.width,
                got: bits.len(),
            });
        }
        Ok(match &self.payload {
            ModelPayload::NaiveBayes(m) => m.predict(bits),
            ModelPayload::SimpleLogistic(m) => m.predict(bits),
            ModelPayload::DecisionTree(m) => m.predict(bits),
            ModelPayload::Ridor(m) => m.predict(bits),
            ModelPayload::Part(m) => m.predict(bits),
        })
    }

    /// One-line size summary, e.g. `rules: 12`.
    pub fn summary(&self) -> String {
        match &self.payload {
            ModelPayload::NaiveBayes(m) => format!("features: {}", m.cond_sus.len()),
            ModelPayload::SimpleLogistic(m) => format!(
                "nonzero weights: {} (iterations: {})",
                m.weights.len(),
                m.iterations_used
            ),
            ModelPayload::DecisionTree(m) => format!("leaves: {} (depth: {})", m.leaf_count(), m.depth()),
            ModelPayload::Ridor(m) => format!("exceptions: {}", m.exception_count()),
            ModelPayload::Part(m) => format!("rules: {}", m.rules.len()),
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            algorithm: self.algorithm(),
            catalog_version: &self.catalog_version,
            width: self.width,
            payload: &self.payload,
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serialises");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, LearnError> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| LearnError::CorruptModel(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| LearnError::CorruptModel("top level is not an object".into()))?;
        match obj.get("schema_version").and_then(Value::as_u64) {
            Some(v) if v == u64::from(MODEL_SCHEMA_VERSION) => {}
            Some(v) => return Err(LearnError::SchemaMismatch(format!("schema_version {v}"))),
            None => return Err(LearnError::SchemaMismatch("missing schema_version".into())),
        }
        let algorithm = obj
            .get("algorithm")
            .and_then(Value::as_str)
            .ok_or_else(|| LearnError::SchemaMismatch("missing algorithm".into()))?
            .parse::<Algorithm>()
            .map_err(LearnError::SchemaMismatch)?;
        let catalog_version = obj
            .get("catalog_version")
            .and_then(Value::as_str)
            .ok_or_else(|| LearnError::CorruptModel("missing catalog_version".into()))?
            .to_string();
        let width = obj
            .get("width")
            .and_then(Value::as_u64)
            .ok_or_else(|| LearnError::CorruptModel("missing width".into()))? as usize;
        let payload = obj
            .remove("payload")
            .ok_or_else(|| LearnError::CorruptModel("missing payload".into()))?;
        let payload = ModelPayload::decode(algorithm, payload)
            .map_err(|e| LearnError::CorruptModel(e.to_string()))?;
        payload.validate(width).map_err(LearnError::CorruptModel)?;
        Ok(Self {
            catalog_version,
            width,
            payload,
        })
    }
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<(), LearnError> {
    let path = path.as_ref();
    std::fs::write(path, model.to_json()).map_err(|source| LearnError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel, LearnError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LearnError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TrainedModel::from_json(&text)
}
