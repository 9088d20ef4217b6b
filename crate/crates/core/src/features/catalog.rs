use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::FeatureError;

const DEFAULT_CATALOG: &str = include_str!("../../data/default_catalog.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Api,
    Command,
    Permission,
}

impl Category {
    /// Tag used in catalog files and matrix headers.
    pub fn tag(self) -> &'static str {
        match self {
            Self::Api => "api",
            Self::Command => "cmd",
            Self::Permission => "perm",
        }
    }
}

impl FromStr for Category {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "api" => Ok(Self::Api),
            "cmd" => Ok(Self::Command),
            "perm" => Ok(Self::Permission),
            other => Err(FeatureError::UnknownCategory(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Feature {
    pub category: Category,
    pub keyword: String,
}

impl Feature {
    pub fn new(category: Category, keyword: impl Into<String>) -> Self {
        Self {
            category,
            keyword: keyword.into(),
        }
    }

    /// Parses `<category>:<keyword>`; the keyword is everything after the first colon.
    pub fn parse(spec: &str) -> Result<Self, FeatureError> {
        let (tag, keyword) = spec
            .split_once(':')
            .ok_or_else(|| FeatureError::MalformedLine(spec.to_string()))?;
        let keyword = keyword.trim();
        if keyword.is_empty() {
            return Err(FeatureError::MalformedLine(spec.to_string()));
        }
        Ok(Self::new(tag.trim().parse()?, keyword))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.category.tag(), self.keyword)
    }
}

/// Ordered keyword features. Column `i` of every vector is `features[i]`.
///
/// The version string is derived from the ordered feature list, so two
/// catalogs with the same layout always share a version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    features: Vec<Feature>,
    version: String,
}

impl FeatureCatalog {
    pub fn new(features: Vec<Feature>) -> Result<Self, FeatureError> {
        if features.is_empty() {
            return Err(FeatureError::EmptyCatalog);
        }
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.keyword.as_str()) {
                return Err(FeatureError::DuplicateKeyword(f.keyword.clone()));
            }
            if f.keyword.contains([',', '\n', '\r']) {
                return Err(FeatureError::MalformedLine(f.to_string()));
            }
        }
        let version = layout_version(&features);
        Ok(Self { features, version })
    }

    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let features = text
            .lines()
            .map(|line| line.split_once('#').map_or(line, |(body, _)| body).trim())
            .filter(|line| !line.is_empty())
            .map(Feature::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(features)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Every keyword printed in the reference feature table, plus standard
    /// Android permissions up to 125 permission features.
    pub fn default_catalog() -> Self {
        Self::parse(DEFAULT_CATALOG).expect("bundled catalog is valid")
    }

    pub fn default_catalog_text() -> &'static str {
        DEFAULT_CATALOG
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn count(&self, category: Category) -> usize {
        self.features.iter().filter(|f| f.category == category).count()
    }

    pub fn position(&self, keyword: &str) -> Option<usize> {
        self.features.iter().position(|f| f.keyword == keyword)
    }

    /// Renders the catalog file format.
    pub fn to_text(&self) -> String {
        self.features.iter().map(|f| format!("{f}\n")).collect()
    }
}

fn layout_version(features: &[Feature]) -> String {
    let mut hasher = Sha256::new();
    for f in features {
        hasher.update(f.to_string().as_bytes());
        hasher.update(b"\n");
    }
    format!("sha256:{}", &hex::encode(hasher.finalize())[..16])
}
