use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{Feature, FeatureCatalog, FeatureError, FeatureVector, Label, LabelledSample};

const ID_COLUMN: &str = "sample_id";
const LABEL_COLUMN: &str = "label";

/// Labelled binary feature vectors sharing one catalog.
///
/// On disk this is a CSV file: `sample_id,<cat>:<keyword>,...,label`, one
/// row per sample with `0`/`1` cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMatrix {
    catalog: FeatureCatalog,
    samples: Vec<LabelledSample>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains([',', '\n', '\r'])
}

impl SampleMatrix {
    pub fn new(catalog: FeatureCatalog, samples: Vec<LabelledSample>) -> Result<Self, FeatureError> {
        let mut ids = HashSet::with_capacity(samples.len());
        for s in &samples {
            let id = &s.vector.sample_id;
            if !valid_id(id) {
                return Err(FeatureError::InvalidSampleId(id.clone()));
            }
            if s.vector.len() != catalog.len() {
                return Err(FeatureError::LengthMismatch {
                    id: id.clone(),
                    expected: catalog.len(),
                    got: s.vector.len(),
                });
            }
            if !ids.insert(id.as_str()) {
                return Err(FeatureError::DuplicateSampleId(id.clone()));
            }
        }
        Ok(Self { catalog, samples })
    }

    pub fn catalog(&self) -> &FeatureCatalog {
        &self.catalog
    }

    pub fn samples(&self) -> &[LabelledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn width(&self) -> usize {
        self.catalog.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.samples.iter().map(|s| s.label)
    }

    /// `[benign, suspicious]` counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for label in self.labels() {
            counts[label.index()] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            catalog: self.catalog.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(ID_COLUMN);
        for f in self.catalog.features() {
            let _ = write!(out, ",{f}");
        }
        let _ = writeln!(out, ",{LABEL_COLUMN}");
        for s in &self.samples {
            out.push_str(&s.vector.sample_id);
            for &bit in &s.vector.bits {
                out.push_str(if bit { ",1" } else { ",0" });
            }
            let _ = writeln!(out, ",{}", s.label);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, FeatureError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| FeatureError::SchemaMismatch("empty file".into()))?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.len() < 3 || columns[0] != ID_COLUMN || columns[columns.len() - 1] != LABEL_COLUMN
        {
            return Err(FeatureError::SchemaMismatch(format!(
                "header must be `{ID_COLUMN},<features>,{LABEL_COLUMN}`"
            )));
        }
        let features = columns[1..columns.len() - 1]
            .iter()
            .map(|c| Feature::parse(c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FeatureError::SchemaMismatch(e.to_string()))?;
        let catalog = FeatureCatalog::new(features)
            .map_err(|e| FeatureError::SchemaMismatch(e.to_string()))?;

        let mut samples = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(FeatureError::SchemaMismatch(format!(
                    "line {line_no}: {} cells, expected {}",
                    cells.len(),
                    columns.len()
                )));
            }
            let bits = cells[1..cells.len() - 1]
                .iter()
                .map(|&cell| match cell {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(FeatureError::BadValue {
                        line: line_no,
                        value: other.to_string(),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let label = cells[cells.len() - 1]
                .parse::<Label>()
                .map_err(|value| FeatureError::BadLabel {
                    line: line_no,
                    value,
                })?;
            samples.push(LabelledSample::new(FeatureVector::new(cells[0], bits), label));
        }
        Self::new(catalog, samples)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn catalog(n: usize) -> FeatureCatalog {
        FeatureCatalog::new((0..n).map(|i| Feature::new(super::super::Category::Api, format!("k{i}"))).collect())
            .unwrap()
    }

    fn sample(id: &str, bits: &[u8], label: Label) -> LabelledSample {
        LabelledSample::new(
            FeatureVector::new(id, bits.iter().map(|&b| b == 1).collect()),
            label,
        )
    }

    #[test]
    fn bad_cell_value() {
        let text = "sample_id,api:a,label\nx,2,benign\n";
        assert!(matches!(
            SampleMatrix::from_csv(text),
            Err(FeatureError::BadValue { line: 2, ref value }) if value == "2"
        ));
    }

    #[test]
    fn bad_label_and_header() {
        assert!(matches!(
            SampleMatrix::from_csv("sample_id,api:a,label\nx,1,evil\n"),
            Err(FeatureError::BadLabel { .. })
        ));
        assert!(matches!(
            SampleMatrix::from_csv("id,api:a,label\n"),
            Err(FeatureError::SchemaMismatch(_))
        ));
        assert!(matches!(
            SampleMatrix::from_csv("sample_id,a,label\n"),
            Err(FeatureError::SchemaMismatch(_))
        ));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = SampleMatrix::new(
            catalog(1),
            vec![sample("a", &[1], Label::Benign), sample("a", &[0], Label::Suspicious)],
        )
        .unwrap_err();
        assert!(matches!(err, FeatureError::DuplicateSampleId(_)));
    }

    #[test]
    fn header_layout() {
        let m = SampleMatrix::new(catalog(2), vec![sample("a", &[1, 0], Label::Suspicious)]).unwrap();
        assert_eq!(m.to_csv(), "sample_id,api:k0,api:k1,label\na,1,0,suspicious\n");
    }

    #[test]
    fn full_scale_shape() {
        let cat = catalog(179);
        let samples = (0..6863)
            .map(|i| {
                let bits = (0..179).map(|j| (i * 31 + j * 17) % 5 == 0).collect();
                let label = if i < 2925 { Label::Suspicious } else { Label::Benign };
                LabelledSample::new(FeatureVector::new(format!("app{i}"), bits), label)
            })
            .collect();
        let m = SampleMatrix::new(cat, samples).unwrap();
        let back = SampleMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back.len(), 6863);
        assert_eq!(back.width(), 179);
        assert_eq!(back.class_counts(), [3938, 2925]);
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec((prop::collection::vec(any::<bool>(), 5), any::<bool>()), 0..40)) {
            let samples = rows
                .into_iter()
                .enumerate()
                .map(|(i, (bits, sus))| {
                    let label = if sus { Label::Suspicious } else { Label::Benign };
                    LabelledSample::new(FeatureVector::new(format!("s{i}"), bits), label)
                })
                .collect();
            let m = SampleMatrix::new(catalog(5), samples).unwrap();
            prop_assert_eq!(SampleMatrix::from_csv(&m.to_csv()).unwrap(), m);
        }
    }
}
