//! Attribute schema, per-image predictions and subject grouping.
//!
//! A [`Dataset`] is a partition of image records into [`SubjectGroup`]s. A
//! group is the unit every downstream computation runs over: all still images
//! of one identity, or all frames of one video (callers assign
//! `subject_id = video_id` for the latter). Groups keep the order in which
//! subjects first appear in the input, and records keep their input order
//! inside a group; that order is the tiebreak order everywhere else.

mod io;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quality::{Landmarks, QualityFeatures};

pub use io::{
    load_annotations, load_predictions, write_annotations_csv, write_predictions_csv,
    write_predictions_jsonl, PredictionFormat,
};

/// Maximum allowed deviation of `p_pos + p_neg` from 1.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// The 40 CelebA attributes in their canonical column order.
pub const CELEBA_ATTRIBUTES: [&str; 40] = [
    "5_o_Clock_Shadow",
    "Arched_Eyebrows",
    "Attractive",
    "Bags_Under_Eyes",
    "Bald",
    "Bangs",
    "Big_Lips",
    "Big_Nose",
    "Black_Hair",
    "Blond_Hair",
    "Blurry",
    "Brown_Hair",
    "Bushy_Eyebrows",
    "Chubby",
    "Double_Chin",
    "Eyeglasses",
    "Goatee",
    "Gray_Hair",
    "Heavy_Makeup",
    "High_Cheekbones",
    "Male",
    "Mouth_Slightly_Open",
    "Mustache",
    "Narrow_Eyes",
    "No_Beard",
    "Oval_Face",
    "Pale_Skin",
    "Pointy_Nose",
    "Receding_Hairline",
    "Rosy_Cheeks",
    "Sideburns",
    "Smiling",
    "Straight_Hair",
    "Wavy_Hair",
    "Wearing_Earrings",
    "Wearing_Hat",
    "Wearing_Lipstick",
    "Wearing_Necklace",
    "Wearing_Necktie",
    "Young",
];

/// Attributes of the default schema that legitimately change from one image
/// of a subject to the next. They are never label-corrected.
pub const CELEBA_TRANSIENT: [&str; 4] = ["Attractive", "Blurry", "Mouth_Slightly_Open", "Smiling"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub stable: bool,
}

/// Ordered list of attributes every record in a dataset predicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<AttributeDef>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeDef>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::Schema(
                "schema must list at least one attribute".into(),
            ));
        }
        let mut seen = HashSet::new();
        for def in &attributes {
            if def.name.trim().is_empty() {
                return Err(Error::Schema("attribute names must be non-empty".into()));
            }
            if def.name.contains(',') || def.name.contains('"') {
                return Err(Error::Schema(format!(
                    "attribute name `{}` must not contain commas or quotes",
                    def.name
                )));
            }
            if !seen.insert(def.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute `{}`", def.name)));
            }
        }
        Ok(Self { attributes })
    }

    /// The 40 CelebA attributes; everything except [`CELEBA_TRANSIENT`] is stable.
    pub fn celeba() -> Self {
        let attributes = CELEBA_ATTRIBUTES
            .iter()
            .map(|&name| AttributeDef {
                name: name.to_string(),
                stable: !CELEBA_TRANSIENT.contains(&name),
            })
            .collect();
        Self { attributes }
    }

    /// Parses a schema file: a JSON list of `{"name": ..., "stable": ...}`.
    pub fn from_json_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let attributes: Vec<AttributeDef> = serde_json::from_reader(reader)?;
        Self::new(attributes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_reader(std::io::BufReader::new(file))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.attributes).expect("schema serializes")
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    /// Always false: a schema holds at least one attribute.
    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn attributes(&self) -> &[AttributeDef] {
        &self.attributes
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn name(&self, index: usize) -> &str {
        &self.attributes[index].name
    }

    pub fn is_stable(&self, index: usize) -> bool {
        self.attributes[index].stable
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }
}

impl Default for AttributeSchema {
    fn default() -> Self {
        Self::celeba()
    }
}

/// Binary decision for a probability pair: positive iff `p_pos >= p_neg`.
/// An exact tie resolves to positive.
pub fn binary_label(pred: &AttributePrediction) -> bool {
    pred.p_pos >= pred.p_neg
}

/// One classifier output for one (image, attribute).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributePrediction {
    p_pos: f64,
    p_neg: f64,
    label: bool,
}

impl AttributePrediction {
    pub fn new(p_pos: f64, p_neg: f64) -> Result<Self> {
        for (name, p) in [("p_pos", p_pos), ("p_neg", p_neg)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Prediction(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if (p_pos + p_neg - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::Prediction(format!(
                "p_pos + p_neg = {} differs from 1",
                p_pos + p_neg
            )));
        }
        Ok(Self {
            p_pos,
            p_neg,
            label: p_pos >= p_neg,
        })
    }

    /// Builds the pair `(p_pos, 1 - p_pos)`.
    pub fn from_positive(p_pos: f64) -> Result<Self> {
        Self::new(p_pos, 1.0 - p_pos)
    }

    /// Degenerate pair used for human annotations: `(1, 0)` or `(0, 1)`.
    pub fn from_label(label: bool) -> Self {
        if label {
            Self {
                p_pos: 1.0,
                p_neg: 0.0,
                label: true,
            }
        } else {
            Self {
                p_pos: 0.0,
                p_neg: 1.0,
                label: false,
            }
        }
    }

    pub fn p_pos(&self) -> f64 {
        self.p_pos
    }

    pub fn p_neg(&self) -> f64 {
        self.p_neg
    }

    pub fn label(&self) -> bool {
        self.label
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub image_id: String,
    pub subject_id: String,
    /// Path to pixel data, relative to the image root when one is configured.
    pub source: Option<String>,
    pub predictions: Vec<AttributePrediction>,
    pub landmarks: Option<Landmarks>,
    /// Cached quality features; when present, pixel data is not needed.
    pub quality: Option<QualityFeatures>,
}

impl ImageRecord {
    pub fn new(
        image_id: impl Into<String>,
        subject_id: impl Into<String>,
        predictions: Vec<AttributePrediction>,
    ) -> Self {
        Self {
            image_id: image_id.into(),
            subject_id: subject_id.into(),
            source: None,
            predictions,
            landmarks: None,
            quality: None,
        }
    }

    /// Record whose predictions are the degenerate pairs of `labels`.
    pub fn from_labels(
        image_id: impl Into<String>,
        subject_id: impl Into<String>,
        labels: &[bool],
    ) -> Self {
        let predictions = labels
            .iter()
            .map(|&l| AttributePrediction::from_label(l))
            .collect();
        Self::new(image_id, subject_id, predictions)
    }
}

/// All records of one subject (or one video). Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectGroup {
    subject_id: String,
    images: Vec<ImageRecord>,
}

impl SubjectGroup {
    pub fn new(subject_id: impl Into<String>, images: Vec<ImageRecord>) -> Result<Self> {
        let subject_id = subject_id.into();
        if images.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if let Some(stray) = images.iter().find(|r| r.subject_id != subject_id) {
            return Err(Error::SubjectMismatch(format!(
                "image `{}` belongs to `{}`, not `{}`",
                stray.image_id, stray.subject_id, subject_id
            )));
        }
        let width = images[0].predictions.len();
        if let Some(odd) = images.iter().find(|r| r.predictions.len() != width) {
            return Err(Error::Prediction(format!(
                "image `{}` has {} predictions, expected {}",
                odd.image_id,
                odd.predictions.len(),
                width
            )));
        }
        Ok(Self { subject_id, images })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn images(&self) -> &[ImageRecord] {
        &self.images
    }

    pub fn images_mut(&mut self) -> &mut [ImageRecord] {
        &mut self.images
    }

    /// N_l, the number of images in the group.
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Number of attributes each record predicts.
    pub fn n_attributes(&self) -> usize {
        self.images[0].predictions.len()
    }

    pub(crate) fn check_attr(&self, attr_index: usize) -> Result<()> {
        if attr_index < self.n_attributes() {
            Ok(())
        } else {
            Err(Error::AttributeIndex {
                index: attr_index,
                len: self.n_attributes(),
            })
        }
    }

    pub fn into_images(self) -> Vec<ImageRecord> {
        self.images
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: AttributeSchema,
    groups: Vec<SubjectGroup>,
}

impl Dataset {
    /// Groups `records` by subject, keeping first-appearance order of subjects
    /// and input order within each subject.
    pub fn new(schema: AttributeSchema, records: Vec<ImageRecord>) -> Result<Self> {
        let mut seen_ids = HashSet::with_capacity(records.len());
        let mut slot: HashMap<String, usize> = HashMap::new();
        let mut buckets: Vec<(String, Vec<ImageRecord>)> = Vec::new();
        for record in records {
            if record.predictions.len() != schema.len() {
                return Err(Error::Prediction(format!(
                    "image `{}` has {} predictions, schema has {} attributes",
                    record.image_id,
                    record.predictions.len(),
                    schema.len()
                )));
            }
            if !seen_ids.insert(record.image_id.clone()) {
                return Err(Error::Prediction(format!(
                    "duplicate image_id `{}`",
                    record.image_id
                )));
            }
            let idx = *slot.entry(record.subject_id.clone()).or_insert_with(|| {
                buckets.push((record.subject_id.clone(), Vec::new()));
                buckets.len() - 1
            });
            buckets[idx].1.push(record);
        }
        let groups = buckets
            .into_iter()
            .map(|(subject, images)| SubjectGroup::new(subject, images))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { schema, groups })
    }

    pub fn from_groups(schema: AttributeSchema, groups: Vec<SubjectGroup>) -> Result<Self> {
        let records = groups
            .into_iter()
            .flat_map(SubjectGroup::into_images)
            .collect();
        Self::new(schema, records)
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn groups(&self) -> &[SubjectGroup] {
        &self.groups
    }

    pub fn groups_mut(&mut self) -> &mut [SubjectGroup] {
        &mut self.groups
    }

    pub fn group(&self, subject_id: &str) -> Option<&SubjectGroup> {
        self.groups.iter().find(|g| g.subject_id == subject_id)
    }

    /// L, the number of subjects.
    pub fn n_subjects(&self) -> usize {
        self.groups.len()
    }

    /// N, the total number of image records.
    pub fn n_images(&self) -> usize {
        self.groups.iter().map(SubjectGroup::len).sum()
    }

    /// Records in group order, then input order within each group.
    pub fn records(&self) -> impl Iterator<Item = &ImageRecord> + '_ {
        self.groups.iter().flat_map(|g| g.images.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_label_is_argmax_with_positive_ties() {
        let p = |a, b| AttributePrediction::new(a, b).unwrap();
        assert!(binary_label(&p(0.7, 0.3)));
        assert!(!binary_label(&p(0.2, 0.8)));
        assert!(binary_label(&p(0.5, 0.5)));
        assert!(p(0.5, 0.5).label());
    }

    #[test]
    fn prediction_rejects_bad_probabilities() {
        assert!(AttributePrediction::new(1.2, -0.2).is_err());
        assert!(AttributePrediction::new(0.6, 0.6).is_err());
        assert!(AttributePrediction::new(f64::NAN, 0.5).is_err());
        assert!(AttributePrediction::new(0.3, 0.7 + 5e-10).is_ok());
    }

    #[test]
    fn annotation_encoding() {
        let pos = AttributePrediction::from_label(true);
        assert_eq!((pos.p_pos(), pos.p_neg(), pos.label()), (1.0, 0.0, true));
        let neg = AttributePrediction::from_label(false);
        assert_eq!((neg.p_pos(), neg.p_neg(), neg.label()), (0.0, 1.0, false));
    }

    #[test]
    fn celeba_schema_shape() {
        let schema = AttributeSchema::celeba();
        assert_eq!(schema.len(), 40);
        assert_eq!(schema.name(20), "Male");
        assert!(schema.is_stable(schema.index_of("Male").unwrap()));
        assert!(!schema.is_stable(schema.index_of("Smiling").unwrap()));
        assert!(!schema.is_stable(schema.index_of("Mouth_Slightly_Open").unwrap()));
    }

    #[test]
    fn schema_validation() {
        let def = |n: &str| AttributeDef {
            name: n.into(),
            stable: true,
        };
        assert!(AttributeSchema::new(vec![]).is_err());
        assert!(AttributeSchema::new(vec![def("A"), def("A")]).is_err());
        assert!(AttributeSchema::new(vec![def(" ")]).is_err());
        let json = r#"[{"name":"Male","stable":true},{"name":"Smiling","stable":false}]"#;
        let schema = AttributeSchema::from_json_reader(json.as_bytes()).unwrap();
        assert_eq!(schema.len(), 2);
        assert!(!schema.is_stable(1));
        let back = AttributeSchema::from_json_reader(schema.to_json().as_bytes()).unwrap();
        assert_eq!(back, schema);
    }

    #[test]
    fn grouping_preserves_order_and_partitions() {
        let schema = AttributeSchema::new(vec![AttributeDef {
            name: "Male".into(),
            stable: true,
        }])
        .unwrap();
        let recs = vec![
            ImageRecord::from_labels("a1", "A", &[true]),
            ImageRecord::from_labels("b1", "B", &[true]),
            ImageRecord::from_labels("a2", "A", &[false]),
            ImageRecord::from_labels("a3", "A", &[true]),
            ImageRecord::from_labels("b2", "B", &[false]),
        ];
        let ds = Dataset::new(schema, recs).unwrap();
        assert_eq!(ds.n_subjects(), 2);
        assert_eq!(ds.groups()[0].subject_id(), "A");
        assert_eq!(ds.groups()[0].len(), 3);
        assert_eq!(ds.groups()[1].len(), 2);
        assert_eq!(ds.n_images(), 5);
        let ids: Vec<_> = ds.groups()[0]
            .images()
            .iter()
            .map(|r| r.image_id.as_str())
            .collect();
        assert_eq!(ids, ["a1", "a2", "a3"]);
    }

    #[test]
    fn dataset_rejects_duplicates_and_width_mismatch() {
        let schema = AttributeSchema::celeba();
        let bad = vec![ImageRecord::from_labels("x", "S", &[true])];
        assert!(Dataset::new(schema.clone(), bad).is_err());
        let labels = [true; 40];
        let dup = vec![
            ImageRecord::from_labels("x", "S", &labels),
            ImageRecord::from_labels("x", "T", &labels),
        ];
        assert!(Dataset::new(schema, dup).is_err());
    }

    #[test]
    fn group_invariants() {
        assert!(matches!(
            SubjectGroup::new("A", vec![]),
            Err(Error::EmptyGroup)
        ));
        let stray = vec![ImageRecord::from_labels("x", "B", &[true])];
        assert!(SubjectGroup::new("A", stray).is_err());
    }
}
