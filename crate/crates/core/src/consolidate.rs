//! Subject-level attribute decisions from many per-image predictions.
//!
//! For each attribute the images of a group are ranked by a criterion, the
//! top `k` are kept, and their binary labels are majority-voted:
//!
//! * **confidence**: `|p_pos - p_neg|` of that attribute's prediction, so the
//!   ranking differs per attribute;
//! * **quality**: the image quality score, one ranking shared by all attributes.
//!
//! With `k = 1` this is plain argmax selection. Equal criteria keep input order.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AttributePrediction, AttributeSchema, Dataset, ImageRecord, SubjectGroup};
use crate::quality::{quality_score, QualityWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Confidence,
    Quality,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Confidence => "confidence",
            Strategy::Quality => "quality",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "confidence" => Ok(Strategy::Confidence),
            "quality" => Ok(Strategy::Quality),
            other => Err(Error::Config(format!(
                "unknown strategy `{other}` (expected confidence or quality)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsolidationConfig {
    pub strategy: Strategy,
    /// Number of top-ranked images that vote; clamped to the group size.
    pub top_k: usize,
    /// Used to score cached quality features when no scores are supplied.
    pub weights: QualityWeights,
}

impl ConsolidationConfig {
    pub fn new(strategy: Strategy, top_k: usize) -> Result<Self> {
        if top_k == 0 {
            return Err(Error::Config("top-k must be at least 1".into()));
        }
        Ok(Self {
            strategy,
            top_k,
            weights: QualityWeights::default(),
        })
    }

    pub fn with_weights(mut self, weights: QualityWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn effective_k(&self, n_images: usize) -> usize {
        self.top_k.clamp(1, n_images.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeProvenance {
    pub strategy: Strategy,
    pub contributors: Vec<String>,
    pub votes_pos: usize,
    pub votes_neg: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectAttributes {
    pub subject_id: String,
    pub labels: Vec<bool>,
    /// One entry per attribute; empty when read back from a consolidation CSV.
    pub provenance: Vec<AttributeProvenance>,
}

pub fn confidence(pred: &AttributePrediction) -> f64 {
    (pred.p_pos() - pred.p_neg()).abs()
}

/// Index of the most confident image for one attribute; ties go to the
/// earliest image.
pub fn select_by_confidence(group: &SubjectGroup, attr_index: usize) -> Result<usize> {
    group.check_attr(attr_index)?;
    let mut best = 0;
    let mut best_conf = f64::NEG_INFINITY;
    for (i, record) in group.images().iter().enumerate() {
        let c = confidence(&record.predictions[attr_index]);
        if c > best_conf {
            best = i;
            best_conf = c;
        }
    }
    Ok(best)
}

/// Top `k` image indices for one attribute, best first.
///
/// `quality` holds one score per image in input order; when absent under the
/// quality strategy, scores are derived from cached features on the records.
pub fn rank_for_attribute(
    group: &SubjectGroup,
    attr_index: usize,
    config: &ConsolidationConfig,
    quality: Option<&[f64]>,
) -> Result<Vec<usize>> {
    group.check_attr(attr_index)?;
    let criterion: Vec<f64> = match config.strategy {
        Strategy::Confidence => group
            .images()
            .iter()
            .map(|r| confidence(&r.predictions[attr_index]))
            .collect(),
        Strategy::Quality => resolve_quality(group, config, quality)?,
    };
    Ok(top_k_order(&criterion, config.effective_k(group.len())))
}

fn top_k_order(criterion: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..criterion.len()).collect();
    // Stable: equal values keep input order.
    order.sort_by(|&a, &b| criterion[b].total_cmp(&criterion[a]));
    order.truncate(k);
    order
}

fn resolve_quality(
    group: &SubjectGroup,
    config: &ConsolidationConfig,
    quality: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let missing = || Error::MissingQuality {
        subject: group.subject_id().to_string(),
    };
    match quality {
        Some(scores) if scores.len() == group.len() => Ok(scores.to_vec()),
        Some(_) => Err(missing()),
        None => group
            .images()
            .iter()
            .map(|r| {
                r.quality
                    .as_ref()
                    .map(|f| quality_score(f, &config.weights))
                    .ok_or_else(missing)
            })
            .collect(),
    }
}

/// Equal-weight majority vote. An exact tie goes to the side holding the
/// single most confident voter; if both sides share the top confidence the
/// result is positive.
pub fn majority_vote(labels: &[bool], confidences: &[f64]) -> Result<bool> {
    if labels.is_empty() || labels.len() != confidences.len() {
        return Err(Error::EmptyVote);
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos != neg {
        return Ok(pos > neg);
    }
    let side_max = |side: bool| {
        labels
            .iter()
            .zip(confidences)
            .filter(|(&l, _)| l == side)
            .map(|(_, &c)| c)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(side_max(true) >= side_max(false))
}

pub fn consolidate_subject(
    group: &SubjectGroup,
    config: &ConsolidationConfig,
    quality: Option<&[f64]>,
) -> Result<SubjectAttributes> {
    let n_attr = group.n_attributes();
    let images = group.images();
    let k = config.effective_k(group.len());
    // Quality ranking does not depend on the attribute: compute it once.
    let shared_order = match config.strategy {
        Strategy::Quality => Some(top_k_order(&resolve_quality(group, config, quality)?, k)),
        Strategy::Confidence => None,
    };

    let mut labels = Vec::with_capacity(n_attr);
    let mut provenance = Vec::with_capacity(n_attr);
    for j in 0..n_attr {
        let order = match &shared_order {
            Some(order) => order.clone(),
            None => rank_for_attribute(group, j, config, None)?,
        };
        let votes: Vec<bool> = order
            .iter()
            .map(|&i| images[i].predictions[j].label())
            .collect();
        let confs: Vec<f64> = order
            .iter()
            .map(|&i| confidence(&images[i].predictions[j]))
            .collect();
        let label = majority_vote(&votes, &confs)?;
        let votes_pos = votes.iter().filter(|&&v| v).count();
        labels.push(label);
        provenance.push(AttributeProvenance {
            strategy: config.strategy,
            contributors: order.iter().map(|&i| images[i].image_id.clone()).collect(),
            votes_pos,
            votes_neg: votes.len() - votes_pos,
        });
    }
    Ok(SubjectAttributes {
        subject_id: group.subject_id().to_string(),
        labels,
        provenance,
    })
}

/// Consolidates every group in parallel; output follows dataset group order.
/// `quality`, when given, holds one score vector per group.
pub fn consolidate_dataset(
    dataset: &Dataset,
    config: &ConsolidationConfig,
    quality: Option<&[Vec<f64>]>,
) -> Result<Vec<SubjectAttributes>> {
    if let Some(q) = quality {
        if q.len() != dataset.n_subjects() {
            return Err(Error::Config(format!(
                "{} quality score vectors for {} subjects",
                q.len(),
                dataset.n_subjects()
            )));
        }
    }
    dataset
        .groups()
        .par_iter()
        .enumerate()
        .map(|(g, group)| consolidate_subject(group, config, quality.map(|q| q[g].as_slice())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelChange {
    pub image_id: String,
    pub subject_id: String,
    pub attribute: String,
    pub old: bool,
    pub new: bool,
}

#[derive(Debug, Clone)]
pub struct Correction {
    pub dataset: Dataset,
    pub changes: Vec<LabelChange>,
}

/// Overwrites per-image labels of stable attributes with the subject-level
/// decision. Transient attributes are never touched. Returns a new dataset and
/// the list of changed cells.
pub fn correct_labels(
    annotations: &Dataset,
    consolidated: &[SubjectAttributes],
    schema: &AttributeSchema,
) -> Result<Correction> {
    if annotations.schema().len() != schema.len() {
        return Err(Error::Schema(format!(
            "annotations have {} attributes, schema has {}",
            annotations.schema().len(),
            schema.len()
        )));
    }
    let by_subject: HashMap<&str, &SubjectAttributes> = consolidated
        .iter()
        .map(|s| (s.subject_id.as_str(), s))
        .collect();
    let mut changes = Vec::new();
    let mut records: Vec<ImageRecord> = Vec::with_capacity(annotations.n_images());
    for group in annotations.groups() {
        let subject = by_subject
            .get(group.subject_id())
            .ok_or_else(|| Error::MissingSubject(group.subject_id().to_string()))?;
        if subject.labels.len() != schema.len() {
            return Err(Error::SubjectMismatch(format!(
                "subject `{}` has {} consolidated labels, schema has {}",
                subject.subject_id,
                subject.labels.len(),
                schema.len()
            )));
        }
        for record in group.images() {
            let mut fixed = record.clone();
            for j in (0..schema.len()).filter(|&j| schema.is_stable(j)) {
                let old = record.predictions[j].label();
                let new = subject.labels[j];
                if old != new {
                    fixed.predictions[j] = AttributePrediction::from_label(new);
                    changes.push(LabelChange {
                        image_id: record.image_id.clone(),
                        subject_id: record.subject_id.clone(),
                        attribute: schema.name(j).to_string(),
                        old,
                        new,
                    });
                }
            }
            records.push(fixed);
        }
    }
    Ok(Correction {
        dataset: Dataset::new(annotations.schema().clone(), records)?,
        changes,
    })
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// `subject_id,<attr1>,…,<attrN>` with 0/1 cells.
pub fn write_consolidation_csv<W: Write>(
    schema: &AttributeSchema,
    subjects: &[SubjectAttributes],
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    let header: Vec<&str> = std::iter::once("subject_id")
        .chain(schema.names())
        .collect();
    w.write_record(&header)?;
    for s in subjects {
        let row: Vec<&str> = std::iter::once(s.subject_id.as_str())
            .chain(s.labels.iter().map(|&l| bit(l)))
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a consolidation CSV back; provenance is left empty.
pub fn read_consolidation_csv<R: Read>(
    source: R,
    schema: &AttributeSchema,
) -> Result<Vec<SubjectAttributes>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let header = reader.headers()?.clone();
    let expected: Vec<&str> = std::iter::once("subject_id")
        .chain(schema.names())
        .collect();
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(a, b)| a.trim() != *b) {
        return Err(Error::parse(
            1,
            "header",
            "consolidation header does not match the schema",
        ));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != expected.len() {
            return Err(Error::parse(
                line,
                "row",
                format!("{} columns, expected {}", row.len(), expected.len()),
            ));
        }
        let labels = (1..row.len())
            .map(|c| match row[c].trim() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(Error::parse(
                    line,
                    expected[c],
                    format!("label `{other}` is not 0 or 1"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(SubjectAttributes {
            subject_id: row[0].trim().to_string(),
            labels,
            provenance: Vec::new(),
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct ProvenanceEntry<'a> {
    attribute: &'a str,
    label: u8,
    contributors: &'a [String],
    votes_pos: usize,
    votes_neg: usize,
}

#[derive(Serialize)]
struct ProvenanceSubject<'a> {
    subject_id: &'a str,
    attributes: Vec<ProvenanceEntry<'a>>,
}

#[derive(Serialize)]
struct ProvenanceDoc<'a> {
    strategy: Strategy,
    top_k: usize,
    subjects: Vec<ProvenanceSubject<'a>>,
}

/// JSON sidecar recording, per subject and attribute, which images voted and
/// how.
pub fn write_provenance_json<W: Write>(
    schema: &AttributeSchema,
    config: &ConsolidationConfig,
    subjects: &[SubjectAttributes],
    mut out: W,
) -> Result<()> {
    let doc = ProvenanceDoc {
        strategy: config.strategy,
        top_k: config.top_k,
        subjects: subjects
            .iter()
            .map(|s| ProvenanceSubject {
                subject_id: &s.subject_id,
                attributes: s
                    .provenance
                    .iter()
                    .enumerate()
                    .map(|(j, p)| ProvenanceEntry {
                        attribute: schema.name(j),
                        label: u8::from(s.labels[j]),
                        contributors: &p.contributors,
                        votes_pos: p.votes_pos,
                        votes_neg: p.votes_neg,
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// `image_id,subject_id,attribute,old,new`.
pub fn write_changelog_csv<W: Write>(changes: &[LabelChange], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["image_id", "subject_id", "attribute", "old", "new"])?;
    for c in changes {
        w.write_record([
            c.image_id.as_str(),
            &c.subject_id,
            &c.attribute,
            bit(c.old),
            bit(c.new),
        ])?;
    }
    w.flush()?;
    Ok(())
}
