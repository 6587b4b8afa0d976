//! Inconsistency Measure (IM) of binary attribute decisions across the images
//! of a subject.
//!
//! For one subject with `N` images and one attribute, let `c_pos` and `c_neg`
//! count the positive and negative decisions. Then
//!
//! ```text
//! ratio = max(c_pos, c_neg) / N            in [0.5, 1]
//! im    = 100 - (ratio - 0.5) / 0.5 * 100  in [0, 100]
//! ```
//!
//! `im = 0` means every image agrees; `im = 100` means an even split. The
//! per-attribute summary is the unweighted mean of `im` over subjects.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Dataset, SubjectGroup};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttributeIm {
    pub c_pos: usize,
    pub c_neg: usize,
    pub ratio: f64,
    pub im: f64,
}

/// Whether a report was computed from classifier outputs or human labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImMode {
    Predictions,
    Labels,
}

impl ImMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ImMode::Predictions => "predictions",
            ImMode::Labels => "labels",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectIm {
    pub subject_id: String,
    pub n_images: usize,
    pub attributes: Vec<AttributeIm>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImReport {
    pub mode: ImMode,
    pub attribute_names: Vec<String>,
    /// One entry per included subject, in dataset group order.
    pub subjects: Vec<SubjectIm>,
    /// Mean IM per attribute over `subjects`, in schema order.
    pub per_attribute: Vec<f64>,
}

/// Options for [`dataset_im_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImOptions {
    /// Groups with fewer images are left out of the report entirely.
    pub min_group_size: usize,
}

impl Default for ImOptions {
    fn default() -> Self {
        Self { min_group_size: 1 }
    }
}

/// Counts positive and negative decisions for one attribute of a group.
pub fn count_outcomes(group: &SubjectGroup, attr_index: usize) -> Result<(usize, usize)> {
    group.check_attr(attr_index)?;
    let c_pos = group
        .images()
        .iter()
        .filter(|r| r.predictions[attr_index].label())
        .count();
    Ok((c_pos, group.len() - c_pos))
}

pub fn im_from_counts(c_pos: usize, c_neg: usize) -> Result<AttributeIm> {
    let n = c_pos + c_neg;
    if n == 0 {
        return Err(Error::EmptyGroup);
    }
    let ratio = c_pos.max(c_neg) as f64 / n as f64;
    let rescaled = (ratio - 0.5) / 0.5 * 100.0;
    // Rounding can push the result a hair outside the closed range.
    let im = (100.0 - rescaled).clamp(0.0, 100.0);
    Ok(AttributeIm {
        c_pos,
        c_neg,
        ratio,
        im,
    })
}

/// IM for every attribute of one group, in schema order.
pub fn subject_im(group: &SubjectGroup) -> Vec<AttributeIm> {
    (0..group.n_attributes())
        .map(|j| {
            let (c_pos, c_neg) = count_outcomes(group, j).expect("index within group width");
            im_from_counts(c_pos, c_neg).expect("groups are non-empty")
        })
        .collect()
}

pub fn dataset_im(dataset: &Dataset) -> Result<ImReport> {
    dataset_im_with(dataset, ImOptions::default())
}

/// Per-subject IM table plus the per-attribute mean over subjects.
///
/// Groups are processed in parallel on the ambient rayon pool; output order
/// and every floating-point sum follow dataset group order regardless of the
/// number of workers.
pub fn dataset_im_with(dataset: &Dataset, options: ImOptions) -> Result<ImReport> {
    build_report(dataset, options, ImMode::Predictions)
}

/// Same computation as [`dataset_im`] over annotation labels.
pub fn audit_labels(annotations: &Dataset) -> Result<ImReport> {
    audit_labels_with(annotations, ImOptions::default())
}

pub fn audit_labels_with(annotations: &Dataset, options: ImOptions) -> Result<ImReport> {
    build_report(annotations, options, ImMode::Labels)
}

fn build_report(dataset: &Dataset, options: ImOptions, mode: ImMode) -> Result<ImReport> {
    let subjects: Vec<SubjectIm> = dataset
        .groups()
        .par_iter()
        .filter(|g| g.len() >= options.min_group_size)
        .map(|g| SubjectIm {
            subject_id: g.subject_id().to_string(),
            n_images: g.len(),
            attributes: subject_im(g),
        })
        .collect();
    if subjects.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_attr = dataset.schema().len();
    let mut per_attribute = vec![0.0; n_attr];
    for subject in &subjects {
        for (acc, value) in per_attribute.iter_mut().zip(&subject.attributes) {
            *acc += value.im;
        }
    }
    let l = subjects.len() as f64;
    per_attribute.iter_mut().for_each(|v| *v /= l);
    Ok(ImReport {
        mode,
        attribute_names: dataset.schema().names().map(String::from).collect(),
        subjects,
        per_attribute,
    })
}

#[derive(Serialize)]
struct JsonMetadata<'a> {
    dataset_id: &'a str,
    mode: ImMode,
    timestamp: &'a str,
    n_subjects: usize,
    n_images: usize,
}

#[derive(Serialize)]
struct JsonSubjectRow<'a> {
    subject_id: &'a str,
    attribute: &'a str,
    #[serde(flatten)]
    value: &'a AttributeIm,
}

#[derive(Serialize)]
struct JsonSummaryRow<'a> {
    attribute: &'a str,
    mean_im: f64,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metadata: JsonMetadata<'a>,
    per_subject: Vec<JsonSubjectRow<'a>>,
    per_attribute: Vec<JsonSummaryRow<'a>>,
}

impl ImReport {
    pub fn mean_im(&self, attribute: &str) -> Option<f64> {
        let j = self.attribute_names.iter().position(|n| n == attribute)?;
        Some(self.per_attribute[j])
    }

    pub fn subject(&self, subject_id: &str) -> Option<&SubjectIm> {
        self.subjects.iter().find(|s| s.subject_id == subject_id)
    }

    /// Two CSV sections separated by a blank line: the per-subject table
    /// `subject_id,attribute,c_pos,c_neg,ratio,im` and the summary
    /// `attribute,mean_im`. Values are written at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        {
            let mut w = csv_writer(&mut out);
            w.write_record(["subject_id", "attribute", "c_pos", "c_neg", "ratio", "im"])?;
            for s in &self.subjects {
                for (name, v) in self.attribute_names.iter().zip(&s.attributes) {
                    w.write_record([
                        s.subject_id.as_str(),
                        name,
                        &v.c_pos.to_string(),
                        &v.c_neg.to_string(),
                        &v.ratio.to_string(),
                        &v.im.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
        out.write_all(b"\n")?;
        {
            let mut w = csv_writer(&mut out);
            w.write_record(["attribute", "mean_im"])?;
            for (name, mean) in self.attribute_names.iter().zip(&self.per_attribute) {
                w.write_record([name.as_str(), &mean.to_string()])?;
            }
            w.flush()?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(
        &self,
        mut out: W,
        dataset_id: &str,
        timestamp: &str,
    ) -> Result<()> {
        let report = JsonReport {
            metadata: JsonMetadata {
                dataset_id,
                mode: self.mode,
                timestamp,
                n_subjects: self.subjects.len(),
                n_images: self.subjects.iter().map(|s| s.n_images).sum(),
            },
            per_subject: self
                .subjects
                .iter()
                .flat_map(|s| {
                    self.attribute_names
                        .iter()
                        .zip(&s.attributes)
                        .map(move |(name, value)| JsonSubjectRow {
                            subject_id: &s.subject_id,
                            attribute: name,
                            value,
                        })
                })
                .collect(),
            per_attribute: self
                .attribute_names
                .iter()
                .zip(&self.per_attribute)
                .map(|(attribute, &mean_im)| JsonSummaryRow { attribute, mean_im })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut out, &report)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// Human-readable summary table with IM rounded to two decimals.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let width = self
            .attribute_names
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max("Attribute".len());
        writeln!(
            out,
            "Inconsistency measure over {} subjects ({})",
            self.subjects.len(),
            self.mode.as_str()
        )?;
        writeln!(out, "{:<width$}  {:>7}", "Attribute", "IM")?;
        for (name, mean) in self.attribute_names.iter().zip(&self.per_attribute) {
            writeln!(out, "{name:<width$}  {mean:>7.2}")?;
        }
        Ok(())
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}
