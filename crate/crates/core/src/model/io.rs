//! Readers and writers for prediction and annotation files.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AttributePrediction, AttributeSchema, Dataset, ImageRecord, PROBABILITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::quality::{Landmarks, QualityFeatures};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionFormat {
    Csv,
    Jsonl,
}

impl PredictionFormat {
    /// `.jsonl` / `.ndjson` select JSONL, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext)
                if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") =>
            {
                PredictionFormat::Jsonl
            }
            _ => PredictionFormat::Csv,
        }
    }
}

pub fn load_predictions<R: Read>(
    source: R,
    schema: &AttributeSchema,
    format: PredictionFormat,
) -> Result<Dataset> {
    let records = match format {
        PredictionFormat::Csv => read_prediction_csv(source, schema)?,
        PredictionFormat::Jsonl => read_prediction_jsonl(source, schema)?,
    };
    Dataset::new(schema.clone(), records)
}

/// Reads per-image binary labels. Each label becomes the degenerate pair
/// `(1, 0)` or `(0, 1)` so annotations flow through the prediction code paths.
pub fn load_annotations<R: Read>(source: R, schema: &AttributeSchema) -> Result<Dataset> {
    let mut reader = csv_reader(source);
    let header = reader.headers()?.clone();
    let expected: Vec<String> = ["image_id", "subject_id"]
        .into_iter()
        .map(String::from)
        .chain(schema.names().map(String::from))
        .collect();
    check_header(&header, &expected)?;

    let mut records = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for row in reader.records() {
        let row = row?;
        let line = line_of(&row);
        check_width(&row, expected.len(), line)?;
        let image_id = id_cell(&row, 0, line, "image_id")?;
        let subject_id = id_cell(&row, 1, line, "subject_id")?;
        if !ids.insert(image_id.clone()) {
            return Err(Error::parse(
                line,
                "image_id",
                format!("duplicate image_id `{image_id}`"),
            ));
        }
        let predictions = (0..schema.len())
            .map(|j| match row[j + 2].trim() {
                "1" => Ok(AttributePrediction::from_label(true)),
                "0" => Ok(AttributePrediction::from_label(false)),
                other => Err(Error::parse(
                    line,
                    schema.name(j),
                    format!("label `{other}` is not 0 or 1"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        records.push(ImageRecord::new(image_id, subject_id, predictions));
    }
    Dataset::new(schema.clone(), records)
}

fn read_prediction_csv<R: Read>(source: R, schema: &AttributeSchema) -> Result<Vec<ImageRecord>> {
    let mut reader = csv_reader(source);
    let header = reader.headers()?.clone();
    let expected = prediction_header(schema);
    check_header(&header, &expected)?;

    let mut records = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for row in reader.records() {
        let row = row?;
        let line = line_of(&row);
        check_width(&row, expected.len(), line)?;
        let image_id = id_cell(&row, 0, line, "image_id")?;
        let subject_id = id_cell(&row, 1, line, "subject_id")?;
        if !ids.insert(image_id.clone()) {
            return Err(Error::parse(
                line,
                "image_id",
                format!("duplicate image_id `{image_id}`"),
            ));
        }
        let mut predictions = Vec::with_capacity(schema.len());
        for j in 0..schema.len() {
            let p_pos = probability_cell(&row, 2 + 2 * j, line, &expected[2 + 2 * j])?;
            let p_neg = probability_cell(&row, 3 + 2 * j, line, &expected[3 + 2 * j])?;
            if (p_pos + p_neg - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(Error::parse(
                    line,
                    schema.name(j),
                    format!("p1 + p0 = {} differs from 1", p_pos + p_neg),
                ));
            }
            let pred = AttributePrediction::new(p_pos, p_neg)
                .map_err(|e| Error::parse(line, schema.name(j), e.to_string()))?;
            predictions.push(pred);
        }
        records.push(ImageRecord::new(image_id, subject_id, predictions));
    }
    Ok(records)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlIn {
    image_id: String,
    subject_id: String,
    #[serde(default)]
    source: Option<String>,
    p_pos: Vec<f64>,
    #[serde(default)]
    landmarks: Option<Landmarks>,
    #[serde(default)]
    quality: Option<QualityFeatures>,
}

#[derive(Serialize)]
struct JsonlOut<'a> {
    image_id: &'a str,
    subject_id: &'a str,
    source: Option<&'a str>,
    p_pos: Vec<f64>,
    landmarks: Option<&'a Landmarks>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quality: Option<&'a QualityFeatures>,
}

fn read_prediction_jsonl<R: Read>(source: R, schema: &AttributeSchema) -> Result<Vec<ImageRecord>> {
    let mut records = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for (idx, line) in BufReader::new(source).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: JsonlIn = serde_json::from_str(&line)
            .map_err(|e| Error::parse(line_no, "json", e.to_string()))?;
        if raw.image_id.is_empty() {
            return Err(Error::parse(line_no, "image_id", "empty identifier"));
        }
        if raw.subject_id.is_empty() {
            return Err(Error::parse(line_no, "subject_id", "empty identifier"));
        }
        if raw.p_pos.len() != schema.len() {
            return Err(Error::parse(
                line_no,
                "p_pos",
                format!(
                    "{} values, schema has {} attributes",
                    raw.p_pos.len(),
                    schema.len()
                ),
            ));
        }
        if !ids.insert(raw.image_id.clone()) {
            return Err(Error::parse(
                line_no,
                "image_id",
                format!("duplicate image_id `{}`", raw.image_id),
            ));
        }
        let predictions = raw
            .p_pos
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                AttributePrediction::from_positive(p)
                    .map_err(|e| Error::parse(line_no, format!("p_pos[{j}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(q) = &raw.quality {
            q.validate()
                .map_err(|e| Error::parse(line_no, "quality", e.to_string()))?;
        }
        records.push(ImageRecord {
            image_id: raw.image_id,
            subject_id: raw.subject_id,
            source: raw.source,
            predictions,
            landmarks: raw.landmarks,
            quality: raw.quality,
        });
    }
    Ok(records)
}

pub fn write_predictions_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(prediction_header(dataset.schema()))?;
    let mut row: Vec<String> = Vec::new();
    for record in dataset.records() {
        row.clear();
        row.push(record.image_id.clone());
        row.push(record.subject_id.clone());
        for p in &record.predictions {
            row.push(p.p_pos().to_string());
            row.push(p.p_neg().to_string());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_predictions_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for record in dataset.records() {
        let line = JsonlOut {
            image_id: &record.image_id,
            subject_id: &record.subject_id,
            source: record.source.as_deref(),
            p_pos: record
                .predictions
                .iter()
                .map(AttributePrediction::p_pos)
                .collect(),
            landmarks: record.landmarks.as_ref(),
            quality: record.quality.as_ref(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_annotations_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let header: Vec<&str> = ["image_id", "subject_id"]
        .into_iter()
        .chain(dataset.schema().names())
        .collect();
    writer.write_record(&header)?;
    for record in dataset.records() {
        let mut row = vec![record.image_id.as_str(), record.subject_id.as_str()];
        row.extend(
            record
                .predictions
                .iter()
                .map(|p| if p.label() { "1" } else { "0" }),
        );
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

fn prediction_header(schema: &AttributeSchema) -> Vec<String> {
    let mut header = vec!["image_id".to_string(), "subject_id".to_string()];
    for name in schema.names() {
        header.push(format!("{name}_p1"));
        header.push(format!("{name}_p0"));
    }
    header
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source)
}

fn check_header(found: &csv::StringRecord, expected: &[String]) -> Result<()> {
    if found.len() != expected.len() {
        return Err(Error::parse(
            1,
            "header",
            format!("{} columns, expected {}", found.len(), expected.len()),
        ));
    }
    for (got, want) in found.iter().zip(expected) {
        if got.trim() != want {
            return Err(Error::parse(
                1,
                want.as_str(),
                format!("header column is `{got}`"),
            ));
        }
    }
    Ok(())
}

fn check_width(row: &csv::StringRecord, expected: usize, line: usize) -> Result<()> {
    if row.len() != expected {
        return Err(Error::parse(
            line,
            "row",
            format!("{} columns, expected {}", row.len(), expected),
        ));
    }
    Ok(())
}

fn line_of(row: &csv::StringRecord) -> usize {
    row.position().map_or(0, |p| p.line() as usize)
}

fn id_cell(row: &csv::StringRecord, idx: usize, line: usize, field: &str) -> Result<String> {
    let value = row[idx].trim();
    if value.is_empty() {
        return Err(Error::parse(line, field, "empty identifier"));
    }
    Ok(value.to_string())
}

fn probability_cell(row: &csv::StringRecord, idx: usize, line: usize, field: &str) -> Result<f64> {
    let text = row[idx].trim();
    let p: f64 = text
        .parse()
        .map_err(|_| Error::parse(line, field, format!("`{text}` is not a number")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::parse(
            line,
            field,
            format!("probability {p} outside [0, 1]"),
        ));
    }
    Ok(p)
}
