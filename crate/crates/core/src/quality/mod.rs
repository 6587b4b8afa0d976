//! No-reference face image quality.
//!
//! Eleven heuristic features, each mapped into `[0, 1]` with 1 meaning "good",
//! are combined into one score by a plain weighted sum. The default weights are
//! brightness 0.6, contrast 0.6, focus 0.8, illumination 1.0, illumination
//! symmetry 0.9, sharpness 0.8, compression 0.7, pose 1.0, eyes openness 0.5,
//! mouth closeness 0.5 and face symmetry 1.0, so a perfect image scores 8.4.
//!
//! Pose, eyes openness and mouth closeness need facial landmarks; without them
//! they take the neutral value 0.5. Every constant used by the feature
//! definitions lives in [`QualityCalibration`].

mod image;
mod landmarks;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, ImageRecord, SubjectGroup};

pub use self::image::GrayImage;
pub use self::landmarks::{EyeLandmarks, Landmarks, MouthLandmarks, Point};

pub const FEATURE_NAMES: [&str; 11] = [
    "brightness",
    "contrast",
    "focus",
    "illumination",
    "illumination_symmetry",
    "sharpness",
    "compression",
    "pose",
    "eyes_openness",
    "mouth_closeness",
    "face_symmetry",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QualityFeatures {
    pub brightness: f64,
    pub contrast: f64,
    pub focus: f64,
    pub illumination: f64,
    pub illumination_symmetry: f64,
    pub sharpness: f64,
    pub compression: f64,
    pub pose: f64,
    pub eyes_openness: f64,
    pub mouth_closeness: f64,
    pub face_symmetry: f64,
}

impl QualityFeatures {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [f64; 11] {
        [
            self.brightness,
            self.contrast,
            self.focus,
            self.illumination,
            self.illumination_symmetry,
            self.sharpness,
            self.compression,
            self.pose,
            self.eyes_openness,
            self.mouth_closeness,
            self.face_symmetry,
        ]
    }

    pub fn from_array(v: [f64; 11]) -> Self {
        Self {
            brightness: v[0],
            contrast: v[1],
            focus: v[2],
            illumination: v[3],
            illumination_symmetry: v[4],
            sharpness: v[5],
            compression: v[6],
            pose: v[7],
            eyes_openness: v[8],
            mouth_closeness: v[9],
            face_symmetry: v[10],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in FEATURE_NAMES.iter().zip(self.to_array()) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "feature {name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// One non-negative weight per feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QualityWeights(QualityFeatures);

impl Default for QualityWeights {
    fn default() -> Self {
        Self(QualityFeatures {
            brightness: 0.6,
            contrast: 0.6,
            focus: 0.8,
            illumination: 1.0,
            illumination_symmetry: 0.9,
            sharpness: 0.8,
            compression: 0.7,
            pose: 1.0,
            eyes_openness: 0.5,
            mouth_closeness: 0.5,
            face_symmetry: 1.0,
        })
    }
}

impl QualityWeights {
    pub fn new(weights: QualityFeatures) -> Result<Self> {
        for (name, w) in FEATURE_NAMES.iter().zip(weights.to_array()) {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Config(format!(
                    "weight for {name} must be non-negative, got {w}"
                )));
            }
        }
        Ok(Self(weights))
    }

    /// Parses a JSON map feature name → weight. Omitted features keep their
    /// default weight.
    pub fn from_json_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let map: BTreeMap<String, f64> = serde_json::from_reader(reader)?;
        let mut values = Self::default().0.to_array();
        for (name, w) in map {
            let idx = FEATURE_NAMES
                .iter()
                .position(|&n| n == name)
                .ok_or_else(|| Error::Config(format!("unknown quality feature `{name}`")))?;
            values[idx] = w;
        }
        Self::new(QualityFeatures::from_array(values))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_reader(std::io::BufReader::new(file))
    }

    pub fn values(&self) -> &QualityFeatures {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.to_array().iter().sum()
    }
}

/// Constants behind the feature definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityCalibration {
    /// Ideal mean luma.
    pub brightness_target: f64,
    /// Standard deviation at which contrast saturates.
    pub contrast_reference: f64,
    /// `c` in `s / (s + c)` for the Laplacian variance.
    pub focus_scale: f64,
    /// `c` in `s / (s + c)` for the mean gradient magnitude.
    pub sharpness_scale: f64,
    pub illumination_low: f64,
    pub illumination_high: f64,
    /// Coding block size probed for blockiness.
    pub block_size: usize,
    /// Eye-line tilt that drives the roll penalty to 1.
    pub roll_range: f64,
    pub open_eye_aspect: f64,
    pub open_mouth_aspect: f64,
    /// Value for landmark features when landmarks are absent.
    pub neutral: f64,
    pub min_side: usize,
}

impl Default for QualityCalibration {
    fn default() -> Self {
        Self {
            brightness_target: 0.5,
            contrast_reference: 0.25,
            focus_scale: 0.005,
            sharpness_scale: 0.02,
            illumination_low: 0.1,
            illumination_high: 0.9,
            block_size: 8,
            roll_range: std::f64::consts::FRAC_PI_6,
            open_eye_aspect: 0.3,
            open_mouth_aspect: 0.5,
            neutral: 0.5,
            min_side: 8,
        }
    }
}

pub fn compute_features(
    image: &GrayImage,
    landmarks: Option<&Landmarks>,
) -> Result<QualityFeatures> {
    compute_features_with(image, landmarks, &QualityCalibration::default())
}

pub fn compute_features_with(
    image: &GrayImage,
    landmarks: Option<&Landmarks>,
    cal: &QualityCalibration,
) -> Result<QualityFeatures> {
    let (w, h) = (image.width(), image.height());
    if w < cal.min_side || h < cal.min_side {
        return Err(Error::DegenerateImage {
            width: w,
            height: h,
            min: cal.min_side,
        });
    }
    if let Some(lm) = landmarks {
        for (name, p) in lm.named_points() {
            let inside = (0.0..=w as f64).contains(&p.x) && (0.0..=h as f64).contains(&p.y);
            if !inside {
                return Err(Error::LandmarkOutOfBounds {
                    name,
                    x: p.x,
                    y: p.y,
                    width: w,
                    height: h,
                });
            }
        }
    }

    let (pose, eyes_openness, mouth_closeness) = match landmarks {
        Some(lm) => (
            pose(lm, cal),
            eyes_openness(lm, cal),
            mouth_closeness(lm, cal),
        ),
        None => (cal.neutral, cal.neutral, cal.neutral),
    };
    Ok(QualityFeatures {
        brightness: brightness(image, cal),
        contrast: contrast(image, cal),
        focus: focus(image, cal),
        illumination: illumination(image, cal),
        illumination_symmetry: illumination_symmetry(image),
        sharpness: sharpness(image, cal),
        compression: compression(image, cal),
        pose,
        eyes_openness,
        mouth_closeness,
        face_symmetry: face_symmetry(image),
    })
}

/// Weighted sum of the features, not normalized by the weight total.
pub fn quality_score(features: &QualityFeatures, weights: &QualityWeights) -> f64 {
    features
        .to_array()
        .iter()
        .zip(weights.0.to_array())
        .map(|(f, w)| f * w)
        .sum()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn squash(s: f64, c: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s / (s + c)
    }
}

fn brightness(img: &GrayImage, cal: &QualityCalibration) -> f64 {
    let t = cal.brightness_target;
    let span = t.max(1.0 - t);
    (1.0 - (mean(img.pixels()) - t).abs() / span).clamp(0.0, 1.0)
}

fn contrast(img: &GrayImage, cal: &QualityCalibration) -> f64 {
    let m = mean(img.pixels());
    let var = img.pixels().iter().map(|p| (p - m).powi(2)).sum::<f64>() / img.pixels().len() as f64;
    (var.sqrt() / cal.contrast_reference).clamp(0.0, 1.0)
}

/// Variance of the 4-neighbour Laplacian over interior pixels.
fn focus(img: &GrayImage, cal: &QualityCalibration) -> f64 {
    let (w, h) = (img.width(), img.height());
    let mut response = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            response.push(
                img.get(x - 1, y) + img.get(x + 1, y) + img.get(x, y - 1) + img.get(x, y + 1)
                    - 4.0 * img.get(x, y),
            );
        }
    }
    let m = mean(&response);
    let var = response.iter().map(|r| (r - m).powi(2)).sum::<f64>() / response.len() as f64;
    squash(var, cal.focus_scale)
}

/// Mean central-difference gradient magnitude over interior pixels.
fn sharpness(img: &GrayImage, cal: &QualityCalibration) -> f64 {
    let (w, h) = (img.width(), img.height());
    let mut total = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (img.get(x + 1, y) - img.get(x - 1, y)) / 2.0;
            let gy = (img.get(x, y + 1) - img.get(x, y - 1)) / 2.0;
            total += gx.hypot(gy);
        }
    }
    squash(total / ((w - 2) * (h - 2)) as f64, cal.sharpness_scale)
}

fn illumination(img: &GrayImage, cal: &QualityCalibration) -> f64 {
    let band = cal.illumination_low..=cal.illumination_high;
    img.pixels().iter().filter(|p| band.contains(p)).count() as f64 / img.pixels().len() as f64
}

/// Left half is columns `[0, w/2)`, right half `[w - w/2, w)`; an odd middle
/// column belongs to neither. The right half is summed in mirror order so a
/// mirror-symmetric image gives identical sums.
fn illumination_symmetry(img: &GrayImage) -> f64 {
    let (w, h) = (img.width(), img.height());
    let half = w / 2;
    let (mut left, mut right) = (0.0, 0.0);
    for y in 0..h {
        for x in 0..half {
            left += img.get(x, y);
            right += img.get(w - 1 - x, y);
        }
    }
    let n = (half * h) as f64;
    (1.0 - (left / n - right / n).abs()).clamp(0.0, 1.0)
}

/// One minus blockiness: how much larger luma steps are across coding block
/// boundaries than elsewhere.
fn compression(img: &GrayImage, cal: &QualityCalibration) -> f64 {
    let (w, h) = (img.width(), img.height());
    let b = cal.block_size.max(1);
    let (mut edge_sum, mut edge_n) = (0.0, 0usize);
    let (mut rest_sum, mut rest_n) = (0.0, 0usize);
    let mut add = |step: f64, boundary: bool| {
        if boundary {
            edge_sum += step;
            edge_n += 1;
        } else {
            rest_sum += step;
            rest_n += 1;
        }
    };
    for y in 0..h {
        for x in 0..w - 1 {
            add((img.get(x + 1, y) - img.get(x, y)).abs(), (x + 1) % b == 0);
        }
    }
    for y in 0..h - 1 {
        for x in 0..w {
            add((img.get(x, y + 1) - img.get(x, y)).abs(), (y + 1) % b == 0);
        }
    }
    if edge_n == 0 || rest_n == 0 {
        return 1.0;
    }
    let blockiness = (edge_sum / edge_n as f64 - rest_sum / rest_n as f64).clamp(0.0, 1.0);
    1.0 - blockiness
}

fn pose(lm: &Landmarks, cal: &QualityCalibration) -> f64 {
    let left = lm.left_eye.center();
    let right = lm.right_eye.center();
    let interocular = left.distance(right);
    if interocular <= f64::EPSILON {
        return 0.0;
    }
    let yaw = ((lm.nose_tip.distance(left) - lm.nose_tip.distance(right)).abs() / interocular)
        .clamp(0.0, 1.0);
    // Tilt of the eye line, folded so that either eye ordering gives the same angle.
    let angle = (right.y - left.y).atan2(right.x - left.x).abs();
    let tilt = angle.min(std::f64::consts::PI - angle);
    let roll = (tilt / cal.roll_range).clamp(0.0, 1.0);
    1.0 - yaw.max(roll)
}

fn eyes_openness(lm: &Landmarks, cal: &QualityCalibration) -> f64 {
    let open = |ratio: f64| (ratio / cal.open_eye_aspect).clamp(0.0, 1.0);
    (open(lm.left_eye.aspect_ratio()) + open(lm.right_eye.aspect_ratio())) / 2.0
}

fn mouth_closeness(lm: &Landmarks, cal: &QualityCalibration) -> f64 {
    1.0 - (lm.mouth.aspect_ratio() / cal.open_mouth_aspect).clamp(0.0, 1.0)
}

fn face_symmetry(img: &GrayImage) -> f64 {
    let w = img.width();
    let mut total = 0.0;
    for y in 0..img.height() {
        for x in 0..w {
            total += (img.get(x, y) - img.get(w - 1 - x, y)).abs();
        }
    }
    (1.0 - total / img.pixels().len() as f64).clamp(0.0, 1.0)
}

/// Scores images of a group and resolves where their pixels live.
#[derive(Debug, Clone, Default)]
pub struct QualityScorer {
    pub weights: QualityWeights,
    pub calibration: QualityCalibration,
    /// Directory that relative `source` paths resolve against. Records without
    /// a source are looked up as `<image_root>/<image_id>.pgm`.
    pub image_root: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredImage {
    /// Position of the image within its group.
    pub index: usize,
    pub image_id: String,
    pub features: QualityFeatures,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageFailure {
    pub index: usize,
    pub image_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupQuality {
    pub subject_id: String,
    /// Scored images, best first; equal scores keep input order.
    pub ranked: Vec<ScoredImage>,
    pub failures: Vec<ImageFailure>,
}

impl GroupQuality {
    /// Scores indexed by input position. Images that failed to score get
    /// negative infinity so they rank last.
    pub fn scores_by_index(&self, n_images: usize) -> Vec<f64> {
        let mut scores = vec![f64::NEG_INFINITY; n_images];
        for s in &self.ranked {
            scores[s.index] = s.score;
        }
        scores
    }
}

impl QualityScorer {
    pub fn new(weights: QualityWeights) -> Self {
        Self {
            weights,
            ..Self::default()
        }
    }

    pub fn with_image_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.image_root = Some(root.into());
        self
    }

    pub fn resolve_path(&self, record: &ImageRecord) -> Option<PathBuf> {
        match (&record.source, &self.image_root) {
            (Some(src), Some(root)) if Path::new(src).is_relative() => Some(root.join(src)),
            (Some(src), _) => Some(PathBuf::from(src)),
            (None, Some(root)) => Some(root.join(format!("{}.pgm", record.image_id))),
            (None, None) => None,
        }
    }

    /// Cached features when the record carries them; otherwise decodes the
    /// image, taking landmarks from the record or a `<image>.json` sidecar.
    pub fn features_for(&self, record: &ImageRecord) -> Result<QualityFeatures> {
        if let Some(cached) = record.quality {
            cached.validate()?;
            return Ok(cached);
        }
        let path = self.resolve_path(record).ok_or_else(|| Error::Image {
            path: PathBuf::from(&record.image_id),
            message: "record has no source and no image root was given".into(),
        })?;
        let image = GrayImage::load(&path)?;
        let landmarks = match record.landmarks {
            Some(lm) => Some(lm),
            None => read_sidecar(&path)?,
        };
        compute_features_with(&image, landmarks.as_ref(), &self.calibration)
    }
}

fn read_sidecar(image_path: &Path) -> Result<Option<Landmarks>> {
    let sidecar = image_path.with_extension("json");
    if !sidecar.is_file() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Error::Image {
            path: sidecar,
            message: format!("bad landmark sidecar: {e}"),
        })
}

/// Scores every image of a group and ranks them best first. Individual
/// failures are recorded; the group fails only when no image could be scored.
pub fn score_group(group: &SubjectGroup, scorer: &QualityScorer) -> Result<GroupQuality> {
    let mut ranked = Vec::with_capacity(group.len());
    let mut failures = Vec::new();
    for (index, record) in group.images().iter().enumerate() {
        match scorer.features_for(record) {
            Ok(features) => ranked.push(ScoredImage {
                index,
                image_id: record.image_id.clone(),
                features,
                score: quality_score(&features, &scorer.weights),
            }),
            Err(e) => {
                log::warn!("quality: skipping image `{}`: {e}", record.image_id);
                failures.push(ImageFailure {
                    index,
                    image_id: record.image_id.clone(),
                    message: e.to_string(),
                });
            }
        }
    }
    if ranked.is_empty() {
        return Err(Error::AllImagesFailed {
            subject: group.subject_id().to_string(),
        });
    }
    // Stable sort: equal scores keep input order.
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(GroupQuality {
        subject_id: group.subject_id().to_string(),
        ranked,
        failures,
    })
}

/// [`score_group`] over every group, in parallel, in dataset order.
pub fn score_dataset(dataset: &Dataset, scorer: &QualityScorer) -> Result<Vec<GroupQuality>> {
    dataset
        .groups()
        .par_iter()
        .map(|g| score_group(g, scorer))
        .collect()
}

/// `image_id,subject_id,<11 features>,score,rank` with rank 1 = best in group.
pub fn write_quality_csv<W: Write>(groups: &[GroupQuality], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["image_id", "subject_id"];
    header.extend(FEATURE_NAMES);
    header.extend(["score", "rank"]);
    w.write_record(&header)?;
    for g in groups {
        for (rank, s) in g.ranked.iter().enumerate() {
            let mut row = vec![s.image_id.clone(), g.subject_id.clone()];
            row.extend(s.features.to_array().iter().map(f64::to_string));
            row.push(s.score.to_string());
            row.push((rank + 1).to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checkerboard(size: usize, cell: usize) -> GrayImage {
        GrayImage::from_fn(size, size, |x, y| {
            if (x / cell + y / cell).is_multiple_of(2) {
                0.8
            } else {
                0.2
            }
        })
    }

    fn face_landmarks() -> Landmarks {
        Landmarks {
            left_eye: EyeLandmarks {
                outer: Point::new(10.0, 20.0),
                inner: Point::new(20.0, 20.0),
                top: Point::new(15.0, 18.5),
                bottom: Point::new(15.0, 21.5),
            },
            right_eye: EyeLandmarks {
                outer: Point::new(40.0, 20.0),
                inner: Point::new(30.0, 20.0),
                top: Point::new(35.0, 18.5),
                bottom: Point::new(35.0, 21.5),
            },
            mouth: MouthLandmarks {
                left: Point::new(17.0, 42.0),
                right: Point::new(33.0, 42.0),
                top: Point::new(25.0, 41.0),
                bottom: Point::new(25.0, 43.0),
            },
            nose_tip: Point::new(25.0, 30.0),
        }
    }

    #[test]
    fn table_weights() {
        let w = QualityWeights::default();
        assert_eq!(
            quality_score(&QualityFeatures::from_array([1.0; 11]), &w),
            8.4
        );
        assert_eq!(
            quality_score(&QualityFeatures::from_array([0.0; 11]), &w),
            0.0
        );
        let mut only_illum = [0.0; 11];
        only_illum[3] = 1.0;
        assert_eq!(
            quality_score(&QualityFeatures::from_array(only_illum), &w),
            1.0
        );
    }

    #[test]
    fn weights_file_overrides_and_defaults() {
        let w = QualityWeights::from_json_reader(&br#"{"pose": 2.0}"#[..]).unwrap();
        assert_eq!(w.values().pose, 2.0);
        assert_eq!(w.values().contrast, 0.6);
        assert!(QualityWeights::from_json_reader(&br#"{"posture": 2.0}"#[..]).is_err());
        assert!(QualityWeights::from_json_reader(&br#"{"pose": -1}"#[..]).is_err());
    }

    #[test]
    fn uniform_mid_gray() {
        let img = GrayImage::from_fn(16, 16, |_, _| 0.5);
        let f = compute_features(&img, None).unwrap();
        assert_eq!(f.brightness, 1.0);
        assert_eq!(f.contrast, 0.0);
        assert_eq!(f.illumination_symmetry, 1.0);
        assert_eq!(f.face_symmetry, 1.0);
        assert_eq!(f.illumination, 1.0);
        assert_eq!(f.focus, 0.0);
        assert_eq!(f.sharpness, 0.0);
        assert_eq!(f.compression, 1.0);
        assert_eq!(
            (f.pose, f.eyes_openness, f.mouth_closeness),
            (0.5, 0.5, 0.5)
        );
    }

    #[test]
    fn blur_lowers_focus_and_sharpness() {
        let sharp = checkerboard(32, 2);
        let blurred = sharp.box_blur(2);
        let fs = compute_features(&sharp, None).unwrap();
        let fb = compute_features(&blurred, None).unwrap();
        assert!(fs.focus > fb.focus);
        assert!(fs.sharpness > fb.sharpness);
    }

    #[test]
    fn degenerate_images_rejected() {
        let tiny = GrayImage::from_fn(7, 20, |_, _| 0.5);
        assert!(matches!(
            compute_features(&tiny, None),
            Err(Error::DegenerateImage { width: 7, .. })
        ));
    }

    #[test]
    fn blocky_image_has_lower_compression_score() {
        // Flat 8x8 tiles with distinct levels: every step sits on a block edge.
        let blocky = GrayImage::from_fn(32, 32, |x, y| {
            0.3 + 0.1 * (((x / 8) + 2 * (y / 8)) % 4) as f64
        });
        let smooth = GrayImage::from_fn(32, 32, |x, y| 0.3 + 0.01 * (x + y) as f64 / 2.0);
        let fb = compute_features(&blocky, None).unwrap();
        let fs = compute_features(&smooth, None).unwrap();
        assert!(fb.compression < fs.compression);
        assert!(fs.compression > 0.99);
    }

    #[test]
    fn landmark_features() {
        let img = GrayImage::from_fn(50, 50, |_, _| 0.5);
        let lm = face_landmarks();
        let f = compute_features(&img, Some(&lm)).unwrap();
        // Frontal, level eyes.
        assert!((f.pose - 1.0).abs() < 1e-12);
        // Eye aspect 3/10 = 0.3 -> fully open.
        assert!((f.eyes_openness - 1.0).abs() < 1e-12);
        // Mouth aspect 2/16 = 0.125 -> 1 - 0.25.
        assert!((f.mouth_closeness - 0.75).abs() < 1e-12);

        let mut turned = lm;
        turned.nose_tip = Point::new(30.0, 30.0);
        let ft = compute_features(&img, Some(&turned)).unwrap();
        assert!(ft.pose < f.pose);

        let mut outside = lm;
        outside.nose_tip = Point::new(60.0, 30.0);
        assert!(matches!(
            compute_features(&img, Some(&outside)),
            Err(Error::LandmarkOutOfBounds {
                name: "nose_tip",
                ..
            })
        ));
    }

    #[test]
    fn roll_is_symmetric_in_eye_order() {
        let img = GrayImage::from_fn(60, 60, |_, _| 0.5);
        let mut lm = face_landmarks();
        std::mem::swap(&mut lm.left_eye, &mut lm.right_eye);
        let f = compute_features(&img, Some(&lm)).unwrap();
        assert!((f.pose - 1.0).abs() < 1e-12);
    }

    #[test]
    fn group_ranking_and_failures() {
        use crate::model::ImageRecord;
        let mut good = ImageRecord::new("a", "S", vec![]);
        good.quality = Some(QualityFeatures::from_array([0.5; 11]));
        let mut better = ImageRecord::new("b", "S", vec![]);
        better.quality = Some(QualityFeatures::from_array([0.9; 11]));
        let mut same = ImageRecord::new("c", "S", vec![]);
        same.quality = Some(QualityFeatures::from_array([0.5; 11]));
        let missing = ImageRecord::new("d", "S", vec![]);
        let group = SubjectGroup::new("S", vec![good, better, same, missing]).unwrap();
        let q = score_group(&group, &QualityScorer::default()).unwrap();
        let order: Vec<_> = q.ranked.iter().map(|s| s.index).collect();
        assert_eq!(order, [1, 0, 2]);
        assert_eq!(q.failures.len(), 1);
        assert_eq!(q.scores_by_index(4)[3], f64::NEG_INFINITY);

        let lone = SubjectGroup::new("T", vec![ImageRecord::new("e", "T", vec![])]).unwrap();
        assert!(matches!(
            score_group(&lone, &QualityScorer::default()),
            Err(Error::AllImagesFailed { .. })
        ));
    }
}
