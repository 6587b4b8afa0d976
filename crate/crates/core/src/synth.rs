//! Synthetic subjects with known attributes and noisy per-image predictions,
//! plus the harness that measures how well each consolidation setting
//! recovers the truth.
//!
//! Every image label is the subject's true label flipped with probability
//! `flip_prob`. The prediction's confidence `|p_pos - p_neg|` is drawn from
//! one Beta distribution for correct labels and another for flipped ones, so
//! confidence carries information about correctness. Each image also gets a
//! degradation level that controls a procedurally degraded fixture image; its
//! quality features are computed by the regular quality code and cached on the
//! record. `quality_link` couples the degradation level to the flip
//! probability.
//!
//! Randomness comes from ChaCha8 with one stream per subject derived from the
//! master seed, so results do not depend on how many threads run.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Beta;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consolidate::{consolidate_dataset, ConsolidationConfig, Strategy, SubjectAttributes};
use crate::error::{Error, Result};
use crate::model::{AttributePrediction, AttributeSchema, Dataset, ImageRecord};
use crate::quality::{compute_features, GrayImage, QualityFeatures};

pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.9/stream-per-subject";

/// Number of distinct degradation levels.
pub const DEGRADATION_LEVELS: usize = 64;

const FIXTURE_SIDE: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    fn distribution(&self) -> Result<Beta<f64>> {
        Beta::new(self.alpha, self.beta)
            .map_err(|e| Error::Config(format!("beta({}, {}): {e}", self.alpha, self.beta)))
    }
}

/// Flip probability shared by all attributes or given per attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlipProb {
    Uniform(f64),
    PerAttribute(Vec<f64>),
}

impl FlipProb {
    fn expand(&self, n_attributes: usize) -> Result<Vec<f64>> {
        match self {
            FlipProb::Uniform(p) => Ok(vec![*p; n_attributes]),
            FlipProb::PerAttribute(v) if v.len() == n_attributes => Ok(v.clone()),
            FlipProb::PerAttribute(v) => Err(Error::Config(format!(
                "{} flip probabilities for {n_attributes} attributes",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Per-attribute probability in `[0, 1)` that an image label is wrong.
    pub flip_prob: Vec<f64>,
    pub conf_correct: BetaParams,
    pub conf_wrong: BetaParams,
    /// In `[0, 1]`; 0 makes flips independent of image quality.
    pub quality_link: f64,
}

pub const DEFAULT_CONF_CORRECT: BetaParams = BetaParams {
    alpha: 8.0,
    beta: 2.0,
};
pub const DEFAULT_CONF_WRONG: BetaParams = BetaParams {
    alpha: 2.0,
    beta: 8.0,
};

impl NoiseModel {
    pub fn uniform(n_attributes: usize, flip_prob: f64) -> Self {
        Self {
            flip_prob: vec![flip_prob; n_attributes],
            conf_correct: DEFAULT_CONF_CORRECT,
            conf_wrong: DEFAULT_CONF_WRONG,
            quality_link: 0.0,
        }
    }

    pub fn validate(&self, n_attributes: usize) -> Result<()> {
        if self.flip_prob.len() != n_attributes {
            return Err(Error::Config(format!(
                "{} flip probabilities for {n_attributes} attributes",
                self.flip_prob.len()
            )));
        }
        if let Some(p) = self.flip_prob.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::Config(format!(
                "flip probability {p} outside [0, 1)"
            )));
        }
        if !(0.0..=1.0).contains(&self.quality_link) {
            return Err(Error::Config(format!(
                "quality_link {} outside [0, 1]",
                self.quality_link
            )));
        }
        self.conf_correct.distribution()?;
        self.conf_wrong.distribution()?;
        Ok(())
    }

    /// Flip probability of one image given its degradation `d` in `[0, 1]`.
    /// Averaged over uniform `d` this equals the base probability.
    pub fn effective_flip(&self, attr: usize, degradation: f64) -> f64 {
        let p = self.flip_prob[attr];
        (p * (1.0 + self.quality_link * (2.0 * degradation - 1.0))).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubjectTruth {
    pub subject_id: String,
    pub labels: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TruthTable {
    pub subjects: Vec<SubjectTruth>,
}

/// Symmetric face-like test pattern, blurred and darkened according to the
/// degradation level (0 = pristine).
pub fn fixture_image(level: usize) -> GrayImage {
    let d = level.min(DEGRADATION_LEVELS - 1) as f64 / (DEGRADATION_LEVELS - 1) as f64;
    let side = FIXTURE_SIDE as f64;
    let c = (side - 1.0) / 2.0;
    let base = GrayImage::from_fn(FIXTURE_SIDE, FIXTURE_SIDE, |x, y| {
        let (fx, fy) = (x as f64 - c, y as f64 - c);
        let in_face = (fx / (0.38 * side)).powi(2) + (fy / (0.46 * side)).powi(2) <= 1.0;
        if !in_face {
            return 0.25 + 0.1 * ((x / 3 + y / 3) % 2) as f64;
        }
        let eye =
            ((fx.abs() - 0.17 * side).powi(2) + (fy + 0.12 * side).powi(2)).sqrt() < 0.06 * side;
        let mouth = fy > 0.18 * side && fy < 0.23 * side && fx.abs() < 0.15 * side;
        if eye || mouth {
            0.15
        } else {
            0.7 + 0.08 * ((fy * 0.9).sin() * (fx.abs() * 0.7).cos())
        }
    });
    let radius = (3.0 * d).round() as usize;
    let darken = 1.0 - 0.6 * d;
    base.box_blur(radius).map(|p| p * darken)
}

/// Quality features of every fixture level, index = level.
pub fn fixture_features() -> Result<Vec<QualityFeatures>> {
    (0..DEGRADATION_LEVELS)
        .map(|level| compute_features(&fixture_image(level), None))
        .collect()
}

/// Draws `n_subjects` subjects with `images_per_subject` images each.
pub fn generate(
    schema: &AttributeSchema,
    n_subjects: usize,
    images_per_subject: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<(TruthTable, Dataset)> {
    if n_subjects == 0 || images_per_subject == 0 {
        return Err(Error::Config(
            "n_subjects and images_per_subject must both be at least 1".into(),
        ));
    }
    noise.validate(schema.len())?;
    let features = fixture_features()?;
    let correct = noise.conf_correct.distribution()?;
    let wrong = noise.conf_wrong.distribution()?;
    let n_attr = schema.len();
    let width = (n_subjects - 1).to_string().len();

    let subjects: Vec<(SubjectTruth, Vec<ImageRecord>)> = (0..n_subjects)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let subject_id = format!("s{s:0width$}");
            let truth: Vec<bool> = (0..n_attr).map(|_| rng.random_bool(0.5)).collect();
            let images = (0..images_per_subject)
                .map(|i| {
                    let level = rng.random_range(0..DEGRADATION_LEVELS);
                    let d = level as f64 / (DEGRADATION_LEVELS - 1) as f64;
                    let predictions = (0..n_attr)
                        .map(|j| {
                            let flipped = rng.random_bool(noise.effective_flip(j, d));
                            let conf: f64 = if flipped {
                                rng.sample(wrong)
                            } else {
                                rng.sample(correct)
                            };
                            let label = truth[j] != flipped;
                            let p_pos = if label {
                                (1.0 + conf) / 2.0
                            } else {
                                (1.0 - conf) / 2.0
                            };
                            AttributePrediction::new(p_pos, 1.0 - p_pos)
                                .expect("generated pair is valid")
                        })
                        .collect();
                    let mut record = ImageRecord::new(
                        format!("{subject_id}_{i}"),
                        subject_id.clone(),
                        predictions,
                    );
                    record.source = Some(format!("fixture_{level:02}.pgm"));
                    record.quality = Some(features[level]);
                    record
                })
                .collect();
            (
                SubjectTruth {
                    subject_id,
                    labels: truth,
                },
                images,
            )
        })
        .collect();

    let mut truth = TruthTable::default();
    let mut records = Vec::with_capacity(n_subjects * images_per_subject);
    for (t, images) in subjects {
        truth.subjects.push(t);
        records.extend(images);
    }
    Ok((truth, Dataset::new(schema.clone(), records)?))
}

/// Fraction of (subject, attribute) pairs where the consolidated label equals
/// the truth.
pub fn evaluate(consolidated: &[SubjectAttributes], truth: &TruthTable) -> Result<f64> {
    if consolidated.len() != truth.subjects.len() {
        return Err(Error::SubjectMismatch(format!(
            "{} consolidated subjects, {} in truth table",
            consolidated.len(),
            truth.subjects.len()
        )));
    }
    let (mut hits, mut total) = (0usize, 0usize);
    for (c, t) in consolidated.iter().zip(&truth.subjects) {
        if c.subject_id != t.subject_id || c.labels.len() != t.labels.len() {
            return Err(Error::SubjectMismatch(format!(
                "`{}` does not line up with `{}`",
                c.subject_id, t.subject_id
            )));
        }
        hits += c
            .labels
            .iter()
            .zip(&t.labels)
            .filter(|(a, b)| a == b)
            .count();
        total += t.labels.len();
    }
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(hits as f64 / total as f64)
}

/// Mean per-image accuracy before any aggregation.
pub fn baseline_accuracy(dataset: &Dataset, truth: &TruthTable) -> Result<f64> {
    if dataset.n_subjects() != truth.subjects.len() {
        return Err(Error::SubjectMismatch(format!(
            "{} subjects in dataset, {} in truth table",
            dataset.n_subjects(),
            truth.subjects.len()
        )));
    }
    let (mut hits, mut total) = (0usize, 0usize);
    for (group, t) in dataset.groups().iter().zip(&truth.subjects) {
        if group.subject_id() != t.subject_id {
            return Err(Error::SubjectMismatch(format!(
                "`{}` does not line up with `{}`",
                group.subject_id(),
                t.subject_id
            )));
        }
        for record in group.images() {
            hits += record
                .predictions
                .iter()
                .zip(&t.labels)
                .filter(|(p, &l)| p.label() == l)
                .count();
            total += t.labels.len();
        }
    }
    Ok(hits as f64 / total as f64)
}

fn default_subjects() -> usize {
    200
}
fn default_images() -> usize {
    10
}
fn default_flip() -> FlipProb {
    FlipProb::Uniform(0.2)
}
fn default_conf_correct() -> BetaParams {
    DEFAULT_CONF_CORRECT
}
fn default_conf_wrong() -> BetaParams {
    DEFAULT_CONF_WRONG
}
fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Confidence, Strategy::Quality]
}
fn default_ks() -> Vec<usize> {
    vec![1, 3, 5]
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Experiment grid, as read from the JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_subjects")]
    pub n_subjects: usize,
    #[serde(default = "default_images")]
    pub images_per_subject: usize,
    #[serde(default = "default_flip")]
    pub flip_prob: FlipProb,
    #[serde(default = "default_conf_correct")]
    pub conf_correct: BetaParams,
    #[serde(default = "default_conf_wrong")]
    pub conf_wrong: BetaParams,
    #[serde(default)]
    pub quality_link: f64,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn noise(&self, n_attributes: usize) -> Result<NoiseModel> {
        let noise = NoiseModel {
            flip_prob: self.flip_prob.expand(n_attributes)?,
            conf_correct: self.conf_correct,
            conf_wrong: self.conf_wrong,
            quality_link: self.quality_link,
        };
        noise.validate(n_attributes)?;
        Ok(noise)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub strategy: Strategy,
    pub k: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub baseline_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub strategy: Strategy,
    pub k: usize,
    pub mean_accuracy: f64,
    pub mean_baseline_accuracy: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rng: &'static str,
    pub rows: Vec<ExperimentRow>,
}

/// Runs every (strategy, k) of the grid on a fresh synthetic dataset per seed.
pub fn run_experiment(
    schema: &AttributeSchema,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if config.strategies.is_empty() || config.ks.is_empty() || config.seeds.is_empty() {
        return Err(Error::Config(
            "strategies, ks and seeds must be non-empty".into(),
        ));
    }
    let noise = config.noise(schema.len())?;
    let mut rows = Vec::new();
    for &seed in &config.seeds {
        let (truth, dataset) = generate(
            schema,
            config.n_subjects,
            config.images_per_subject,
            &noise,
            seed,
        )?;
        let baseline = baseline_accuracy(&dataset, &truth)?;
        for &strategy in &config.strategies {
            for &k in &config.ks {
                let cc = ConsolidationConfig::new(strategy, k)?;
                let consolidated = consolidate_dataset(&dataset, &cc, None)?;
                rows.push(ExperimentRow {
                    strategy,
                    k,
                    seed,
                    accuracy: evaluate(&consolidated, &truth)?,
                    baseline_accuracy: baseline,
                });
            }
        }
    }
    Ok(ExperimentReport {
        rng: RNG_ALGORITHM,
        rows,
    })
}

impl ExperimentReport {
    /// Mean over seeds per (strategy, k), in grid order.
    pub fn summary(&self) -> Vec<ExperimentSummary> {
        let mut out: Vec<ExperimentSummary> = Vec::new();
        for row in &self.rows {
            match out
                .iter_mut()
                .find(|s| s.strategy == row.strategy && s.k == row.k)
            {
                Some(s) => {
                    s.mean_accuracy += row.accuracy;
                    s.mean_baseline_accuracy += row.baseline_accuracy;
                    s.n_seeds += 1;
                }
                None => out.push(ExperimentSummary {
                    strategy: row.strategy,
                    k: row.k,
                    mean_accuracy: row.accuracy,
                    mean_baseline_accuracy: row.baseline_accuracy,
                    n_seeds: 1,
                }),
            }
        }
        for s in &mut out {
            s.mean_accuracy /= s.n_seeds as f64;
            s.mean_baseline_accuracy /= s.n_seeds as f64;
        }
        out
    }

    pub fn mean_accuracy(&self, strategy: Strategy, k: usize) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.strategy == strategy && s.k == k)
            .map(|s| s.mean_accuracy)
    }

    /// `# rng: …` comment line, then `strategy,k,seed,accuracy,baseline_accuracy`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# rng: {}", self.rng)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["strategy", "k", "seed", "accuracy", "baseline_accuracy"])?;
        for r in &self.rows {
            w.write_record([
                r.strategy.as_str(),
                &r.k.to_string(),
                &r.seed.to_string(),
                &r.accuracy.to_string(),
                &r.baseline_accuracy.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            rng: &'a str,
            rows: &'a [ExperimentRow],
            summary: Vec<ExperimentSummary>,
        }
        let doc = Doc {
            rng: self.rng,
            rows: &self.rows,
            summary: self.summary(),
        };
        serde_json::to_writer_pretty(&mut out, &doc)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{:<10}  {:>3}  {:>9}  {:>9}  {:>5}",
            "strategy", "k", "accuracy", "baseline", "seeds"
        )?;
        for s in self.summary() {
            writeln!(
                out,
                "{:<10}  {:>3}  {:>8.2}%  {:>8.2}%  {:>5}",
                s.strategy.as_str(),
                s.k,
                100.0 * s.mean_accuracy,
                100.0 * s.mean_baseline_accuracy,
                s.n_seeds
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inconsistency::dataset_im;

    fn small_schema() -> AttributeSchema {
        AttributeSchema::celeba()
    }

    #[test]
    fn zero_noise_is_perfectly_consistent() {
        let schema = small_schema();
        let noise = NoiseModel::uniform(schema.len(), 0.0);
        let (truth, ds) = generate(&schema, 20, 6, &noise, 3).unwrap();
        for (g, t) in ds.groups().iter().zip(&truth.subjects) {
            for r in g.images() {
                let labels: Vec<bool> = r.predictions.iter().map(|p| p.label()).collect();
                assert_eq!(labels, t.labels);
            }
        }
        let report = dataset_im(&ds).unwrap();
        assert!(report.per_attribute.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_dataset() {
        let schema = small_schema();
        let noise = NoiseModel::uniform(schema.len(), 0.3);
        let a = generate(&schema, 15, 4, &noise, 42).unwrap();
        let b = generate(&schema, 15, 4, &noise, 42).unwrap();
        assert_eq!(a, b);
        let c = generate(&schema, 15, 4, &noise, 43).unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let schema = small_schema();
        let noise = NoiseModel::uniform(schema.len(), 0.25);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generate(&schema, 50, 5, &noise, 7).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn probabilities_carry_the_drawn_confidence() {
        let schema = small_schema();
        let noise = NoiseModel::uniform(schema.len(), 0.3);
        let (truth, ds) = generate(&schema, 10, 5, &noise, 1).unwrap();
        for (g, t) in ds.groups().iter().zip(&truth.subjects) {
            for r in g.images() {
                for (p, &tl) in r.predictions.iter().zip(&t.labels) {
                    assert!((p.p_pos() + p.p_neg() - 1.0).abs() < 1e-12);
                    let c = (p.p_pos() - p.p_neg()).abs();
                    assert!((0.0..=1.0).contains(&c));
                    // Label sits on the side of the larger probability.
                    assert_eq!(p.label(), p.p_pos() >= p.p_neg());
                    let _ = tl;
                }
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        let schema = small_schema();
        let noise = NoiseModel::uniform(schema.len(), 0.2);
        assert!(generate(&schema, 0, 3, &noise, 0).is_err());
        assert!(generate(&schema, 3, 0, &noise, 0).is_err());
        assert!(generate(&schema, 3, 3, &NoiseModel::uniform(schema.len(), 1.0), 0).is_err());
        assert!(generate(&schema, 3, 3, &NoiseModel::uniform(3, 0.1), 0).is_err());
        let mut bad = noise.clone();
        bad.quality_link = 1.5;
        assert!(generate(&schema, 3, 3, &bad, 0).is_err());
    }

    #[test]
    fn fixture_quality_decreases_with_degradation() {
        let feats = fixture_features().unwrap();
        let w = crate::quality::QualityWeights::default();
        let scores: Vec<f64> = feats
            .iter()
            .map(|f| crate::quality::quality_score(f, &w))
            .collect();
        for pair in scores.windows(2) {
            assert!(pair[0] > pair[1], "{scores:?}");
        }
    }

    #[test]
    fn evaluate_extremes() {
        let truth = TruthTable {
            subjects: vec![SubjectTruth {
                subject_id: "a".into(),
                labels: vec![true, false, true],
            }],
        };
        let same = vec![SubjectAttributes {
            subject_id: "a".into(),
            labels: vec![true, false, true],
            provenance: vec![],
        }];
        assert_eq!(evaluate(&same, &truth).unwrap(), 1.0);
        let inverted = vec![SubjectAttributes {
            subject_id: "a".into(),
            labels: vec![false, true, false],
            provenance: vec![],
        }];
        assert_eq!(evaluate(&inverted, &truth).unwrap(), 0.0);
        let wrong_id = vec![SubjectAttributes {
            subject_id: "b".into(),
            labels: vec![true, false, true],
            provenance: vec![],
        }];
        assert!(evaluate(&wrong_id, &truth).is_err());
        assert!(evaluate(&[], &truth).is_err());
    }

    #[test]
    fn zero_noise_grid_is_perfect() {
        let config = ExperimentConfig {
            n_subjects: 10,
            images_per_subject: 3,
            flip_prob: FlipProb::Uniform(0.0),
            strategies: vec![Strategy::Confidence],
            ks: vec![1],
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&small_schema(), &config).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].accuracy, 1.0);
        assert_eq!(report.rows[0].baseline_accuracy, 1.0);
    }

    #[test]
    fn config_parsing() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"n_subjects": 5, "flip_prob": [0.1, 0.2], "strategies": ["quality"], "seeds": [1, 2]}"#,
        )
        .unwrap();
        assert_eq!(c.n_subjects, 5);
        assert_eq!(c.images_per_subject, 10);
        assert_eq!(c.strategies, [Strategy::Quality]);
        assert!(c.noise(40).is_err());
        assert!(c.noise(2).is_ok());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn report_csv_header() {
        let config = ExperimentConfig {
            n_subjects: 4,
            images_per_subject: 3,
            ks: vec![1],
            strategies: vec![Strategy::Confidence],
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&small_schema(), &config).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# rng: ChaCha8Rng"));
        assert_eq!(
            lines.next().unwrap(),
            "strategy,k,seed,accuracy,baseline_accuracy"
        );
        assert!(lines.next().unwrap().starts_with("confidence,1,0,"));
    }
}
