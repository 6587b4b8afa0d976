mod common;

use attrcons::consolidate::{consolidate_dataset, ConsolidationConfig, Strategy};
use attrcons::inconsistency::dataset_im;
use attrcons::model::Dataset;
use attrcons::synth::{
    baseline_accuracy, evaluate, generate, run_experiment, ExperimentConfig, FlipProb, NoiseModel,
    TruthTable,
};

use common::{im_oracle, schema};

/// Accuracy of blindly taking each subject's first image.
fn first_image_accuracy(ds: &Dataset, truth: &TruthTable) -> f64 {
    let (mut hits, mut total) = (0usize, 0usize);
    for (g, t) in ds.groups().iter().zip(&truth.subjects) {
        for (p, &l) in g.images()[0].predictions.iter().zip(&t.labels) {
            hits += (p.label() == l) as usize;
            total += 1;
        }
    }
    hits as f64 / total as f64
}

#[test]
fn flip_rate_is_calibrated() {
    let s = schema(10, &[]);
    for (p, seed) in [(0.1, 1), (0.2, 2), (0.35, 3)] {
        let (truth, ds) = generate(&s, 1000, 10, &NoiseModel::uniform(10, p), seed).unwrap();
        let n = (ds.n_images() * s.len()) as f64;
        let observed = 1.0 - baseline_accuracy(&ds, &truth).unwrap();
        let se = (p * (1.0 - p) / n).sqrt();
        assert!(n >= 1e5);
        assert!(
            (observed - p).abs() < 3.0 * se,
            "p {p}: observed {observed}, se {se}"
        );
    }
}

#[test]
fn confidences_follow_the_noise_model() {
    let s = schema(5, &[]);
    let (truth, ds) = generate(&s, 400, 10, &NoiseModel::uniform(5, 0.3), 11).unwrap();
    let (mut right, mut wrong) = (Vec::new(), Vec::new());
    for (g, t) in ds.groups().iter().zip(&truth.subjects) {
        for r in g.images() {
            for (p, &l) in r.predictions.iter().zip(&t.labels) {
                assert!((p.p_pos() + p.p_neg() - 1.0).abs() < 1e-12);
                let c = (p.p_pos() - p.p_neg()).abs();
                if p.label() == l {
                    right.push(c)
                } else {
                    wrong.push(c)
                }
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean(&right) - 0.8).abs() < 0.01, "{}", mean(&right));
    // A wrong draw with confidence 0 lands on p_pos = 0.5, which reads as
    // positive; the effect on the mean is far below the tolerance.
    assert!((mean(&wrong) - 0.2).abs() < 0.01, "{}", mean(&wrong));
}

#[test]
fn zero_noise_is_perfectly_consistent() {
    let s = schema(6, &[]);
    let (truth, ds) = generate(&s, 50, 5, &NoiseModel::uniform(6, 0.0), 4).unwrap();
    assert!(dataset_im(&ds)
        .unwrap()
        .per_attribute
        .iter()
        .all(|&v| v == 0.0));
    let out = consolidate_dataset(
        &ds,
        &ConsolidationConfig::new(Strategy::Confidence, 3).unwrap(),
        None,
    )
    .unwrap();
    assert_eq!(evaluate(&out, &truth).unwrap(), 1.0);
}

#[test]
fn coin_flip_noise_matches_binomial_expected_im() {
    let n_images = 20u32;
    let expected: f64 = (0..=n_images)
        .map(|m| {
            let labels: Vec<bool> = (0..n_images).map(|i| i < m).collect();
            let choose = (0..m).fold(1.0, |acc, i| acc * (n_images - i) as f64 / (i + 1) as f64);
            choose / 2f64.powi(n_images as i32) * im_oracle(&labels)
        })
        .sum();
    let s = schema(5, &[]);
    let noise = NoiseModel::uniform(5, 0.5);
    let (_, ds) = generate(&s, 4000, n_images as usize, &noise, 8).unwrap();
    let report = dataset_im(&ds).unwrap();
    let mean = report.per_attribute.iter().sum::<f64>() / 5.0;
    // Per-subject IM has a standard deviation below 25 here.
    let se = 25.0 / (4000.0f64 * 5.0).sqrt();
    assert!(
        (mean - expected).abs() < 4.0 * se,
        "mean {mean}, expected {expected}"
    );
    assert!(expected > 80.0);
}

#[test]
fn same_seed_same_dataset() {
    let s = schema(4, &[]);
    let noise = NoiseModel::uniform(4, 0.2);
    let a = generate(&s, 30, 6, &noise, 77).unwrap();
    let b = generate(&s, 30, 6, &noise, 77).unwrap();
    let c = generate(&s, 30, 6, &noise, 78).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_ne!(a.1, c.1);
}

#[test]
fn confidence_selection_beats_single_images() {
    let s = schema(10, &[]);
    let noise = NoiseModel::uniform(10, 0.2);
    for seed in 0..30 {
        let (truth, ds) = generate(&s, 200, 10, &noise, seed).unwrap();
        let baseline = baseline_accuracy(&ds, &truth).unwrap();
        let out = consolidate_dataset(
            &ds,
            &ConsolidationConfig::new(Strategy::Confidence, 1).unwrap(),
            None,
        )
        .unwrap();
        let acc = evaluate(&out, &truth).unwrap();
        assert!(acc > baseline, "seed {seed}: {acc} vs {baseline}");
    }
}

#[test]
fn unlinked_quality_is_no_better_than_first_image() {
    let s = schema(10, &[]);
    let noise = NoiseModel::uniform(10, 0.2);
    let (mut quality, mut first) = (0.0, 0.0);
    for seed in 0..30 {
        let (truth, ds) = generate(&s, 200, 10, &noise, seed).unwrap();
        let out = consolidate_dataset(
            &ds,
            &ConsolidationConfig::new(Strategy::Quality, 1).unwrap(),
            None,
        )
        .unwrap();
        quality += evaluate(&out, &truth).unwrap() / 30.0;
        first += first_image_accuracy(&ds, &truth) / 30.0;
    }
    assert!((quality - first).abs() < 0.03, "{quality} vs {first}");
}

#[test]
fn linked_quality_selection_helps() {
    let s = schema(10, &[]);
    let mut noise = NoiseModel::uniform(10, 0.2);
    noise.quality_link = 1.0;
    let (truth, ds) = generate(&s, 300, 10, &noise, 5).unwrap();
    let out = consolidate_dataset(
        &ds,
        &ConsolidationConfig::new(Strategy::Quality, 1).unwrap(),
        None,
    )
    .unwrap();
    let acc = evaluate(&out, &truth).unwrap();
    assert!(acc > first_image_accuracy(&ds, &truth) + 0.05, "{acc}");
}

#[test]
fn experiment_grid_rows_and_zero_noise() {
    let s = schema(3, &[]);
    let config = ExperimentConfig {
        n_subjects: 20,
        images_per_subject: 4,
        flip_prob: FlipProb::Uniform(0.0),
        strategies: vec![Strategy::Confidence],
        ks: vec![1],
        seeds: vec![1, 2],
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&s, &config).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report
        .rows
        .iter()
        .all(|r| r.accuracy == 1.0 && r.baseline_accuracy == 1.0));

    let grid = ExperimentConfig {
        n_subjects: 20,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&s, &grid).unwrap();
    assert_eq!(report.rows.len(), 2 * 3);
    assert!(report
        .rows
        .iter()
        .all(|r| (0.0..=1.0).contains(&r.accuracy)));
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("# rng: "));
    assert_eq!(
        csv.lines().nth(1),
        Some("strategy,k,seed,accuracy,baseline_accuracy")
    );
}
