#![allow(dead_code)]

use attrcons::model::{AttributeDef, AttributePrediction, AttributeSchema, Dataset, ImageRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn schema(n: usize, transient: &[usize]) -> AttributeSchema {
    AttributeSchema::new(
        (0..n)
            .map(|j| AttributeDef {
                name: format!("a{j}"),
                stable: !transient.contains(&j),
            })
            .collect(),
    )
    .unwrap()
}

/// Brute-force IM straight from the definition, no shared code with the crate.
pub fn im_oracle(labels: &[bool]) -> f64 {
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = n - pos;
    let ratio = if pos > neg { pos / n } else { neg / n };
    100.0 - (ratio - 0.5) / 0.5 * 100.0
}

/// Mode of the labels; on a tie, the label of the most confident voter when
/// every top-confidence voter agrees, positive otherwise.
pub fn vote_oracle(labels: &[bool], confs: &[f64]) -> bool {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos != neg {
        return pos > neg;
    }
    let top = confs.iter().cloned().fold(f64::MIN, f64::max);
    let holders: Vec<bool> = labels
        .iter()
        .zip(confs)
        .filter(|(_, &c)| c == top)
        .map(|(&l, _)| l)
        .collect();
    if holders.iter().all(|&l| l == holders[0]) {
        holders[0]
    } else {
        true
    }
}

pub fn binomial_majority(n: u32, p_correct: f64) -> f64 {
    let choose = |n: u32, k: u32| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    ((n / 2 + 1)..=n)
        .map(|m| choose(n, m) * p_correct.powi(m as i32) * (1.0 - p_correct).powi((n - m) as i32))
        .sum()
}

/// Random labelled dataset: `n_subjects` groups of 1..=`max_images` records.
pub fn random_labels(
    seed: u64,
    schema: &AttributeSchema,
    n_subjects: usize,
    max_images: usize,
) -> (Dataset, Vec<Vec<Vec<bool>>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut raw = Vec::new();
    for s in 0..n_subjects {
        let n = rng.random_range(1..=max_images);
        let mut group = Vec::new();
        for i in 0..n {
            let labels: Vec<bool> = (0..schema.len()).map(|_| rng.random_bool(0.5)).collect();
            records.push(ImageRecord::from_labels(
                format!("s{s}_{i}"),
                format!("s{s}"),
                &labels,
            ));
            group.push(labels);
        }
        raw.push(group);
    }
    (Dataset::new(schema.clone(), records).unwrap(), raw)
}

/// Random prediction dataset with probabilities on a 1/1000 grid.
pub fn random_predictions(
    seed: u64,
    schema: &AttributeSchema,
    n_subjects: usize,
    max_images: usize,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for s in 0..n_subjects {
        for i in 0..rng.random_range(1..=max_images) {
            let preds = (0..schema.len())
                .map(|_| {
                    AttributePrediction::from_positive(rng.random_range(0..=1000) as f64 / 1000.0)
                        .unwrap()
                })
                .collect();
            records.push(ImageRecord::new(
                format!("s{s}_{i}"),
                format!("s{s}"),
                preds,
            ));
        }
    }
    Dataset::new(schema.clone(), records).unwrap()
}

/// Random mirror-symmetric texture, passed through an 8-bit PGM round trip.
pub fn symmetric_fixture(seed: u64, width: usize, height: usize) -> attrcons::quality::GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = width.div_ceil(2);
    let cells: Vec<f64> = (0..half * height)
        .map(|_| rng.random_range(0.2..0.8))
        .collect();
    let img = attrcons::quality::GrayImage::from_fn(width, height, |x, y| {
        let x = if x < half { x } else { width - 1 - x };
        cells[y * half + x]
    });
    pgm_round_trip(&img)
}

pub fn pgm_round_trip(img: &attrcons::quality::GrayImage) -> attrcons::quality::GrayImage {
    let mut buf = Vec::new();
    img.write_pgm(&mut buf).unwrap();
    attrcons::quality::GrayImage::read_pgm(buf.as_slice()).unwrap()
}

/// Scales the left half (columns `[0, w/2)`) by `factor`.
pub fn darken_left(
    img: &attrcons::quality::GrayImage,
    factor: f64,
) -> attrcons::quality::GrayImage {
    let half = img.width() / 2;
    attrcons::quality::GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let p = img.get(x, y);
        if x < half {
            p * factor
        } else {
            p
        }
    })
}
