//! Predicted identification accuracy and EER for a synthetic corpus,
//! computed from the generator's parameter spreads alone.
//!
//! Each subject is reduced to the eight quantities the generator draws per
//! finger (length and base width of index, middle, ring and little finger),
//! spread uniformly ±15% around the defaults. Every sample perturbs them by
//! the generator's multiplicative jitter `1 + noise·N(0,1)`. The evaluation
//! protocol is then replayed on these ideal measurements many times: 2:3
//! subject split, min-max fit on the training subjects, local R-FoBa,
//! forest identification with two enrolled samples and one probe, and the
//! matching score for verification. No image is rendered.

use fingergeo::classify::{forest_predict, forest_train, ForestConfig};
use fingergeo::dataset::HandParams;
use fingergeo::eval::{roc_and_eer, verification_score, MeanDivision, ScoreSets};
use fingergeo::selection::{foba, SelectionConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct OracleTarget {
    pub trials: usize,
    pub mean_accuracy: f64,
    /// 5th percentile of accuracy over trials: the accuracy the generator
    /// noise alone allows in 95% of corpora.
    pub accuracy_target: f64,
    pub mean_eer: f64,
    /// 95th percentile of EER over trials.
    pub eer_ceiling: f64,
}

fn quantile(v: &mut [f64], q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

fn one_trial(rng: &mut ChaCha8Rng, subjects: usize, noise: f64, forest_seed: u64) -> (f64, f64) {
    let d = HandParams::default();
    let base: Vec<f64> = d
        .fingers
        .iter()
        .flat_map(|f| [f.length, f.base_width])
        .collect();
    let n_train = (subjects as f64 * 2.0 / 5.0).round() as usize;
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::new();
    for _ in 0..subjects {
        let mu: Vec<f64> = base.iter().map(|b| b * rng.gen_range(0.85..1.15)).collect();
        let samples = (0..3)
            .map(|_| {
                mu.iter()
                    .map(|m| {
                        let z: f64 = StandardNormal.sample(rng);
                        m * (1.0 + noise * z).max(0.5)
                    })
                    .collect()
            })
            .collect();
        rows.push(samples);
    }
    let p = base.len();
    let train: Vec<(usize, &Vec<f64>)> = (0..n_train)
        .flat_map(|s| rows[s].iter().map(move |r| (s, r)))
        .collect();
    let lo: Vec<f64> = (0..p)
        .map(|j| train.iter().map(|r| r.1[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..p)
        .map(|j| {
            train
                .iter()
                .map(|r| r.1[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let norm = |r: &Vec<f64>| -> Vec<f64> {
        (0..p)
            .map(|j| ((r[j] - lo[j]) / (hi[j] - lo[j])).clamp(0.0, 1.0))
            .collect()
    };
    let x: Vec<Vec<f64>> = train.iter().map(|r| norm(r.1)).collect();
    let y: Vec<usize> = train.iter().map(|r| r.0).collect();
    let names: Vec<String> = (0..p).map(|j| format!("z{j}")).collect();
    let sel = foba(&x, &y, &names, &SelectionConfig::default()).expect("selection on latent data");
    let cols = &sel.selected_indices;
    let pick = |r: &Vec<f64>| -> Vec<f64> { cols.iter().map(|&c| r[c]).collect() };

    let test: Vec<usize> = (n_train..subjects).collect();
    let (mut ex, mut ey, mut px, mut py) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, &s) in test.iter().enumerate() {
        for r in &rows[s][..2] {
            ex.push(pick(&norm(r)));
            ey.push(k);
        }
        px.push(pick(&norm(&rows[s][2])));
        py.push(k);
    }
    let cfg = ForestConfig {
        seed: forest_seed,
        ..ForestConfig::default()
    };
    let model = forest_train(&ex, &ey, &cfg).expect("forest on latent data");
    let correct = px
        .iter()
        .zip(&py)
        .filter(|(r, &c)| forest_predict(&model, r).expect("predict").0 == c)
        .count();
    let accuracy = correct as f64 / px.len() as f64;

    // verification on raw values, means over the enrolled samples
    let raw_enrolled: Vec<(usize, Vec<f64>)> = test
        .iter()
        .enumerate()
        .flat_map(|(k, &s)| rows[s][..2].iter().map(move |r| (k, r.clone())))
        .map(|(k, r)| (k, pick(&r)))
        .collect();
    let means: Vec<f64> = (0..cols.len())
        .map(|j| raw_enrolled.iter().map(|r| r.1[j]).sum::<f64>() / raw_enrolled.len() as f64)
        .collect();
    let mut scores = ScoreSets::default();
    for (k, &s) in test.iter().enumerate() {
        let probe = pick(&rows[s][2]);
        for (ek, e) in &raw_enrolled {
            let t = verification_score(e, &probe, &sel.weights, &means, MeanDivision::PerTerm)
                .expect("score");
            if *ek == k {
                scores.genuine.push(t);
            } else {
                scores.imposter.push(t);
            }
        }
    }
    let eer = roc_and_eer(&scores, 2000).expect("roc").eer;
    (accuracy, eer)
}

/// Replays the protocol `trials` times on ideal measurements.
pub fn generator_noise_oracle(
    trials: usize,
    subjects: usize,
    noise: f64,
    seed: u64,
) -> OracleTarget {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut acc, mut eer) = (Vec::new(), Vec::new());
    for t in 0..trials {
        let (a, e) = one_trial(&mut rng, subjects, noise, t as u64);
        acc.push(a);
        eer.push(e);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    OracleTarget {
        trials,
        mean_accuracy: mean(&acc),
        mean_eer: mean(&eer),
        accuracy_target: quantile(&mut acc, 0.05),
        eer_ceiling: quantile(&mut eer, 0.95),
    }
}
