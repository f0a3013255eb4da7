//! The full synthetic run: render, segment, split, select, identify, verify.

use fingergeo::classify::ForestConfig;
use fingergeo::dataset::{split_subjects, synth_corpus};
use fingergeo::eval::{
    build_score_sets, feature_means, identify, roc_and_eer, IdentificationProtocol,
    IdentifyClassifier, MeanDivision,
};
use fingergeo::features::{apply_minmax, extract_corpus, fit_minmax};
use fingergeo::imaging::SegmentationConfig;
use fingergeo::selection::{foba, SelectionConfig};

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub failures: usize,
    pub selected: Vec<String>,
    pub accuracy: f64,
    pub eer: f64,
}

pub fn run_synthetic(subjects: usize, samples: usize, seed: u64) -> PipelineOutcome {
    let corpus = synth_corpus(subjects, samples, seed).expect("corpus");
    let (matrix, failures) =
        extract_corpus(&corpus, &SegmentationConfig::default()).expect("extract");
    let (train_c, test_c) = split_subjects(&corpus, (2, 3), seed).expect("split");
    let keep = |names: Vec<String>| move |s: &str, _| names.iter().any(|k| k == s);
    let train = matrix.filter_rows(keep(train_c.subjects()));
    let test = matrix.filter_rows(keep(test_c.subjects()));

    let params = fit_minmax(&train).expect("fit");
    let norm_train = apply_minmax(&train, &params).expect("normalize");
    let (labels, _) = norm_train.class_labels();
    let sel = foba(
        &norm_train.values,
        &labels,
        &norm_train.column_names,
        &SelectionConfig::default(),
    )
    .expect("selection");

    let protocol = IdentificationProtocol::default();
    let cols = &sel.selected_indices;
    let split = protocol
        .split(
            &apply_minmax(&test, &params)
                .expect("normalize")
                .select_columns(cols),
        )
        .expect("protocol");
    let forest = IdentifyClassifier::Forest(ForestConfig {
        seed,
        ..ForestConfig::default()
    });
    let report = identify(&split.enrolled, &split.probes, &forest).expect("identify");

    let raw = protocol
        .split(&test.select_columns(cols))
        .expect("protocol");
    let means = feature_means(&raw.enrolled).expect("means");
    let scores = build_score_sets(
        &raw.enrolled,
        &raw.probes,
        &sel.weights,
        &means,
        MeanDivision::PerTerm,
    )
    .expect("scores");
    let eer = roc_and_eer(&scores, 2000).expect("roc").eer;
    PipelineOutcome {
        failures: failures.len(),
        selected: sel.selected,
        accuracy: report.accuracy,
        eer,
    }
}
