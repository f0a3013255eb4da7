//! Geometric finger features and the feature matrix.

mod matrix;
mod shape;

use rayon::prelude::*;
use serde::Serialize;

pub use matrix::{
    apply_minmax, column, default_column_names, fit_minmax, round_sig9, FeatureMatrix,
    NormalizationParams, FEATURE_COUNT, FINGERS,
};
pub use shape::{
    centroid_distances, convex_hull, ellipse_axes, hull_area, phalanx_widths, polygon_area,
    shape_scalars, FingerFeatures, FEATURES_PER_FINGER, FEATURE_NAMES,
};

use crate::dataset::Corpus;
use crate::error::{Error, Result};
use crate::imaging::{
    drop_thumb, segment_hand, FingerLabel, FingerShape, GrayImage, SegmentationConfig,
};

/// The 52-value row for index, middle, ring and little finger; the input
/// may come in any order but must hold each of the four labels once.
pub fn build_feature_vector(fingers: &[FingerShape]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; FEATURE_COUNT];
    let mut seen = [false; FINGERS];
    for f in fingers {
        let Some(slot) = FingerLabel::FOUR.iter().position(|&l| l == f.label) else {
            continue;
        };
        if seen[slot] {
            return Err(Error::MissingFinger(format!(
                "duplicate {} finger",
                f.label
            )));
        }
        seen[slot] = true;
        let feats = FingerFeatures::compute(f)?.to_array();
        out[column(slot, 0)..column(slot + 1, 0)].copy_from_slice(&feats);
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::MissingFinger(FingerLabel::FOUR[i].to_string()));
    }
    Ok(out)
}

/// Segmentation, thumb removal and feature extraction for one image.
pub fn extract_features(image: &GrayImage, config: &SegmentationConfig) -> Result<Vec<f64>> {
    let fingers = drop_thumb(segment_hand(image, config)?)?;
    build_feature_vector(&fingers)
}

/// An image that could not be turned into a feature row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionFailure {
    pub subject: String,
    pub session: u32,
    pub kind: String,
    pub message: String,
}

/// Extracts every corpus entry in parallel. Segmentation failures are
/// collected; any other error (I/O, bad configuration) aborts.
pub fn extract_corpus(
    corpus: &Corpus,
    config: &SegmentationConfig,
) -> Result<(FeatureMatrix, Vec<ExtractionFailure>)> {
    config.validate()?;
    let config = SegmentationConfig {
        hand: corpus.hand,
        ..config.clone()
    };
    let results: Vec<Result<Vec<f64>>> = corpus
        .entries
        .par_iter()
        .map(|e| extract_features(&e.load()?, &config))
        .collect();
    let mut m = FeatureMatrix::new(default_column_names());
    let mut failures = Vec::new();
    for (e, r) in corpus.entries.iter().zip(results) {
        match r {
            Ok(row) => m.push(e.subject.clone(), e.session, row)?,
            Err(err) if err.is_segmentation_failure() => failures.push(ExtractionFailure {
                subject: e.subject.clone(),
                session: e.session,
                kind: err.kind().to_string(),
                message: err.to_string(),
            }),
            Err(err) => return Err(err),
        }
    }
    Ok((m, failures))
}
