//! Feature relevance, ranking, weights and forward-backward selection.

mod foba;
mod relevance;

pub use foba::{
    backward_eliminate, foba, foba_with, forward_select, selection_units, ForwardOutcome,
    Granularity, Ordering, Phase, PhaseStep, SelectionConfig, SelectionResult,
};
pub use relevance::{
    check_labels, compute_weights, group_features, per_feature_relevance, rank_features,
    threshold_filter, ColumnLayout, FeatureRanking, LooKnn, SubsetEvaluator,
};
