//! Weighted k-NN, random forest, cross-validation and out-of-bag error.

mod cv;
mod forest;
mod knn;

pub use cv::{kfold_cv, stratified_folds, CvClassifier, CvReport};
pub use forest::{
    forest_predict, forest_train, oob_error, ForestConfig, ForestModel, Node, OobReport, Tree,
    FOREST_FORMAT_VERSION,
};
pub use knn::{correlation_distance, vote, wknn_classify, wknn_distance, KnnModel, Metric};
