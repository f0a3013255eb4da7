use serde::{Deserialize, Serialize};

use super::forest::{forest_predict, forest_train, ForestConfig};
use super::knn::{wknn_classify, KnnModel, Metric};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "classifier")]
pub enum CvClassifier {
    Knn { k: usize, metric: Metric },
    Forest(ForestConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_errors: Vec<f64>,
    pub mean_error: f64,
    /// Fold index of each row.
    pub assignment: Vec<usize>,
}

impl CvReport {
    /// `fold,error` rows, folds numbered from 1.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["fold", "error"])?;
        for (i, e) in self.fold_errors.iter().enumerate() {
            w.write_record([(i + 1).to_string(), e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Deals rows out to folds class by class (classes in ascending id, rows
/// in order), continuing one round-robin counter across classes so every
/// fold gets rows and class shares stay as even as possible.
pub fn stratified_folds(labels: &[usize], folds: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by_key(|&i| (labels[i], i));
    let mut out = vec![0; labels.len()];
    for (c, &i) in order.iter().enumerate() {
        out[i] = c % folds;
    }
    out
}

fn predict_all(
    train_x: &[Vec<f64>],
    train_y: &[usize],
    test_x: &[&Vec<f64>],
    classifier: &CvClassifier,
) -> Result<Vec<usize>> {
    match classifier {
        CvClassifier::Knn { k, metric } => {
            let model = KnnModel::new(
                train_x.to_vec(),
                train_y.to_vec(),
                metric.clone(),
                (*k).min(train_x.len()),
            )?;
            test_x.iter().map(|r| wknn_classify(&model, r)).collect()
        }
        CvClassifier::Forest(cfg) => {
            let model = forest_train(train_x, train_y, cfg)?;
            test_x
                .iter()
                .map(|r| Ok(forest_predict(&model, r)?.0))
                .collect()
        }
    }
}

/// Error of each fold when the classifier is trained on the other folds.
pub fn kfold_cv(
    x: &[Vec<f64>],
    y: &[usize],
    folds: usize,
    classifier: &CvClassifier,
) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::InvalidConfig("at least 2 folds are needed".into()));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < folds {
        return Err(Error::TooFewRows {
            needed: folds,
            got: x.len(),
        });
    }
    let assignment = stratified_folds(y, folds);
    let mut fold_errors = Vec::with_capacity(folds);
    for f in 0..folds {
        let (mut tx, mut ty, mut sx, mut sy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for i in 0..x.len() {
            if assignment[i] == f {
                sx.push(&x[i]);
                sy.push(y[i]);
            } else {
                tx.push(x[i].clone());
                ty.push(y[i]);
            }
        }
        let pred = predict_all(&tx, &ty, &sx, classifier)?;
        let wrong = pred.iter().zip(&sy).filter(|(p, t)| p != t).count();
        fold_errors.push(wrong as f64 / sy.len() as f64);
    }
    let mean_error = fold_errors.iter().sum::<f64>() / folds as f64;
    Ok(CvReport {
        fold_errors,
        mean_error,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_rows() {
        let y: Vec<usize> = (0..23).map(|i| i % 4).collect();
        let a = stratified_folds(&y, 5);
        for f in 0..5 {
            let n = a.iter().filter(|&&g| g == f).count();
            assert!(n == 4 || n == 5);
        }
    }

    #[test]
    fn separable_data_has_zero_error() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 3) as f64 * 10.0]).collect();
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let r = kfold_cv(
            &x,
            &y,
            10,
            &CvClassifier::Knn {
                k: 3,
                metric: Metric::uniform(1),
            },
        )
        .unwrap();
        assert_eq!(r.mean_error, 0.0);
    }

    #[test]
    fn too_few_rows() {
        let r = kfold_cv(
            &vec![vec![0.0]; 3],
            &[0, 1, 0],
            5,
            &CvClassifier::Knn {
                k: 1,
                metric: Metric::uniform(1),
            },
        );
        assert!(matches!(r, Err(Error::TooFewRows { needed: 5, got: 3 })));
    }
}
