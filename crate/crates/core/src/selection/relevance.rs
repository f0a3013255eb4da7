use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::vote;
use crate::error::{Error, Result};

/// Accuracy of a column subset, in [0, 1]. The empty subset scores 0.
pub trait SubsetEvaluator: Sync {
    fn n_columns(&self) -> usize;
    fn accuracy(&self, columns: &[usize]) -> f64;
}

/// Checks that there are at least two classes with two samples each.
pub fn check_labels(labels: &[usize]) -> Result<()> {
    let mut counts = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::DegenerateLabels(format!(
            "{} class(es), need 2",
            counts.len()
        )));
    }
    if let Some((c, n)) = counts.iter().find(|(_, &n)| n < 2) {
        return Err(Error::DegenerateLabels(format!(
            "class {c} has {n} sample(s), need 2"
        )));
    }
    Ok(())
}

/// Leave-one-out k-NN accuracy with plain Euclidean distance. Columns
/// whose values are bit-identical to an earlier column are treated as
/// that column, so adding a duplicate never changes the score.
#[derive(Debug, Clone)]
pub struct LooKnn {
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    k: usize,
    canonical: Vec<usize>,
}

impl LooKnn {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, k: usize) -> Result<LooKnn> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len(),
            });
        }
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        check_labels(&labels)?;
        let p = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: p,
            });
        }
        let canonical = (0..p)
            .map(|j| {
                (0..j)
                    .find(|&i| rows.iter().all(|r| r[i].to_bits() == r[j].to_bits()))
                    .unwrap_or(j)
            })
            .collect();
        Ok(LooKnn {
            rows,
            labels,
            k,
            canonical,
        })
    }

    fn predict_loo(&self, i: usize, cols: &[usize]) -> usize {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, r)| {
                let s = cols
                    .iter()
                    .map(|&c| (r[c] - self.rows[i][c]).powi(2))
                    .sum::<f64>();
                (s, j)
            })
            .collect();
        let k = self.k.min(d.len());
        let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, by);
            d.truncate(k);
        }
        d.sort_by(by);
        let labels: Vec<usize> = d.iter().map(|&(_, j)| self.labels[j]).collect();
        vote(&labels)
    }
}

impl SubsetEvaluator for LooKnn {
    fn n_columns(&self) -> usize {
        self.canonical.len()
    }

    fn accuracy(&self, columns: &[usize]) -> f64 {
        let mut cols: Vec<usize> = columns.iter().map(|&c| self.canonical[c]).collect();
        cols.sort_unstable();
        cols.dedup();
        if cols.is_empty() {
            return 0.0;
        }
        let n = self.rows.len();
        let correct = (0..n)
            .into_par_iter()
            .filter(|&i| self.predict_loo(i, &cols) == self.labels[i])
            .count();
        correct as f64 / n as f64
    }
}

/// Leave-one-out 3-NN accuracy of every single column.
pub fn per_feature_relevance(rows: &[Vec<f64>], labels: &[usize]) -> Result<Vec<f64>> {
    let e = LooKnn::new(rows.to_vec(), labels.to_vec(), 3)?;
    Ok((0..e.n_columns()).map(|j| e.accuracy(&[j])).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub accuracies: Vec<f64>,
    /// `ranks[i]` is the rank of feature `i`; 1 is the most relevant.
    pub ranks: Vec<usize>,
}

impl FeatureRanking {
    /// Feature indices from rank 1 downwards.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ranks.len()).collect();
        idx.sort_by_key(|&i| self.ranks[i]);
        idx
    }
}

/// Ranks by descending accuracy; equal accuracies rank the higher index first.
pub fn rank_features(accuracies: &[f64]) -> FeatureRanking {
    let mut idx: Vec<usize> = (0..accuracies.len()).collect();
    idx.sort_by(|&a, &b| accuracies[b].total_cmp(&accuracies[a]).then(b.cmp(&a)));
    let mut ranks = vec![0; accuracies.len()];
    for (r, &i) in idx.iter().enumerate() {
        ranks[i] = r + 1;
    }
    FeatureRanking {
        accuracies: accuracies.to_vec(),
        ranks,
    }
}

/// `w_i = acc_i / Σ acc`.
pub fn compute_weights(accuracies: &[f64]) -> Result<Vec<f64>> {
    if accuracies.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::InvalidConfig(
            "accuracies must be finite and nonnegative".into(),
        ));
    }
    let s: f64 = accuracies.iter().sum();
    if s <= 0.0 {
        return Err(Error::AllZeroRelevance);
    }
    Ok(accuracies.iter().map(|a| a / s).collect())
}

/// Indices whose score is at least `th`, default the mean score. With the
/// default, a score equal to the mean up to rounding is kept.
pub fn threshold_filter(scores: &[f64], th: Option<f64>) -> Result<Vec<usize>> {
    let th = match th {
        Some(t) if !t.is_finite() => {
            return Err(Error::InvalidConfig("threshold must be finite".into()))
        }
        Some(t) => t,
        None if scores.is_empty() => return Ok(Vec::new()),
        None => {
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            mean - 4.0 * f64::EPSILON * mean.abs()
        }
    };
    Ok((0..scores.len()).filter(|&i| scores[i] >= th).collect())
}

/// How the 52 columns are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnLayout {
    /// All features of one finger, then the next finger.
    #[default]
    FingerMajor,
    /// One feature across all fingers, then the next feature.
    FeatureMajor,
}

/// Groups of `group_size` columns holding the same feature on every finger.
pub fn group_features(
    n: usize,
    group_size: usize,
    layout: ColumnLayout,
) -> Result<Vec<Vec<usize>>> {
    if n == 0 || group_size == 0 || !n.is_multiple_of(group_size) {
        return Err(Error::BadLayout(format!(
            "{n} columns cannot form groups of {group_size}"
        )));
    }
    let groups = n / group_size;
    Ok((0..groups)
        .map(|g| match layout {
            ColumnLayout::FingerMajor => (0..group_size).map(|f| f * groups + g).collect(),
            ColumnLayout::FeatureMajor => (g * group_size..(g + 1) * group_size).collect(),
        })
        .collect())
}
