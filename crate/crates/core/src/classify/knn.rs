use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sqrt(Σ w_i (a_i − b_i)²)`.
pub fn wknn_distance(a: &[f64], b: &[f64], weights: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if weights.len() != a.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: a.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// `1 − r` with `r` the Pearson correlation of the two vectors; a constant
/// vector has no defined correlation and gets distance 1.
pub fn correlation_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len() as f64;
    if a.is_empty() {
        return Ok(1.0);
    }
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - sab / (saa * sbb).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "weights")]
pub enum Metric {
    WeightedEuclidean(Vec<f64>),
    Correlation,
}

impl Metric {
    pub fn uniform(n: usize) -> Metric {
        Metric::WeightedEuclidean(vec![1.0 / n.max(1) as f64; n])
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Metric::WeightedEuclidean(w) => wknn_distance(a, b, w),
            Metric::Correlation => correlation_distance(a, b),
        }
    }
}

/// Majority vote over neighbor labels sorted nearest first. Among classes
/// tied for the most votes, the one with the nearest member wins.
pub fn vote(sorted_labels: &[usize]) -> usize {
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &l in sorted_labels {
        match counts.iter_mut().find(|c| c.0 == l) {
            Some(c) => c.1 += 1,
            None => counts.push((l, 1)),
        }
    }
    let best = counts.iter().map(|c| c.1).max().unwrap_or(0);
    // `counts` is in order of first appearance, i.e. by nearest member
    counts
        .iter()
        .find(|c| c.1 == best)
        .map(|c| c.0)
        .expect("at least one neighbor")
}

/// Reference set with labels, a metric and a neighbor count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub reference: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub metric: Metric,
    pub k: usize,
}

impl KnnModel {
    pub fn new(
        reference: Vec<Vec<f64>>,
        labels: Vec<usize>,
        metric: Metric,
        k: usize,
    ) -> Result<KnnModel> {
        if reference.is_empty() {
            return Err(Error::EmptyInput);
        }
        if labels.len() != reference.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: reference.len(),
            });
        }
        if k == 0 || k > reference.len() {
            return Err(Error::InvalidConfig(format!(
                "k must lie in 1..={}, got {k}",
                reference.len()
            )));
        }
        let cols = reference[0].len();
        if let Some(r) = reference.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                left: r.len(),
                right: cols,
            });
        }
        if let Metric::WeightedEuclidean(w) = &metric {
            if w.len() != cols {
                return Err(Error::LengthMismatch {
                    left: w.len(),
                    right: cols,
                });
            }
        }
        Ok(KnnModel {
            reference,
            labels,
            metric,
            k,
        })
    }

    /// The `k` nearest reference rows as `(distance, row)`, nearest first;
    /// equal distances are ordered by row index.
    pub fn neighbors(&self, probe: &[f64]) -> Result<Vec<(f64, usize)>> {
        let mut d = self
            .reference
            .iter()
            .enumerate()
            .map(|(i, r)| Ok((self.metric.distance(r, probe)?, i)))
            .collect::<Result<Vec<_>>>()?;
        let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by);
            d.truncate(self.k);
        }
        d.sort_by(by);
        Ok(d)
    }
}

pub fn wknn_classify(model: &KnnModel, probe: &[f64]) -> Result<usize> {
    let n = model.neighbors(probe)?;
    let labels: Vec<usize> = n.iter().map(|&(_, i)| model.labels[i]).collect();
    Ok(vote(&labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_basics() {
        assert_eq!(
            wknn_distance(&[1.0, 2.0], &[1.0, 2.0], &[0.5, 0.5]).unwrap(),
            0.0
        );
        assert_eq!(
            wknn_distance(&[0.0, 0.0], &[3.0, 4.0], &[1.0, 0.0]).unwrap(),
            3.0
        );
        let e = wknn_distance(&[0.0, 0.0], &[3.0, 4.0], &[0.5, 0.5]).unwrap();
        assert!((e - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            wknn_distance(&[0.0], &[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn correlation_distance_values() {
        assert!(
            correlation_distance(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0])
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!(
            (correlation_distance(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() - 2.0).abs() < 1e-12
        );
        assert_eq!(correlation_distance(&[1.0, 1.0], &[0.0, 5.0]).unwrap(), 1.0);
    }

    #[test]
    fn exact_match_with_k1() {
        let m = KnnModel::new(
            vec![vec![0.0, 1.0], vec![5.0, 5.0]],
            vec![7, 9],
            Metric::uniform(2),
            1,
        )
        .unwrap();
        assert_eq!(wknn_classify(&m, &[5.0, 5.0]).unwrap(), 9);
    }

    #[test]
    fn unanimous_neighborhood() {
        let rows = [0.0, 0.0, 0.0, 10.0, 10.0]
            .iter()
            .map(|&v| vec![v])
            .collect();
        let m = KnnModel::new(rows, vec![0, 0, 0, 1, 1], Metric::uniform(1), 3).unwrap();
        assert_eq!(wknn_classify(&m, &[1.0]).unwrap(), 0);
    }

    #[test]
    fn vote_ties_go_to_nearest() {
        assert_eq!(vote(&[4, 2, 2, 4]), 4);
        assert_eq!(vote(&[1, 2, 3]), 1);
        assert_eq!(vote(&[5, 1, 1, 2, 2]), 1);
    }

    #[test]
    fn k_is_validated() {
        let r = KnnModel::new(vec![vec![0.0]], vec![0], Metric::uniform(1), 2);
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }
}
