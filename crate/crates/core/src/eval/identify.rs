use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classify::{
    forest_predict, forest_train, wknn_classify, ForestConfig, KnnModel, Metric,
};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Per subject, the first `enrolled` sessions become templates and the next
/// `probes` sessions become probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentificationProtocol {
    pub enrolled: usize,
    pub probes: usize,
}

impl Default for IdentificationProtocol {
    fn default() -> Self {
        IdentificationProtocol {
            enrolled: 2,
            probes: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSplit {
    pub enrolled: FeatureMatrix,
    pub probes: FeatureMatrix,
    /// Subjects without enough sessions, left out of both sets.
    pub skipped: Vec<String>,
}

impl IdentificationProtocol {
    pub fn split(&self, m: &FeatureMatrix) -> Result<ProtocolSplit> {
        if self.enrolled == 0 || self.probes == 0 {
            return Err(Error::InvalidConfig(
                "protocol needs at least one enrolled and one probe sample".into(),
            ));
        }
        let mut by_subject: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for (s, &n) in m.subjects.iter().zip(&m.samples) {
            by_subject.entry(s).or_default().push(n);
        }
        let mut role: BTreeMap<(&str, u32), bool> = BTreeMap::new();
        let mut skipped = Vec::new();
        for (s, mut sessions) in by_subject {
            sessions.sort_unstable();
            if sessions.len() < self.enrolled + self.probes {
                skipped.push(s.to_string());
                continue;
            }
            for (i, &n) in sessions
                .iter()
                .take(self.enrolled + self.probes)
                .enumerate()
            {
                role.insert((s, n), i < self.enrolled);
            }
        }
        Ok(ProtocolSplit {
            enrolled: m.filter_rows(|s, n| role.get(&(s, n)) == Some(&true)),
            probes: m.filter_rows(|s, n| role.get(&(s, n)) == Some(&false)),
            skipped,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "classifier")]
pub enum IdentifyClassifier {
    Knn { k: usize, metric: Metric },
    Forest(ForestConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub subject: String,
    pub sample: u32,
    pub predicted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub predictions: Vec<Prediction>,
}

/// Classifies every probe row against the enrolled rows.
pub fn identify(
    enrolled: &FeatureMatrix,
    probes: &FeatureMatrix,
    classifier: &IdentifyClassifier,
) -> Result<IdentificationReport> {
    if enrolled.rows() == 0 || probes.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if enrolled.cols() != probes.cols() {
        return Err(Error::LengthMismatch {
            left: enrolled.cols(),
            right: probes.cols(),
        });
    }
    let (labels, names) = enrolled.class_labels();
    if let Some(s) = probes.subjects.iter().find(|s| !names.contains(s)) {
        return Err(Error::UnknownSubject(s.clone()));
    }
    let predicted: Vec<usize> = match classifier {
        IdentifyClassifier::Knn { k, metric } => {
            let model = KnnModel::new(enrolled.values.clone(), labels, metric.clone(), *k)?;
            probes
                .values
                .iter()
                .map(|r| wknn_classify(&model, r))
                .collect::<Result<_>>()?
        }
        IdentifyClassifier::Forest(cfg) => {
            let model = forest_train(&enrolled.values, &labels, cfg)?;
            probes
                .values
                .iter()
                .map(|r| Ok(forest_predict(&model, r)?.0))
                .collect::<Result<_>>()?
        }
    };
    let predictions: Vec<Prediction> = predicted
        .iter()
        .enumerate()
        .map(|(i, &p)| Prediction {
            subject: probes.subjects[i].clone(),
            sample: probes.samples[i],
            predicted: names[p].clone(),
        })
        .collect();
    let correct = predictions
        .iter()
        .filter(|p| p.subject == p.predicted)
        .count();
    Ok(IdentificationReport {
        accuracy: correct as f64 / predictions.len() as f64,
        correct,
        total: predictions.len(),
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[(&str, u32, f64)]) -> FeatureMatrix {
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into()]);
        for &(s, n, v) in rows {
            m.push(s, n, vec![v, v * 2.0]).unwrap();
        }
        m
    }

    #[test]
    fn resubstitution_is_perfect() {
        let m = matrix(&[("a", 1, 0.0), ("a", 2, 0.1), ("b", 1, 5.0), ("b", 2, 5.2)]);
        for c in [
            IdentifyClassifier::Knn {
                k: 1,
                metric: Metric::uniform(2),
            },
            IdentifyClassifier::Forest(ForestConfig {
                n_trees: 10,
                ..Default::default()
            }),
        ] {
            let r = identify(&m, &m, &c).unwrap();
            assert_eq!(r.accuracy, 1.0);
            assert_eq!(r.total, 4);
        }
    }

    #[test]
    fn unknown_probe_subject() {
        let e = matrix(&[("a", 1, 0.0), ("b", 1, 1.0)]);
        let p = matrix(&[("c", 1, 0.0)]);
        let r = identify(
            &e,
            &p,
            &IdentifyClassifier::Knn {
                k: 1,
                metric: Metric::uniform(2),
            },
        );
        assert!(matches!(r, Err(Error::UnknownSubject(s)) if s == "c"));
    }

    #[test]
    fn protocol_split_by_session() {
        let m = matrix(&[
            ("a", 3, 0.0),
            ("a", 1, 0.1),
            ("a", 2, 0.2),
            ("b", 1, 5.0),
            ("b", 2, 5.2),
        ]);
        let s = IdentificationProtocol::default().split(&m).unwrap();
        assert_eq!(s.enrolled.samples, vec![1, 2]);
        assert_eq!(s.probes.samples, vec![3]);
        assert_eq!(s.skipped, vec!["b".to_string()]);
    }
}
