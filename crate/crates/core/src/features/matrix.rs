use std::path::Path;

use serde::{Deserialize, Serialize};

use super::shape::{FEATURES_PER_FINGER, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::imaging::FingerLabel;

pub const FINGERS: usize = 4;
pub const FEATURE_COUNT: usize = FINGERS * FEATURES_PER_FINGER;

/// Column index of `feature` (0..13) on finger `finger` (0 = index .. 3 = little).
pub fn column(finger: usize, feature: usize) -> usize {
    finger * FEATURES_PER_FINGER + feature
}

/// Human-readable column names such as `area_index`.
pub fn default_column_names() -> Vec<String> {
    FingerLabel::FOUR
        .iter()
        .flat_map(|f| FEATURE_NAMES.iter().map(move |n| format!("{n}_{f}")))
        .collect()
}

/// Rows of feature vectors labeled by subject and session.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub subjects: Vec<String>,
    pub samples: Vec<u32>,
    pub values: Vec<Vec<f64>>,
    pub column_names: Vec<String>,
}

/// Rounds to 9 significant digits, the precision written to CSV.
pub fn round_sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}

impl FeatureMatrix {
    pub fn new(column_names: Vec<String>) -> FeatureMatrix {
        FeatureMatrix {
            subjects: Vec::new(),
            samples: Vec::new(),
            values: Vec::new(),
            column_names,
        }
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn push(&mut self, subject: impl Into<String>, sample: u32, row: Vec<f64>) -> Result<()> {
        if row.len() != self.cols() {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: self.cols(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("feature values must be finite".into()));
        }
        self.subjects.push(subject.into());
        self.samples.push(sample);
        self.values.push(row);
        Ok(())
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }

    /// Keeps the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            subjects: self.subjects.clone(),
            samples: self.samples.clone(),
            values: self
                .values
                .iter()
                .map(|r| cols.iter().map(|&c| r[c]).collect())
                .collect(),
            column_names: cols.iter().map(|&c| self.column_names[c].clone()).collect(),
        }
    }

    /// Keeps the rows for which `keep(subject, sample)` holds.
    pub fn filter_rows(&self, mut keep: impl FnMut(&str, u32) -> bool) -> FeatureMatrix {
        let mut out = FeatureMatrix::new(self.column_names.clone());
        for i in 0..self.rows() {
            if keep(&self.subjects[i], self.samples[i]) {
                out.subjects.push(self.subjects[i].clone());
                out.samples.push(self.samples[i]);
                out.values.push(self.values[i].clone());
            }
        }
        out
    }

    /// Dense class ids (order of first appearance) and the id → subject table.
    pub fn class_labels(&self) -> (Vec<usize>, Vec<String>) {
        let mut names: Vec<String> = Vec::new();
        let labels = self
            .subjects
            .iter()
            .map(|s| match names.iter().position(|n| n == s) {
                Some(i) => i,
                None => {
                    names.push(s.clone());
                    names.len() - 1
                }
            })
            .collect();
        (labels, names)
    }

    /// Writes `subject_id,sample_id,f1..fN` CSV, values at 9 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["subject_id".to_string(), "sample_id".to_string()];
        header.extend((1..=self.cols()).map(|i| format!("f{i}")));
        w.write_record(&header)?;
        for i in 0..self.rows() {
            let mut rec = vec![self.subjects[i].clone(), self.samples[i].to_string()];
            rec.extend(self.values[i].iter().map(|&v| format!("{}", round_sig9(v))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads the CSV layout written by [`write_csv`](Self::write_csv).
    /// Column names fall back to the default names when there are 52
    /// columns, and to the header otherwise.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<FeatureMatrix> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.len() < 3 || &header[0] != "subject_id" || &header[1] != "sample_id" {
            return Err(Error::BadLayout(
                "expected header subject_id,sample_id,f1..".to_string(),
            ));
        }
        let n = header.len() - 2;
        let names = if n == FEATURE_COUNT {
            default_column_names()
        } else {
            header.iter().skip(2).map(str::to_string).collect()
        };
        let mut m = FeatureMatrix::new(names);
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != n + 2 {
                return Err(Error::LengthMismatch {
                    left: rec.len(),
                    right: n + 2,
                });
            }
            let sample = rec[1]
                .parse()
                .map_err(|_| Error::BadLayout(format!("bad sample id {:?}", &rec[1])))?;
            let row = rec
                .iter()
                .skip(2)
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::BadLayout(format!("bad value {v:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            m.push(rec[0].to_string(), sample, row)?;
        }
        Ok(m)
    }

    pub fn read_csv_file(path: &Path) -> Result<FeatureMatrix> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Per-column minimum and maximum of a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationParams {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<NormalizationParams> {
        let p: NormalizationParams = serde_json::from_str(s)?;
        if p.min.len() != p.max.len() {
            return Err(Error::LengthMismatch {
                left: p.min.len(),
                right: p.max.len(),
            });
        }
        Ok(p)
    }
}

pub fn fit_minmax(training: &FeatureMatrix) -> Result<NormalizationParams> {
    if training.rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: training.rows(),
        });
    }
    let c = training.cols();
    let mut min = vec![f64::INFINITY; c];
    let mut max = vec![f64::NEG_INFINITY; c];
    for row in &training.values {
        for j in 0..c {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    Ok(NormalizationParams { min, max })
}

/// `(v − min) / (max − min)` clamped to [0, 1]; constant columns map to 0.
pub fn apply_minmax(matrix: &FeatureMatrix, params: &NormalizationParams) -> Result<FeatureMatrix> {
    if params.min.len() != matrix.cols() {
        return Err(Error::LengthMismatch {
            left: params.min.len(),
            right: matrix.cols(),
        });
    }
    let mut out = matrix.clone();
    for row in &mut out.values {
        for (j, v) in row.iter_mut().enumerate() {
            let range = params.max[j] - params.min[j];
            *v = if range > 0.0 {
                ((*v - params.min[j]) / range).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
    }
    Ok(out)
}
