use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Floor applied to training means before they are used as divisors.
pub const MEAN_FLOOR: f64 = 1e-6;

/// Where the training mean divides in the matching score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanDivision {
    /// Each term is divided by the mean of its own feature.
    #[default]
    PerTerm,
    /// The weighted sum is divided once, by the average of all feature means.
    Outside,
}

/// Column means of a raw (unnormalized) matrix, floored at [`MEAN_FLOOR`].
pub fn feature_means(m: &FeatureMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    let n = m.rows() as f64;
    Ok((0..m.cols())
        .map(|j| (m.values.iter().map(|r| r[j]).sum::<f64>() / n).max(MEAN_FLOOR))
        .collect())
}

/// Matching score between an enrolled template and a probe; smaller is a
/// closer match.
pub fn verification_score(
    alpha: &[f64],
    beta: &[f64],
    weights: &[f64],
    means: &[f64],
    division: MeanDivision,
) -> Result<f64> {
    for len in [beta.len(), weights.len(), means.len()] {
        if len != alpha.len() {
            return Err(Error::LengthMismatch {
                left: alpha.len(),
                right: len,
            });
        }
    }
    if let Some(q) = means.iter().position(|&m| m == 0.0 || !m.is_finite()) {
        return Err(Error::ZeroMean(q));
    }
    Ok(match division {
        MeanDivision::PerTerm => (0..alpha.len())
            .map(|q| (alpha[q] - beta[q]).abs() * weights[q] / means[q])
            .sum(),
        MeanDivision::Outside => {
            let avg = means.iter().sum::<f64>() / means.len().max(1) as f64;
            (0..alpha.len())
                .map(|q| (alpha[q] - beta[q]).abs() * weights[q])
                .sum::<f64>()
                / avg
        }
    })
}

/// Genuine and imposter scores with the `(probe row, template row)` pair
/// behind each one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreSets {
    pub genuine: Vec<f64>,
    pub imposter: Vec<f64>,
    #[serde(skip)]
    pub genuine_pairs: Vec<(usize, usize)>,
    #[serde(skip)]
    pub imposter_pairs: Vec<(usize, usize)>,
}

impl ScoreSets {
    /// `kind,score` rows.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["kind", "score"])?;
        for (kind, set) in [("genuine", &self.genuine), ("imposter", &self.imposter)] {
            for s in set {
                w.write_record([kind, &s.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Scores every probe against every enrolled template. Pairs with the same
/// subject are genuine, the rest imposter.
pub fn build_score_sets(
    enrolled: &FeatureMatrix,
    probes: &FeatureMatrix,
    weights: &[f64],
    means: &[f64],
    division: MeanDivision,
) -> Result<ScoreSets> {
    if enrolled.rows() == 0 || probes.rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(s) = probes
        .subjects
        .iter()
        .find(|s| !enrolled.subjects.contains(s))
    {
        return Err(Error::UnknownSubject(s.clone()));
    }
    let per_probe: Vec<Vec<(usize, f64)>> = (0..probes.rows())
        .into_par_iter()
        .map(|p| {
            (0..enrolled.rows())
                .map(|e| {
                    Ok((
                        e,
                        verification_score(
                            &enrolled.values[e],
                            &probes.values[p],
                            weights,
                            means,
                            division,
                        )?,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = ScoreSets::default();
    for (p, scores) in per_probe.into_iter().enumerate() {
        for (e, s) in scores {
            if enrolled.subjects[e] == probes.subjects[p] {
                out.genuine.push(s);
                out.genuine_pairs.push((p, e));
            } else {
                out.imposter.push(s);
                out.imposter_pairs.push((p, e));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
    pub gar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roc {
    pub points: Vec<RocPoint>,
    pub eer: f64,
    pub eer_threshold: f64,
}

fn rates(genuine: &[f64], imposter: &[f64], t: f64) -> RocPoint {
    let accepted_imp = imposter.partition_point(|&s| s <= t);
    let accepted_gen = genuine.partition_point(|&s| s <= t);
    let far = accepted_imp as f64 / imposter.len() as f64;
    let frr = (genuine.len() - accepted_gen) as f64 / genuine.len() as f64;
    RocPoint {
        threshold: t,
        far,
        frr,
        gar: 1.0 - frr,
    }
}

/// Sweeps `n_thresholds` evenly spaced thresholds over the pooled score
/// range, plus every distinct genuine score (and every distinct score when
/// there are fewer than `n_thresholds` of them). A pair is accepted when
/// its score is at most the threshold. The EER is linearly interpolated at
/// the first sweep point where FAR reaches FRR.
pub fn roc_and_eer(scores: &ScoreSets, n_thresholds: usize) -> Result<Roc> {
    if scores.genuine.is_empty() || scores.imposter.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut g = scores.genuine.clone();
    let mut i = scores.imposter.clone();
    if g.iter().chain(&i).any(|s| !s.is_finite()) {
        return Err(Error::InvalidConfig("scores must be finite".into()));
    }
    g.sort_by(f64::total_cmp);
    i.sort_by(f64::total_cmp);
    let lo = g[0].min(i[0]);
    let hi = g[g.len() - 1].max(i[i.len() - 1]);

    let mut thresholds: Vec<f64> = if n_thresholds >= 2 {
        (0..n_thresholds)
            .map(|k| lo + (hi - lo) * k as f64 / (n_thresholds - 1) as f64)
            .collect()
    } else {
        vec![lo, hi]
    };
    thresholds.extend(&g);
    if g.len() + i.len() < n_thresholds {
        thresholds.extend(&i);
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let points: Vec<RocPoint> = thresholds.iter().map(|&t| rates(&g, &i, t)).collect();
    // below every score nothing is accepted
    let mut prev = RocPoint {
        threshold: lo,
        far: 0.0,
        frr: 1.0,
        gar: 0.0,
    };
    let mut eer = None;
    for p in &points {
        let d = p.far - p.frr;
        if d >= 0.0 {
            let dp = prev.far - prev.frr;
            let f = if d == 0.0 { 1.0 } else { -dp / (d - dp) };
            eer = Some((
                prev.far + f * (p.far - prev.far),
                prev.threshold + f * (p.threshold - prev.threshold),
            ));
            break;
        }
        prev = *p;
    }
    // the last point accepts everything, so FAR = 1 ≥ FRR = 0 there
    let (eer, eer_threshold) = eer.expect("sweep ends at FAR 1");
    Ok(Roc {
        points,
        eer,
        eer_threshold,
    })
}

impl Roc {
    /// `threshold,far,frr,gar` rows.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["threshold", "far", "frr", "gar"])?;
        for p in &self.points {
            w.write_record([p.threshold, p.far, p.frr, p.gar].map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// `far,gar` rows with FAR > 0, for plotting on a log FAR axis.
    pub fn write_far_gar_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["far", "gar"])?;
        for p in self.points.iter().filter(|p| p.far > 0.0) {
            w.write_record([p.far.to_string(), p.gar.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Highest GAR over sweep points with FAR at most `far`.
    pub fn gar_at_far(&self, far: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.far <= far)
            .map(|p| p.gar)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub far: f64,
    pub gar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub genuine: usize,
    pub imposter: usize,
    pub total: usize,
    pub eer: f64,
    pub eer_threshold: f64,
    pub operating_points: Vec<OperatingPoint>,
}

impl VerificationSummary {
    pub fn new(scores: &ScoreSets, roc: &Roc) -> VerificationSummary {
        VerificationSummary {
            genuine: scores.genuine.len(),
            imposter: scores.imposter.len(),
            total: scores.genuine.len() + scores.imposter.len(),
            eer: roc.eer,
            eer_threshold: roc.eer_threshold,
            operating_points: [0.001, 0.01, 0.1]
                .iter()
                .map(|&far| OperatingPoint {
                    far,
                    gar: roc.gar_at_far(far),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(genuine: Vec<f64>, imposter: Vec<f64>) -> ScoreSets {
        ScoreSets {
            genuine,
            imposter,
            ..Default::default()
        }
    }

    #[test]
    fn hand_computed_score() {
        let t = verification_score(
            &[0.4, 0.6],
            &[0.2, 0.9],
            &[0.5, 0.5],
            &[0.5, 0.5],
            MeanDivision::PerTerm,
        )
        .unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        let s = verification_score(
            &[0.4, 0.6],
            &[0.4, 0.6],
            &[0.5, 0.5],
            &[0.5, 0.5],
            MeanDivision::PerTerm,
        )
        .unwrap();
        assert_eq!(s, 0.0);
        assert!(matches!(
            verification_score(&[1.0], &[1.0], &[1.0], &[0.0], MeanDivision::PerTerm),
            Err(Error::ZeroMean(0))
        ));
    }

    #[test]
    fn small_protocol_counts() {
        let mut e = FeatureMatrix::new(vec!["x".into()]);
        let mut p = FeatureMatrix::new(vec!["x".into()]);
        for (k, s) in ["a", "b", "c"].iter().enumerate() {
            e.push(*s, 1, vec![k as f64 + 1.0]).unwrap();
            e.push(*s, 2, vec![k as f64 + 1.1]).unwrap();
            p.push(*s, 3, vec![k as f64 + 1.05]).unwrap();
        }
        let sc = build_score_sets(&e, &p, &[1.0], &[1.0], MeanDivision::PerTerm).unwrap();
        assert_eq!(sc.genuine.len(), 6);
        assert_eq!(sc.imposter.len(), 12);
        for &(pi, ei) in &sc.genuine_pairs {
            assert_eq!(p.subjects[pi], e.subjects[ei]);
        }
        for &(pi, ei) in &sc.imposter_pairs {
            assert_ne!(p.subjects[pi], e.subjects[ei]);
        }
    }

    #[test]
    fn separable_scores_have_zero_eer() {
        let r = roc_and_eer(&sets(vec![0.1, 0.2, 0.3], vec![0.5, 0.9, 1.3, 2.0]), 2000).unwrap();
        assert_eq!(r.eer, 0.0);
    }

    #[test]
    fn identical_distributions_give_half() {
        let v: Vec<f64> = (0..500).map(|i| (i as f64 * 0.37).sin()).collect();
        let r = roc_and_eer(&sets(v.clone(), v), 2000).unwrap();
        assert!((r.eer - 0.5).abs() <= 1.0 / 500.0, "{}", r.eer);
    }

    #[test]
    fn rates_are_monotone() {
        let r = roc_and_eer(&sets(vec![0.3, 0.1, 0.7], vec![0.2, 0.8, 0.9, 0.4]), 50).unwrap();
        for w in r.points.windows(2) {
            assert!(w[0].far <= w[1].far);
            assert!(w[0].frr >= w[1].frr);
        }
        assert!(r.points.iter().all(|p| p.gar + p.frr == 1.0));
    }

    #[test]
    fn empty_sets() {
        assert!(matches!(
            roc_and_eer(&sets(vec![], vec![1.0]), 10),
            Err(Error::EmptyScores)
        ));
    }
}
