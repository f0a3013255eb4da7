use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate columns per split; `None` means `floor(sqrt(p))`.
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 150,
            max_features: None,
            min_leaf: 1,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidConfig("min_leaf must be at least 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::InvalidConfig(
                "max_features must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Sparse class distribution `(class, probability)`.
    Leaf { dist: Vec<(usize, f64)> },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// Bootstrap row indices, with repetition.
    pub bootstrap: Vec<usize>,
}

impl Tree {
    pub fn leaf(&self, x: &[f64]) -> &[(usize, f64)] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { dist } => return dist,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    /// Training rows that are absent from the bootstrap, ascending.
    pub fn oob_rows(&self, n_rows: usize) -> Vec<usize> {
        let mut inbag = vec![false; n_rows];
        for &r in &self.bootstrap {
            inbag[r] = true;
        }
        (0..n_rows).filter(|&r| !inbag[r]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub n_classes: usize,
    pub n_features: usize,
    pub n_rows: usize,
    pub config: ForestConfig,
    pub trees: Vec<Tree>,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    mtry: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &r in rows {
            counts[self.y[r]] += 1;
        }
        let n = rows.len() as f64;
        let dist = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k, c as f64 / n))
            .collect();
        self.nodes.push(Node::Leaf { dist });
        self.nodes.len() - 1
    }

    /// Best threshold on one column: `(weighted child impurity, threshold)`.
    fn best_cut(&self, rows: &[usize], f: usize) -> Option<(f64, f64)> {
        let mut v: Vec<(f64, usize)> = rows.iter().map(|&r| (self.x[r][f], self.y[r])).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = v.len();
        let mut right = vec![0usize; self.n_classes];
        for &(_, c) in &v {
            right[c] += 1;
        }
        let mut left = vec![0usize; self.n_classes];
        let mut best: Option<(f64, f64)> = None;
        for i in 0..n - 1 {
            left[v[i].1] += 1;
            right[v[i].1] -= 1;
            let nl = i + 1;
            if v[i].0 == v[i + 1].0 || nl < self.min_leaf || n - nl < self.min_leaf {
                continue;
            }
            let score =
                (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            if best.is_none_or(|b| score < b.0) {
                let mut t = v[i].0 + (v[i + 1].0 - v[i].0) / 2.0;
                // the midpoint can round up onto the larger value
                if t >= v[i + 1].0 {
                    t = v[i].0;
                }
                best = Some((score, t));
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, rng: &mut ChaCha8Rng) -> usize {
        let first = self.y[rows[0]];
        if rows.len() < 2 * self.min_leaf || rows.iter().all(|&r| self.y[r] == first) {
            return self.leaf(&rows);
        }
        let p = self.x[0].len();
        let mut cols: Vec<usize> = (0..p).collect();
        cols.shuffle(rng);
        let mut best: Option<(f64, usize, f64)> = None;
        // keep drawing columns past mtry until some valid split exists
        for (i, &f) in cols.iter().enumerate() {
            if i >= self.mtry && best.is_some() {
                break;
            }
            if let Some((s, t)) = self.best_cut(&rows, f) {
                if best.is_none_or(|b| s < b.0) {
                    best = Some((s, f, t));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return self.leaf(&rows);
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.x[r][feature] <= threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { dist: Vec::new() });
        let left = self.grow(l, rng);
        let right = self.grow(r, rng);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

fn check_training(x: &[Vec<f64>], y: &[usize]) -> Result<(usize, usize)> {
    if x.is_empty() {
        return Err(Error::DegenerateLabels("no training rows".into()));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let p = x[0].len();
    if let Some(r) = x.iter().find(|r| r.len() != p) {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: p,
        });
    }
    if p == 0 {
        return Err(Error::EmptyInput);
    }
    Ok((p, y.iter().max().expect("nonempty") + 1))
}

/// Bagged CART trees with Gini splits. A single-class training set gives
/// a forest of one-leaf trees.
pub fn forest_train(x: &[Vec<f64>], y: &[usize], config: &ForestConfig) -> Result<ForestModel> {
    config.validate()?;
    let (p, n_classes) = check_training(x, y)?;
    let n = x.len();
    let mtry = config
        .max_features
        .unwrap_or_else(|| (p as f64).sqrt().floor() as usize)
        .clamp(1, p);
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<u64> = (0..config.n_trees).map(|_| master.gen()).collect();
    let trees = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut g = Grower {
                x,
                y,
                n_classes,
                mtry,
                min_leaf: config.min_leaf,
                nodes: Vec::new(),
            };
            g.grow(bootstrap.clone(), &mut rng);
            Tree {
                nodes: g.nodes,
                bootstrap,
            }
        })
        .collect();
    Ok(ForestModel {
        version: FOREST_FORMAT_VERSION,
        n_classes,
        n_features: p,
        n_rows: n,
        config: config.clone(),
        trees,
    })
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

/// Mean of the leaf distributions; the label is the argmax, ties to the
/// smaller class id.
pub fn forest_predict(model: &ForestModel, probe: &[f64]) -> Result<(usize, Vec<f64>)> {
    if probe.len() != model.n_features {
        return Err(Error::LengthMismatch {
            left: probe.len(),
            right: model.n_features,
        });
    }
    let mut scores = vec![0.0; model.n_classes];
    for t in &model.trees {
        for &(k, p) in t.leaf(probe) {
            scores[k] += p;
        }
    }
    let m = model.trees.len() as f64;
    scores.iter_mut().for_each(|s| *s /= m);
    Ok((argmax(&scores), scores))
}

impl ForestModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<ForestModel> {
        let m: ForestModel = serde_json::from_str(s)?;
        if m.version != FOREST_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported forest format version {}",
                m.version
            )));
        }
        if m.trees.is_empty() {
            return Err(Error::InvalidConfig("forest has no trees".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OobReport {
    /// Error using the first `t` trees, for `t = 1..=n_trees`.
    pub curve: Vec<f64>,
    pub mean: f64,
    pub min: f64,
    /// Rows drawn into every bootstrap, left out of the estimate.
    pub never_oob: usize,
}

impl OobReport {
    /// `trees,error` rows.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["trees", "error"])?;
        for (t, e) in self.curve.iter().enumerate() {
            w.write_record([(t + 1).to_string(), e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Out-of-bag error as trees are added. At each count `t` a row is scored
/// by the trees among the first `t` that did not see it; rows with no
/// such tree yet are skipped at that `t`.
pub fn oob_error(model: &ForestModel, x: &[Vec<f64>], y: &[usize]) -> Result<OobReport> {
    if x.len() != model.n_rows || y.len() != model.n_rows {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: model.n_rows,
        });
    }
    let n = x.len();
    let mut votes = vec![vec![0.0; model.n_classes]; n];
    let mut seen = vec![false; n];
    let mut curve = Vec::with_capacity(model.trees.len());
    for t in &model.trees {
        for r in t.oob_rows(n) {
            seen[r] = true;
            for &(k, p) in t.leaf(&x[r]) {
                votes[r][k] += p;
            }
        }
        let (mut wrong, mut total) = (0usize, 0usize);
        for r in (0..n).filter(|&r| seen[r]) {
            total += 1;
            if y[r] >= model.n_classes || argmax(&votes[r]) != y[r] {
                wrong += 1;
            }
        }
        curve.push(if total == 0 {
            0.0
        } else {
            wrong as f64 / total as f64
        });
    }
    let mean = curve.iter().sum::<f64>() / curve.len() as f64;
    let min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(OobReport {
        curve,
        mean,
        min,
        never_oob: seen.iter().filter(|s| !**s).count(),
    })
}
