use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::relevance::{
    compute_weights, group_features, rank_features, ColumnLayout, LooKnn, SubsetEvaluator,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// Atomic groups of one feature across all fingers.
    Global,
    /// Single columns.
    #[default]
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Seeded shuffle (FoBa).
    Random,
    /// Descending relevance (R-FoBa).
    #[default]
    Rank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub delta: f64,
    pub epsilon: f64,
    pub granularity: Granularity,
    pub ordering: Ordering,
    pub seed: u64,
    pub group_size: usize,
    pub layout: ColumnLayout,
    /// Neighbors used by the default evaluator.
    pub k: usize,
    /// Repeat the backward pass until nothing more is removed.
    pub repeat_backward: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            delta: 0.003,
            epsilon: 0.0,
            granularity: Granularity::Local,
            ordering: Ordering::Rank,
            seed: 0,
            group_size: 4,
            layout: ColumnLayout::FingerMajor,
            k: 3,
            repeat_backward: false,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta out of range: {} not in (0, 1)",
                self.delta
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < self.delta) {
            return Err(Error::InvalidConfig(format!(
                "epsilon out of range: {} not in [0, delta)",
                self.epsilon
            )));
        }
        if self.group_size == 0 || self.k == 0 {
            return Err(Error::InvalidConfig(
                "group_size and k must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Forward,
    Backward,
}

/// One candidate decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStep {
    pub phase: Phase,
    pub unit: Vec<usize>,
    /// Accepted in the forward phase, removed in the backward phase.
    pub taken: bool,
    pub psi_before: f64,
    pub psi_candidate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub delta: f64,
    pub epsilon: f64,
    pub ordering: Ordering,
    pub seed: u64,
    pub granularity: Granularity,
    /// Names of the selected columns.
    pub selected: Vec<String>,
    /// Selected column indices, in acceptance order.
    pub selected_indices: Vec<usize>,
    /// Rank of each unit (column or group) by singleton accuracy.
    pub ranks: Vec<usize>,
    pub unit_accuracy: Vec<f64>,
    /// Weights over the selected columns, proportional to their
    /// single-column accuracy.
    pub weights: Vec<f64>,
    /// Accuracy after each accepted or removed unit.
    pub trace: Vec<f64>,
    /// Removed column indices.
    pub removals: Vec<usize>,
    pub phase_log: Vec<PhaseStep>,
    pub cardinality: usize,
    pub accuracy: f64,
}

impl SelectionResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<SelectionResult> {
        Ok(serde_json::from_str(s)?)
    }

    /// Forward picks as `(psi before, psi after)`.
    pub fn forward_gains(&self) -> Vec<(f64, f64)> {
        self.phase_log
            .iter()
            .filter(|s| s.phase == Phase::Forward && s.taken)
            .map(|s| (s.psi_before, s.psi_candidate))
            .collect()
    }

    /// Human-readable decision table.
    pub fn trace_table(&self, names: &[String]) -> String {
        let mut out = String::from("phase     decision  psi_before  psi_after  unit\n");
        for s in &self.phase_log {
            let unit: Vec<&str> = s
                .unit
                .iter()
                .map(|&c| names.get(c).map_or("?", |n| n.as_str()))
                .collect();
            let decision = match (s.phase, s.taken) {
                (Phase::Forward, true) => "accept",
                (Phase::Forward, false) => "reject",
                (Phase::Backward, true) => "remove",
                (Phase::Backward, false) => "keep",
            };
            let phase = match s.phase {
                Phase::Forward => "forward",
                Phase::Backward => "backward",
            };
            out.push_str(&format!(
                "{phase:<9} {decision:<9} {:<11.6} {:<10.6} {}\n",
                s.psi_before,
                s.psi_candidate,
                unit.join(",")
            ));
        }
        out
    }
}

/// Candidate units for the configured granularity.
pub fn selection_units(n_columns: usize, config: &SelectionConfig) -> Result<Vec<Vec<usize>>> {
    match config.granularity {
        Granularity::Local => Ok((0..n_columns).map(|j| vec![j]).collect()),
        Granularity::Global => group_features(n_columns, config.group_size, config.layout),
    }
}

fn flatten(units: &[Vec<usize>]) -> Vec<usize> {
    units.iter().flatten().copied().collect()
}

/// State of a forward pass: accepted units in order and the log.
#[derive(Debug, Clone)]
pub struct ForwardOutcome {
    pub selected: Vec<Vec<usize>>,
    pub unit_accuracy: Vec<f64>,
    pub ranks: Vec<usize>,
    pub trace: Vec<f64>,
    pub log: Vec<PhaseStep>,
}

/// Greedy forward pass. The best single unit is taken first; the rest are
/// visited in rank or shuffled order and kept when the accuracy gain is at
/// least `delta`.
pub fn forward_select(
    eval: &dyn SubsetEvaluator,
    units: &[Vec<usize>],
    config: &SelectionConfig,
) -> Result<ForwardOutcome> {
    config.validate()?;
    if units.is_empty() {
        return Err(Error::EmptyInput);
    }
    let unit_accuracy: Vec<f64> = units.iter().map(|u| eval.accuracy(u)).collect();
    let ranking = rank_features(&unit_accuracy);
    let order = ranking.order();
    let first = order[0];
    let mut rest: Vec<usize> = order[1..].to_vec();
    if config.ordering == Ordering::Random {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rest.shuffle(&mut rng);
    }

    let mut selected = vec![units[first].clone()];
    let mut psi = unit_accuracy[first];
    let mut trace = vec![psi];
    let mut log = vec![PhaseStep {
        phase: Phase::Forward,
        unit: units[first].clone(),
        taken: true,
        psi_before: 0.0,
        psi_candidate: psi,
    }];
    for u in rest {
        let mut cols = flatten(&selected);
        cols.extend(&units[u]);
        let cand = eval.accuracy(&cols);
        let taken = cand - psi >= config.delta;
        log.push(PhaseStep {
            phase: Phase::Forward,
            unit: units[u].clone(),
            taken,
            psi_before: psi,
            psi_candidate: cand,
        });
        if taken {
            selected.push(units[u].clone());
            psi = cand;
            trace.push(psi);
        }
    }
    Ok(ForwardOutcome {
        selected,
        unit_accuracy,
        ranks: ranking.ranks,
        trace,
        log,
    })
}

/// Kept units, accuracy trace and log of a backward pass.
pub type Backward = (Vec<Vec<usize>>, Vec<f64>, Vec<PhaseStep>);

/// Backward pass over the units in acceptance order. A unit is removed when
/// dropping it raises accuracy by at least `delta` or changes it by at most
/// `epsilon`. The last remaining unit is never removed.
pub fn backward_eliminate(
    eval: &dyn SubsetEvaluator,
    selected: &[Vec<usize>],
    config: &SelectionConfig,
) -> Result<Backward> {
    config.validate()?;
    if selected.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut kept = selected.to_vec();
    let mut psi = eval.accuracy(&flatten(&kept));
    let mut trace = Vec::new();
    let mut log = Vec::new();
    loop {
        let mut removed_any = false;
        let pass: Vec<Vec<usize>> = kept.clone();
        for unit in pass {
            if kept.len() <= 1 {
                break;
            }
            let without: Vec<Vec<usize>> = kept.iter().filter(|u| **u != unit).cloned().collect();
            let cand = eval.accuracy(&flatten(&without));
            let change = cand - psi;
            let taken = change >= config.delta || change.abs() <= config.epsilon;
            log.push(PhaseStep {
                phase: Phase::Backward,
                unit: unit.clone(),
                taken,
                psi_before: psi,
                psi_candidate: cand,
            });
            if taken {
                kept = without;
                psi = cand;
                trace.push(psi);
                removed_any = true;
            }
        }
        if !config.repeat_backward || !removed_any {
            break;
        }
    }
    Ok((kept, trace, log))
}

/// Forward selection followed by backward elimination with any evaluator.
pub fn foba_with(
    eval: &dyn SubsetEvaluator,
    column_names: &[String],
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    config.validate()?;
    let n = eval.n_columns();
    if column_names.len() != n {
        return Err(Error::LengthMismatch {
            left: column_names.len(),
            right: n,
        });
    }
    let units = selection_units(n, config)?;
    let fwd = forward_select(eval, &units, config)?;
    let (kept, back_trace, back_log) = backward_eliminate(eval, &fwd.selected, config)?;

    let selected_indices = flatten(&kept);
    let removals: Vec<usize> = flatten(&fwd.selected)
        .into_iter()
        .filter(|c| !selected_indices.contains(c))
        .collect();
    let col_acc: Vec<f64> = match config.granularity {
        Granularity::Local => selected_indices
            .iter()
            .map(|&c| fwd.unit_accuracy[c])
            .collect(),
        Granularity::Global => selected_indices
            .iter()
            .map(|&c| eval.accuracy(&[c]))
            .collect(),
    };
    let weights = compute_weights(&col_acc)
        .unwrap_or_else(|_| vec![1.0 / selected_indices.len() as f64; selected_indices.len()]);
    let accuracy = eval.accuracy(&selected_indices);
    let mut trace = fwd.trace;
    trace.extend(back_trace);
    let mut phase_log = fwd.log;
    phase_log.extend(back_log);
    Ok(SelectionResult {
        delta: config.delta,
        epsilon: config.epsilon,
        ordering: config.ordering,
        seed: config.seed,
        granularity: config.granularity,
        selected: selected_indices
            .iter()
            .map(|&c| column_names[c].clone())
            .collect(),
        cardinality: selected_indices.len(),
        selected_indices,
        ranks: fwd.ranks,
        unit_accuracy: fwd.unit_accuracy,
        weights,
        trace,
        removals,
        phase_log,
        accuracy,
    })
}

/// FoBa (random order) or R-FoBa (rank order) with the leave-one-out
/// k-NN evaluator on the given rows.
pub fn foba(
    rows: &[Vec<f64>],
    labels: &[usize],
    column_names: &[String],
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    config.validate()?;
    let eval = LooKnn::new(rows.to_vec(), labels.to_vec(), config.k)?;
    foba_with(&eval, column_names, config)
}
