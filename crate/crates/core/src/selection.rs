//! Greedy max-relevance / min-redundancy feature ranking.
//!
//! At step `m` the selector picks, among the remaining candidates `j`,
//!
//! ```text
//! relevance[j] - (1 / (m - 1)) * sum_{i in selected} I(x_j ; x_i)
//! ```
//!
//! where relevance is always measured on training rows against the training
//! target. In [`Mode::Mrmr`] the redundancy MI also uses training rows only;
//! in [`Mode::Mint`] it uses training plus test rows, since redundancy never
//! looks at the target.
//!
//! [`select_greedy`] keeps the per-candidate redundancy sum between steps and
//! adds one MI evaluation per remaining candidate per step. The naive
//! [`select_greedy_naive`] recomputes every sum from scratch and exists as an
//! oracle: both accumulate the sums in selection order, so their rankings and
//! scores agree bit for bit.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::infotheory::{DiscreteColumn, MiEstimator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Inductive: redundancy on training rows.
    Mrmr,
    /// Transductive: redundancy on training plus test rows.
    Mint,
}

/// Discretized feature columns for one selection problem.
#[derive(Debug, Clone)]
pub struct TransductiveView {
    train_features: Vec<DiscreteColumn>,
    /// `None` when there are no test rows; the training columns are used.
    all_features: Option<Vec<DiscreteColumn>>,
    train_target: DiscreteColumn,
}

impl TransductiveView {
    /// Builds a view from training columns, training-plus-test columns and
    /// the training target.
    ///
    /// `all_features` must hold the training rows first, followed by any test
    /// rows. When it has no extra rows the view is purely inductive.
    pub fn new(
        train_features: Vec<DiscreteColumn>,
        all_features: Vec<DiscreteColumn>,
        train_target: DiscreteColumn,
    ) -> Result<Self> {
        if train_features.len() != all_features.len() {
            return Err(MintError::invalid(format!(
                "training view has {} features but the combined view has {}",
                train_features.len(),
                all_features.len()
            )));
        }
        let view = Self::inductive(train_features, train_target)?;
        let n_train = view.n_train();
        let n_all = all_features.first().map(|c| c.len()).unwrap_or(n_train);
        if n_all < n_train {
            return Err(MintError::invalid(format!(
                "combined view has {n_all} rows, fewer than the {n_train} training rows"
            )));
        }
        if let Some(j) = all_features.iter().position(|c| c.len() != n_all) {
            return Err(MintError::invalid(format!(
                "combined feature {j} has {} rows, expected {n_all}",
                all_features[j].len()
            )));
        }
        let all_features = if n_all == n_train {
            None
        } else {
            Some(all_features)
        };
        Ok(Self {
            all_features,
            ..view
        })
    }

    /// A view with no test rows.
    pub fn inductive(
        train_features: Vec<DiscreteColumn>,
        train_target: DiscreteColumn,
    ) -> Result<Self> {
        if train_features.is_empty() {
            return Err(MintError::invalid("feature set is empty"));
        }
        if train_target.is_empty() {
            return Err(MintError::invalid("training set is empty"));
        }
        let n = train_target.len();
        if let Some(j) = train_features.iter().position(|c| c.len() != n) {
            return Err(MintError::invalid(format!(
                "training feature {j} has {} rows but the target has {n}",
                train_features[j].len()
            )));
        }
        Ok(Self {
            train_features,
            all_features: None,
            train_target,
        })
    }

    pub fn n_features(&self) -> usize {
        self.train_features.len()
    }

    pub fn n_train(&self) -> usize {
        self.train_target.len()
    }

    pub fn n_test(&self) -> usize {
        self.all_features
            .as_ref()
            .map_or(0, |cols| cols[0].len() - self.n_train())
    }

    pub fn train_features(&self) -> &[DiscreteColumn] {
        &self.train_features
    }

    pub fn train_target(&self) -> &DiscreteColumn {
        &self.train_target
    }

    /// Columns used for redundancy in `mode`.
    pub fn redundancy_features(&self, mode: Mode) -> &[DiscreteColumn] {
        match (mode, &self.all_features) {
            (Mode::Mint, Some(all)) => all,
            _ => &self.train_features,
        }
    }
}

/// Outcome of a greedy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected feature indices in selection order.
    pub ranking: Vec<usize>,
    /// Objective value of each chosen feature at the step it was chosen.
    pub step_scores: Vec<f64>,
    /// Relevance of each chosen feature, aligned with `ranking`.
    pub relevance: Vec<f64>,
    /// Total pairwise MI evaluations, relevance included.
    pub mi_eval_count: u64,
    /// MI evaluations performed up to and including each step.
    pub evals_through_step: Vec<u64>,
}

impl SelectionResult {
    /// The result a run stopped after `n` steps would have produced.
    pub fn prefix(&self, n: usize) -> SelectionResult {
        let n = n.min(self.ranking.len());
        SelectionResult {
            ranking: self.ranking[..n].to_vec(),
            step_scores: self.step_scores[..n].to_vec(),
            relevance: self.relevance[..n].to_vec(),
            mi_eval_count: if n == 0 {
                0
            } else {
                self.evals_through_step[n - 1]
            },
            evals_through_step: self.evals_through_step[..n].to_vec(),
        }
    }
}

/// `I(x_j ; c)` on training rows for every feature.
pub fn relevance_vector(view: &TransductiveView) -> Result<Vec<f64>> {
    let est = MiEstimator::new(view.n_train());
    Ok(relevance_with(view, &est))
}

fn relevance_with(view: &TransductiveView, est: &MiEstimator) -> Vec<f64> {
    view.train_features
        .par_iter()
        .map_init(Vec::new, |scratch, col| {
            est.mi(col, &view.train_target, scratch)
        })
        .collect()
}

fn check_request(view: &TransductiveView, n: usize) -> Result<()> {
    if n == 0 {
        return Err(MintError::invalid(
            "number of features to select must be at least 1",
        ));
    }
    if n > view.n_features() {
        return Err(MintError::invalid(format!(
            "cannot select {n} features out of {}",
            view.n_features()
        )));
    }
    Ok(())
}

/// Index of the best candidate: highest score, lowest index on ties.
fn argmax(candidates: &[usize], scores: &[f64]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (pos, (&j, &s)) in candidates.iter().zip(scores).enumerate() {
        if s.is_nan() {
            return Err(MintError::Numerical(format!(
                "objective for feature {j} is NaN"
            )));
        }
        let better = match best {
            None => true,
            Some((_, bj, bs)) => match s.partial_cmp(&bs).expect("no NaN") {
                Ordering::Greater => true,
                Ordering::Equal => j < bj,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((pos, j, s));
        }
    }
    let (pos, _, score) = best.expect("at least one candidate");
    Ok((pos, score))
}

struct Trajectory {
    ranking: Vec<usize>,
    step_scores: Vec<f64>,
    evals_through_step: Vec<u64>,
}

fn finish(
    t: Trajectory,
    relevance: &[f64],
    est_train: &MiEstimator,
    est_red: Option<&MiEstimator>,
) -> SelectionResult {
    let total = est_train.evaluations() + est_red.map_or(0, |e| e.evaluations());
    debug_assert_eq!(t.evals_through_step.last().copied(), Some(total));
    SelectionResult {
        relevance: t.ranking.iter().map(|&j| relevance[j]).collect(),
        ranking: t.ranking,
        step_scores: t.step_scores,
        mi_eval_count: total,
        evals_through_step: t.evals_through_step,
    }
}

/// Estimators for relevance (training rows) and, when the redundancy rows
/// differ in number, for redundancy.
fn estimators(view: &TransductiveView, mode: Mode) -> (MiEstimator, Option<MiEstimator>) {
    let train = MiEstimator::new(view.n_train());
    let red_rows = view.redundancy_features(mode)[0].len();
    let red = (red_rows != view.n_train()).then(|| MiEstimator::new(red_rows));
    (train, red)
}

fn total_evals(train: &MiEstimator, red: Option<&MiEstimator>) -> u64 {
    train.evaluations() + red.map_or(0, |e| e.evaluations())
}

/// Greedy selection of `n` features with cached redundancy sums.
pub fn select_greedy(view: &TransductiveView, n: usize, mode: Mode) -> Result<SelectionResult> {
    check_request(view, n)?;
    let (est_train, est_red) = estimators(view, mode);
    let red_est = est_red.as_ref().unwrap_or(&est_train);
    let columns = view.redundancy_features(mode);

    let relevance = relevance_with(view, &est_train);
    let mut redundancy = vec![0.0f64; view.n_features()];
    let mut remaining: Vec<usize> = (0..view.n_features()).collect();
    let mut traj = Trajectory {
        ranking: Vec::with_capacity(n),
        step_scores: Vec::with_capacity(n),
        evals_through_step: Vec::with_capacity(n),
    };

    let first_scores: Vec<f64> = remaining.iter().map(|&j| relevance[j]).collect();
    let (pos, score) = argmax(&remaining, &first_scores)?;
    traj.ranking.push(remaining.remove(pos));
    traj.step_scores.push(score);
    traj.evals_through_step
        .push(total_evals(&est_train, est_red.as_ref()));

    for m in 2..=n {
        let last = &columns[*traj.ranking.last().expect("non-empty")];
        let added: Vec<f64> = remaining
            .par_iter()
            .map_init(Vec::new, |scratch, &j| {
                red_est.mi(&columns[j], last, scratch)
            })
            .collect();
        let divisor = (m - 1) as f64;
        let mut scores = Vec::with_capacity(remaining.len());
        for (&j, delta) in remaining.iter().zip(added) {
            redundancy[j] += delta;
            scores.push(relevance[j] - redundancy[j] / divisor);
        }
        let (pos, score) = argmax(&remaining, &scores)?;
        traj.ranking.push(remaining.remove(pos));
        traj.step_scores.push(score);
        traj.evals_through_step
            .push(total_evals(&est_train, est_red.as_ref()));
    }
    Ok(finish(traj, &relevance, &est_train, est_red.as_ref()))
}

/// Same objective as [`select_greedy`] but recomputes every redundancy sum
/// from scratch at each step. Quadratic in `n`; meant for testing.
pub fn select_greedy_naive(
    view: &TransductiveView,
    n: usize,
    mode: Mode,
) -> Result<SelectionResult> {
    check_request(view, n)?;
    let (est_train, est_red) = estimators(view, mode);
    let red_est = est_red.as_ref().unwrap_or(&est_train);
    let columns = view.redundancy_features(mode);

    let relevance = relevance_with(view, &est_train);
    let mut remaining: Vec<usize> = (0..view.n_features()).collect();
    let mut traj = Trajectory {
        ranking: Vec::with_capacity(n),
        step_scores: Vec::with_capacity(n),
        evals_through_step: Vec::with_capacity(n),
    };
    let mut scratch = Vec::new();

    for m in 1..=n {
        let scores: Vec<f64> = if m == 1 {
            remaining.iter().map(|&j| relevance[j]).collect()
        } else {
            let divisor = (m - 1) as f64;
            remaining
                .iter()
                .map(|&j| {
                    let mut sum = 0.0;
                    for &i in &traj.ranking {
                        sum += red_est.mi(&columns[j], &columns[i], &mut scratch);
                    }
                    relevance[j] - sum / divisor
                })
                .collect()
        };
        let (pos, score) = argmax(&remaining, &scores)?;
        traj.ranking.push(remaining.remove(pos));
        traj.step_scores.push(score);
        traj.evals_through_step
            .push(total_evals(&est_train, est_red.as_ref()));
    }
    Ok(finish(traj, &relevance, &est_train, est_red.as_ref()))
}

/// Set-level relevance `D`, redundancy `R` and `Φ = D − R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiScore {
    pub relevance: f64,
    pub redundancy: f64,
    pub phi: f64,
}

/// Evaluates `Φ = D − R` for a feature set.
///
/// `D` is the mean training relevance. `R` averages MI over all ordered
/// pairs of `S × S` on the mode's redundancy rows, diagonal included, so a
/// single feature contributes its own entropy. The greedy step objective
/// never includes self-pairs.
pub fn phi_score(selected: &[usize], view: &TransductiveView, mode: Mode) -> Result<PhiScore> {
    if selected.is_empty() {
        return Err(MintError::invalid("phi score of an empty feature set"));
    }
    if let Some(&bad) = selected.iter().find(|&&j| j >= view.n_features()) {
        return Err(MintError::invalid(format!(
            "feature index {bad} out of range for {} features",
            view.n_features()
        )));
    }
    let (est_train, est_red) = estimators(view, mode);
    let red_est = est_red.as_ref().unwrap_or(&est_train);
    let columns = view.redundancy_features(mode);
    let mut scratch = Vec::new();

    let k = selected.len() as f64;
    let relevance = selected
        .iter()
        .map(|&j| est_train.mi(&view.train_features[j], &view.train_target, &mut scratch))
        .sum::<f64>()
        / k;
    let mut pair_sum = 0.0;
    for &i in selected {
        for &j in selected {
            pair_sum += red_est.mi(&columns[i], &columns[j], &mut scratch);
        }
    }
    let redundancy = pair_sum / (k * k);
    Ok(PhiScore {
        relevance,
        redundancy,
        phi: relevance - redundancy,
    })
}

/// Evaluation count of [`select_greedy`] choosing `n` of `m` features.
pub fn dp_eval_count(m: usize, n: usize) -> u64 {
    let m = m as u64;
    m + (2..=n as u64).map(|step| m - step + 1).sum::<u64>()
}

/// Evaluation count of [`select_greedy_naive`] choosing `n` of `m` features.
pub fn naive_eval_count(m: usize, n: usize) -> u64 {
    let m = m as u64;
    m + (2..=n as u64)
        .map(|step| (step - 1) * (m - step + 1))
        .sum::<u64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::{entropy, mutual_information};

    fn col(codes: &[usize]) -> DiscreteColumn {
        DiscreteColumn::from_codes(codes).unwrap()
    }

    /// Step-2 objective for every candidate, evaluated straight from the
    /// formula with the free MI function.
    fn brute_step2(features: &[DiscreteColumn], target: &DiscreteColumn, first: usize) -> Vec<f64> {
        features
            .iter()
            .map(|f| {
                mutual_information(f, target).unwrap()
                    - mutual_information(f, &features[first]).unwrap()
            })
            .collect()
    }

    #[test]
    fn n_one_picks_max_relevance() {
        let target = col(&[0, 0, 1, 1, 2, 2]);
        let feats = vec![
            col(&[0, 1, 0, 1, 0, 1]),
            col(&[0, 0, 1, 1, 1, 1]),
            col(&[0, 0, 1, 1, 1, 1]),
        ];
        let view = TransductiveView::inductive(feats, target).unwrap();
        let r = select_greedy(&view, 1, Mode::Mrmr).unwrap();
        assert_eq!(r.ranking, vec![1]);
        assert_eq!(select_greedy_naive(&view, 1, Mode::Mrmr).unwrap(), r);
    }

    #[test]
    fn exact_copies_tie_at_step_two() {
        // f1 copies the target, f2 copies f1, f3 is weakly informative.
        // With f1 == target, I(f3;c) == I(f3;f1), so both step-2 objectives
        // are exactly zero and the lower index wins the tie.
        let target = col(&[0, 0, 1, 1, 2, 2, 3, 3]);
        let f1 = target.clone();
        let f2 = f1.clone();
        let f3 = col(&[0, 1, 0, 0, 1, 1, 1, 0]);
        let feats = vec![f1, f2, f3];
        let oracle = brute_step2(&feats, &target, 0);
        assert_eq!(oracle[1], 0.0);
        assert_eq!(oracle[2], 0.0);
        let view = TransductiveView::inductive(feats, target).unwrap();
        let r = select_greedy(&view, 2, Mode::Mrmr).unwrap();
        assert_eq!(r.ranking, vec![0, 1]);
        assert_eq!(r.step_scores[1], 0.0);
    }

    #[test]
    fn duplicate_is_suppressed_by_redundancy() {
        // f1 is a coarse copy of the target, f2 duplicates f1, f3 carries the
        // within-pair detail f1 misses.
        let target = col(&[0, 1, 2, 3, 4, 5, 6, 7]);
        let f1 = col(&[0, 0, 1, 1, 2, 2, 3, 3]);
        let f2 = f1.clone();
        let f3 = col(&[0, 1, 0, 1, 0, 1, 1, 0]);
        let feats = vec![f1, f2, f3];
        let oracle = brute_step2(&feats, &target, 0);
        assert!(oracle[2] > oracle[1], "{oracle:?}");
        let view = TransductiveView::inductive(feats, target).unwrap();
        let r = select_greedy(&view, 2, Mode::Mrmr).unwrap();
        assert_eq!(r.ranking, vec![0, 2]);
        assert_eq!(r.step_scores[1], oracle[2]);
        assert_eq!(select_greedy_naive(&view, 2, Mode::Mrmr).unwrap(), r);
    }

    #[test]
    fn relevance_examples() {
        let target = col(&[0, 1, 1, 2, 2, 2]);
        let feats = vec![target.clone(), col(&[3, 3, 3, 3, 3, 3])];
        let view = TransductiveView::inductive(feats, target.clone()).unwrap();
        let rel = relevance_vector(&view).unwrap();
        assert!((rel[0] - entropy(&target).unwrap()).abs() < 1e-12);
        assert_eq!(rel[1], 0.0);
    }

    #[test]
    fn request_validation() {
        let target = col(&[0, 1]);
        let view = TransductiveView::inductive(vec![col(&[0, 1])], target).unwrap();
        assert!(select_greedy(&view, 0, Mode::Mrmr).is_err());
        assert!(select_greedy(&view, 2, Mode::Mrmr).is_err());
        assert!(select_greedy_naive(&view, 2, Mode::Mint).is_err());
        assert!(TransductiveView::inductive(vec![], col(&[0])).is_err());
        assert!(TransductiveView::inductive(vec![col(&[0, 1, 0])], col(&[0, 1])).is_err());
    }

    #[test]
    fn view_shape_validation() {
        let target = col(&[0, 1, 1]);
        let train = vec![col(&[0, 1, 0]), col(&[1, 1, 0])];
        let short = vec![col(&[0, 1]), col(&[1, 1])];
        assert!(TransductiveView::new(train.clone(), short, target.clone()).is_err());
        let ragged = vec![col(&[0, 1, 0, 1]), col(&[1, 1, 0])];
        assert!(TransductiveView::new(train.clone(), ragged, target.clone()).is_err());
        let wrong_count = vec![col(&[0, 1, 0, 1])];
        assert!(TransductiveView::new(train.clone(), wrong_count, target.clone()).is_err());
        let all = vec![col(&[0, 1, 0, 1, 1]), col(&[1, 1, 0, 0, 1])];
        let view = TransductiveView::new(train, all, target).unwrap();
        assert_eq!(view.n_test(), 2);
    }

    #[test]
    fn phi_examples() {
        let target = col(&[0, 1, 2, 0, 1, 2]);
        let constant = col(&[1, 1, 1, 1, 1, 1]);
        let view =
            TransductiveView::inductive(vec![constant, target.clone()], target.clone()).unwrap();
        let p = phi_score(&[0], &view, Mode::Mrmr).unwrap();
        assert_eq!((p.relevance, p.redundancy, p.phi), (0.0, 0.0, 0.0));
        let p = phi_score(&[1], &view, Mode::Mrmr).unwrap();
        let h = entropy(&target).unwrap();
        assert!((p.relevance - h).abs() < 1e-12);
        assert!((p.redundancy - h).abs() < 1e-12);
        assert!(p.phi.abs() < 1e-12);
        assert!(phi_score(&[], &view, Mode::Mrmr).is_err());
        assert!(phi_score(&[2], &view, Mode::Mrmr).is_err());
    }

    #[test]
    fn phi_matches_double_sum() {
        let target = col(&[0, 1, 2, 0, 1, 2, 2, 0]);
        let feats = vec![
            col(&[0, 1, 1, 0, 1, 1, 1, 0]),
            col(&[0, 0, 2, 1, 1, 2, 2, 0]),
            col(&[1, 0, 1, 0, 1, 0, 1, 0]),
        ];
        let set = [0usize, 1, 2];
        let d: f64 = set
            .iter()
            .map(|&j| mutual_information(&feats[j], &target).unwrap())
            .sum::<f64>()
            / 3.0;
        let mut r = 0.0;
        for &i in &set {
            for &j in &set {
                r += mutual_information(&feats[i], &feats[j]).unwrap();
            }
        }
        r /= 9.0;
        let view = TransductiveView::inductive(feats, target).unwrap();
        let p = phi_score(&set, &view, Mode::Mrmr).unwrap();
        assert!((p.relevance - d).abs() < 1e-12);
        assert!((p.redundancy - r).abs() < 1e-12);
        assert!((p.phi - (d - r)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_counts() {
        let naive: u64 = 50 + (2..=10u64).map(|m| (m - 1) * (51 - m)).sum::<u64>();
        assert_eq!(naive, 2015);
        assert_eq!(naive_eval_count(50, 10), naive);
        assert_eq!(dp_eval_count(50, 1), 50);
        assert_eq!(
            dp_eval_count(50, 10),
            50 + (2..=10).map(|m| 51 - m).sum::<u64>()
        );
    }
}
