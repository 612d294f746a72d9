//! k-fold cross-validation comparing ridge on all features against ridge on
//! mRMR- and MINT-selected subsets.
//!
//! Selection runs inside every fold. The held-out fold's feature rows enter
//! only MINT's redundancy term; held-out targets are read once, to score the
//! fold's predictions.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind};
use crate::error::{MintError, Result};
use crate::infotheory::{default_bin_count, discretize, BinningSpec};
use crate::regression::{fit_ridge, r_squared, LambdaPolicy, RidgeModel};
use crate::selection::{select_greedy, Mode, SelectionResult, TransductiveView};

/// Assignment of samples to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold id of each sample.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn n_samples(&self) -> usize {
        self.assignments.len()
    }

    /// Samples held out in `fold`, ascending.
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Samples used for training when `fold` is held out, ascending.
    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_samples())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle of `0..n_samples` cut into `k` contiguous chunks; the
/// first `n_samples % k` chunks get one extra sample.
pub fn make_folds(n_samples: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(MintError::invalid(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if n_samples < k {
        return Err(MintError::invalid(format!(
            "{n_samples} samples cannot fill {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n_samples / k;
    let extra = n_samples % k;
    let mut assignments = vec![0; n_samples];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &i in &order[pos..pos + size] {
            assignments[i] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Ridge on every feature.
    #[serde(rename = "all")]
    #[value(name = "all")]
    AllFeatures,
    Mrmr,
    Mint,
}

impl Method {
    pub fn mode(self) -> Option<Mode> {
        match self {
            Method::AllFeatures => None,
            Method::Mrmr => Some(Mode::Mrmr),
            Method::Mint => Some(Mode::Mint),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::AllFeatures => "all",
            Method::Mrmr => "mrmr",
            Method::Mint => "mint",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    /// Subset sizes evaluated for the selection methods.
    pub n_features: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
    pub lambda: LambdaPolicy,
    /// Equal-frequency bins for the target and continuous features;
    /// `None` means `ceil(sqrt(n_train))` per fold.
    pub bins: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(methods: Vec<Method>, n_features: Vec<usize>, seed: u64) -> Self {
        Self {
            methods,
            n_features,
            folds: 10,
            seed,
            lambda: LambdaPolicy::default(),
            bins: None,
        }
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if self.methods.is_empty() {
            return Err(MintError::invalid("no methods requested"));
        }
        let selects = self.methods.iter().any(|m| m.mode().is_some());
        if selects && self.n_features.is_empty() {
            return Err(MintError::invalid(
                "selection methods need at least one subset size",
            ));
        }
        let m = dataset.n_features();
        if let Some(&n) = self.n_features.iter().find(|&&n| n == 0 || n > m) {
            return Err(MintError::invalid(format!(
                "subset size {n} must be between 1 and the {m} available features"
            )));
        }
        if self.bins == Some(0) {
            return Err(MintError::invalid("bin count must be at least 1"));
        }
        if let LambdaPolicy::Fixed { lambda } = self.lambda {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return Err(MintError::invalid(format!("invalid fixed lambda {lambda}")));
            }
        }
        dataset.require_target()?;
        Ok(())
    }
}

/// Discretizes a dataset restricted to `train_rows` (plus `test_rows` for the
/// redundancy view). Target bins are fit on training rows only.
pub fn build_view(
    dataset: &Dataset,
    train_rows: &[usize],
    test_rows: &[usize],
    bins: Option<usize>,
) -> Result<TransductiveView> {
    let target = dataset.require_target()?;
    if train_rows.is_empty() {
        return Err(MintError::invalid("training set is empty"));
    }
    let bins = bins.unwrap_or_else(|| default_bin_count(train_rows.len()));
    let train_y: Vec<f64> = train_rows.iter().map(|&i| target[i]).collect();
    let gather = |rows: &[usize], j: usize| rows.iter().map(|&i| dataset.value(i, j)).collect();
    view_from_parts(
        dataset.kinds(),
        |j| gather(train_rows, j),
        (!test_rows.is_empty()).then_some(|j| gather(test_rows, j)),
        &train_y,
        bins,
    )
}

/// Discretizes training columns, optional test columns and the training
/// target into a [`TransductiveView`].
///
/// `train(j)` and `test(j)` return feature `j`'s values on training and test
/// rows. The combined column is the training values followed by the test
/// values and is binned on its own.
pub fn view_from_parts<F, G>(
    kinds: &[FeatureKind],
    train: F,
    test: Option<G>,
    train_target: &[f64],
    bins: usize,
) -> Result<TransductiveView>
where
    F: Fn(usize) -> Vec<f64> + Sync,
    G: Fn(usize) -> Vec<f64> + Sync,
{
    if train_target.is_empty() {
        return Err(MintError::invalid("training set is empty"));
    }
    let target = discretize(train_target, BinningSpec::EqualFrequency { bins })?;
    let per_feature: Vec<_> = (0..kinds.len())
        .into_par_iter()
        .map(|j| {
            let spec = kinds[j].binning(bins);
            let values = train(j);
            let train_codes = discretize(&values, spec)?;
            let all_codes = match &test {
                None => None,
                Some(test) => {
                    let mut all = values;
                    all.extend(test(j));
                    Some(discretize(&all, spec)?)
                }
            };
            Ok((train_codes, all_codes))
        })
        .collect::<Result<Vec<_>>>()?;

    if test.is_none() {
        let train = per_feature.into_iter().map(|(t, _)| t).collect();
        TransductiveView::inductive(train, target)
    } else {
        let (train, all): (Vec<_>, Vec<_>) = per_feature
            .into_iter()
            .map(|(t, a)| (t, a.expect("test columns present")))
            .unzip();
        TransductiveView::new(train, all, target)
    }
}

/// Runs the selection step of one fold for `method`, choosing `n` features.
/// Returns `None` for [`Method::AllFeatures`].
pub fn select_in_fold(
    dataset: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
    method: Method,
    n: usize,
) -> Result<Option<SelectionResult>> {
    let Some(mode) = method.mode() else {
        return Ok(None);
    };
    let train = plan.train_rows(fold);
    let test = match mode {
        Mode::Mint => plan.test_rows(fold),
        Mode::Mrmr => Vec::new(),
    };
    let view = build_view(dataset, &train, &test, config.bins)?;
    select_greedy(&view, n, mode).map(Some)
}

/// Everything one fold produced, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub method: Method,
    pub n: usize,
    /// Selected features in selection order (column order for all-features).
    pub selected: Vec<usize>,
    /// Model fit on the selected columns in ascending index order.
    pub model: RidgeModel,
    pub r2: f64,
    pub mi_eval_count: u64,
}

fn fit_and_score(
    dataset: &Dataset,
    train: &[usize],
    test: &[usize],
    selected: &[usize],
    lambda: &LambdaPolicy,
) -> Result<(RidgeModel, f64)> {
    let mut cols = selected.to_vec();
    cols.sort_unstable();
    let design = |rows: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            dataset.value(rows[r], cols[c])
        })
    };
    let target = dataset.require_target()?;
    let x_train = design(train);
    let y_train: Vec<f64> = train.iter().map(|&i| target[i]).collect();
    let lambda = lambda.resolve(&x_train, &y_train)?;
    let model = fit_ridge(&x_train, &y_train, lambda)?;
    let pred = model.predict(&design(test))?;
    // first and only read of held-out targets
    let y_test: Vec<f64> = test.iter().map(|&i| target[i]).collect();
    if y_test.iter().all(|&v| v == y_test[0]) {
        return Err(MintError::invalid(
            "held-out targets are constant; r² undefined",
        ));
    }
    let r2 = r_squared(&y_test, &pred)?;
    Ok((model, r2))
}

/// Cross-validates a single `(method, n)` configuration on one fold.
pub fn run_fold(
    dataset: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
    method: Method,
    n: usize,
) -> Result<FoldOutcome> {
    run_fold_inner(dataset, plan, fold, config, method, n).map_err(|e| e.in_fold(fold))
}

fn run_fold_inner(
    dataset: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
    method: Method,
    n: usize,
) -> Result<FoldOutcome> {
    check_plan(dataset, plan, fold)?;
    let train = plan.train_rows(fold);
    let test = plan.test_rows(fold);
    let selection = select_in_fold(dataset, plan, fold, config, method, n)?;
    let (selected, evals) = match selection {
        Some(sel) => (sel.ranking, sel.mi_eval_count),
        None => ((0..dataset.n_features()).collect(), 0),
    };
    let (model, r2) = fit_and_score(dataset, &train, &test, &selected, &config.lambda)?;
    Ok(FoldOutcome {
        fold,
        method,
        n: selected.len(),
        selected,
        model,
        r2,
        mi_eval_count: evals,
    })
}

fn check_plan(dataset: &Dataset, plan: &FoldPlan, fold: usize) -> Result<()> {
    if plan.n_samples() != dataset.n_samples() {
        return Err(MintError::invalid(format!(
            "fold plan covers {} samples but the dataset has {}",
            plan.n_samples(),
            dataset.n_samples()
        )));
    }
    if fold >= plan.k {
        return Err(MintError::invalid(format!(
            "fold {fold} out of range 0..{}",
            plan.k
        )));
    }
    Ok(())
}

/// Cross-validated accuracy of one `(method, n)` configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub method: Method,
    pub n: usize,
    pub fold_r2: Vec<f64>,
    pub mean_r2: f64,
    /// Per fold, selected feature ids in selection order; empty for `all`.
    pub selected_features: Vec<Vec<String>>,
    /// MI evaluations summed over folds.
    pub mi_eval_count: u64,
    pub fold_mi_eval_count: Vec<u64>,
    pub fold_lambda: Vec<f64>,
}

struct FoldEntry {
    method: Method,
    n: usize,
    r2: f64,
    lambda: f64,
    selected: Vec<usize>,
    evals: u64,
}

fn fold_entries(
    dataset: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
) -> Result<Vec<FoldEntry>> {
    let train = plan.train_rows(fold);
    let test = plan.test_rows(fold);
    let n_max = config.n_features.iter().copied().max().unwrap_or(0);
    let mut entries = Vec::new();
    for &method in &config.methods {
        match select_in_fold(dataset, plan, fold, config, method, n_max)? {
            None => {
                let all: Vec<usize> = (0..dataset.n_features()).collect();
                let (model, r2) = fit_and_score(dataset, &train, &test, &all, &config.lambda)?;
                entries.push(FoldEntry {
                    method,
                    n: all.len(),
                    r2,
                    lambda: model.lambda,
                    selected: Vec::new(),
                    evals: 0,
                });
            }
            Some(full) => {
                // greedy trajectories are prefix-consistent
                for &n in &config.n_features {
                    let sel = full.prefix(n);
                    let (model, r2) =
                        fit_and_score(dataset, &train, &test, &sel.ranking, &config.lambda)?;
                    entries.push(FoldEntry {
                        method,
                        n,
                        r2,
                        lambda: model.lambda,
                        selected: sel.ranking,
                        evals: sel.mi_eval_count,
                    });
                }
            }
        }
    }
    Ok(entries)
}

/// Runs every configured `(method, n)` pair over all folds.
///
/// Folds run in parallel; results are merged in fold order so the output
/// does not depend on scheduling.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<CvReport>> {
    config.validate(dataset)?;
    let plan = make_folds(dataset.n_samples(), config.folds, config.seed)?;
    let per_fold: Vec<Vec<FoldEntry>> = (0..plan.k)
        .into_par_iter()
        .map(|fold| fold_entries(dataset, &plan, fold, config).map_err(|e| e.in_fold(fold)))
        .collect::<Result<_>>()?;

    let mut reports: Vec<CvReport> = per_fold[0]
        .iter()
        .map(|e| CvReport {
            method: e.method,
            n: e.n,
            fold_r2: Vec::with_capacity(plan.k),
            mean_r2: 0.0,
            selected_features: Vec::with_capacity(plan.k),
            mi_eval_count: 0,
            fold_mi_eval_count: Vec::with_capacity(plan.k),
            fold_lambda: Vec::with_capacity(plan.k),
        })
        .collect();
    for entries in per_fold {
        for (report, e) in reports.iter_mut().zip(entries) {
            debug_assert_eq!((report.method, report.n), (e.method, e.n));
            report.fold_r2.push(e.r2);
            report.fold_lambda.push(e.lambda);
            report.fold_mi_eval_count.push(e.evals);
            report.mi_eval_count += e.evals;
            report.selected_features.push(
                e.selected
                    .iter()
                    .map(|&j| dataset.feature_ids()[j].clone())
                    .collect(),
            );
        }
    }
    for report in &mut reports {
        report.mean_r2 = report.fold_r2.iter().sum::<f64>() / report.fold_r2.len() as f64;
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_sizes() {
        let plan = make_folds(20, 10, 1).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 10]);
        let plan = make_folds(216, 10, 1).unwrap();
        let sizes = plan.fold_sizes();
        assert_eq!(sizes.iter().filter(|&&s| s == 22).count(), 6);
        assert_eq!(sizes.iter().filter(|&&s| s == 21).count(), 4);
        assert_eq!(make_folds(216, 10, 1).unwrap(), plan);
        assert_ne!(make_folds(216, 10, 2).unwrap(), plan);
        assert!(make_folds(9, 10, 0).is_err());
        assert!(make_folds(9, 1, 0).is_err());
    }

    #[test]
    fn folds_partition_samples() {
        let plan = make_folds(37, 10, 4).unwrap();
        let mut seen = [0; 37];
        for f in 0..10 {
            for i in plan.test_rows(f) {
                seen[i] += 1;
            }
            assert_eq!(plan.test_rows(f).len() + plan.train_rows(f).len(), 37);
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    fn copy_dataset() -> Dataset {
        let n = 40;
        let y: Vec<f64> = (0..n)
            .map(|i| ((i * 7) % 13) as f64 + 0.5 * (i % 3) as f64)
            .collect();
        let noise: Vec<f64> = (0..n).map(|i| ((i * 11) % 17) as f64).collect();
        let ids = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        Dataset::new(
            ids("s", n),
            ids("f", 2),
            vec![y.clone(), noise],
            vec![FeatureKind::Continuous; 2],
        )
        .unwrap()
        .with_target(y)
        .unwrap()
    }

    #[test]
    fn all_features_on_copied_target_is_perfect() {
        let d = copy_dataset();
        let plan = make_folds(d.n_samples(), 10, 3).unwrap();
        let mut config = ExperimentConfig::new(vec![Method::AllFeatures], vec![], 3);
        config.lambda = LambdaPolicy::Fixed { lambda: 0.0 };
        for fold in 0..10 {
            let out = run_fold(&d, &plan, fold, &config, Method::AllFeatures, 2).unwrap();
            assert!((out.r2 - 1.0).abs() < 1e-12, "fold {fold}: {}", out.r2);
        }
    }

    #[test]
    fn mint_selecting_everything_matches_all_features() {
        let d = copy_dataset();
        let plan = make_folds(d.n_samples(), 10, 3).unwrap();
        let config = ExperimentConfig::new(vec![Method::Mint], vec![2], 3);
        for fold in 0..10 {
            let all = run_fold(&d, &plan, fold, &config, Method::AllFeatures, 2).unwrap();
            let mint = run_fold(&d, &plan, fold, &config, Method::Mint, 2).unwrap();
            assert_eq!(all.r2, mint.r2);
            assert_eq!(all.model, mint.model);
        }
    }

    #[test]
    fn report_means_and_shape() {
        let d = copy_dataset();
        let config = ExperimentConfig::new(
            vec![Method::AllFeatures, Method::Mrmr, Method::Mint],
            vec![1, 2],
            9,
        );
        let reports = run_experiment(&d, &config).unwrap();
        assert_eq!(reports.len(), 5);
        for r in &reports {
            assert_eq!(r.fold_r2.len(), 10);
            let mean = r.fold_r2.iter().sum::<f64>() / 10.0;
            assert!((r.mean_r2 - mean).abs() <= 1e-12);
            assert!(r.fold_r2.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert_eq!(reports[0].method, Method::AllFeatures);
        assert_eq!(reports[0].n, 2);
        assert!(reports[0].selected_features.iter().all(|s| s.is_empty()));
        assert_eq!(reports[1].selected_features[0].len(), 1);
    }

    #[test]
    fn config_validation() {
        let d = copy_dataset();
        assert!(run_experiment(&d, &ExperimentConfig::new(vec![], vec![1], 0)).is_err());
        assert!(
            run_experiment(&d, &ExperimentConfig::new(vec![Method::Mrmr], vec![3], 0)).is_err()
        );
        assert!(
            run_experiment(&d, &ExperimentConfig::new(vec![Method::Mrmr], vec![0], 0)).is_err()
        );
        assert!(run_experiment(&d, &ExperimentConfig::new(vec![Method::Mrmr], vec![], 0)).is_err());
    }

    #[test]
    fn constant_fold_target_is_reported_with_fold_id() {
        let n = 20;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let ids = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let d = Dataset::new(
            ids("s", n),
            ids("f", 1),
            vec![x],
            vec![FeatureKind::Continuous],
        )
        .unwrap()
        .with_target(vec![1.0; n])
        .unwrap();
        let config = ExperimentConfig::new(vec![Method::AllFeatures], vec![], 0);
        let err = run_experiment(&d, &config).unwrap_err();
        assert!(matches!(err, MintError::Fold { .. }), "{err}");
    }
}
