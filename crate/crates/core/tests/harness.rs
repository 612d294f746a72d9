use mint_core::{
    make_folds, run_experiment, run_fold, simulate, Dataset, ExperimentConfig, FeatureKind,
    LambdaPolicy, Method, SimCase, SimSpec,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_case_two(seed: u64) -> Dataset {
    simulate(&SimSpec {
        n_samples: 60,
        case: SimCase::Two {
            n_seeds: 4,
            seed_noise_var: 1.0,
            dups_per_seed: 3,
            dup_noise_var: 0.5,
            n_bad: 20,
            bad_noise_var: 1.0,
        },
        rng_seed: seed,
    })
    .unwrap()
}

fn permute_fold_targets(dataset: &Dataset, rows: &[usize], seed: u64) -> Dataset {
    let mut y = dataset.target().unwrap().to_vec();
    let mut values: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    values.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    values.reverse();
    for (&i, v) in rows.iter().zip(values) {
        y[i] = v;
    }
    let mut out = dataset.clone();
    out.replace_target(y).unwrap();
    out
}

#[test]
fn held_out_targets_never_reach_selection_or_fit() {
    let data = small_case_two(3);
    let config = ExperimentConfig::new(vec![Method::Mint], vec![6], 0);
    let plan = make_folds(data.n_samples(), 5, 0).unwrap();
    for fold in 0..plan.k {
        let tampered = permute_fold_targets(&data, &plan.test_rows(fold), fold as u64);
        for method in [Method::AllFeatures, Method::Mrmr, Method::Mint] {
            let a = run_fold(&data, &plan, fold, &config, method, 6).unwrap();
            let b = run_fold(&tampered, &plan, fold, &config, method, 6).unwrap();
            assert_eq!(a.selected, b.selected);
            assert_eq!(a.model, b.model);
        }
    }
}

#[test]
fn mint_selecting_everything_matches_all_features() {
    let data = small_case_two(1);
    let m = data.n_features();
    let config = ExperimentConfig::new(vec![Method::AllFeatures, Method::Mint], vec![m], 2);
    let reports = run_experiment(&data, &config).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0].fold_r2, reports[1].fold_r2);
    assert_eq!(reports[0].fold_lambda, reports[1].fold_lambda);
}

#[test]
fn noiseless_copy_target_is_predicted_perfectly() {
    let mut data = small_case_two(4);
    data.replace_target(data.column(0).to_vec()).unwrap();
    let mut config = ExperimentConfig::new(vec![Method::AllFeatures], vec![1], 0);
    config.lambda = LambdaPolicy::Fixed { lambda: 1e-8 };
    config.folds = 5;
    let reports = run_experiment(&data, &config).unwrap();
    for r2 in &reports[0].fold_r2 {
        assert!((r2 - 1.0).abs() < 1e-9, "{r2}");
    }
}

#[test]
fn report_is_reproducible_and_means_are_exact() {
    let data = small_case_two(5);
    let config = ExperimentConfig {
        folds: 4,
        ..ExperimentConfig::new(
            vec![Method::AllFeatures, Method::Mrmr, Method::Mint],
            vec![3, 8],
            11,
        )
    };
    let first = run_experiment(&data, &config).unwrap();
    let second = run_experiment(&data, &config).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.len(), 5);
    for report in &first {
        assert_eq!(report.fold_r2.len(), 4);
        let mean = report.fold_r2.iter().sum::<f64>() / 4.0;
        assert!((report.mean_r2 - mean).abs() <= 1e-12);
        assert!(report.fold_r2.iter().all(|r| (0.0..=1.0).contains(r)));
        assert_eq!(
            report.mi_eval_count,
            report.fold_mi_eval_count.iter().sum::<u64>()
        );
        if report.method != Method::AllFeatures {
            assert!(report.selected_features.iter().all(|s| s.len() == report.n));
        }
    }
    // smaller subsets are prefixes of larger ones in every fold
    let (small, large) = (&first[1], &first[2]);
    for (s, l) in small.selected_features.iter().zip(&large.selected_features) {
        assert_eq!(s[..], l[..s.len()]);
    }
}

#[test]
fn folds_partition_the_samples() {
    let plan = make_folds(23, 10, 9).unwrap();
    assert_eq!(plan.fold_sizes(), vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
    let mut all: Vec<usize> = (0..10).flat_map(|f| plan.test_rows(f)).collect();
    all.sort_unstable();
    assert_eq!(all, (0..23).collect::<Vec<_>>());
    for f in 0..10 {
        let test = plan.test_rows(f);
        assert!(plan.train_rows(f).iter().all(|i| !test.contains(i)));
    }
    assert_eq!(make_folds(23, 10, 9).unwrap(), plan);
    assert!(make_folds(5, 10, 0).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let data = small_case_two(0);
    let bad_n = ExperimentConfig::new(vec![Method::Mrmr], vec![0], 0);
    assert!(run_experiment(&data, &bad_n).is_err());
    let too_many = ExperimentConfig::new(vec![Method::Mrmr], vec![data.n_features() + 1], 0);
    assert!(run_experiment(&data, &too_many).is_err());
    let genotype = Dataset::new(
        vec!["a".into(), "b".into()],
        vec!["x".into()],
        vec![vec![0.0, 3.0]],
        vec![FeatureKind::Genotype],
    );
    assert!(genotype.is_err());
}
