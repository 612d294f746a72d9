//! Mutual-information feature selection for high-dimensional trait prediction.
//!
//! The crate implements the max-relevance / min-redundancy greedy ranking in
//! two flavours:
//!
//! - **mRMR**: relevance and redundancy are both estimated on training rows.
//! - **MINT**: relevance on training rows, redundancy on training plus
//!   unlabeled test rows (transductive).
//!
//! Both share a cached-redundancy greedy loop performing `O(N·M)` mutual
//! information evaluations for `N` selected out of `M` features. Around the
//! selector sit a standardized ridge regression baseline, seeded simulation of
//! redundant synthetic data, a k-fold cross-validation harness and CSV/JSON I/O.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod io;
pub mod regression;
pub mod report;
pub mod selection;
pub mod simulate;

pub use dataset::{Dataset, FeatureKind, FeatureLabel};
pub use error::{MintError, Result};
pub use harness::{
    make_folds, run_experiment, run_fold, CvReport, ExperimentConfig, FoldOutcome, FoldPlan, Method,
};
pub use infotheory::{
    default_bin_count, discretize, entropy, mutual_information, BinningSpec, DiscreteColumn,
    MiEstimator,
};
pub use regression::{choose_lambda, fit_ridge, r_squared, LambdaPolicy, RidgeModel};
pub use selection::{
    phi_score, relevance_vector, select_greedy, select_greedy_naive, Mode, PhiScore,
    SelectionResult, TransductiveView,
};
pub use simulate::{simulate, SimCase, SimSpec};
