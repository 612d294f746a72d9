//! Seeded synthetic datasets with controlled relevance and redundancy.
//!
//! The target is `Y ~ U(0,1)` per sample. Features add Gaussian noise to it:
//!
//! - case one: `n_good` columns `Y + e` with small noise variance, `n_bad`
//!   columns `Y + e` with large noise variance;
//! - case two: `n_seeds` seed columns `F = Y + e`, each followed by
//!   `dups_per_seed` duplicates `F + e'`, then `n_bad` columns `Y + e''`.
//!
//! Noise parameters are variances. Random numbers come from ChaCha20 with one
//! stream per output: stream 0 draws the target, stream `1 + j` draws the
//! noise for column `j`. Columns can therefore be generated in any order, or
//! in parallel, without changing a single bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind, FeatureLabel};
use crate::error::{MintError, Result};

/// Identifies the generator in output metadata.
pub const GENERATOR: &str =
    "ChaCha20Rng (rand_chacha 0.9), stream 0 = target U[0,1), stream 1+j = column j noise; \
     normals via rand_distr StandardNormal (ziggurat)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum SimCase {
    One {
        n_good: usize,
        good_noise_var: f64,
        n_bad: usize,
        bad_noise_var: f64,
    },
    Two {
        n_seeds: usize,
        seed_noise_var: f64,
        dups_per_seed: usize,
        dup_noise_var: f64,
        n_bad: usize,
        bad_noise_var: f64,
    },
}

impl SimCase {
    pub fn one() -> Self {
        SimCase::One {
            n_good: 100,
            good_noise_var: 100.0,
            n_bad: 1900,
            bad_noise_var: 1000.0,
        }
    }

    pub fn two() -> Self {
        SimCase::Two {
            n_seeds: 50,
            seed_noise_var: 500.0,
            dups_per_seed: 9,
            dup_noise_var: 100.0,
            n_bad: 4500,
            bad_noise_var: 1000.0,
        }
    }

    pub fn n_features(&self) -> usize {
        match *self {
            SimCase::One { n_good, n_bad, .. } => n_good + n_bad,
            SimCase::Two {
                n_seeds,
                dups_per_seed,
                n_bad,
                ..
            } => n_seeds * (1 + dups_per_seed) + n_bad,
        }
    }

    /// Ground-truth label of every column, in column order.
    pub fn labels(&self) -> Vec<FeatureLabel> {
        match *self {
            SimCase::One { n_good, n_bad, .. } => std::iter::repeat_n(FeatureLabel::Good, n_good)
                .chain(std::iter::repeat_n(FeatureLabel::Bad, n_bad))
                .collect(),
            SimCase::Two {
                n_seeds,
                dups_per_seed,
                n_bad,
                ..
            } => {
                let mut labels = Vec::with_capacity(self.n_features());
                for s in 0..n_seeds {
                    labels.push(FeatureLabel::Seed);
                    let seed_col = s * (1 + dups_per_seed);
                    labels.extend(std::iter::repeat_n(
                        FeatureLabel::Duplicate { seed: seed_col },
                        dups_per_seed,
                    ));
                }
                labels.extend(std::iter::repeat_n(FeatureLabel::Bad, n_bad));
                labels
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let vars: &[f64] = match self {
            SimCase::One {
                n_good,
                good_noise_var,
                n_bad,
                bad_noise_var,
            } => {
                if *n_good == 0 || *n_bad == 0 {
                    return Err(MintError::invalid(
                        "case one needs n_good ≥ 1 and n_bad ≥ 1",
                    ));
                }
                &[*good_noise_var, *bad_noise_var]
            }
            SimCase::Two {
                n_seeds,
                seed_noise_var,
                dups_per_seed,
                dup_noise_var,
                n_bad,
                bad_noise_var,
            } => {
                if *n_seeds == 0 || *dups_per_seed == 0 || *n_bad == 0 {
                    return Err(MintError::invalid(
                        "case two needs n_seeds, dups_per_seed and n_bad all ≥ 1",
                    ));
                }
                &[*seed_noise_var, *dup_noise_var, *bad_noise_var]
            }
        };
        if vars.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(MintError::invalid(
                "noise variances must be positive and finite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n_samples: usize,
    #[serde(flatten)]
    pub case: SimCase,
    pub rng_seed: u64,
}

impl SimSpec {
    pub fn case_one(rng_seed: u64) -> Self {
        Self {
            n_samples: 200,
            case: SimCase::one(),
            rng_seed,
        }
    }

    pub fn case_two(rng_seed: u64) -> Self {
        Self {
            n_samples: 200,
            case: SimCase::two(),
            rng_seed,
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// `base + N(0, var)` per sample, drawn from column `j`'s stream.
fn noisy_copy(base: &[f64], var: f64, seed: u64, j: usize) -> Vec<f64> {
    let sd = var.sqrt();
    let mut rng = stream(seed, 1 + j as u64);
    base.iter()
        .map(|&b| {
            let z: f64 = rng.sample(StandardNormal);
            b + sd * z
        })
        .collect()
}

/// Generates the dataset described by `spec`; target and labels attached.
pub fn simulate(spec: &SimSpec) -> Result<Dataset> {
    if spec.n_samples == 0 {
        return Err(MintError::invalid("n_samples must be at least 1"));
    }
    spec.case.validate()?;
    let seed = spec.rng_seed;
    let n = spec.n_samples;

    let mut target_rng = stream(seed, 0);
    let target: Vec<f64> = (0..n).map(|_| target_rng.random::<f64>()).collect();

    let mut columns = Vec::with_capacity(spec.case.n_features());
    match spec.case {
        SimCase::One {
            n_good,
            good_noise_var,
            n_bad,
            bad_noise_var,
        } => {
            for _ in 0..n_good {
                columns.push(noisy_copy(&target, good_noise_var, seed, columns.len()));
            }
            for _ in 0..n_bad {
                columns.push(noisy_copy(&target, bad_noise_var, seed, columns.len()));
            }
        }
        SimCase::Two {
            n_seeds,
            seed_noise_var,
            dups_per_seed,
            dup_noise_var,
            n_bad,
            bad_noise_var,
        } => {
            for _ in 0..n_seeds {
                let seed_col = noisy_copy(&target, seed_noise_var, seed, columns.len());
                columns.push(seed_col);
                let seed_idx = columns.len() - 1;
                for _ in 0..dups_per_seed {
                    let dup = noisy_copy(&columns[seed_idx], dup_noise_var, seed, columns.len());
                    columns.push(dup);
                }
            }
            for _ in 0..n_bad {
                columns.push(noisy_copy(&target, bad_noise_var, seed, columns.len()));
            }
        }
    }

    let p = columns.len();
    let width = (p.max(2) - 1).to_string().len();
    let sample_ids = (0..n)
        .map(|i| format!("s{:0w$}", i, w = (n.max(2) - 1).to_string().len()))
        .collect();
    let feature_ids = (0..p).map(|j| format!("f{j:0width$}")).collect();
    Dataset::new(
        sample_ids,
        feature_ids,
        columns,
        vec![FeatureKind::Continuous; p],
    )?
    .with_target(target)?
    .with_labels(spec.case.labels())
}
