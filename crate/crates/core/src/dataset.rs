use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::infotheory::BinningSpec;

/// How a feature column is interpreted for discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    /// Biallelic marker coded 0/1/2.
    Genotype,
    /// Any finite real value.
    Continuous,
}

impl FeatureKind {
    /// Binning rule for this kind given the equal-frequency bin count.
    pub fn binning(self, bins: usize) -> BinningSpec {
        match self {
            FeatureKind::Genotype => BinningSpec::PassthroughInteger,
            FeatureKind::Continuous => BinningSpec::EqualFrequency { bins },
        }
    }
}

/// Ground-truth role of a simulated feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class")]
pub enum FeatureLabel {
    Good,
    Seed,
    Duplicate { seed: usize },
    Bad,
}

impl FeatureLabel {
    /// Good, seed and duplicate features all carry target signal.
    pub fn is_informative(self) -> bool {
        !matches!(self, FeatureLabel::Bad)
    }
}

/// Sample × feature matrix with identifiers and an optional target.
///
/// Features are stored column-major so each feature is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    sample_ids: Vec<String>,
    feature_ids: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Option<Vec<f64>>,
    kinds: Vec<FeatureKind>,
    labels: Option<Vec<FeatureLabel>>,
}

impl Dataset {
    pub fn new(
        sample_ids: Vec<String>,
        feature_ids: Vec<String>,
        columns: Vec<Vec<f64>>,
        kinds: Vec<FeatureKind>,
    ) -> Result<Self> {
        ensure_unique(&sample_ids, "sample")?;
        ensure_unique(&feature_ids, "feature")?;
        if columns.len() != feature_ids.len() {
            return Err(MintError::invalid(format!(
                "{} feature ids but {} columns",
                feature_ids.len(),
                columns.len()
            )));
        }
        if kinds.len() != feature_ids.len() {
            return Err(MintError::invalid(format!(
                "{} feature ids but {} feature kinds",
                feature_ids.len(),
                kinds.len()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != sample_ids.len() {
                return Err(MintError::invalid(format!(
                    "feature '{}' has {} values for {} samples",
                    feature_ids[j],
                    col.len(),
                    sample_ids.len()
                )));
            }
            if kinds[j] == FeatureKind::Genotype {
                if let Some(i) = col.iter().position(|&v| !is_genotype_code(v)) {
                    return Err(MintError::invalid(format!(
                        "feature '{}', sample '{}': value {} is not a genotype code in {{0,1,2}}",
                        feature_ids[j], sample_ids[i], col[i]
                    )));
                }
            } else if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(MintError::invalid(format!(
                    "feature '{}', sample '{}': non-finite value",
                    feature_ids[j], sample_ids[i]
                )));
            }
        }
        Ok(Self {
            sample_ids,
            feature_ids,
            columns,
            target: None,
            kinds,
            labels: None,
        })
    }

    pub fn with_target(mut self, target: Vec<f64>) -> Result<Self> {
        if target.len() != self.n_samples() {
            return Err(MintError::invalid(format!(
                "target has {} values for {} samples",
                target.len(),
                self.n_samples()
            )));
        }
        if let Some(i) = target.iter().position(|v| !v.is_finite()) {
            return Err(MintError::invalid(format!(
                "target value for sample '{}' is not finite",
                self.sample_ids[i]
            )));
        }
        self.target = Some(target);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<FeatureLabel>) -> Result<Self> {
        if labels.len() != self.n_features() {
            return Err(MintError::invalid(format!(
                "{} labels for {} features",
                labels.len(),
                self.n_features()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_deref()
    }

    pub fn labels(&self) -> Option<&[FeatureLabel]> {
        self.labels.as_deref()
    }

    pub fn require_target(&self) -> Result<&[f64]> {
        self.target()
            .ok_or_else(|| MintError::invalid("dataset has no target values attached"))
    }

    /// Value of feature `j` for sample `i`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    /// Replaces the target; used by tests probing leakage.
    pub fn replace_target(&mut self, target: Vec<f64>) -> Result<()> {
        let updated = self.clone().with_target(target)?;
        self.target = updated.target;
        Ok(())
    }
}

fn is_genotype_code(v: f64) -> bool {
    v == 0.0 || v == 1.0 || v == 2.0
}

fn ensure_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(MintError::invalid(format!("duplicate {what} id '{id}'")));
        }
    }
    Ok(())
}
