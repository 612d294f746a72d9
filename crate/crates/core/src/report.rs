//! JSON report documents written by the CLI.
//!
//! Top-level keys are `schema_version`, `tool`, `config`, `results`, `notes`
//! and `timing`. Everything outside `timing` is a pure function of the
//! inputs and `config`; `timing` holds wall-clock and thread information.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureKind;
use crate::error::Result;
use crate::harness::{CvReport, ExperimentConfig};
use crate::io::MissingPolicy;
use crate::selection::{Mode, PhiScore};

pub const SCHEMA_VERSION: u32 = 1;

pub const REDUNDANCY_NOTE: &str =
    "phi.redundancy averages MI over all ordered pairs of the selected set, \
     self-pairs included; the greedy step objective excludes self-pairs";
pub const FIRST_STEP_NOTE: &str =
    "the first feature is chosen by relevance alone; ties go to the lowest feature index";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputConfig {
    pub genotypes: PathBuf,
    pub phenotype: PathBuf,
    pub feature_kind: FeatureKind,
    pub missing: MissingPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub input: InputConfig,
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub config: CvConfig,
    pub results: Vec<CvReport>,
    pub notes: Vec<String>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub input: InputConfig,
    pub test_genotypes: Option<PathBuf>,
    pub method: Mode,
    pub n: usize,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub rank: usize,
    pub index: usize,
    pub id: String,
    pub step_score: f64,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectResult {
    pub method: Mode,
    pub n: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub ranking: Vec<RankedFeature>,
    pub mi_eval_count: u64,
    pub phi: PhiScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub config: SelectConfig,
    pub results: Vec<SelectResult>,
    pub notes: Vec<String>,
    pub timing: Timing,
}

pub fn write_json<T: Serialize>(doc: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
