//! Discretization, plug-in entropy and plug-in mutual information.
//!
//! All quantities are in bits. Columns are held as dense integer codes
//! `0..cardinality` so joint histograms can be stored as flat count tables.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};

/// Largest alphabet a column may carry after relabeling.
pub const MAX_CARDINALITY: usize = u16::MAX as usize + 1;

/// How a real-valued column is turned into integer codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum BinningSpec {
    /// Values are already small integers (genotype codes); relabel densely.
    PassthroughInteger,
    /// Rank-based bins holding (close to) equal numbers of samples.
    EqualFrequency { bins: usize },
}

impl BinningSpec {
    /// Equal-frequency binning with `ceil(sqrt(n))` bins.
    pub fn default_equal_frequency(n: usize) -> Self {
        BinningSpec::EqualFrequency {
            bins: default_bin_count(n),
        }
    }
}

/// `ceil(sqrt(n))`, at least 1.
pub fn default_bin_count(n: usize) -> usize {
    let mut b = (n as f64).sqrt().ceil() as usize;
    // guard against sqrt rounding for perfect squares
    while b > 1 && (b - 1) * (b - 1) >= n {
        b -= 1;
    }
    while b * b < n {
        b += 1;
    }
    b.max(1)
}

/// Integer-coded column with a dense alphabet `0..cardinality`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteColumn {
    codes: Vec<u16>,
    cardinality: usize,
    /// `sum_s c_s * log2(c_s)` over the symbol counts; cached for MI.
    count_term: f64,
}

impl DiscreteColumn {
    /// Builds a column from arbitrary non-negative codes, relabeling the
    /// observed symbols to `0..cardinality` in ascending order.
    pub fn from_codes(codes: &[usize]) -> Result<Self> {
        if codes.is_empty() {
            return Err(MintError::invalid(
                "column must contain at least one sample",
            ));
        }
        let max = *codes.iter().max().expect("non-empty");
        if max < MAX_CARDINALITY * 4 {
            let mut remap = vec![usize::MAX; max + 1];
            for &c in codes {
                remap[c] = 0;
            }
            let mut next = 0usize;
            for slot in remap.iter_mut() {
                if *slot == 0 {
                    *slot = next;
                    next += 1;
                }
            }
            if next > MAX_CARDINALITY {
                return Err(MintError::invalid(format!(
                    "column alphabet of {next} symbols exceeds the supported {MAX_CARDINALITY}"
                )));
            }
            let dense: Vec<u16> = codes.iter().map(|&c| remap[c] as u16).collect();
            Ok(Self::from_dense(dense, next))
        } else {
            let mut sorted = codes.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() > MAX_CARDINALITY {
                return Err(MintError::invalid(format!(
                    "column alphabet of {} symbols exceeds the supported {MAX_CARDINALITY}",
                    sorted.len()
                )));
            }
            let dense: Vec<u16> = codes
                .iter()
                .map(|c| sorted.binary_search(c).expect("present") as u16)
                .collect();
            let card = sorted.len();
            Ok(Self::from_dense(dense, card))
        }
    }

    fn from_dense(codes: Vec<u16>, cardinality: usize) -> Self {
        let mut counts = vec![0u32; cardinality];
        for &c in &codes {
            counts[c as usize] += 1;
        }
        let count_term = counts.iter().map(|&c| xlog2x(c)).sum();
        Self {
            codes,
            cardinality,
            count_term,
        }
    }

    pub fn codes(&self) -> &[u16] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn is_constant(&self) -> bool {
        self.cardinality == 1
    }

    /// Symbol counts in code order.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.cardinality];
        for &c in &self.codes {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Order used to put MI arguments into a canonical position so that
    /// `I(a;b)` and `I(b;a)` accumulate identically.
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.cardinality
            .cmp(&other.cardinality)
            .then_with(|| self.codes.cmp(&other.codes))
    }
}

#[inline]
fn xlog2x(c: u32) -> f64 {
    if c <= 1 {
        0.0
    } else {
        let c = c as f64;
        c * c.log2()
    }
}

/// Discretizes a real vector according to `spec`.
///
/// Equal values always receive the same code. Equal-frequency binning sorts the
/// values, assigns the sample of ascending rank `r` to bin `floor(r·B/n)` and
/// pulls every tie group into the bin of its lowest-ranked member.
pub fn discretize(values: &[f64], spec: BinningSpec) -> Result<DiscreteColumn> {
    if values.is_empty() {
        return Err(MintError::invalid("cannot discretize an empty vector"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(MintError::invalid(format!(
            "non-finite value {} at position {i}",
            values[i]
        )));
    }
    match spec {
        BinningSpec::PassthroughInteger => passthrough(values),
        BinningSpec::EqualFrequency { bins } => equal_frequency(values, bins),
    }
}

fn passthrough(values: &[f64]) -> Result<DiscreteColumn> {
    if let Some(i) = values.iter().position(|v| v.fract() != 0.0) {
        return Err(MintError::invalid(format!(
            "value {} at position {i} is not an integer; passthrough-integer binning needs integral codes",
            values[i]
        )));
    }
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() > MAX_CARDINALITY {
        return Err(MintError::invalid(format!(
            "{} distinct integers exceed the supported alphabet of {MAX_CARDINALITY}",
            distinct.len()
        )));
    }
    let codes = values
        .iter()
        .map(|v| distinct.partition_point(|d| d < v) as u16)
        .collect();
    Ok(DiscreteColumn::from_dense(codes, distinct.len()))
}

fn equal_frequency(values: &[f64], bins: usize) -> Result<DiscreteColumn> {
    if bins == 0 {
        return Err(MintError::invalid("bin count must be at least 1"));
    }
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let mut raw = vec![0usize; n];
    let mut rank = 0;
    while rank < n {
        let bin = rank * bins / n;
        let v = values[order[rank]];
        let mut end = rank;
        while end < n && values[order[end]] == v {
            raw[order[end]] = bin;
            end += 1;
        }
        rank = end;
    }
    DiscreteColumn::from_codes(&raw)
}

/// Plug-in Shannon entropy in bits.
pub fn entropy(col: &DiscreteColumn) -> Result<f64> {
    if col.is_empty() {
        return Err(MintError::invalid("entropy of an empty column"));
    }
    if col.is_constant() {
        return Ok(0.0);
    }
    let n = col.len() as f64;
    Ok((n.log2() - col.count_term / n).max(0.0))
}

/// Plug-in mutual information in bits between two equally long columns.
pub fn mutual_information(a: &DiscreteColumn, b: &DiscreteColumn) -> Result<f64> {
    if a.len() != b.len() {
        return Err(MintError::invalid(format!(
            "mutual information of columns with different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(MintError::invalid("mutual information of empty columns"));
    }
    let est = MiEstimator::new(a.len());
    let mut scratch = Vec::new();
    Ok(est.mi(a, b, &mut scratch))
}

/// Reusable MI evaluator for columns of one fixed length.
///
/// Holds a `c·log2(c)` lookup table and an evaluation counter. The table
/// values are computed by the same expression the columns use for their own
/// cached terms, so results do not depend on which path produced them.
#[derive(Debug)]
pub struct MiEstimator {
    n: usize,
    log2_n: f64,
    xlogx: Vec<f64>,
    evaluations: AtomicU64,
}

impl MiEstimator {
    pub fn new(n: usize) -> Self {
        let xlogx = (0..=n as u32).map(xlog2x).collect();
        Self {
            n,
            log2_n: (n as f64).log2(),
            xlogx,
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn sample_count(&self) -> usize {
        self.n
    }

    /// Number of [`MiEstimator::mi`] calls made so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(AtomicOrdering::Relaxed)
    }

    /// `I(a;b)` using `scratch` as the joint count table.
    ///
    /// Both columns must have exactly `sample_count()` entries.
    pub fn mi(&self, a: &DiscreteColumn, b: &DiscreteColumn, scratch: &mut Vec<u32>) -> f64 {
        self.evaluations.fetch_add(1, AtomicOrdering::Relaxed);
        debug_assert_eq!(a.len(), self.n);
        debug_assert_eq!(b.len(), self.n);
        if a.is_constant() || b.is_constant() {
            return 0.0;
        }
        let (a, b) = match a.canonical_cmp(b) {
            Ordering::Greater => (b, a),
            _ => (a, b),
        };
        let cells = a.cardinality * b.cardinality;
        scratch.clear();
        scratch.resize(cells, 0);
        let width = b.cardinality;
        for (&sa, &sb) in a.codes.iter().zip(&b.codes) {
            scratch[sa as usize * width + sb as usize] += 1;
        }
        let joint: f64 = scratch.iter().map(|&c| self.xlogx[c as usize]).sum();
        let mi = self.log2_n + (joint - (a.count_term + b.count_term)) / self.n as f64;
        mi.max(0.0)
    }
}
