//! CSV ingestion and export.
//!
//! Feature files have a header `sample_id,<feature_id>...` and one row per
//! sample; phenotype files have the header `sample_id,value`. Missing cells
//! are written `NA`. Numbers are written in the shortest form that parses
//! back to the identical `f64`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind, FeatureLabel};
use crate::error::{MintError, Result};

pub const MISSING: &str = "NA";

/// What to do with `NA` cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Error,
    /// Replace by the column's most frequent value, smaller value on ties.
    ImputeMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub kind: FeatureKind,
    pub missing: MissingPolicy,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            kind: FeatureKind::Genotype,
            missing: MissingPolicy::Error,
        }
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| MintError::Input {
        path: path.to_path_buf(),
        message: format!("cannot open: {e}"),
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = open_reader(path)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| MintError::Parse {
            path: path.to_path_buf(),
            row: i + 1,
            column: "-".into(),
            message: e.to_string(),
        })?;
        // skip blank lines
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push(rec);
    }
    Ok(out)
}

/// Loads a sample × feature CSV.
///
/// Genotype files must hold only `0`, `1`, `2` or `NA`. Row numbers in errors
/// count the header as row 1.
pub fn load_genotypes(path: &Path, opts: LoadOptions) -> Result<Dataset> {
    let records = read_records(path)?;
    let header = records.first().ok_or_else(|| MintError::Input {
        path: path.to_path_buf(),
        message: "file is empty".into(),
    })?;
    if header.len() < 2 {
        return Err(MintError::Input {
            path: path.to_path_buf(),
            message: "header needs a sample id column and at least one feature".into(),
        });
    }
    let feature_ids: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let p = feature_ids.len();
    let parse_err = |row: usize, column: &str, message: String| MintError::Parse {
        path: path.to_path_buf(),
        row,
        column: column.to_owned(),
        message,
    };

    let mut sample_ids = Vec::with_capacity(records.len() - 1);
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(records.len() - 1); p];
    for (r, rec) in records.iter().enumerate().skip(1) {
        let row = r + 1;
        if rec.len() != p + 1 {
            return Err(parse_err(
                row,
                "-",
                format!("expected {} fields, found {}", p + 1, rec.len()),
            ));
        }
        sample_ids.push(rec[0].to_owned());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let value = if cell == MISSING {
                None
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    parse_err(row, &feature_ids[j], format!("non-numeric value '{cell}'"))
                })?;
                let ok = match opts.kind {
                    FeatureKind::Genotype => v == 0.0 || v == 1.0 || v == 2.0,
                    FeatureKind::Continuous => v.is_finite(),
                };
                if !ok {
                    let expect = match opts.kind {
                        FeatureKind::Genotype => "a genotype code in {0,1,2}",
                        FeatureKind::Continuous => "a finite number",
                    };
                    return Err(parse_err(
                        row,
                        &feature_ids[j],
                        format!("value '{cell}' is not {expect}"),
                    ));
                }
                Some(v)
            };
            columns[j].push(value);
        }
    }
    if sample_ids.is_empty() {
        return Err(MintError::Input {
            path: path.to_path_buf(),
            message: "no sample rows".into(),
        });
    }

    let mut dense = Vec::with_capacity(p);
    for (j, col) in columns.into_iter().enumerate() {
        dense.push(
            fill_missing(col, opts.missing).map_err(|row_idx| match row_idx {
                Some(i) => parse_err(
                    i + 2,
                    &feature_ids[j],
                    "missing value (NA) and no imputation requested".into(),
                ),
                None => MintError::Input {
                    path: path.to_path_buf(),
                    message: format!(
                        "column '{}' has no observed values to impute from",
                        feature_ids[j]
                    ),
                },
            })?,
        );
    }
    Dataset::new(sample_ids, feature_ids, dense, vec![opts.kind; p]).map_err(|e| MintError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Resolves `None` cells. `Err(Some(i))` names the first missing row under
/// [`MissingPolicy::Error`]; `Err(None)` means nothing to impute from.
fn fill_missing(
    col: Vec<Option<f64>>,
    policy: MissingPolicy,
) -> std::result::Result<Vec<f64>, Option<usize>> {
    let first_missing = col.iter().position(Option::is_none);
    let Some(first) = first_missing else {
        return Ok(col.into_iter().map(|v| v.expect("checked")).collect());
    };
    match policy {
        MissingPolicy::Error => Err(Some(first)),
        MissingPolicy::ImputeMode => {
            let fill = column_mode(col.iter().flatten().copied()).ok_or(None)?;
            Ok(col.into_iter().map(|v| v.unwrap_or(fill)).collect())
        }
    }
}

/// Most frequent value; the smaller one wins ties.
pub fn column_mode(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sorted: Vec<f64> = values.collect();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if best.is_none_or(|(_, count)| j - i > count) {
            best = Some((sorted[i], j - i));
        }
        i = j;
    }
    best.map(|(v, _)| v)
}

/// Attaches trait values from a `sample_id,value` CSV, joined by id.
pub fn load_phenotype(path: &Path, dataset: Dataset) -> Result<Dataset> {
    let records = read_records(path)?;
    let input_err = |message: String| MintError::Input {
        path: path.to_path_buf(),
        message,
    };
    if records.is_empty() {
        return Err(input_err("file is empty".into()));
    }
    let mut by_id: HashMap<&str, f64> = HashMap::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate().skip(1) {
        let row = r + 1;
        if rec.len() != 2 {
            return Err(MintError::Parse {
                path: path.to_path_buf(),
                row,
                column: "-".into(),
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let value: f64 = rec[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| MintError::Parse {
                path: path.to_path_buf(),
                row,
                column: records[0].get(1).unwrap_or("value").to_owned(),
                message: format!("trait value '{}' is not a finite number", &rec[1]),
            })?;
        if by_id.insert(&rec[0], value).is_some() {
            return Err(input_err(format!(
                "sample '{}' appears more than once",
                &rec[0]
            )));
        }
    }
    let mut target = Vec::with_capacity(dataset.n_samples());
    for id in dataset.sample_ids() {
        match by_id.remove(id.as_str()) {
            Some(v) => target.push(v),
            None => return Err(input_err(format!("no trait value for sample '{id}'"))),
        }
    }
    if let Some(extra) = by_id.keys().min() {
        return Err(input_err(format!(
            "sample '{extra}' is not in the feature file"
        )));
    }
    dataset.with_target(target)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes the feature matrix as CSV.
pub fn write_features(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write!(w, "sample_id")?;
    for id in dataset.feature_ids() {
        write!(w, ",{id}")?;
    }
    writeln!(w)?;
    let mut line = String::new();
    for (i, sid) in dataset.sample_ids().iter().enumerate() {
        line.clear();
        line.push_str(sid);
        for j in 0..dataset.n_features() {
            line.push(',');
            line.push_str(&dataset.value(i, j).to_string());
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_phenotype(dataset: &Dataset, path: &Path) -> Result<()> {
    let target = dataset.require_target()?;
    let mut w = create(path)?;
    writeln!(w, "sample_id,value")?;
    for (id, v) in dataset.sample_ids().iter().zip(target) {
        writeln!(w, "{id},{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// `feature_id,class,seed_id` ground-truth table for simulated data.
pub fn write_labels(dataset: &Dataset, path: &Path) -> Result<()> {
    let labels = dataset
        .labels()
        .ok_or_else(|| MintError::invalid("dataset carries no ground-truth labels"))?;
    let mut w = create(path)?;
    writeln!(w, "feature_id,class,seed_id")?;
    for (id, label) in dataset.feature_ids().iter().zip(labels) {
        let (class, seed) = match label {
            FeatureLabel::Good => ("good", String::new()),
            FeatureLabel::Seed => ("seed", String::new()),
            FeatureLabel::Duplicate { seed } => ("duplicate", dataset.feature_ids()[*seed].clone()),
            FeatureLabel::Bad => ("bad", String::new()),
        };
        writeln!(w, "{id},{class},{seed}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_valid_genotypes() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.csv", "sample_id,m1,m2\na,0,1\nb,2,2\nc,1,0\n");
        let d = load_genotypes(&p, LoadOptions::default()).unwrap();
        assert_eq!((d.n_samples(), d.n_features()), (3, 2));
        assert_eq!(d.column(0), &[0.0, 2.0, 1.0]);
        assert_eq!(d.feature_ids(), &["m1".to_string(), "m2".to_string()]);
    }

    #[test]
    fn invalid_code_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.csv", "sample_id,m1,m2\na,0,1\nb,2,3\n");
        let err = load_genotypes(&p, LoadOptions::default()).unwrap_err();
        match &err {
            MintError::Parse { row, column, .. } => {
                assert_eq!(*row, 3);
                assert_eq!(column, "m2");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.is_validation());
    }

    #[test]
    fn malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            ("ragged", "sample_id,m1,m2\na,0,1\nb,2\n"),
            ("text", "sample_id,m1\na,x\n"),
            ("dup_sample", "sample_id,m1\na,0\na,1\n"),
            ("dup_feature", "sample_id,m1,m1\na,0,1\n"),
            ("missing", "sample_id,m1\na,NA\nb,1\n"),
            ("empty", ""),
            ("header_only", "sample_id,m1\n"),
        ];
        for (name, body) in cases {
            let p = write(&dir, name, body);
            let err = load_genotypes(&p, LoadOptions::default()).unwrap_err();
            assert!(err.is_validation(), "{name}: {err}");
            assert!(err.to_string().contains(name), "{name}: {err}");
        }
        let err = load_genotypes(&dir.path().join("nope.csv"), LoadOptions::default()).unwrap_err();
        assert!(err.is_validation());
    }

    #[test]
    fn mode_imputation() {
        let dir = tempfile::tempdir().unwrap();
        // column m1 observed {0,2,2,1} -> mode 2; m2 observed {1,0} tie -> 0
        let p = write(
            &dir,
            "g.csv",
            "sample_id,m1,m2\na,0,NA\nb,2,1\nc,NA,0\nd,2,NA\ne,1,NA\n",
        );
        let opts = LoadOptions {
            kind: FeatureKind::Genotype,
            missing: MissingPolicy::ImputeMode,
        };
        let d = load_genotypes(&p, opts).unwrap();
        assert_eq!(d.column(0), &[0.0, 2.0, 2.0, 2.0, 1.0]);
        assert_eq!(d.column(1), &[0.0, 1.0, 0.0, 0.0, 0.0]);

        let p = write(&dir, "allna.csv", "sample_id,m1\na,NA\n");
        assert!(load_genotypes(&p, opts).is_err());
    }

    #[test]
    fn continuous_kind_accepts_reals() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.csv", "sample_id,x\na,0.25\nb,-3e5\n");
        let opts = LoadOptions {
            kind: FeatureKind::Continuous,
            missing: MissingPolicy::Error,
        };
        assert_eq!(load_genotypes(&p, opts).unwrap().column(0), &[0.25, -3e5]);
        assert!(load_genotypes(&p, LoadOptions::default()).is_err());
    }

    #[test]
    fn phenotype_join_by_id() {
        let dir = tempfile::tempdir().unwrap();
        let g = write(&dir, "g.csv", "sample_id,m1\na,0\nb,1\nc,2\n");
        let sorted = write(&dir, "p1.csv", "sample_id,value\na,1.5\nb,2.5\nc,3.5\n");
        let permuted = write(&dir, "p2.csv", "sample_id,value\nc,3.5\na,1.5\nb,2.5\n");
        let d = load_genotypes(&g, LoadOptions::default()).unwrap();
        let y1 = load_phenotype(&sorted, d.clone()).unwrap();
        let y2 = load_phenotype(&permuted, d.clone()).unwrap();
        assert_eq!(y1.target(), y2.target());
        assert_eq!(y1.target().unwrap(), &[1.5, 2.5, 3.5]);

        let missing = write(&dir, "p3.csv", "sample_id,value\na,1\nc,2\n");
        let err = load_phenotype(&missing, d.clone()).unwrap_err();
        assert!(err.to_string().contains("'b'"), "{err}");
        let unknown = write(&dir, "p4.csv", "sample_id,value\na,1\nb,1\nc,2\nz,4\n");
        assert!(load_phenotype(&unknown, d.clone())
            .unwrap_err()
            .to_string()
            .contains("'z'"));
        let dup = write(&dir, "p5.csv", "sample_id,value\na,1\na,1\nb,1\nc,2\n");
        assert!(load_phenotype(&dup, d.clone()).is_err());
        let text = write(&dir, "p6.csv", "sample_id,value\na,1\nb,tall\nc,2\n");
        assert!(load_phenotype(&text, d).unwrap_err().is_validation());
    }

    #[test]
    fn column_mode_ties_pick_smaller() {
        assert_eq!(column_mode([2.0, 1.0, 2.0, 1.0].into_iter()), Some(1.0));
        assert_eq!(column_mode([0.0, 2.0, 2.0].into_iter()), Some(2.0));
        assert_eq!(column_mode(std::iter::empty()), None);
    }
}
