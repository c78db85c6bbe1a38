use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::schema::{ColumnKind, FeatureSchema};
use crate::dataset::table::RawTable;
use crate::error::{Error, Result};

/// Per-column transform parameters, in schema order (target excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingStats {
    pub columns: Vec<ColumnStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnStats {
    Continuous { name: String, mean: f64, stddev: f64 },
    Categorical { name: String, vocabulary: Vec<String> },
}

impl EncodingStats {
    /// Encoded feature width.
    pub fn width(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c {
                ColumnStats::Continuous { .. } => 1,
                ColumnStats::Categorical { vocabulary, .. } => vocabulary.len(),
            })
            .sum()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.width());
        for col in &self.columns {
            match col {
                ColumnStats::Continuous { name, .. } => names.push(name.clone()),
                ColumnStats::Categorical { name, vocabulary } => {
                    names.extend(vocabulary.iter().map(|v| format!("{name}={v}")))
                }
            }
        }
        names
    }
}

/// A numeric design matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub feature_names: Vec<String>,
}

impl EncodedDataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let names = (0..features.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(features, labels, n_classes, names)
    }

    pub fn with_names(
        features: Array2<f64>,
        labels: Vec<usize>,
        n_classes: usize,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if n_classes == 0 {
            return Err(Error::ShapeMismatch("n_classes must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
            return Err(Error::ShapeMismatch(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("non-finite value in feature matrix".into()));
        }
        Ok(EncodedDataset {
            features,
            labels,
            n_classes,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn select(&self, rows: &[usize]) -> EncodedDataset {
        EncodedDataset {
            features: self.features.select(Axis(0), rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn with_labels(&self, labels: Vec<usize>) -> Result<EncodedDataset> {
        Self::with_names(
            self.features.clone(),
            labels,
            self.n_classes,
            self.feature_names.clone(),
        )
    }

    /// Stacks datasets row-wise; widths and class counts must agree.
    pub fn concat(parts: &[&EncodedDataset]) -> Result<EncodedDataset> {
        let first = parts.first().ok_or(Error::EmptyInput)?;
        for p in parts {
            if p.n_features() != first.n_features() || p.n_classes != first.n_classes {
                return Err(Error::ShapeMismatch(format!(
                    "cannot stack width {} / {} classes onto width {} / {} classes",
                    p.n_features(),
                    p.n_classes,
                    first.n_features(),
                    first.n_classes
                )));
            }
        }
        let views: Vec<_> = parts.iter().map(|p| p.features.view()).collect();
        let features = ndarray::concatenate(Axis(0), &views)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        let labels = parts.iter().flat_map(|p| p.labels.iter().copied()).collect();
        Ok(EncodedDataset {
            features,
            labels,
            n_classes: first.n_classes,
            feature_names: first.feature_names.clone(),
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }
}

fn parse_number(raw: &RawTable, row: usize, col: usize) -> Result<f64> {
    let cell = &raw.rows[row][col];
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumericCell {
            row,
            column: raw.header[col].clone(),
            value: cell.clone(),
        }),
    }
}

fn check_layout(raw: &RawTable, schema: &FeatureSchema) -> Result<()> {
    let names = schema.column_names();
    if raw.header.len() != names.len() || raw.header.iter().zip(&names).any(|(a, b)| a != b) {
        return Err(Error::ShapeMismatch(
            "raw table columns are not in schema order".into(),
        ));
    }
    Ok(())
}

/// Fits z-score parameters (population stddev) and one-hot vocabularies
/// using only `fit_rows`. Categorical columns with a vocabulary in the
/// schema use it; others use the sorted distinct values seen.
pub fn fit_encoding_stats(raw: &RawTable, schema: &FeatureSchema, fit_rows: &[usize]) -> Result<EncodingStats> {
    if fit_rows.is_empty() {
        return Err(Error::EmptyFitSet);
    }
    check_layout(raw, schema)?;
    if let Some(&bad) = fit_rows.iter().find(|&&r| r >= raw.n_rows()) {
        return Err(Error::ShapeMismatch(format!(
            "fit row {bad} out of range for {} rows",
            raw.n_rows()
        )));
    }

    let mut columns = Vec::new();
    for (col, spec) in schema.columns.iter().enumerate() {
        match spec.kind {
            ColumnKind::Target => {}
            ColumnKind::Continuous => {
                let values = fit_rows
                    .iter()
                    .map(|&r| parse_number(raw, r, col))
                    .collect::<Result<Vec<f64>>>()?;
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                columns.push(ColumnStats::Continuous {
                    name: spec.name.clone(),
                    mean,
                    stddev: var.sqrt(),
                });
            }
            ColumnKind::Categorical => {
                let vocabulary: Vec<String> = match &spec.categories {
                    Some(fixed) => fixed.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
                    None => fit_rows
                        .iter()
                        .map(|&r| raw.rows[r][col].clone())
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect(),
                };
                columns.push(ColumnStats::Categorical {
                    name: spec.name.clone(),
                    vocabulary,
                });
            }
        }
    }
    Ok(EncodingStats { columns })
}

/// Maps the target column to class indices.
pub fn target_labels(raw: &RawTable, schema: &FeatureSchema) -> Result<Vec<usize>> {
    check_layout(raw, schema)?;
    (0..raw.n_rows()).map(|r| label_of(raw, schema, r)).collect()
}

fn label_of(raw: &RawTable, schema: &FeatureSchema, row: usize) -> Result<usize> {
    let cell = &raw.rows[row][schema.target_index()];
    schema
        .target_classes
        .iter()
        .position(|c| c == cell)
        .ok_or_else(|| Error::UnknownTargetClass {
            row,
            value: cell.clone(),
        })
}

pub fn encode(raw: &RawTable, schema: &FeatureSchema, stats: &EncodingStats) -> Result<EncodedDataset> {
    let all: Vec<usize> = (0..raw.n_rows()).collect();
    encode_rows(raw, schema, stats, &all)
}

/// Encodes the given rows: z-scored continuous columns (constant columns
/// become 0), one-hot categorical blocks (unseen categories become all
/// zeros), and integer labels.
pub fn encode_rows(
    raw: &RawTable,
    schema: &FeatureSchema,
    stats: &EncodingStats,
    rows: &[usize],
) -> Result<EncodedDataset> {
    check_layout(raw, schema)?;
    let feature_cols: Vec<usize> = schema
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind != ColumnKind::Target)
        .map(|(i, _)| i)
        .collect();
    if feature_cols.len() != stats.columns.len() {
        return Err(Error::ShapeMismatch(format!(
            "stats cover {} columns but schema has {} feature columns",
            stats.columns.len(),
            feature_cols.len()
        )));
    }

    if let Some(&bad) = rows.iter().find(|&&r| r >= raw.n_rows()) {
        return Err(Error::ShapeMismatch(format!(
            "row {bad} out of range for {} rows",
            raw.n_rows()
        )));
    }
    let labels = rows
        .iter()
        .map(|&r| label_of(raw, schema, r))
        .collect::<Result<Vec<_>>>()?;
    let width = stats.width();
    let mut features = Array2::<f64>::zeros((rows.len(), width));
    for (out_row, &r) in rows.iter().enumerate() {
        let mut offset = 0;
        for (&col, col_stats) in feature_cols.iter().zip(&stats.columns) {
            match col_stats {
                ColumnStats::Continuous { mean, stddev, .. } => {
                    let v = parse_number(raw, r, col)?;
                    features[[out_row, offset]] = if *stddev > 0.0 { (v - mean) / stddev } else { 0.0 };
                    offset += 1;
                }
                ColumnStats::Categorical { vocabulary, .. } => {
                    let cell = &raw.rows[r][col];
                    if let Some(k) = vocabulary.iter().position(|v| v == cell) {
                        features[[out_row, offset + k]] = 1.0;
                    }
                    offset += vocabulary.len();
                }
            }
        }
    }
    EncodedDataset::with_names(features, labels, schema.n_classes(), stats.feature_names())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::schema::ColumnSpec;

    fn schema(fixed_vocab: bool) -> FeatureSchema {
        let cat = if fixed_vocab {
            ColumnSpec::categorical("c", &["z", "y", "x"])
        } else {
            ColumnSpec {
                name: "c".into(),
                kind: ColumnKind::Categorical,
                categories: None,
            }
        };
        FeatureSchema::new(
            vec![ColumnSpec::continuous("v"), cat, ColumnSpec::target("t")],
            vec!["neg".into(), "pos".into()],
            ';',
        )
        .unwrap()
    }

    fn table(rows: &[(&str, &str, &str)]) -> RawTable {
        RawTable::new(
            vec!["v".into(), "c".into(), "t".into()],
            rows.iter()
                .map(|(a, b, c)| vec![a.to_string(), b.to_string(), c.to_string()])
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_mean_and_stddev() {
        let raw = table(&[("0", "yes", "neg"), ("2", "no", "pos"), ("100", "yes", "pos")]);
        let stats = fit_encoding_stats(&raw, &schema(false), &[0, 1]).unwrap();
        match &stats.columns[0] {
            ColumnStats::Continuous { mean, stddev, .. } => {
                assert_eq!(*mean, 1.0);
                assert_eq!(*stddev, 1.0);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn vocabulary_sorted_distinct() {
        let raw = table(&[("0", "yes", "neg"), ("2", "no", "pos"), ("1", "yes", "pos")]);
        let stats = fit_encoding_stats(&raw, &schema(false), &[0, 1, 2]).unwrap();
        assert_eq!(
            stats.columns[1],
            ColumnStats::Categorical {
                name: "c".into(),
                vocabulary: vec!["no".into(), "yes".into()]
            }
        );
    }

    #[test]
    fn schema_vocabulary_wins_over_observed() {
        let raw = table(&[("0", "y", "neg"), ("2", "y", "pos")]);
        let stats = fit_encoding_stats(&raw, &schema(true), &[0]).unwrap();
        assert_eq!(stats.width(), 4);
        let enc = encode(&raw, &schema(true), &stats).unwrap();
        // sorted vocabulary [x, y, z]; "y" is the 2nd entry
        assert_eq!(enc.features.row(0).to_vec()[1..], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn mean_value_encodes_to_zero_and_constant_column_to_zero() {
        let raw = table(&[("1", "a", "neg"), ("3", "b", "pos"), ("2", "a", "pos")]);
        let stats = fit_encoding_stats(&raw, &schema(false), &[0, 1]).unwrap();
        let enc = encode(&raw, &schema(false), &stats).unwrap();
        assert_eq!(enc.features[[2, 0]], 0.0);
        assert_eq!(enc.labels, vec![0, 1, 1]);

        let flat = table(&[("5", "a", "neg"), ("5", "a", "pos"), ("7", "a", "pos")]);
        let stats = fit_encoding_stats(&flat, &schema(false), &[0, 1]).unwrap();
        let enc = encode(&flat, &schema(false), &stats).unwrap();
        assert!(enc.features.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unseen_category_is_all_zero() {
        let raw = table(&[("1", "a", "neg"), ("3", "b", "pos"), ("2", "c", "pos")]);
        let stats = fit_encoding_stats(&raw, &schema(false), &[0, 1]).unwrap();
        let enc = encode(&raw, &schema(false), &stats).unwrap();
        assert_eq!(enc.features.row(2).to_vec()[1..], [0.0, 0.0]);
    }

    #[test]
    fn error_paths() {
        let raw = table(&[("1", "a", "neg"), ("x", "b", "pos"), ("2", "c", "maybe")]);
        assert!(matches!(
            fit_encoding_stats(&raw, &schema(false), &[]),
            Err(Error::EmptyFitSet)
        ));
        assert!(matches!(
            fit_encoding_stats(&raw, &schema(false), &[0, 1]),
            Err(Error::NonNumericCell { row: 1, .. })
        ));
        let nan = table(&[("NaN", "a", "neg")]);
        assert!(matches!(
            fit_encoding_stats(&nan, &schema(false), &[0]),
            Err(Error::NonNumericCell { .. })
        ));
        let stats = fit_encoding_stats(&raw, &schema(false), &[0]).unwrap();
        assert!(matches!(
            encode_rows(&raw, &schema(false), &stats, &[2]),
            Err(Error::UnknownTargetClass { row: 2, .. })
        ));
    }

    #[test]
    fn test_rows_do_not_influence_stats() {
        let raw = table(&[("1", "a", "neg"), ("3", "b", "pos"), ("2", "c", "pos")]);
        let mut perturbed = raw.clone();
        perturbed.rows[2] = vec!["1e6".into(), "zzz".into(), "neg".into()];
        let s1 = fit_encoding_stats(&raw, &schema(false), &[0, 1]).unwrap();
        let s2 = fit_encoding_stats(&perturbed, &schema(false), &[0, 1]).unwrap();
        assert_eq!(s1, s2);
    }
}
