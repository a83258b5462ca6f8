//! Per-book feature vectors across the average-degree sweep.
//!
//! For each target degree the block is: degree (std, skewness — the mean is
//! pinned by pruning), then (mean, std, skewness) of every other per-node
//! measurement, then the assortativity scalar: 2 + 3*10 + 1 = 33 features
//! per degree, concatenated in ascending degree order.

use std::path::Path;

use crate::measures::{aggregate, NodeMeasureTable, PER_NODE_MEASURES};
use crate::{Error, Result};

/// One book's features plus its author label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub book_id: String,
    pub author: String,
    pub entries: Vec<(String, f64)>,
}

/// Feature rows for a whole dataset with a uniform column grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMatrix {
    pub ids: Vec<String>,
    pub authors: Vec<String>,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Per-column statistics, set once the matrix has been standardized.
    pub standardization: Option<Standardization>,
}

impl DatasetMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct author labels in lexicographic order.
    pub fn label_set(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.authors.clone();
        labels.sort();
        labels.dedup();
        labels
    }

    /// Sub-matrix with only the rows whose author is in `keep`.
    pub fn filter_authors(&self, keep: &[&str]) -> DatasetMatrix {
        let selected: Vec<usize> = (0..self.len())
            .filter(|&r| keep.contains(&self.authors[r].as_str()))
            .collect();
        DatasetMatrix {
            ids: selected.iter().map(|&r| self.ids[r].clone()).collect(),
            authors: selected.iter().map(|&r| self.authors[r].clone()).collect(),
            feature_names: self.feature_names.clone(),
            rows: selected.iter().map(|&r| self.rows[r].clone()).collect(),
            standardization: None,
        }
    }

    /// Sub-matrix with only the columns selected by `pred`.
    pub fn filter_columns(&self, pred: impl Fn(&str) -> bool) -> DatasetMatrix {
        let selected: Vec<usize> = (0..self.feature_names.len())
            .filter(|&c| pred(&self.feature_names[c]))
            .collect();
        DatasetMatrix {
            ids: self.ids.clone(),
            authors: self.authors.clone(),
            feature_names: selected
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|row| selected.iter().map(|&c| row[c]).collect())
                .collect(),
            standardization: None,
        }
    }
}

/// Format a target degree for feature names and file names: `5` not `5.0`.
pub fn format_k(k: f64) -> String {
    if k == k.trunc() && k.abs() < 1e15 {
        format!("{}", k as i64)
    } else {
        format!("{k}")
    }
}

/// The feature-name grid for a sweep, a pure function of the degree list.
pub fn feature_names(k_values: &[f64]) -> Vec<String> {
    let mut ks = k_values.to_vec();
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut names = Vec::new();
    for k in ks {
        let k = format_k(k);
        names.push(format!("k{k}_degree_std"));
        names.push(format!("k{k}_degree_skew"));
        for measure in &PER_NODE_MEASURES[1..] {
            for stat in ["mean", "std", "skew"] {
                names.push(format!("k{k}_{measure}_{stat}"));
            }
        }
        names.push(format!("k{k}_assortativity"));
    }
    names
}

/// Assemble one book's feature vector from its per-degree measurement
/// tables. Tables are consumed in ascending degree order.
pub fn book_features(
    book_id: &str,
    author: &str,
    tables: &[(f64, NodeMeasureTable)],
) -> Result<FeatureVector> {
    let mut sorted: Vec<&(f64, NodeMeasureTable)> = tables.iter().collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut entries = Vec::new();
    for (k, table) in sorted {
        let k = format_k(*k);
        let columns = table.per_node_columns();
        let degree = aggregate(columns[0].1)?;
        entries.push((format!("k{k}_degree_std"), degree.std));
        entries.push((format!("k{k}_degree_skew"), degree.skewness));
        for (measure, values) in &columns[1..] {
            let stats = aggregate(values)?;
            entries.push((format!("k{k}_{measure}_mean"), stats.mean));
            entries.push((format!("k{k}_{measure}_std"), stats.std));
            entries.push((format!("k{k}_{measure}_skew"), stats.skewness));
        }
        entries.push((format!("k{k}_assortativity"), table.assortativity));
    }
    if let Some(col) = entries.iter().position(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteFeature { row: 0, col });
    }
    Ok(FeatureVector {
        book_id: book_id.to_string(),
        author: author.to_string(),
        entries,
    })
}

/// Stack per-book feature vectors into a matrix, verifying every book was
/// measured at every degree in `k_values` and that all grids agree.
pub fn assemble_matrix(vectors: Vec<FeatureVector>, k_values: &[f64]) -> Result<DatasetMatrix> {
    let expected = feature_names(k_values);
    let mut ids = Vec::new();
    let mut authors = Vec::new();
    let mut rows = Vec::new();
    for v in vectors {
        let names: Vec<&String> = v.entries.iter().map(|(n, _)| n).collect();
        if names.len() != expected.len() {
            // find the first missing degree for a pointed error
            for &k in k_values {
                let prefix = format!("k{}_", format_k(k));
                if !names.iter().any(|n| n.starts_with(&prefix)) {
                    return Err(Error::MissingTargetDegree { k });
                }
            }
            return Err(Error::FeatureGridMismatch {
                message: format!(
                    "book {} has {} features, expected {}",
                    v.book_id,
                    names.len(),
                    expected.len()
                ),
            });
        }
        for (got, want) in names.iter().zip(&expected) {
            if *got != want {
                return Err(Error::FeatureGridMismatch {
                    message: format!("book {}: `{got}` where `{want}` expected", v.book_id),
                });
            }
        }
        ids.push(v.book_id);
        authors.push(v.author);
        rows.push(v.entries.into_iter().map(|(_, x)| x).collect());
    }
    Ok(DatasetMatrix {
        ids,
        authors,
        feature_names: expected,
        rows,
        standardization: None,
    })
}

/// Per-column mean and population standard deviation, retained so held-out
/// rows can be mapped with training statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardization {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let means: Vec<f64> = (0..cols)
            .map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n)
            .collect();
        let stds: Vec<f64> = (0..cols)
            .map(|c| {
                (rows.iter().map(|r| (r[c] - means[c]).powi(2)).sum::<f64>() / n).sqrt()
            })
            .collect();
        Standardization { means, stds }
    }

    /// `(x - mean) / std` per column; zero-variance columns map to 0.
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&x, (&m, &s))| if s == 0.0 { 0.0 } else { (x - m) / s })
            .collect()
    }
}

/// Z-score every column with the matrix's own statistics (kept on the
/// result for reuse on held-out rows). Needs at least two rows.
pub fn standardize(matrix: &DatasetMatrix) -> Result<DatasetMatrix> {
    if matrix.len() < 2 {
        return Err(Error::TooFewRows { have: matrix.len() });
    }
    let stats = Standardization::fit(&matrix.rows);
    let rows = matrix.rows.iter().map(|r| stats.apply_row(r)).collect();
    Ok(DatasetMatrix {
        ids: matrix.ids.clone(),
        authors: matrix.authors.clone(),
        feature_names: matrix.feature_names.clone(),
        rows,
        standardization: Some(stats),
    })
}

/// Write `book_id,author,<features...>` CSV.
pub fn write_features_csv(matrix: &DatasetMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["book_id".to_string(), "author".to_string()];
    header.extend(matrix.feature_names.iter().cloned());
    w.write_record(&header)?;
    for r in 0..matrix.len() {
        let mut record = vec![matrix.ids[r].clone(), matrix.authors[r].clone()];
        record.extend(matrix.rows[r].iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a CSV written by [`write_features_csv`].
pub fn read_features_csv(path: &Path) -> Result<DatasetMatrix> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.len() < 2 || &header[0] != "book_id" || &header[1] != "author" {
        return Err(Error::MeasureParse {
            path: path.display().to_string(),
            message: "expected `book_id,author,...` header".to_string(),
        });
    }
    let feature_names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut ids = Vec::new();
    let mut authors = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        ids.push(record[0].to_string());
        authors.push(record[1].to_string());
        let row: std::result::Result<Vec<f64>, _> =
            record.iter().skip(2).map(str::parse).collect();
        rows.push(row.map_err(|_| Error::MeasureParse {
            path: path.display().to_string(),
            message: "bad feature value".to_string(),
        })?);
    }
    Ok(DatasetMatrix {
        ids,
        authors,
        feature_names,
        rows,
        standardization: None,
    })
}
