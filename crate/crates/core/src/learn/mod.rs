//! Classifiers and evaluation: linear SVM, random forest, leave-one-out
//! cross-validation, pairwise author experiments, the frequent-words
//! baseline, and PCA.

pub mod forest;
pub mod pca;
pub mod svm;

pub use forest::{ForestModel, ForestParams};
pub use pca::{pca, silhouette_score, PcaResult};
pub use svm::{SvmModel, SvmParams};

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::features::{DatasetMatrix, Standardization};
use crate::rng::substream_seed;
use crate::{Error, Result};

/// Which classifier to train, with its parameters.
#[derive(Debug, Clone, Copy)]
pub enum TrainerSpec {
    LinearSvm(SvmParams),
    RandomForest(ForestParams),
}

impl TrainerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TrainerSpec::LinearSvm(_) => "svm",
            TrainerSpec::RandomForest(_) => "rf",
        }
    }

    /// Train on already-standardized rows.
    pub fn train(
        &self,
        x: &[Vec<f64>],
        y: &[String],
        feature_names: &[String],
    ) -> Result<TrainedModel> {
        match self {
            TrainerSpec::LinearSvm(params) => {
                svm::train(x, y, *params).map(TrainedModel::Svm)
            }
            TrainerSpec::RandomForest(params) => {
                forest::train(x, y, feature_names, *params).map(TrainedModel::Forest)
            }
        }
    }

    /// The same trainer with its seed re-derived for a fold, keeping folds
    /// independent and the whole evaluation reproducible.
    fn for_fold(&self, fold: usize) -> TrainerSpec {
        match self {
            TrainerSpec::LinearSvm(p) => TrainerSpec::LinearSvm(*p),
            TrainerSpec::RandomForest(p) => TrainerSpec::RandomForest(ForestParams {
                n_trees: p.n_trees,
                seed: substream_seed(p.seed, "fold", &[fold as u64]),
            }),
        }
    }
}

/// A trained classifier of either kind.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Svm(SvmModel),
    Forest(ForestModel),
}

impl TrainedModel {
    pub fn predict(&self, row: &[f64]) -> String {
        match self {
            TrainedModel::Svm(m) => m.predict(row).to_string(),
            TrainedModel::Forest(m) => m.predict(row).to_string(),
        }
    }
}

/// One leave-one-out fold outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldOutcome {
    pub book_id: String,
    pub true_label: String,
    pub predicted: String,
}

/// Leave-one-out evaluation report.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Lexicographically sorted label set indexing the confusion matrix.
    pub labels: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub per_fold: Vec<FoldOutcome>,
}

impl EvalReport {
    pub fn chance_baseline(&self) -> f64 {
        1.0 / self.labels.len() as f64
    }
}

/// Leave-one-out cross-validation over a raw (unstandardized) feature
/// matrix. Each fold standardizes on the remaining rows only, trains, and
/// predicts the held-out row mapped through the training statistics.
pub fn loocv(matrix: &DatasetMatrix, trainer: &TrainerSpec) -> Result<EvalReport> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::TooFewRows { have: n });
    }
    let outcomes: Result<Vec<FoldOutcome>> = (0..n)
        .into_par_iter()
        .map(|held_out| {
            let train_rows: Vec<Vec<f64>> = (0..n)
                .filter(|&r| r != held_out)
                .map(|r| matrix.rows[r].clone())
                .collect();
            let train_labels: Vec<String> = (0..n)
                .filter(|&r| r != held_out)
                .map(|r| matrix.authors[r].clone())
                .collect();
            let stats = Standardization::fit(&train_rows);
            let x: Vec<Vec<f64>> = train_rows.iter().map(|r| stats.apply_row(r)).collect();
            let model =
                trainer
                    .for_fold(held_out)
                    .train(&x, &train_labels, &matrix.feature_names)?;
            let test = stats.apply_row(&matrix.rows[held_out]);
            Ok(FoldOutcome {
                book_id: matrix.ids[held_out].clone(),
                true_label: matrix.authors[held_out].clone(),
                predicted: model.predict(&test),
            })
        })
        .collect();
    let per_fold = outcomes?;

    let labels = matrix.label_set();
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(ix, l)| (l.as_str(), ix))
        .collect();
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    let mut correct = 0usize;
    for fold in &per_fold {
        let t = index[fold.true_label.as_str()];
        // a prediction is always one of the training labels, hence in the set
        let p = index[fold.predicted.as_str()];
        confusion[t][p] += 1;
        if fold.true_label == fold.predicted {
            correct += 1;
        }
    }
    Ok(EvalReport {
        accuracy: correct as f64 / n as f64,
        labels,
        confusion,
        per_fold,
    })
}

/// Pairwise author accuracies: for each unordered author pair, leave-one-out
/// over just their books. The matrix is symmetric; the diagonal is empty.
#[derive(Debug, Clone)]
pub struct PairwiseMatrix {
    pub authors: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

pub fn pairwise_matrix(matrix: &DatasetMatrix, trainer: &TrainerSpec) -> Result<PairwiseMatrix> {
    let authors = matrix.label_set();
    if authors.len() < 2 {
        return Err(Error::SingleClass);
    }
    let mut cells = vec![vec![None; authors.len()]; authors.len()];
    let pairs: Vec<(usize, usize)> = (0..authors.len())
        .flat_map(|a| (a + 1..authors.len()).map(move |b| (a, b)))
        .collect();
    let accuracies: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let pair = matrix.filter_authors(&[authors[a].as_str(), authors[b].as_str()]);
            Ok(loocv(&pair, trainer)?.accuracy)
        })
        .collect();
    for (&(a, b), acc) in pairs.iter().zip(accuracies?) {
        cells[a][b] = Some(acc);
        cells[b][a] = Some(acc);
    }
    Ok(PairwiseMatrix { authors, cells })
}

/// Relative frequencies of the corpus-wide `top_n` most frequent tokens,
/// computed over the *original* (unpreprocessed) texts. Ties in the corpus
/// counts break lexicographically.
pub fn frequent_words_features(
    texts: &[(String, String, String)], // (book_id, author, body)
    top_n: usize,
) -> Result<DatasetMatrix> {
    assert!(top_n >= 1, "top_n must be at least 1");
    let tokenized: Vec<Vec<String>> = texts
        .par_iter()
        .map(|(_, _, body)| crate::textproc::tokenize(body))
        .collect();
    let mut corpus_counts: HashMap<&str, u64> = HashMap::new();
    for tokens in &tokenized {
        for t in tokens {
            *corpus_counts.entry(t).or_insert(0) += 1;
        }
    }
    if corpus_counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut ranked: Vec<(&str, u64)> = corpus_counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let vocabulary: Vec<String> = ranked
        .iter()
        .take(top_n)
        .map(|(w, _)| w.to_string())
        .collect();

    let rows: Vec<Vec<f64>> = tokenized
        .iter()
        .map(|tokens| {
            let total = tokens.len() as f64;
            let mut counts: HashMap<&str, u64> = HashMap::new();
            for t in tokens {
                *counts.entry(t).or_insert(0) += 1;
            }
            vocabulary
                .iter()
                .map(|w| {
                    if total == 0.0 {
                        0.0
                    } else {
                        *counts.get(w.as_str()).unwrap_or(&0) as f64 / total
                    }
                })
                .collect()
        })
        .collect();
    Ok(DatasetMatrix {
        ids: texts.iter().map(|(id, _, _)| id.clone()).collect(),
        authors: texts.iter().map(|(_, a, _)| a.clone()).collect(),
        feature_names: vocabulary.iter().map(|w| format!("freq_{w}")).collect(),
        rows,
        standardization: None,
    })
}

/// Render an evaluation report as text: accuracy, chance baseline, and the
/// confusion matrix.
pub fn format_report(report: &EvalReport, title: &str) -> String {
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    writeln!(out, "accuracy: {:.4}", report.accuracy).unwrap();
    writeln!(out, "chance baseline: {:.4}", report.chance_baseline()).unwrap();
    writeln!(out, "folds: {}", report.per_fold.len()).unwrap();
    writeln!(out, "confusion (rows = true, columns = predicted):").unwrap();
    write!(out, "{:>24}", "").unwrap();
    for l in &report.labels {
        write!(out, " {l:>12}").unwrap();
    }
    writeln!(out).unwrap();
    for (ix, l) in report.labels.iter().enumerate() {
        write!(out, "{l:>24}").unwrap();
        for c in &report.confusion[ix] {
            write!(out, " {c:>12}").unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}

/// Write the confusion matrix as CSV (`true\predicted` grid).
pub fn write_confusion_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(report.labels.iter().cloned());
    w.write_record(&header)
        ?;
    for (ix, label) in report.labels.iter().enumerate() {
        let mut record = vec![label.clone()];
        record.extend(report.confusion[ix].iter().map(usize::to_string));
        w.write_record(&record)
            ?;
    }
    w.flush()?;
    Ok(())
}

/// Write per-fold outcomes as CSV.
pub fn write_folds_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["book_id", "true", "predicted"])
        ?;
    for fold in &report.per_fold {
        w.write_record([&fold.book_id, &fold.true_label, &fold.predicted])
            ?;
    }
    w.flush()?;
    Ok(())
}

/// Write a pairwise accuracy matrix as CSV; diagonal cells stay empty.
pub fn write_pairwise_csv(matrix: &PairwiseMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["author".to_string()];
    header.extend(matrix.authors.iter().cloned());
    w.write_record(&header)
        ?;
    for (ix, author) in matrix.authors.iter().enumerate() {
        let mut record = vec![author.clone()];
        record.extend(
            matrix.cells[ix]
                .iter()
                .map(|c| c.map_or(String::new(), |v| v.to_string())),
        );
        w.write_record(&record)
            ?;
    }
    w.flush()?;
    Ok(())
}
