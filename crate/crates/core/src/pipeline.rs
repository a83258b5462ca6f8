//! In-memory orchestration of the per-book pipeline: raw body to pruned
//! networks to measurement tables to feature vectors.

use rayon::prelude::*;

use crate::features::{assemble_matrix, book_features, DatasetMatrix, FeatureVector};
use crate::measures::{measure_all, NodeMeasureTable};
use crate::mesonet::{build_weighted, sweep_prune, MesoNetwork};
use crate::textproc::{build_windows, preprocess, segment_paragraphs, Lexicon};
use crate::vectorize::tfidf_all;
use crate::Result;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub delta: usize,
    pub k_values: Vec<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            delta: 20,
            k_values: default_k_values(),
        }
    }
}

/// The standard average-degree sweep: 5 to 50 in steps of 5.
pub fn default_k_values() -> Vec<f64> {
    (1..=10).map(|m| 5.0 * m as f64).collect()
}

/// Pruned networks of one book, one per target degree.
#[derive(Debug)]
pub struct BookBuild {
    pub book_id: String,
    pub paragraph_count: usize,
    pub window_count: usize,
    pub networks: Vec<(f64, MesoNetwork)>,
}

/// Build a book's pruned networks from its raw body.
pub fn build_book(
    book_id: &str,
    body: &str,
    lexicon: &Lexicon,
    config: &PipelineConfig,
) -> Result<BookBuild> {
    let raw_paragraphs = segment_paragraphs(body);
    let text = preprocess(book_id, &raw_paragraphs, &lexicon.stopwords, &lexicon.lemmas);
    let windows = build_windows(&text, config.delta)?;
    let vectors = tfidf_all(&windows)?;
    let weighted = build_weighted(&vectors)?;
    let networks = sweep_prune(&weighted, &config.k_values)?;
    Ok(BookBuild {
        book_id: book_id.to_string(),
        paragraph_count: text.paragraph_count(),
        window_count: windows.len(),
        networks,
    })
}

/// Measure every pruned network of a book.
pub fn measure_book(networks: &[(f64, MesoNetwork)]) -> Vec<(f64, NodeMeasureTable)> {
    networks
        .iter()
        .map(|(k, net)| (*k, measure_all(net)))
        .collect()
}

/// Full in-memory pipeline for a corpus of `(book_id, author, body)` texts:
/// returns the raw (unstandardized) feature matrix, rows in input order.
pub fn corpus_feature_matrix(
    texts: &[(String, String, String)],
    lexicon: &Lexicon,
    config: &PipelineConfig,
) -> Result<DatasetMatrix> {
    let vectors: Result<Vec<FeatureVector>> = texts
        .par_iter()
        .map(|(book_id, author, body)| {
            let build = build_book(book_id, body, lexicon, config)?;
            let tables = measure_book(&build.networks);
            book_features(book_id, author, &tables)
        })
        .collect();
    assemble_matrix(vectors?, &config.k_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::four_author_corpus;

    #[test]
    fn build_book_counts_follow_the_window_law() {
        let book = &four_author_corpus(5, 1)[0];
        let lexicon = Lexicon::bundled_english();
        let config = PipelineConfig {
            delta: 20,
            k_values: vec![5.0, 10.0],
        };
        let build = build_book(&book.book_id, &book.body, &lexicon, &config).unwrap();
        assert_eq!(build.window_count, build.paragraph_count - 20 + 1);
        assert_eq!(build.networks.len(), 2);
        for (_, net) in &build.networks {
            assert_eq!(net.node_count(), build.window_count);
        }
    }

    #[test]
    fn corpus_matrix_has_uniform_grid() {
        let books = four_author_corpus(5, 1);
        let texts: Vec<(String, String, String)> = books
            .iter()
            .map(|b| (b.book_id.clone(), b.author.clone(), b.body.clone()))
            .collect();
        let config = PipelineConfig {
            delta: 20,
            k_values: vec![5.0, 10.0],
        };
        let matrix =
            corpus_feature_matrix(&texts, &Lexicon::bundled_english(), &config).unwrap();
        assert_eq!(matrix.len(), 4);
        assert_eq!(matrix.feature_names.len(), 66);
        assert!(matrix.rows.iter().flatten().all(|v| v.is_finite()));
    }
}
