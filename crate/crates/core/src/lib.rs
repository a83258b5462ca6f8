//! Mesoscopic text networks.
//!
//! This crate turns raw book texts into *mesoscopic* similarity networks and
//! runs authorship-attribution experiments on top of them. The pipeline:
//!
//! 1. [`corpus`] — load a dataset manifest, fetch and cache book texts, strip
//!    Project Gutenberg boilerplate.
//! 2. [`textproc`] — segment a book into paragraphs, remove stopwords,
//!    lemmatize, and slide a window of `delta` consecutive paragraphs over the
//!    text. Each window becomes a network node.
//! 3. [`vectorize`] — compute a tf-idf map per window (the window collection
//!    is the document set) and cosine similarities between windows.
//! 4. [`mesonet`] — assemble the complete weighted network and prune it to a
//!    target average degree, yielding an unweighted network.
//! 5. [`measures`] — topological measurements per node (degree statistics,
//!    average neighbor degree, clustering, assortativity, self-avoiding-walk
//!    accessibility, concentric symmetry) aggregated to distribution moments.
//! 6. [`features`] — per-book feature vectors across an average-degree sweep.
//! 7. [`learn`] — linear SVM, random forest, leave-one-out evaluation,
//!    pairwise author experiments, a frequent-words baseline, and PCA.
//! 8. [`layout`] — force-directed embedding and SVG rendering with
//!    narrative-order coloring.
//!
//! Everything is deterministic given a seed: repeated runs over the same
//! corpus and configuration produce byte-identical outputs.

pub mod corpus;
pub mod features;
pub mod layout;
pub mod learn;
pub mod measures;
pub mod mesonet;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod textproc;
pub mod vectorize;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("manifest parse error at line {line}: {message}")]
    ManifestParse { line: usize, message: String },
    #[error("duplicate book id `{id}` in manifest")]
    DuplicateBookId { id: String },
    #[error("book `{id}` has an empty body")]
    EmptyBody { id: String },
    #[error("failed to fetch `{source_desc}`: {message}")]
    Fetch { source_desc: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("too few paragraphs: have {have}, need at least {need}")]
    TooFewParagraphs { have: usize, need: usize },
    #[error("window {index} is empty")]
    EmptyWindow { index: usize },
    #[error("no windows supplied")]
    NoWindows,
    #[error("network needs at least two nodes, got {have}")]
    FewerThanTwoNodes { have: usize },
    #[error("infeasible target average degree {target} for {nodes} nodes")]
    InfeasibleTargetDegree { target: f64, nodes: usize },
    #[error("no measurements for average degree {k}")]
    MissingTargetDegree { k: f64 },
    #[error("cannot aggregate an empty list of values")]
    EmptyValues,
    #[error("need at least two rows, got {have}")]
    TooFewRows { have: usize },
    #[error("need at least two distinct labels")]
    SingleClass,
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("requested {requested} components, at most {max} available")]
    TooManyComponents { requested: usize, max: usize },
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("embedding has no coordinates for node {node}")]
    MissingCoordinates { node: usize },
    #[error("malformed network file {path} at line {line}: {message}")]
    NetworkParse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("malformed measurement file {path}: {message}")]
    MeasureParse { path: String, message: String },
    #[error("feature grids differ between books: {message}")]
    FeatureGridMismatch { message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
