//! Pipeline stage implementations. Each stage reads the previous stage's
//! files from the output directory, so partial reruns are cheap.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use mesotext::corpus::{fetch_text, ManifestEntry};
use mesotext::features::{
    assemble_matrix, book_features, format_k, read_features_csv, standardize, write_features_csv,
    DatasetMatrix,
};
use mesotext::layout::{fr_layout, render_svg, LayoutConfig};
use mesotext::learn::{
    format_report, frequent_words_features, loocv, pairwise_matrix, pca, silhouette_score,
    write_confusion_csv, write_folds_csv, write_pairwise_csv, ForestParams, SvmParams,
    TrainerSpec,
};
use mesotext::measures::{measure_all, read_table, write_table};
use mesotext::mesonet::{read_edge_list, write_edge_list, write_graphml};
use mesotext::pipeline::{build_book, PipelineConfig};
use mesotext::rng::substream_seed;

use crate::args::CommonArgs;

/// Whether every book made it through the stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOutcome {
    Clean,
    Partial,
}

fn k_stem(k: f64) -> String {
    format!("k{}", format_k(k))
}

fn network_paths(out: &Path, book_id: &str, k: f64) -> (PathBuf, PathBuf) {
    let dir = out.join("networks").join(book_id);
    (
        dir.join(format!("{}.edges", k_stem(k))),
        dir.join(format!("{}.graphml", k_stem(k))),
    )
}

fn measure_paths(out: &Path, book_id: &str, k: f64) -> (PathBuf, PathBuf) {
    let dir = out.join("measures").join(book_id);
    (
        dir.join(format!("{}.csv", k_stem(k))),
        dir.join(format!("{}.scalars", k_stem(k))),
    )
}

/// Fetch and cache every manifest entry.
pub fn cmd_ingest(args: &CommonArgs) -> Result<StageOutcome> {
    let entries = args.manifest_entries()?;
    crate::args::record_config("ingest", args)?;
    let cache = args.cache_dir();
    let results: Vec<(String, std::result::Result<usize, String>)> = entries
        .par_iter()
        .map(|e| {
            let outcome = fetch_text(e, &cache)
                .map(|book| book.body.chars().count())
                .map_err(|err| err.to_string());
            (e.book_id.clone(), outcome)
        })
        .collect();

    let mut log = String::from("book_id,chars\n");
    let mut failures = 0;
    for (book_id, outcome) in &results {
        match outcome {
            Ok(chars) => {
                writeln!(log, "{book_id},{chars}").unwrap();
                println!("ingested {book_id} ({chars} chars)");
            }
            Err(message) => {
                failures += 1;
                log::error!("ingest {book_id}: {message}");
            }
        }
    }
    fs::write(args.out.join("ingest_log.csv"), log)?;
    Ok(if failures == 0 {
        StageOutcome::Clean
    } else {
        StageOutcome::Partial
    })
}

/// Build pruned networks for every book and degree target.
pub fn cmd_build(args: &CommonArgs) -> Result<StageOutcome> {
    let entries = args.manifest_entries()?;
    let lexicon = args.lexicon()?;
    let k_values = args.k_values()?;
    crate::args::record_config("build", args)?;
    let cache = args.cache_dir();
    let config = PipelineConfig {
        delta: args.delta,
        k_values: k_values.clone(),
    };

    struct BuildRow {
        book_id: String,
        paragraphs: usize,
        windows: usize,
        per_k: Vec<(f64, usize, f64)>, // (k, edges, achieved)
    }

    let results: Vec<std::result::Result<BuildRow, String>> = entries
        .par_iter()
        .map(|entry| {
            let run = || -> Result<BuildRow> {
                let book = fetch_text(entry, &cache)?;
                let build = build_book(&entry.book_id, &book.body, &lexicon, &config)?;
                let mut per_k = Vec::new();
                for (k, net) in &build.networks {
                    let (edges_path, graphml_path) = network_paths(&args.out, &entry.book_id, *k);
                    fs::create_dir_all(edges_path.parent().unwrap())?;
                    write_edge_list(net, &edges_path)?;
                    write_graphml(net, &graphml_path)?;
                    per_k.push((*k, net.edge_count(), net.average_degree()));
                }
                Ok(BuildRow {
                    book_id: entry.book_id.clone(),
                    paragraphs: build.paragraph_count,
                    windows: build.window_count,
                    per_k,
                })
            };
            run().map_err(|e| format!("{}: {e:#}", entry.book_id))
        })
        .collect();

    let mut log = String::from("book_id,paragraphs,windows,k,edges,achieved_k\n");
    let mut errors = String::new();
    for result in &results {
        match result {
            Ok(row) => {
                for (k, edges, achieved) in &row.per_k {
                    writeln!(
                        log,
                        "{},{},{},{},{},{}",
                        row.book_id,
                        row.paragraphs,
                        row.windows,
                        format_k(*k),
                        edges,
                        achieved
                    )
                    .unwrap();
                }
                println!(
                    "built {} ({} windows, {} degree targets)",
                    row.book_id,
                    row.windows,
                    row.per_k.len()
                );
            }
            Err(message) => {
                writeln!(errors, "{message}").unwrap();
                log::error!("build {message}");
            }
        }
    }
    fs::write(args.out.join("build_log.csv"), log)?;
    if !errors.is_empty() {
        fs::write(args.out.join("build_errors.log"), &errors)?;
        return Ok(StageOutcome::Partial);
    }
    Ok(StageOutcome::Clean)
}

/// Measure every built network.
pub fn cmd_measure(args: &CommonArgs) -> Result<StageOutcome> {
    let entries = args.manifest_entries()?;
    let k_values = args.k_values()?;
    crate::args::record_config("measure", args)?;

    let jobs: Vec<(String, f64)> = entries
        .iter()
        .flat_map(|e| k_values.iter().map(move |&k| (e.book_id.clone(), k)))
        .collect();
    let failures: Vec<String> = jobs
        .par_iter()
        .filter_map(|(book_id, k)| {
            let run = || -> Result<()> {
                let (edges_path, _) = network_paths(&args.out, book_id, *k);
                let net = read_edge_list(&edges_path).with_context(|| {
                    format!("missing or unreadable network {}", edges_path.display())
                })?;
                let table = measure_all(&net);
                let (csv_path, scalars_path) = measure_paths(&args.out, book_id, *k);
                fs::create_dir_all(csv_path.parent().unwrap())?;
                write_table(&table, &csv_path, &scalars_path)?;
                Ok(())
            };
            run()
                .err()
                .map(|e| format!("{book_id} {}: {e:#}", k_stem(*k)))
        })
        .collect();

    for f in &failures {
        log::error!("measure {f}");
    }
    println!(
        "measured {} networks ({} failures)",
        jobs.len() - failures.len(),
        failures.len()
    );
    Ok(if failures.is_empty() {
        StageOutcome::Clean
    } else {
        StageOutcome::Partial
    })
}

/// Assemble the per-book feature matrix from the measurement tables.
pub fn cmd_features(args: &CommonArgs) -> Result<StageOutcome> {
    let entries = args.manifest_entries()?;
    let k_values = args.k_values()?;
    crate::args::record_config("features", args)?;

    let mut vectors = Vec::new();
    let mut failures = 0;
    for entry in &entries {
        let run = || -> Result<_> {
            let mut tables = Vec::new();
            for &k in &k_values {
                let (csv_path, scalars_path) = measure_paths(&args.out, &entry.book_id, k);
                let table = read_table(&csv_path, &scalars_path).with_context(|| {
                    format!("missing measurements {}", csv_path.display())
                })?;
                tables.push((k, table));
            }
            Ok(book_features(&entry.book_id, &entry.author, &tables)?)
        };
        match run() {
            Ok(v) => vectors.push(v),
            Err(e) => {
                failures += 1;
                log::error!("features {}: {e:#}", entry.book_id);
            }
        }
    }
    if vectors.is_empty() {
        bail!("no book produced a complete feature vector");
    }
    let matrix = assemble_matrix(vectors, &k_values)?;
    write_features_csv(&matrix, &args.out.join("features.csv"))?;
    println!(
        "features.csv: {} books x {} features",
        matrix.len(),
        matrix.feature_names.len()
    );
    Ok(if failures == 0 {
        StageOutcome::Clean
    } else {
        StageOutcome::Partial
    })
}

fn trainers(args: &CommonArgs) -> Vec<(&'static str, TrainerSpec)> {
    let rf = (
        "rf",
        TrainerSpec::RandomForest(ForestParams {
            n_trees: 50,
            seed: args.seed,
        }),
    );
    let svm = ("svm", TrainerSpec::LinearSvm(SvmParams::default()));
    match args.classifier.as_str() {
        "rf" => vec![rf],
        "svm" => vec![svm],
        _ => vec![rf, svm],
    }
}

fn load_features(args: &CommonArgs) -> Result<DatasetMatrix> {
    let path = args.out.join("features.csv");
    read_features_csv(&path)
        .with_context(|| format!("reading {} (run `features` first)", path.display()))
}

/// Per-degree and combined leave-one-out accuracies.
pub fn cmd_classify(args: &CommonArgs) -> Result<StageOutcome> {
    let matrix = load_features(args)?;
    let k_values = args.k_values()?;
    crate::args::record_config("classify", args)?;
    let selected = trainers(args);
    let dir = args.out.join("classify");
    fs::create_dir_all(&dir)?;

    let mut table = String::from("average_degree");
    for (name, _) in &selected {
        write!(table, ",{name}").unwrap();
    }
    table.push('\n');
    let mut report = String::new();

    for &k in &k_values {
        let prefix = format!("{}_", k_stem(k));
        let sub = matrix.filter_columns(|name| name.starts_with(&prefix));
        if sub.feature_names.is_empty() {
            bail!("features.csv has no columns for degree {}", format_k(k));
        }
        write!(table, "{}", format_k(k)).unwrap();
        for (_, trainer) in &selected {
            let eval = loocv(&sub, trainer)?;
            write!(table, ",{:.4}", eval.accuracy).unwrap();
        }
        table.push('\n');
    }

    write!(table, "combined").unwrap();
    for (name, trainer) in &selected {
        let eval = loocv(&matrix, trainer)?;
        write!(table, ",{:.4}", eval.accuracy).unwrap();
        report.push_str(&format_report(
            &eval,
            &format!("combined-degree features, {name}"),
        ));
        report.push('\n');
        write_confusion_csv(&eval, &dir.join(format!("confusion_{name}_combined.csv")))?;
        write_folds_csv(&eval, &dir.join(format!("folds_{name}_combined.csv")))?;
    }
    table.push('\n');

    let chance = 1.0 / matrix.label_set().len() as f64;
    let mut full_report = format!(
        "leave-one-out accuracy by average degree\n\
         books: {}, authors: {}, chance baseline: {chance:.4}\n\n{table}\n{report}",
        matrix.len(),
        matrix.label_set().len()
    );
    if !full_report.ends_with('\n') {
        full_report.push('\n');
    }
    fs::write(dir.join("table.csv"), &table)?;
    fs::write(dir.join("report.txt"), &full_report)?;
    print!("{full_report}");
    Ok(StageOutcome::Clean)
}

/// Pairwise author accuracies: mesoscopic features vs the frequent-words
/// baseline, both evaluated with the SVM.
pub fn cmd_pairwise(args: &CommonArgs, top_words: usize) -> Result<StageOutcome> {
    let matrix = load_features(args)?;
    let entries = args.manifest_entries()?;
    crate::args::record_config("pairwise", args)?;
    let dir = args.out.join("pairwise");
    fs::create_dir_all(&dir)?;
    let svm = TrainerSpec::LinearSvm(SvmParams::default());

    let meso = pairwise_matrix(&matrix, &svm)?;
    write_pairwise_csv(&meso, &dir.join("mesoscopic.csv"))?;

    // baseline runs on the original (cached) texts, not the lemmatized ones
    let cache = args.cache_dir();
    let texts: Result<Vec<(String, String, String)>> = entries
        .iter()
        .map(|e| {
            let book = fetch_text(e, &cache)?;
            Ok((e.book_id.clone(), e.author.clone(), book.body))
        })
        .collect();
    let baseline_features = frequent_words_features(&texts?, top_words)?;
    let baseline = pairwise_matrix(&baseline_features, &svm)?;
    write_pairwise_csv(&baseline, &dir.join("frequent_words.csv"))?;

    println!(
        "pairwise matrices over {} authors written to {}",
        meso.authors.len(),
        dir.display()
    );
    Ok(StageOutcome::Clean)
}

/// 2-D PCA projection of the combined feature matrix.
pub fn cmd_pca(args: &CommonArgs, components: usize) -> Result<StageOutcome> {
    let matrix = load_features(args)?;
    crate::args::record_config("pca", args)?;
    let dir = args.out.join("pca");
    fs::create_dir_all(&dir)?;

    let standardized = standardize(&matrix)?;
    let result = pca(&standardized.rows, components)?;

    let mut csv = String::from("book_id,author");
    for c in 0..components {
        write!(csv, ",pc{}", c + 1).unwrap();
    }
    csv.push('\n');
    for (r, coords) in result.projection.iter().enumerate() {
        write!(csv, "{},{}", standardized.ids[r], standardized.authors[r]).unwrap();
        for v in coords {
            write!(csv, ",{v}").unwrap();
        }
        csv.push('\n');
    }
    fs::write(dir.join("projection.csv"), &csv)?;

    let silhouette = silhouette_score(&result.projection, &standardized.authors);
    let mut report = String::from("principal component analysis\n");
    for (c, ratio) in result.explained_variance_ratio.iter().enumerate() {
        writeln!(report, "explained variance pc{}: {ratio:.4}", c + 1).unwrap();
    }
    writeln!(report, "silhouette score (author labels): {silhouette:.4}").unwrap();
    fs::write(dir.join("report.txt"), &report)?;
    print!("{report}");
    Ok(StageOutcome::Clean)
}

/// Render one book (or every book) at a given degree target.
pub fn cmd_render(
    args: &CommonArgs,
    book: Option<&str>,
    k: f64,
    iterations: usize,
) -> Result<StageOutcome> {
    let entries = args.manifest_entries()?;
    crate::args::record_config("render", args)?;
    let dir = args.out.join("render");
    fs::create_dir_all(&dir)?;

    let selected: Vec<&ManifestEntry> = match book {
        Some(id) => {
            let entry = entries
                .iter()
                .find(|e| e.book_id == id)
                .with_context(|| format!("book `{id}` is not in the manifest"))?;
            vec![entry]
        }
        None => entries.iter().collect(),
    };

    let mut failures = 0;
    for entry in &selected {
        let (edges_path, _) = network_paths(&args.out, &entry.book_id, k);
        if !edges_path.exists() {
            let message = format!(
                "network {} has not been built (expected {})",
                entry.book_id,
                edges_path.display()
            );
            if book.is_some() {
                bail!(message);
            }
            failures += 1;
            log::error!("render {message}");
            continue;
        }
        let net = read_edge_list(&edges_path)?;
        let config = LayoutConfig {
            iterations,
            seed: substream_seed(
                args.seed,
                "layout",
                &[mesotext::rng::fnv1a64(entry.book_id.as_bytes())],
            ),
            ..LayoutConfig::default()
        };
        let embedding = fr_layout(&net, &config);
        let svg = render_svg(&net, &embedding)?;
        let path = dir.join(format!("{}_{}.svg", entry.book_id, k_stem(k)));
        fs::write(&path, svg)?;
        println!("rendered {}", path.display());
    }
    Ok(if failures == 0 {
        StageOutcome::Clean
    } else {
        StageOutcome::Partial
    })
}

/// Generate the synthetic demonstration corpus.
pub fn cmd_synth(out: &Path, seed: u64, books_per_author: usize) -> Result<StageOutcome> {
    let books = mesotext::synth::four_author_corpus(seed, books_per_author);
    let manifest = mesotext::synth::write_corpus_dir(&books, &out.join("corpus"))?;
    println!(
        "wrote {} books and manifest {}",
        books.len(),
        manifest.display()
    );
    Ok(StageOutcome::Clean)
}
