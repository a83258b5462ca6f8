//! `mesotext`: build mesoscopic similarity networks from book texts and run
//! authorship-attribution experiments on them.
//!
//! Stages write into (and read from) a shared output directory, so a full
//! experiment is a sequence of subcommands:
//!
//! ```text
//! mesotext synth    --out run            # or bring your own manifest
//! mesotext ingest   --out run --manifest run/corpus/manifest.csv
//! mesotext build    --out run --manifest run/corpus/manifest.csv
//! mesotext measure  --out run --manifest run/corpus/manifest.csv
//! mesotext features --out run --manifest run/corpus/manifest.csv
//! mesotext classify --out run
//! mesotext pairwise --out run --manifest run/corpus/manifest.csv
//! mesotext pca      --out run
//! mesotext render   --out run --manifest run/corpus/manifest.csv --k 10
//! ```
//!
//! Exit codes: 0 success, 1 partial failure (some books skipped), 2
//! configuration error.

mod args;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::CommonArgs;
use stages::StageOutcome;

#[derive(Parser)]
#[command(name = "mesotext", version, about = "Mesoscopic text networks for authorship analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic corpus (four structural styles).
    Synth {
        /// Output directory; books land in `<out>/corpus`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        books_per_author: usize,
    },
    /// Fetch and cache every book in the manifest.
    Ingest {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build pruned mesoscopic networks for every book and degree target.
    Build {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compute topological measurements of the built networks.
    Measure {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Assemble the per-book feature matrix.
    Features {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Leave-one-out accuracies per degree target and combined.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Pairwise author accuracies, mesoscopic vs frequent-words baseline.
    Pairwise {
        #[command(flatten)]
        common: CommonArgs,
        /// Vocabulary size of the frequent-words baseline.
        #[arg(long, default_value_t = 20)]
        top_words: usize,
    },
    /// PCA projection of the combined feature matrix.
    Pca {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 2)]
        components: usize,
    },
    /// Render networks as SVG with narrative-order coloring.
    Render {
        #[command(flatten)]
        common: CommonArgs,
        /// Render a single book instead of the whole manifest.
        #[arg(long)]
        book: Option<String>,
        /// Degree target of the network to draw.
        #[arg(long, default_value_t = 10.0)]
        k: f64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
    },
}

fn jobs_of(command: &Command) -> Option<usize> {
    match command {
        Command::Synth { .. } => None,
        Command::Ingest { common }
        | Command::Build { common }
        | Command::Measure { common }
        | Command::Features { common }
        | Command::Classify { common }
        | Command::Pairwise { common, .. }
        | Command::Pca { common, .. }
        | Command::Render { common, .. } => common.jobs,
    }
}

fn run(command: &Command) -> anyhow::Result<StageOutcome> {
    match command {
        Command::Synth {
            out,
            seed,
            books_per_author,
        } => stages::cmd_synth(out, *seed, *books_per_author),
        Command::Ingest { common } => stages::cmd_ingest(common),
        Command::Build { common } => stages::cmd_build(common),
        Command::Measure { common } => stages::cmd_measure(common),
        Command::Features { common } => stages::cmd_features(common),
        Command::Classify { common } => stages::cmd_classify(common),
        Command::Pairwise { common, top_words } => stages::cmd_pairwise(common, *top_words),
        Command::Pca { common, components } => stages::cmd_pca(common, *components),
        Command::Render {
            common,
            book,
            k,
            iterations,
        } => stages::cmd_render(common, book.as_deref(), *k, *iterations),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = jobs_of(&cli.command) {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: could not configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli.command) {
        Ok(StageOutcome::Clean) => ExitCode::SUCCESS,
        Ok(StageOutcome::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
