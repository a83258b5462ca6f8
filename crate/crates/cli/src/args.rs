//! Command-line options shared across pipeline stages, plus the resolved
//! run configuration that gets copied into every output directory.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;
use serde::Serialize;

/// Options common to the pipeline stages.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Dataset manifest (CSV: book_id,author,title,source).
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Output directory; stages read their inputs from here too.
    #[arg(long)]
    pub out: PathBuf,

    /// Window size in paragraphs.
    #[arg(long, default_value_t = 20)]
    pub delta: usize,

    /// Average-degree sweep: `start:stop:step` or a comma list.
    #[arg(long, default_value = "5:50:5")]
    pub k_list: String,

    /// Classifier selection for evaluation stages.
    #[arg(long, default_value = "both", value_parser = ["svm", "rf", "both"])]
    pub classifier: String,

    /// Master seed; all randomness derives from it via named substreams.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Stopword list override (one word per line).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,

    /// Lemma table override (`inflected<TAB>lemma` per line).
    #[arg(long)]
    pub lemmas: Option<PathBuf>,

    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    pub fn k_values(&self) -> anyhow::Result<Vec<f64>> {
        parse_k_list(&self.k_list)
    }

    pub fn cache_dir(&self) -> PathBuf {
        std::env::var_os("MESOTEXT_CACHE")
            .map(PathBuf::from)
            .unwrap_or_else(|| self.out.join("cache"))
    }

    pub fn lexicon(&self) -> anyhow::Result<mesotext::textproc::Lexicon> {
        mesotext::textproc::Lexicon::with_overrides(
            self.stopwords.as_deref(),
            self.lemmas.as_deref(),
        )
        .context("loading stopword/lemma tables")
    }

    pub fn manifest_entries(&self) -> anyhow::Result<Vec<mesotext::corpus::ManifestEntry>> {
        let path = self
            .manifest
            .as_deref()
            .context("--manifest is required for this stage")?;
        mesotext::corpus::load_manifest(path)
            .with_context(|| format!("loading manifest {}", path.display()))
    }
}

/// Parse `5:50:5` (inclusive range) or `5,10,25`.
pub fn parse_k_list(spec: &str) -> anyhow::Result<Vec<f64>> {
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("bad --k-list `{spec}`: expected start:stop:step");
        }
        let start: f64 = parts[0].parse().context("bad k-list start")?;
        let stop: f64 = parts[1].parse().context("bad k-list stop")?;
        let step: f64 = parts[2].parse().context("bad k-list step")?;
        if step <= 0.0 || stop < start {
            bail!("bad --k-list `{spec}`: need step > 0 and stop >= start");
        }
        let mut values = Vec::new();
        let mut k = start;
        while k <= stop + 1e-9 {
            values.push(k);
            k += step;
        }
        values
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad --k-list `{spec}`"))?
    };
    if values.is_empty() {
        bail!("--k-list is empty");
    }
    if values.iter().any(|k| *k <= 0.0) {
        bail!("--k-list values must be positive");
    }
    Ok(values)
}

/// Resolved configuration snapshot, written as JSON into the output
/// directory by every stage for auditability.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a> {
    pub stage: &'a str,
    pub manifest: Option<String>,
    pub delta: usize,
    pub k_values: Vec<f64>,
    pub classifier: &'a str,
    pub seed: u64,
    pub out: String,
    pub stopwords: Option<String>,
    pub lemmas: Option<String>,
    pub jobs: Option<usize>,
}

pub fn record_config(stage: &str, args: &CommonArgs) -> anyhow::Result<()> {
    let config = RunConfig {
        stage,
        manifest: args.manifest.as_ref().map(|p| p.display().to_string()),
        delta: args.delta,
        k_values: args.k_values()?,
        classifier: &args.classifier,
        seed: args.seed,
        out: args.out.display().to_string(),
        stopwords: args.stopwords.as_ref().map(|p| p.display().to_string()),
        lemmas: args.lemmas.as_ref().map(|p| p.display().to_string()),
        jobs: args.jobs,
    };
    let dir = args.out.join("config");
    std::fs::create_dir_all(&dir)?;
    let json = serde_json::to_string_pretty(&config)?;
    std::fs::write(dir.join(format!("{stage}.json")), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_list_range_and_commas() {
        assert_eq!(
            parse_k_list("5:50:5").unwrap(),
            (1..=10).map(|m| 5.0 * m as f64).collect::<Vec<f64>>()
        );
        assert_eq!(parse_k_list("5,7.5,10").unwrap(), vec![5.0, 7.5, 10.0]);
        assert!(parse_k_list("5:50").is_err());
        assert!(parse_k_list("0,5").is_err());
        assert!(parse_k_list("").is_err());
    }
}
