//! Dataset manifests, text fetching with an on-disk cache, and Project
//! Gutenberg boilerplate stripping.
//!
//! A manifest is a CSV with header `book_id,author,title,source` (an
//! optional trailing `language` column defaults to `en`). A source is a
//! local path, or a URL when it starts with `http://` or `https://`.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use crate::{Error, Result};

/// Where a book's text comes from. Exactly one source per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Url(String),
    Path(PathBuf),
}

impl Source {
    fn parse(raw: &str) -> Source {
        if raw.starts_with("http://") || raw.starts_with("https://") {
            Source::Url(raw.to_string())
        } else {
            Source::Path(PathBuf::from(raw))
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Source::Url(u) => u.clone(),
            Source::Path(p) => p.display().to_string(),
        }
    }
}

/// One dataset row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub book_id: String,
    pub author: String,
    pub title: String,
    pub source: Source,
    pub language: String,
}

/// A fetched book: manifest entry plus the boilerplate-stripped body.
#[derive(Debug, Clone)]
pub struct RawBook {
    pub manifest: ManifestEntry,
    pub body: String,
    pub fetched_at: SystemTime,
}

/// Load a manifest, preserving file order. Duplicate book ids and empty
/// authors are rejected.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let parse_err = |line: usize, message: String| Error::ManifestParse { line, message };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(0, e.to_string()))?;
    {
        let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != ["book_id", "author", "title", "source"]
            && got != ["book_id", "author", "title", "source", "language"]
        {
            return Err(parse_err(
                1,
                format!("expected header `book_id,author,title,source[,language]`, got `{}`", got.join(",")),
            ));
        }
    }

    let mut entries = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(0);
        if record.len() < 4 {
            return Err(parse_err(line, "expected at least 4 fields".to_string()));
        }
        let book_id = record[0].to_string();
        if book_id.is_empty() {
            return Err(parse_err(line, "empty book_id".to_string()));
        }
        if !seen.insert(book_id.clone()) {
            return Err(Error::DuplicateBookId { id: book_id });
        }
        let author = record[1].to_string();
        if author.is_empty() {
            return Err(parse_err(line, "empty author".to_string()));
        }
        entries.push(ManifestEntry {
            book_id,
            author,
            title: record[2].to_string(),
            source: Source::parse(&record[3]),
            language: record
                .get(4)
                .filter(|l| !l.is_empty())
                .unwrap_or("en")
                .to_string(),
        });
    }
    Ok(entries)
}

/// Write entries back out in manifest format.
pub fn write_manifest(entries: &[ManifestEntry], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["book_id", "author", "title", "source", "language"])
        ?;
    for e in entries {
        w.write_record([
            &e.book_id,
            &e.author,
            &e.title,
            &e.source.describe(),
            &e.language,
        ])
        ?;
    }
    w.flush()?;
    Ok(())
}

fn cache_path(cache_dir: &Path, book_id: &str) -> PathBuf {
    cache_dir.join(format!("{book_id}.txt"))
}

/// Fetch a book's text, caching the raw bytes under `cache_dir/<book_id>.txt`.
/// A warm cache short-circuits the source entirely. The returned body has
/// Gutenberg boilerplate stripped; empty bodies (before or after stripping)
/// are rejected.
pub fn fetch_text(entry: &ManifestEntry, cache_dir: &Path) -> Result<RawBook> {
    let cached = cache_path(cache_dir, &entry.book_id);
    let raw = if cached.exists() {
        fs::read_to_string(&cached)?
    } else {
        let raw = match &entry.source {
            Source::Path(path) => fs::read_to_string(path).map_err(|e| Error::Fetch {
                source_desc: path.display().to_string(),
                message: e.to_string(),
            })?,
            Source::Url(url) => {
                let response = ureq::get(url).call().map_err(|e| Error::Fetch {
                    source_desc: url.clone(),
                    message: e.to_string(),
                })?;
                response.into_string().map_err(|e| Error::Fetch {
                    source_desc: url.clone(),
                    message: e.to_string(),
                })?
            }
        };
        if raw.trim().is_empty() {
            return Err(Error::EmptyBody {
                id: entry.book_id.clone(),
            });
        }
        fs::create_dir_all(cache_dir)?;
        atomic_write(&cached, raw.as_bytes())?;
        raw
    };
    if raw.trim().is_empty() {
        return Err(Error::EmptyBody {
            id: entry.book_id.clone(),
        });
    }
    let body = strip_boilerplate(&raw);
    if body.is_empty() {
        return Err(Error::EmptyBody {
            id: entry.book_id.clone(),
        });
    }
    Ok(RawBook {
        manifest: entry.clone(),
        body,
        fetched_at: SystemTime::now(),
    })
}

/// Write-temp-then-rename so concurrent fetches never expose partial files.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("txt.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn is_start_sentinel(line: &str) -> bool {
    let upper = line.to_uppercase();
    upper.contains("START OF") && upper.contains("PROJECT GUTENBERG")
}

fn is_end_sentinel(line: &str) -> bool {
    let upper = line.to_uppercase();
    upper.contains("END OF") && upper.contains("PROJECT GUTENBERG")
}

/// Cut the text between the standard Gutenberg `*** START OF ... ***` and
/// `*** END OF ... ***` sentinel lines, using the outermost pair (first
/// start, last end). Sentinels are matched case-insensitively. Without both
/// sentinels the input passes through unchanged, with a warning. The result
/// is trimmed.
pub fn strip_boilerplate(raw_text: &str) -> String {
    let lines: Vec<&str> = raw_text.lines().collect();
    let start = lines.iter().position(|l| is_start_sentinel(l));
    let end = lines.iter().rposition(|l| is_end_sentinel(l));
    match (start, end) {
        (Some(s), Some(e)) if s < e => lines[s + 1..e].join("\n").trim().to_string(),
        _ => {
            log::warn!("no Gutenberg sentinels found; text passed through unchanged");
            raw_text.trim().to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn manifest_preserves_order_and_parses_sources() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "manifest.csv",
            "book_id,author,title,source\n\
             b1,Alice Ames,\"First, A Tale\",books/b1.txt\n\
             b2,Bob Byrd,Second,https://example.org/b2.txt\n",
        );
        let entries = load_manifest(&path).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].book_id, "b1");
        assert_eq!(entries[0].title, "First, A Tale");
        assert_eq!(entries[0].source, Source::Path(PathBuf::from("books/b1.txt")));
        assert_eq!(entries[1].source, Source::Url("https://example.org/b2.txt".into()));
        assert_eq!(entries[0].language, "en");
    }

    #[test]
    fn manifest_rejects_duplicate_ids() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "manifest.csv",
            "book_id,author,title,source\nb1,A,T,x.txt\nb1,B,U,y.txt\n",
        );
        match load_manifest(&path) {
            Err(Error::DuplicateBookId { id }) => assert_eq!(id, "b1"),
            other => panic!("expected DuplicateBookId, got {other:?}"),
        }
    }

    #[test]
    fn manifest_parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "manifest.csv",
            "book_id,author,title,source\nb1,A,T,x.txt\nb2,,T,y.txt\n",
        );
        match load_manifest(&path) {
            Err(Error::ManifestParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected ManifestParse, got {other:?}"),
        }
    }

    #[test]
    fn manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let entries = vec![ManifestEntry {
            book_id: "b1".into(),
            author: "A, Author".into(),
            title: "T".into(),
            source: Source::Url("https://example.org/x.txt".into()),
            language: "en".into(),
        }];
        let path = dir.path().join("m.csv");
        write_manifest(&entries, &path).unwrap();
        assert_eq!(load_manifest(&path).unwrap(), entries);
    }

    fn entry_for(path: &Path) -> ManifestEntry {
        ManifestEntry {
            book_id: "b1".into(),
            author: "A".into(),
            title: "T".into(),
            source: Source::Path(path.to_path_buf()),
            language: "en".into(),
        }
    }

    #[test]
    fn fetch_reads_local_files_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        let body = "word ".repeat(2048);
        let source = write_file(dir.path(), "src.txt", &body);
        let cache = dir.path().join("cache");
        let entry = entry_for(&source);

        let book = fetch_text(&entry, &cache).unwrap();
        assert_eq!(book.body, body.trim());
        assert!(cache.join("b1.txt").exists());

        // warm cache: the original file may disappear, the body is identical
        fs::remove_file(&source).unwrap();
        let again = fetch_text(&entry, &cache).unwrap();
        assert_eq!(again.body, book.body);
    }

    #[test]
    fn fetch_with_warm_cache_ignores_unreachable_urls() {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache");
        fs::create_dir_all(&cache).unwrap();
        fs::write(cache.join("b1.txt"), "cached body text").unwrap();
        let entry = ManifestEntry {
            book_id: "b1".into(),
            author: "A".into(),
            title: "T".into(),
            source: Source::Url("https://invalid.invalid/nowhere.txt".into()),
            language: "en".into(),
        };
        let book = fetch_text(&entry, &cache).unwrap();
        assert_eq!(book.body, "cached body text");
    }

    #[test]
    fn fetch_rejects_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let source = write_file(dir.path(), "empty.txt", "");
        let cache = dir.path().join("cache");
        match fetch_text(&entry_for(&source), &cache) {
            Err(Error::EmptyBody { id }) => assert_eq!(id, "b1"),
            other => panic!("expected EmptyBody, got {other:?}"),
        }
    }

    #[test]
    fn strip_cuts_between_sentinels() {
        let text = "header junk\n\
                    *** START OF THE PROJECT GUTENBERG EBOOK EXAMPLE ***\n\
                    the story\nbody lines\n\
                    *** END OF THE PROJECT GUTENBERG EBOOK EXAMPLE ***\n\
                    license junk";
        assert_eq!(strip_boilerplate(text), "the story\nbody lines");
    }

    #[test]
    fn strip_passes_through_without_sentinels() {
        assert_eq!(strip_boilerplate("  plain text  "), "plain text");
    }

    #[test]
    fn strip_uses_outermost_pair_when_sentinels_repeat() {
        // fixture with a doubled start line: the outermost pair wins and the
        // leftover inner sentinel no longer forms a pair
        let text = "*** START OF THE PROJECT GUTENBERG EBOOK ***\n\
                    *** START OF THE PROJECT GUTENBERG EBOOK (DUPLICATE) ***\n\
                    kept interior\n\
                    *** END OF THE PROJECT GUTENBERG EBOOK ***";
        let once = strip_boilerplate(text);
        assert_eq!(
            once,
            "*** START OF THE PROJECT GUTENBERG EBOOK (DUPLICATE) ***\nkept interior"
        );
        assert_eq!(strip_boilerplate(&once), once, "idempotent on the result");
    }

    #[test]
    fn strip_is_idempotent_on_clean_and_plain_texts() {
        let stripped = strip_boilerplate(
            "x\n*** start of the project gutenberg ebook ***\ninterior\n*** end of the project gutenberg ebook ***\ny",
        );
        assert_eq!(strip_boilerplate(&stripped), stripped);
        let plain = strip_boilerplate("no sentinels here");
        assert_eq!(strip_boilerplate(&plain), plain);
    }
}
