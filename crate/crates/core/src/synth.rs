//! Deterministic synthetic corpus generator.
//!
//! Produces small "books" whose paragraph-level topic flow follows one of
//! four structural styles, so the full pipeline can be exercised and
//! demonstrated without network access to a real corpus:
//!
//! - `episodic` — independent episodes with fresh vocabulary, like a
//!   collection of short tales; yields chain-of-blocks networks.
//! - `cyclic` — a narrative that returns to its opening topics near the
//!   end; yields ring-like networks.
//! - `treatise` — a single slowly drifting subject with a large shared
//!   technical vocabulary; yields dense, tangled networks.
//! - `braided` — several interleaved plot threads; yields networks with
//!   long-range cross connections.
//!
//! Everything is a pure function of the seed.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_manifest, ManifestEntry, Source};
use crate::rng::substream;
use crate::Result;

/// One generated book.
#[derive(Debug, Clone)]
pub struct SynthBook {
    pub book_id: String,
    pub author: String,
    pub title: String,
    pub body: String,
}

struct Style {
    name: &'static str,
    segments: (usize, usize),
    segment_len: (usize, usize),
    para_len: (usize, usize),
    /// Probability a token comes from the book-wide vocabulary.
    global_rate: f64,
    /// Fraction of a topic's vocabulary shared with the previous topic.
    topic_overlap: f64,
    /// Reuse the opening topic for the final segment.
    cyclic: bool,
    /// Number of interleaved threads (1 = none).
    braids: usize,
}

const STYLES: [Style; 4] = [
    Style {
        name: "episodic",
        segments: (10, 14),
        segment_len: (12, 16),
        para_len: (16, 26),
        global_rate: 0.08,
        topic_overlap: 0.05,
        cyclic: false,
        braids: 1,
    },
    Style {
        name: "cyclic",
        segments: (8, 10),
        segment_len: (16, 20),
        para_len: (16, 26),
        global_rate: 0.18,
        topic_overlap: 0.35,
        cyclic: true,
        braids: 1,
    },
    Style {
        name: "treatise",
        segments: (5, 7),
        segment_len: (24, 30),
        para_len: (18, 30),
        global_rate: 0.40,
        topic_overlap: 0.65,
        cyclic: false,
        braids: 1,
    },
    Style {
        name: "braided",
        segments: (36, 44),
        segment_len: (3, 5),
        para_len: (16, 26),
        global_rate: 0.15,
        topic_overlap: 0.10,
        cyclic: false,
        braids: 3,
    },
];

const SYLLABLES: [&str; 36] = [
    "va", "zel", "mor", "tik", "run", "pla", "gos", "bri", "dun", "fel", "hax", "jor", "kiv",
    "lum", "nar", "pex", "quil", "rov", "sil", "tor", "vub", "wem", "xat", "yol", "zur", "bla",
    "cren", "drim", "fos", "grat", "hul", "jin", "klo", "mev", "nox", "pru",
];

fn make_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(2..=3);
    (0..n)
        .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
        .collect()
}

fn make_vocab(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut vocab = Vec::with_capacity(size);
    while vocab.len() < size {
        let w = make_word(rng);
        if !vocab.contains(&w) {
            vocab.push(w);
        }
    }
    vocab
}

/// Zipf-ish sampling: weight of rank `i` is `1 / (i + 1)^0.9`.
fn zipf_pick<'a>(rng: &mut ChaCha8Rng, vocab: &'a [String]) -> &'a str {
    let total: f64 = (0..vocab.len()).map(|i| 1.0 / (i as f64 + 1.0).powf(0.9)).sum();
    let mut target = rng.gen_range(0.0..total);
    for (i, w) in vocab.iter().enumerate() {
        target -= 1.0 / (i as f64 + 1.0).powf(0.9);
        if target <= 0.0 {
            return w;
        }
    }
    &vocab[vocab.len() - 1]
}

fn hard_wrap(words: &[String], width: usize) -> String {
    let mut lines = Vec::new();
    let mut line = String::new();
    for w in words {
        if !line.is_empty() && line.len() + 1 + w.len() > width {
            lines.push(std::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(w);
    }
    if !line.is_empty() {
        lines.push(line);
    }
    lines.join("\n")
}

fn generate_book(style: &Style, author_ix: usize, book_ix: usize, seed: u64) -> SynthBook {
    let mut rng = substream(seed, "synth-book", &[author_ix as u64, book_ix as u64]);

    let global = make_vocab(&mut rng, 100);
    let n_segments = rng.gen_range(style.segments.0..=style.segments.1);
    let n_topics = if style.braids > 1 {
        style.braids
    } else {
        n_segments
    };

    // topic vocabularies, each sharing a slice with its predecessor
    let topic_size = 70;
    let shared = (style.topic_overlap * topic_size as f64) as usize;
    let mut topics: Vec<Vec<String>> = Vec::with_capacity(n_topics);
    for t in 0..n_topics {
        let mut vocab = Vec::with_capacity(topic_size);
        if t > 0 {
            vocab.extend_from_slice(&topics[t - 1][..shared]);
        }
        let fresh = make_vocab(&mut rng, topic_size - vocab.len());
        vocab.extend(fresh);
        topics.push(vocab);
    }

    // per-paragraph topic assignment
    let mut topic_of: Vec<usize> = Vec::new();
    for s in 0..n_segments {
        let len = rng.gen_range(style.segment_len.0..=style.segment_len.1);
        let topic = if style.braids > 1 {
            s % style.braids
        } else if style.cyclic && s == n_segments - 1 {
            0
        } else {
            s
        };
        topic_of.extend(std::iter::repeat(topic).take(len));
    }

    let paragraphs: Vec<String> = topic_of
        .iter()
        .map(|&topic| {
            let len = rng.gen_range(style.para_len.0..=style.para_len.1);
            let words: Vec<String> = (0..len)
                .map(|_| {
                    if rng.gen_range(0.0..1.0) < style.global_rate {
                        zipf_pick(&mut rng, &global).to_string()
                    } else {
                        zipf_pick(&mut rng, &topics[topic]).to_string()
                    }
                })
                .collect();
            let mut text = hard_wrap(&words, 72);
            text.push('.');
            if let Some(first) = text.get(0..1) {
                text.replace_range(0..1, &first.to_uppercase());
            }
            text
        })
        .collect();

    SynthBook {
        book_id: format!("{}-{}", style.name, book_ix + 1),
        author: style.name.to_string(),
        title: format!("{} volume {}", style.name, book_ix + 1),
        body: paragraphs.join("\n\n"),
    }
}

/// Generate `books_per_author` books for each of the four styles.
pub fn four_author_corpus(seed: u64, books_per_author: usize) -> Vec<SynthBook> {
    let mut books = Vec::new();
    for (author_ix, style) in STYLES.iter().enumerate() {
        for book_ix in 0..books_per_author {
            books.push(generate_book(style, author_ix, book_ix, seed));
        }
    }
    books
}

/// Materialize a generated corpus as text files plus a `manifest.csv`;
/// returns the manifest path. Files are wrapped in Gutenberg-style
/// boilerplate so ingestion exercises the stripping path; fetching them
/// recovers the clean body.
pub fn write_corpus_dir(books: &[SynthBook], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for book in books {
        let file = dir.join(format!("{}.txt", book.book_id));
        let wrapped = format!(
            "Synthetic corpus file for {title}.\n\n\
             *** START OF THE PROJECT GUTENBERG EBOOK {upper} ***\n\n{body}\n\n\
             *** END OF THE PROJECT GUTENBERG EBOOK {upper} ***\n\nfooter notes\n",
            title = book.title,
            upper = book.title.to_uppercase(),
            body = book.body,
        );
        std::fs::write(&file, wrapped)?;
        entries.push(ManifestEntry {
            book_id: book.book_id.clone(),
            author: book.author.clone(),
            title: book.title.clone(),
            source: Source::Path(file),
            language: "en".to_string(),
        });
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&entries, &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::segment_paragraphs;

    #[test]
    fn corpus_is_deterministic() {
        let a = four_author_corpus(7, 2);
        let b = four_author_corpus(7, 2);
        assert_eq!(a.len(), 8);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.book_id, y.book_id);
            assert_eq!(x.body, y.body);
        }
        let c = four_author_corpus(8, 2);
        assert_ne!(a[0].body, c[0].body);
    }

    #[test]
    fn books_are_long_enough_for_default_windows() {
        for book in four_author_corpus(1, 5) {
            let paragraphs = segment_paragraphs(&book.body);
            assert!(
                paragraphs.len() >= 71,
                "{} has only {} paragraphs",
                book.book_id,
                paragraphs.len()
            );
        }
    }

    #[test]
    fn corpus_dir_round_trips_through_fetch() {
        let dir = tempfile::tempdir().unwrap();
        let books = four_author_corpus(3, 1);
        let manifest = write_corpus_dir(&books, dir.path()).unwrap();
        let entries = crate::corpus::load_manifest(&manifest).unwrap();
        assert_eq!(entries.len(), 4);
        for (e, original) in entries.iter().zip(&books) {
            // fetching strips the Gutenberg-style wrapper back off
            let book = crate::corpus::fetch_text(e, &dir.path().join("cache")).unwrap();
            assert_eq!(book.body, original.body);
        }
    }
}
