//! Paragraph segmentation, preprocessing, and sliding-window construction.
//!
//! A book body is split into paragraphs on blank lines, tokenized into
//! lowercase alphabetic runs, stripped of stopwords, lemmatized through a
//! lookup table, and finally covered by overlapping windows of `delta`
//! consecutive paragraphs. Each window later becomes one network node.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// Interned term identifier. Valid only within the [`Vocab`] that issued it.
pub type TermId = u32;

/// String interner for lemmas of a single book.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    terms: Vec<String>,
    index: HashMap<String, TermId>,
}

impl Vocab {
    pub fn intern(&mut self, term: &str) -> TermId {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len() as TermId;
        self.terms.push(term.to_string());
        self.index.insert(term.to_string(), id);
        id
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn lookup(&self, term: &str) -> Option<TermId> {
        self.index.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A book as an ordered list of paragraphs of preprocessed lemmas.
#[derive(Debug, Clone)]
pub struct TokenizedText {
    pub book_id: String,
    /// Paragraph order is preserved from the source; empty paragraphs are
    /// dropped during preprocessing.
    pub paragraphs: Vec<Vec<String>>,
}

impl TokenizedText {
    pub fn paragraph_count(&self) -> usize {
        self.paragraphs.len()
    }
}

/// A node candidate: `delta` consecutive paragraphs flattened to a term list.
#[derive(Debug, Clone)]
pub struct Window {
    /// Starting paragraph index, 0-based.
    pub index: usize,
    pub delta: usize,
    /// Concatenated terms of the covered paragraphs, in text order.
    pub terms: Vec<TermId>,
}

/// All windows of a book plus the vocabulary their term ids refer to.
#[derive(Debug, Clone)]
pub struct WindowSet {
    pub book_id: String,
    pub delta: usize,
    pub vocab: Vocab,
    pub windows: Vec<Window>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Terms of window `i` as strings (test and debug helper).
    pub fn window_terms(&self, i: usize) -> Vec<&str> {
        self.windows[i]
            .terms
            .iter()
            .map(|&id| self.vocab.term(id))
            .collect()
    }
}

/// Split a body into raw paragraph strings.
///
/// Paragraphs are separated by one or more blank lines; hard-wrapped lines
/// within a paragraph are joined with single spaces; empty paragraphs are
/// dropped.
pub fn segment_paragraphs(body: &str) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in body.lines() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                paragraphs.push(current.join(" "));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        paragraphs.push(current.join(" "));
    }
    paragraphs
}

/// Tokenize into lowercase maximal alphabetic runs.
///
/// Apostrophes (straight or typographic) are kept when flanked by alphabetic
/// characters on both sides, so contractions survive as single tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphabetic() {
            current.push(c);
        } else if (c == '\'' || c == '\u{2019}')
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(current.to_lowercase());
            current = String::new();
        }
    }
    if !current.is_empty() {
        tokens.push(current.to_lowercase());
    }
    tokens
}

/// Stopword removal followed by table lemmatization.
///
/// Stopwords are removed *before* lemmatization; remaining tokens are mapped
/// through `lemmas` with identity fallback. Paragraphs that end up empty are
/// dropped and the remaining ones reindexed.
pub fn preprocess(
    book_id: &str,
    paragraphs: &[String],
    stopwords: &HashSet<String>,
    lemmas: &HashMap<String, String>,
) -> TokenizedText {
    let cleaned = paragraphs
        .iter()
        .map(|p| {
            tokenize(p)
                .into_iter()
                .filter(|tok| !stopwords.contains(tok))
                .map(|tok| match lemmas.get(&tok) {
                    Some(lemma) => lemma.clone(),
                    None => tok,
                })
                .collect::<Vec<String>>()
        })
        .filter(|p| !p.is_empty())
        .collect();
    TokenizedText {
        book_id: book_id.to_string(),
        paragraphs: cleaned,
    }
}

/// Build all overlapping windows of `delta` consecutive paragraphs, stride 1.
///
/// For `P` paragraphs this yields exactly `P - delta + 1` windows with
/// indices `0..=P-delta`.
pub fn build_windows(text: &TokenizedText, delta: usize) -> Result<WindowSet> {
    assert!(delta >= 1, "delta must be at least 1");
    let p = text.paragraphs.len();
    if p < delta {
        return Err(Error::TooFewParagraphs {
            have: p,
            need: delta,
        });
    }
    let mut vocab = Vocab::default();
    let interned: Vec<Vec<TermId>> = text
        .paragraphs
        .iter()
        .map(|par| par.iter().map(|t| vocab.intern(t)).collect())
        .collect();
    let windows = (0..=p - delta)
        .map(|i| {
            let terms = interned[i..i + delta].iter().flatten().copied().collect();
            Window {
                index: i,
                delta,
                terms,
            }
        })
        .collect();
    Ok(WindowSet {
        book_id: text.book_id.clone(),
        delta,
        vocab,
        windows,
    })
}

/// Stopword list and lemma lookup table.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub stopwords: HashSet<String>,
    pub lemmas: HashMap<String, String>,
}

impl Lexicon {
    /// The bundled English stopword list and lemma table.
    pub fn bundled_english() -> Self {
        let stopwords = parse_stopwords(include_str!("../data/stopwords_en.txt"));
        let lemmas = parse_lemmas(include_str!("../data/lemmas_en.tsv"))
            .expect("bundled lemma table is well-formed");
        Lexicon { stopwords, lemmas }
    }

    /// Bundled defaults with optional per-file overrides.
    pub fn with_overrides(
        stopword_path: Option<&Path>,
        lemma_path: Option<&Path>,
    ) -> Result<Self> {
        let mut lex = Self::bundled_english();
        if let Some(path) = stopword_path {
            lex.stopwords = parse_stopwords(&fs::read_to_string(path)?);
        }
        if let Some(path) = lemma_path {
            lex.lemmas = parse_lemmas(&fs::read_to_string(path)?)?;
        }
        Ok(lex)
    }
}

/// One lowercase word per line; blank lines and `#` comments ignored.
fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

/// `inflected<TAB>lemma` per line; blank lines and `#` comments ignored.
fn parse_lemmas(text: &str) -> Result<HashMap<String, String>> {
    let mut table = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next()) {
            (Some(inflected), Some(lemma)) if !inflected.is_empty() && !lemma.is_empty() => {
                table.insert(inflected.to_lowercase(), lemma.to_lowercase());
            }
            _ => {
                return Err(Error::ManifestParse {
                    line: lineno + 1,
                    message: "expected `inflected<TAB>lemma`".to_string(),
                })
            }
        }
    }
    Ok(table)
}
