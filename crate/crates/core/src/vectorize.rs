//! tf-idf weighting of windows and cosine similarity between them.
//!
//! The window collection of a single book is the document set: for a term
//! `w` in window `d`, weight = (count of w in d / window length) * ln(|D| /
//! number of windows containing w). Terms occurring in every window carry
//! weight zero and are not stored.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::textproc::{TermId, WindowSet};
use crate::{Error, Result};

/// Sparse term-weight map of one window. Entries are sorted by term id,
/// contain no zeros, and cache the L2 norm.
#[derive(Debug, Clone)]
pub struct TermWeightVector {
    pub window_index: usize,
    entries: Vec<(TermId, f64)>,
    norm: f64,
}

impl TermWeightVector {
    /// Build from raw `(term, weight)` pairs: sorts by term id, drops zero
    /// weights, and caches the norm. Weights must be finite and non-negative.
    pub fn new(window_index: usize, mut entries: Vec<(TermId, f64)>) -> Self {
        entries.retain(|&(_, w)| w != 0.0);
        entries.sort_unstable_by_key(|&(t, _)| t);
        debug_assert!(entries.iter().all(|&(_, w)| w.is_finite() && w > 0.0));
        let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        TermWeightVector {
            window_index,
            entries,
            norm,
        }
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn weight(&self, term: TermId) -> Option<f64> {
        self.entries
            .binary_search_by_key(&term, |&(t, _)| t)
            .ok()
            .map(|ix| self.entries[ix].1)
    }

    /// A copy scaled by `c > 0` (test helper for scale-invariance checks).
    pub fn scaled(&self, c: f64) -> Self {
        TermWeightVector::new(
            self.window_index,
            self.entries.iter().map(|&(t, w)| (t, w * c)).collect(),
        )
    }
}

/// Compute the tf-idf vector of every window, using the whole window set as
/// the document collection. Natural logarithm; ubiquitous terms (present in
/// all windows) get weight zero and are omitted.
pub fn tfidf_all(windows: &WindowSet) -> Result<Vec<TermWeightVector>> {
    if windows.is_empty() {
        return Err(Error::NoWindows);
    }
    for w in &windows.windows {
        if w.terms.is_empty() {
            return Err(Error::EmptyWindow { index: w.index });
        }
    }
    let doc_count = windows.len();
    let vocab_size = windows.vocab.len();

    // document frequency per term
    let mut doc_freq = vec![0u32; vocab_size];
    {
        let mut seen = vec![usize::MAX; vocab_size];
        for (wi, w) in windows.windows.iter().enumerate() {
            for &t in &w.terms {
                if seen[t as usize] != wi {
                    seen[t as usize] = wi;
                    doc_freq[t as usize] += 1;
                }
            }
        }
    }

    let ln_doc_count = (doc_count as f64).ln();
    let idf: Vec<f64> = doc_freq
        .iter()
        .map(|&df| {
            if df as usize == doc_count {
                0.0
            } else {
                ln_doc_count - f64::from(df).ln()
            }
        })
        .collect();

    let vectors = windows
        .windows
        .par_iter()
        .map(|w| {
            let mut counts: Vec<u32> = vec![0; vocab_size];
            let mut touched: Vec<TermId> = Vec::new();
            for &t in &w.terms {
                if counts[t as usize] == 0 {
                    touched.push(t);
                }
                counts[t as usize] += 1;
            }
            let n = w.terms.len() as f64;
            let entries = touched
                .iter()
                .filter(|&&t| idf[t as usize] != 0.0)
                .map(|&t| (t, f64::from(counts[t as usize]) / n * idf[t as usize]))
                .collect();
            TermWeightVector::new(w.index, entries)
        })
        .collect();
    Ok(vectors)
}

/// Cosine similarity in `[0, 1]`. Returns 0 when either vector has zero norm.
pub fn cosine(a: &TermWeightVector, b: &TermWeightVector) -> f64 {
    if a.norm == 0.0 || b.norm == 0.0 {
        return 0.0;
    }
    let dot = sparse_dot(&a.entries, &b.entries);
    (dot / (a.norm * b.norm)).min(1.0)
}

fn sparse_dot(a: &[(TermId, f64)], b: &[(TermId, f64)]) -> f64 {
    let mut dot = 0.0;
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() && ib < b.len() {
        let (ta, wa) = a[ia];
        let (tb, wb) = b[ib];
        match ta.cmp(&tb) {
            std::cmp::Ordering::Less => ia += 1,
            std::cmp::Ordering::Greater => ib += 1,
            std::cmp::Ordering::Equal => {
                dot += wa * wb;
                ia += 1;
                ib += 1;
            }
        }
    }
    dot
}

/// Debug dump: one `lemma<TAB>weight` line per entry, windows separated by
/// a `# window N` header.
pub fn dump_vectors(windows: &WindowSet, vectors: &[TermWeightVector], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in vectors {
        writeln!(out, "# window {}", v.window_index)?;
        for &(t, w) in v.entries() {
            writeln!(out, "{}\t{}", windows.vocab.term(t), w)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textproc::{build_windows, TokenizedText};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vector(ix: usize, entries: &[(u32, f64)]) -> TermWeightVector {
        TermWeightVector::new(ix, entries.to_vec())
    }

    fn windows_from(paragraphs: &[&[&str]], delta: usize) -> WindowSet {
        let text = TokenizedText {
            book_id: "t".into(),
            paragraphs: paragraphs
                .iter()
                .map(|p| p.iter().map(|s| s.to_string()).collect())
                .collect(),
        };
        build_windows(&text, delta).unwrap()
    }

    #[test]
    fn ubiquitous_terms_get_zero_weight() {
        // "a" appears in every window, "b"/"c"/"d" do not.
        let ws = windows_from(&[&["a", "b"], &["a", "c"], &["a", "d"]], 1);
        let vs = tfidf_all(&ws).unwrap();
        let a = ws.vocab.lookup("a").unwrap();
        for v in &vs {
            assert!(v.weight(a).is_none());
        }
    }

    #[test]
    fn tfidf_matches_direct_evaluation() {
        // 4 windows; "rare" twice in a 10-term window and nowhere else.
        let w0: Vec<&str> = ["rare", "rare", "x", "x", "x", "x", "x", "x", "x", "x"].to_vec();
        let ws = windows_from(&[&w0, &["y"], &["z"], &["q"]], 1);
        let vs = tfidf_all(&ws).unwrap();
        let rare = ws.vocab.lookup("rare").unwrap();
        let got = vs[0].weight(rare).unwrap();
        assert_relative_eq!(got, 0.2 * 4f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(got, 0.277_258_872_223_978_1, epsilon = 1e-12);
    }

    #[test]
    fn single_window_collection_is_all_zero() {
        let ws = windows_from(&[&["a", "b", "c"]], 1);
        let vs = tfidf_all(&ws).unwrap();
        assert_eq!(vs.len(), 1);
        assert!(vs[0].entries().is_empty());
        assert_eq!(vs[0].norm(), 0.0);
    }

    #[test]
    fn empty_window_is_rejected() {
        let text = TokenizedText {
            book_id: "t".into(),
            paragraphs: vec![vec!["a".into()], vec![]],
        };
        let ws = build_windows(&text, 1).unwrap();
        match tfidf_all(&ws) {
            Err(Error::EmptyWindow { index: 1 }) => {}
            other => panic!("expected EmptyWindow, got {other:?}"),
        }
    }

    #[test]
    fn cosine_identity_orthogonal_and_half() {
        let a = vector(0, &[(0, 1.0), (1, 1.0)]);
        let b = vector(1, &[(0, 1.0), (2, 1.0)]);
        let c = vector(2, &[(3, 2.0)]);
        assert_relative_eq!(cosine(&a, &a), 1.0, epsilon = 1e-12);
        assert_eq!(cosine(&a, &c), 0.0);
        assert_relative_eq!(cosine(&a, &b), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cosine_zero_norm_is_zero() {
        let zero = vector(0, &[]);
        let a = vector(1, &[(0, 1.0)]);
        assert_eq!(cosine(&zero, &a), 0.0);
        assert_eq!(cosine(&zero, &zero), 0.0);
    }

    fn sparse_entries() -> impl Strategy<Value = Vec<(u32, f64)>> {
        proptest::collection::btree_map(0u32..24, 0.01f64..10.0, 0..10)
            .prop_map(|m| m.into_iter().collect())
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_bounded(a in sparse_entries(), b in sparse_entries()) {
            let va = vector(0, &a);
            let vb = vector(1, &b);
            let ab = cosine(&va, &vb);
            let ba = cosine(&vb, &va);
            prop_assert_eq!(ab.to_bits(), ba.to_bits());
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn cosine_scale_invariant(a in sparse_entries(), b in sparse_entries(), c in 0.01f64..100.0) {
            let va = vector(0, &a);
            let vb = vector(1, &b);
            let scaled = va.scaled(c);
            prop_assert!((cosine(&scaled, &vb) - cosine(&va, &vb)).abs() < 1e-12);
        }
    }
}
