//! Distinctive-keyword scoring and keyword-overlap similarity.
//!
//! A term is distinctive for an article when its relative frequency in the
//! article is much higher than its relative frequency in the whole corpus.
//! Each article keeps its top terms above a score threshold; two articles
//! are similar in proportion to the overlap of those lists.

use crate::corpus::{CorpusStats, TermId};

/// Ranked distinctive terms of one article.
#[derive(Debug, Clone)]
pub struct KeywordProfile {
    /// corpus index of the article
    pub doc: usize,
    /// (term, kwscore), sorted by score descending, ties by term string
    terms: Vec<(TermId, f64)>,
    /// term ids sorted ascending, for fast intersection
    sorted_terms: Vec<TermId>,
}

impl KeywordProfile {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(TermId, f64)] {
        &self.terms
    }

    pub fn contains(&self, term: TermId) -> bool {
        self.sorted_terms.binary_search(&term).is_ok()
    }
}

/// Relative-frequency distinctiveness of `term` in document `doc`:
/// (count in doc / doc tokens) / (corpus count / corpus tokens).
/// Returns 0 when the term is absent from the document.
pub fn kwscore(stats: &CorpusStats, doc: usize, term: TermId) -> f64 {
    let d = stats.doc(doc);
    let count = d.count(term);
    if count == 0 {
        return 0.0;
    }
    let doc_total = d.total_len();
    let corpus_count = stats.term_total(term);
    if doc_total == 0 || corpus_count == 0 {
        return 0.0;
    }
    let doc_rate = count as f64 / doc_total as f64;
    let corpus_rate = corpus_count as f64 / stats.total_tokens() as f64;
    doc_rate / corpus_rate
}

/// String-keyed convenience wrapper; unknown terms score 0.
pub fn kwscore_str(stats: &CorpusStats, doc: usize, term: &str) -> f64 {
    match stats.term_id(term) {
        Some(tid) => kwscore(stats, doc, tid),
        None => 0.0,
    }
}

/// Top-`k` terms of the document by kwscore, filtered to scores strictly
/// above `min_score`. Ties on equal score break lexicographically.
pub fn keyword_profile(stats: &CorpusStats, doc: usize, k: usize, min_score: f64) -> KeywordProfile {
    let mut scored: Vec<(TermId, f64)> = stats
        .doc(doc)
        .counts
        .keys()
        .map(|&tid| (tid, kwscore(stats, doc, tid)))
        .filter(|&(_, s)| s > min_score)
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| stats.term(a.0).cmp(stats.term(b.0)))
    });
    scored.truncate(k);
    let mut sorted_terms: Vec<TermId> = scored.iter().map(|&(t, _)| t).collect();
    sorted_terms.sort_unstable();
    KeywordProfile {
        doc,
        terms: scored,
        sorted_terms,
    }
}

/// Proportion of shared keywords: |A ∩ B| / min(|A|, |B|).
/// Zero when either profile is empty.
pub fn keyword_similarity(a: &KeywordProfile, b: &KeywordProfile) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut shared = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    let (xs, ys) = (&a.sorted_terms, &b.sorted_terms);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(&ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared as f64 / xs.len().min(ys.len()) as f64
}
