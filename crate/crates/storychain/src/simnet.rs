//! Windowed pair enumeration, ensemble scoring and the similarity network.
//!
//! Only article pairs published within the moving window are compared,
//! which keeps the pair stream O(n·w) instead of O(n²). Each compared pair
//! gets a keyword-overlap score, two directed self-normalized BM25F scores
//! and their ensemble means; pairs whose symmetric ensemble clears the
//! threshold become a pair of directed weighted edges.

use chrono::Duration;
use rayon::prelude::*;

use crate::corpus::{Corpus, CorpusStats};
use crate::keywords::{keyword_profile, keyword_similarity, KeywordProfile};
use crate::retrieval::{bm25f_score, bo1_expand, normalized_bm25f_scored, ExpandedQuery, FieldedIndex};

/// Yields every unordered pair {a, b} (as corpus indexes, a < b in time
/// order) with publication gap ≤ `window`, each exactly once.
pub fn window_pairs<'a>(
    corpus: &'a Corpus,
    window: Duration,
) -> impl Iterator<Item = (usize, usize)> + 'a {
    let n = corpus.len();
    (0..n).flat_map(move |a| {
        let limit = corpus.article(a).published + window;
        ((a + 1)..n)
            .take_while(move |&b| corpus.article(b).published <= limit)
            .map(move |b| (a, b))
    })
}

/// Similarity components of one compared pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    /// keyword-overlap score (already symmetric)
    pub keyword: f64,
    /// normalized BM25F of a's query against b
    pub bm25f_ab: f64,
    /// normalized BM25F of b's query against a
    pub bm25f_ba: f64,
}

impl PairScore {
    pub fn ensemble_ab(&self) -> f64 {
        (self.keyword + self.bm25f_ab) / 2.0
    }

    pub fn ensemble_ba(&self) -> f64 {
        (self.keyword + self.bm25f_ba) / 2.0
    }

    /// Symmetric ensemble score: mean of the two directed ensembles.
    pub fn symmetric(&self) -> f64 {
        (self.ensemble_ab() + self.ensemble_ba()) / 2.0
    }

    /// Symmetric BM25F-only score.
    pub fn bm25f_symmetric(&self) -> f64 {
        (self.bm25f_ab + self.bm25f_ba) / 2.0
    }
}

/// related ⇔ score ≥ θ
pub fn classify_pair(symmetric_score: f64, theta: f64) -> bool {
    symmetric_score >= theta
}

/// Precomputed per-article artifacts for pair scoring: keyword profiles,
/// Bo1 expanded queries and BM25F self-scores. Immutable and shareable
/// across scoring workers.
pub struct PairScorer<'a> {
    pub stats: &'a CorpusStats,
    pub index: &'a FieldedIndex,
    profiles: Vec<KeywordProfile>,
    queries: Vec<ExpandedQuery>,
    self_scores: Vec<f64>,
}

impl<'a> PairScorer<'a> {
    pub fn new(
        stats: &'a CorpusStats,
        index: &'a FieldedIndex,
        keyword_top_k: usize,
        keyword_min_score: f64,
        bo1_terms: usize,
    ) -> PairScorer<'a> {
        let n = stats.n_docs();
        let profiles: Vec<KeywordProfile> = (0..n)
            .into_par_iter()
            .map(|d| keyword_profile(stats, d, keyword_top_k, keyword_min_score))
            .collect();
        let queries: Vec<ExpandedQuery> = (0..n)
            .into_par_iter()
            .map(|d| bo1_expand(stats, d, bo1_terms))
            .collect();
        let self_scores: Vec<f64> = queries
            .par_iter()
            .map(|q| bm25f_score(stats, index, q, q.source))
            .collect();
        PairScorer {
            stats,
            index,
            profiles,
            queries,
            self_scores,
        }
    }

    pub fn profile(&self, doc: usize) -> &KeywordProfile {
        &self.profiles[doc]
    }

    pub fn score(&self, a: usize, b: usize) -> PairScore {
        let keyword = keyword_similarity(&self.profiles[a], &self.profiles[b]);
        let bm25f_ab =
            normalized_bm25f_scored(self.stats, self.index, &self.queries[a], self.self_scores[a], b);
        let bm25f_ba =
            normalized_bm25f_scored(self.stats, self.index, &self.queries[b], self.self_scores[b], a);
        PairScore {
            keyword,
            bm25f_ab,
            bm25f_ba,
        }
    }
}

/// One directed edge of the similarity network.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityEdge {
    pub from: u32,
    pub to: u32,
    pub keyword: f64,
    pub bm25f: f64,
    pub ensemble: f64,
}

/// Directed weighted graph over all corpus articles. Nodes without any
/// related pair stay in the graph as isolated nodes.
#[derive(Debug, Clone)]
pub struct SimilarityNetwork {
    /// article ids, indexed by node
    pub ids: Vec<String>,
    /// directed edges of related pairs, in deterministic order
    pub edges: Vec<SimilarityEdge>,
}

impl SimilarityNetwork {
    pub fn n_nodes(&self) -> usize {
        self.ids.len()
    }
}

/// Scores every windowed pair and assembles the network: for each pair
/// whose symmetric ensemble is ≥ `theta`, both directed edges are inserted
/// with their directed ensemble weights (zero-weight edges are dropped).
pub fn build_network(
    corpus: &Corpus,
    scorer: &PairScorer,
    window: Duration,
    theta: f64,
) -> SimilarityNetwork {
    let pairs: Vec<(usize, usize)> = window_pairs(corpus, window).collect();
    let scored: Vec<(usize, usize, PairScore)> = pairs
        .into_par_iter()
        .map(|(a, b)| (a, b, scorer.score(a, b)))
        .filter(|(_, _, s)| s.symmetric() > 0.0)
        .collect();

    let mut edges = Vec::new();
    for (a, b, s) in scored {
        if !classify_pair(s.symmetric(), theta) {
            continue;
        }
        let fwd = s.ensemble_ab();
        if fwd > 0.0 {
            edges.push(SimilarityEdge {
                from: a as u32,
                to: b as u32,
                keyword: s.keyword,
                bm25f: s.bm25f_ab,
                ensemble: fwd,
            });
        }
        let back = s.ensemble_ba();
        if back > 0.0 {
            edges.push(SimilarityEdge {
                from: b as u32,
                to: a as u32,
                keyword: s.keyword,
                bm25f: s.bm25f_ba,
                ensemble: back,
            });
        }
    }
    SimilarityNetwork {
        ids: corpus.articles().iter().map(|a| a.id.clone()).collect(),
        edges,
    }
}

/// Per-classifier decision thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub keyword: f64,
    pub bm25f: f64,
    pub ensemble: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        // fallback threshold when no labeled pairs are supplied
        Thresholds {
            keyword: 0.35,
            bm25f: 0.35,
            ensemble: 0.35,
        }
    }
}

/// Picks the threshold from {0.05, 0.10, …, 0.95} that maximizes F1 over
/// (score, label) pairs; ties go to the lower threshold.
pub fn calibrate_threshold(scored_labels: &[(f64, bool)]) -> f64 {
    let mut best = (0.35, -1.0);
    for step in 1..=19 {
        let theta = step as f64 * 0.05;
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut fn_ = 0u64;
        for &(score, label) in scored_labels {
            let pred = classify_pair(score, theta);
            match (pred, label) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        let f1 = if denom == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 };
        if f1 > best.1 + 1e-12 {
            best = (theta, f1);
        }
    }
    best.0
}
