//! Fielded inverted index, Bo1 query expansion and BM25F scoring.
//!
//! An article is turned into a weighted query by ranking its terms with the
//! Bo1 Bose-Einstein divergence-from-randomness weight; the query is then
//! scored against candidate articles with BM25F (per-field length
//! normalization and boosts, saturating term frequency, floored idf).
//! Dividing a pair score by the query article's self-score maps the
//! unbounded BM25F scale into [0,1] so it can be averaged with the keyword
//! overlap score.

use std::io::{Read, Write};
use std::path::Path;

use crate::corpus::{CorpusStats, TermId, FIELDS, NUM_FIELDS};
use crate::error::{Error, Result};

/// BM25F free parameters. `b` may vary per field; `boost` raises the
/// weight of title matches relative to body matches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25fParams {
    pub k1: f64,
    /// length-normalization strength per field, in (0, 1]
    pub b: [f64; NUM_FIELDS],
    /// field boost: [title, body]
    pub boost: [f64; NUM_FIELDS],
}

impl Default for Bm25fParams {
    fn default() -> Self {
        Bm25fParams {
            k1: 1.2,
            b: [1.0, 1.0],
            boost: [2.0, 1.0],
        }
    }
}

impl Bm25fParams {
    pub fn validate(&self) -> Result<()> {
        if self.k1 <= 0.0 {
            return Err(Error::Config(format!("k1 must be positive, got {}", self.k1)));
        }
        for f in 0..NUM_FIELDS {
            if !(self.b[f] > 0.0 && self.b[f] <= 1.0) {
                return Err(Error::Config(format!("b must be in (0,1], got {}", self.b[f])));
            }
            if self.boost[f] <= 0.0 {
                return Err(Error::Config(format!("boost must be positive, got {}", self.boost[f])));
            }
        }
        Ok(())
    }
}

/// Posting: document index and term occurrences in one field.
pub type Posting = (u32, u32);

/// Inverted index over both fields, immutable after build.
#[derive(Debug, Clone)]
pub struct FieldedIndex {
    pub params: Bm25fParams,
    /// postings\[term]\[field] = (doc, occurrences), docs ascending
    postings: Vec<[Vec<Posting>; NUM_FIELDS]>,
    n_docs: usize,
}

impl FieldedIndex {
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Postings for a term in a field; empty for out-of-vocabulary terms.
    pub fn postings(&self, term: TermId, field: usize) -> &[Posting] {
        self.postings
            .get(term as usize)
            .map(|p| p[field].as_slice())
            .unwrap_or(&[])
    }
}

/// Builds the inverted index from corpus statistics.
pub fn build_index(stats: &CorpusStats, params: Bm25fParams) -> Result<FieldedIndex> {
    params.validate()?;
    let mut postings: Vec<[Vec<Posting>; NUM_FIELDS]> =
        (0..stats.vocab_len()).map(|_| [Vec::new(), Vec::new()]).collect();
    for (doc, d) in stats.docs().iter().enumerate() {
        // deterministic posting order: sort the doc's terms
        let mut terms: Vec<(&TermId, &[u32; NUM_FIELDS])> = d.counts.iter().collect();
        terms.sort_unstable_by_key(|(t, _)| **t);
        for (&tid, counts) in terms {
            for f in 0..NUM_FIELDS {
                if counts[f] > 0 {
                    postings[tid as usize][f].push((doc as u32, counts[f]));
                }
            }
        }
    }
    Ok(FieldedIndex {
        params,
        postings,
        n_docs: stats.n_docs(),
    })
}

/// A document rewritten as a weighted term query.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedQuery {
    /// corpus index of the source article
    pub source: usize,
    /// (term, Bo1 weight), weight descending, ties by term string
    pub terms: Vec<(TermId, f64)>,
}

/// Bo1 divergence-from-randomness term weight:
/// w(t) = tf · log2((1+λ)/λ) + log2(1+λ), with λ = f_t / N.
fn bo1_weight(tf: f64, lambda: f64) -> f64 {
    tf * ((1.0 + lambda) / lambda).log2() + (1.0 + lambda).log2()
}

/// Ranks the terms of a document by Bo1 weight and keeps the top
/// `n_terms` as the expanded query. Empty documents yield empty queries.
pub fn bo1_expand(stats: &CorpusStats, doc: usize, n_terms: usize) -> ExpandedQuery {
    let n = stats.n_docs() as f64;
    let mut scored: Vec<(TermId, f64)> = stats
        .doc(doc)
        .counts
        .iter()
        .map(|(&tid, counts)| {
            let tf: u32 = counts.iter().sum();
            let lambda = stats.term_total(tid) as f64 / n;
            (tid, bo1_weight(tf as f64, lambda))
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| stats.term(a.0).cmp(stats.term(b.0)))
    });
    scored.truncate(n_terms);
    ExpandedQuery {
        source: doc,
        terms: scored,
    }
}

/// Floored inverse document frequency: max(0, ln((N − df + 0.5)/(df + 0.5))).
fn idf(n_docs: usize, df: u32) -> f64 {
    let n = n_docs as f64;
    let df = df as f64;
    ((n - df + 0.5) / (df + 0.5)).ln().max(0.0)
}

/// Accumulated per-field weight of a term in a document:
/// Σ_c occurs · boost_c / ((1−b_c) + b_c · l_c/avl_c).
fn field_weight(stats: &CorpusStats, params: &Bm25fParams, term: TermId, doc: usize) -> f64 {
    let d = stats.doc(doc);
    let mut w = 0.0;
    for field in FIELDS {
        let c = field as usize;
        let occurs = d.count_in(term, field);
        if occurs == 0 {
            continue;
        }
        let avl = stats.avg_field_len(field);
        let norm = if avl > 0.0 {
            (1.0 - params.b[c]) + params.b[c] * d.field_len[c] as f64 / avl
        } else {
            1.0
        };
        w += occurs as f64 * params.boost[c] / norm;
    }
    w
}

/// BM25F score of an expanded query against a document:
/// Σ_t idf(t) · w(t,d)/(k1 + w(t,d)) · query_weight(t).
pub fn bm25f_score(stats: &CorpusStats, index: &FieldedIndex, query: &ExpandedQuery, doc: usize) -> f64 {
    let mut score = 0.0;
    for &(term, qw) in &query.terms {
        let w = field_weight(stats, &index.params, term, doc);
        if w == 0.0 {
            continue;
        }
        score += idf(index.n_docs, stats.doc_freq(term)) * (w / (index.params.k1 + w)) * qw;
    }
    score
}

/// Self-normalized BM25F similarity: score of a's query against b,
/// divided by a's score against itself, clamped to [0,1].
pub fn normalized_bm25f_scored(
    stats: &CorpusStats,
    index: &FieldedIndex,
    query_a: &ExpandedQuery,
    self_score_a: f64,
    doc_b: usize,
) -> f64 {
    if self_score_a <= 0.0 {
        return 0.0;
    }
    (bm25f_score(stats, index, query_a, doc_b) / self_score_a).clamp(0.0, 1.0)
}

/// Convenience form that expands the query internally.
pub fn normalized_bm25f(
    stats: &CorpusStats,
    index: &FieldedIndex,
    doc_a: usize,
    doc_b: usize,
    n_terms: usize,
) -> f64 {
    let query = bo1_expand(stats, doc_a, n_terms);
    let self_score = bm25f_score(stats, index, &query, doc_a);
    normalized_bm25f_scored(stats, index, &query, self_score, doc_b)
}

const CACHE_MAGIC: &[u8; 4] = b"SCIX";
const CACHE_VERSION: u32 = 1;

/// Persists the index to a versioned binary cache keyed by corpus hash.
pub fn save_index_cache<P: AsRef<Path>>(path: P, index: &FieldedIndex, corpus_hash: &str) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(corpus_hash.len() as u32).to_le_bytes());
    out.extend_from_slice(corpus_hash.as_bytes());
    out.extend_from_slice(&index.params.k1.to_le_bytes());
    for f in 0..NUM_FIELDS {
        out.extend_from_slice(&index.params.b[f].to_le_bytes());
        out.extend_from_slice(&index.params.boost[f].to_le_bytes());
    }
    out.extend_from_slice(&(index.n_docs as u64).to_le_bytes());
    out.extend_from_slice(&(index.postings.len() as u64).to_le_bytes());
    for term in &index.postings {
        for f in 0..NUM_FIELDS {
            out.extend_from_slice(&(term[f].len() as u64).to_le_bytes());
            for &(doc, count) in &term[f] {
                out.extend_from_slice(&doc.to_le_bytes());
                out.extend_from_slice(&count.to_le_bytes());
            }
        }
    }
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    file.write_all(&out).map_err(io_err)?;
    Ok(())
}

/// Loads a cached index, verifying version and corpus hash.
pub fn load_index_cache<P: AsRef<Path>>(path: P, expected_hash: &str) -> Result<FieldedIndex> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut buf = Vec::new();
    std::fs::File::open(path).map_err(io_err)?.read_to_end(&mut buf).map_err(io_err)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > buf.len() {
            return Err(Error::CacheMismatch("truncated cache file".into()));
        }
        let s = &buf[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 4)? != CACHE_MAGIC {
        return Err(Error::CacheMismatch("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(Error::CacheMismatch(format!("unsupported version {version}")));
    }
    let hash_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let hash = String::from_utf8_lossy(take(&mut pos, hash_len)?).to_string();
    if hash != expected_hash {
        return Err(Error::CacheMismatch("corpus content hash differs".into()));
    }
    let read_f64 = |pos: &mut usize| -> Result<f64> {
        Ok(f64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
    };
    let k1 = read_f64(&mut pos)?;
    let mut b = [0.0; NUM_FIELDS];
    let mut boost = [0.0; NUM_FIELDS];
    for f in 0..NUM_FIELDS {
        b[f] = read_f64(&mut pos)?;
        boost[f] = read_f64(&mut pos)?;
    }
    let n_docs = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let n_terms = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
    let mut postings = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        let mut term = [Vec::new(), Vec::new()];
        for field in term.iter_mut() {
            let len = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
            field.reserve(len);
            for _ in 0..len {
                let doc = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
                let count = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
                field.push((doc, count));
            }
        }
        postings.push(term);
    }
    Ok(FieldedIndex {
        params: Bm25fParams { k1, b, boost },
        postings,
        n_docs,
    })
}
