//! Article corpus loading, tokenization and frequency statistics.
//!
//! The corpus is immutable after load: every downstream stage (keyword
//! profiles, the fielded index, pair scoring) reads from the same
//! [`Corpus`] and [`CorpusStats`] without mutating them, so they can be
//! shared freely across worker threads.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interned term identifier. Ids are assigned in first-appearance order
/// over the time-sorted corpus, so they are deterministic for a given input.
pub type TermId = u32;

/// Indexed fields of an article.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Title = 0,
    Body = 1,
}

pub const NUM_FIELDS: usize = 2;
pub const FIELDS: [Field; NUM_FIELDS] = [Field::Title, Field::Body];

/// One news item.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Article {
    pub id: String,
    pub source: String,
    pub title: String,
    pub body: String,
    pub published: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

impl Article {
    pub fn field_text(&self, field: Field) -> &str {
        match field {
            Field::Title => &self.title,
            Field::Body => &self.body,
        }
    }
}

/// A record that failed validation during load.
#[derive(Debug, Clone)]
pub struct RejectedRecord {
    pub line: usize,
    pub reason: String,
}

/// Input format of the raw corpus file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::Config(format!("unknown corpus format {other:?}"))),
        }
    }
}

/// Time-sorted collection of articles with unique ids.
#[derive(Debug, Clone)]
pub struct Corpus {
    articles: Vec<Article>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus from raw articles: sorts by publication time
    /// (ties broken by id) and rejects duplicate ids.
    pub fn from_articles(mut articles: Vec<Article>) -> Result<Corpus> {
        articles.sort_by(|a, b| a.published.cmp(&b.published).then_with(|| a.id.cmp(&b.id)));
        let mut by_id = HashMap::with_capacity(articles.len());
        for (i, a) in articles.iter().enumerate() {
            if by_id.insert(a.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(a.id.clone()));
            }
        }
        Ok(Corpus { articles, by_id })
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn article(&self, idx: usize) -> &Article {
        &self.articles[idx]
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Content hash of the corpus, used to key the index cache.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for a in &self.articles {
            h.update(a.id.as_bytes());
            h.update([0]);
            h.update(a.source.as_bytes());
            h.update([0]);
            h.update(a.title.as_bytes());
            h.update([0]);
            h.update(a.body.as_bytes());
            h.update([0]);
            h.update(a.published.timestamp().to_le_bytes());
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Lowercase and split on non-alphanumeric boundaries. Digits are kept,
/// stopwords are kept, no stemming.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(|s| s.to_lowercase())
        .collect()
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(naive.and_utc());
        }
    }
    None
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    source: Option<String>,
    title: Option<String>,
    body: Option<String>,
    published: Option<String>,
    #[serde(default)]
    url: Option<String>,
}

fn validate(raw: RawRecord, line: usize) -> std::result::Result<Article, RejectedRecord> {
    let reject = |reason: &str| RejectedRecord {
        line,
        reason: reason.to_string(),
    };
    let id = raw.id.ok_or_else(|| reject("missing id"))?;
    let source = raw.source.ok_or_else(|| reject("missing source"))?;
    let title = raw.title.ok_or_else(|| reject("missing title"))?;
    let body = raw.body.ok_or_else(|| reject("missing body"))?;
    let published = raw.published.ok_or_else(|| reject("missing published"))?;
    let published = parse_timestamp(&published).ok_or_else(|| RejectedRecord {
        line,
        reason: format!("unparseable timestamp {published:?}"),
    })?;
    Ok(Article {
        id,
        source,
        title,
        body,
        published,
        url: raw.url,
    })
}

/// Loads a corpus file. Malformed records are rejected and tallied;
/// unreadable files and duplicate ids are fatal.
pub fn load_corpus<P: AsRef<Path>>(
    path: P,
    format: CorpusFormat,
) -> Result<(Corpus, Vec<RejectedRecord>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut articles = Vec::new();
    let mut rejected = Vec::new();
    match format {
        CorpusFormat::Jsonl => {
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                let lineno = i + 1;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<RawRecord>(&line) {
                    Ok(raw) => match validate(raw, lineno) {
                        Ok(a) => articles.push(a),
                        Err(r) => rejected.push(r),
                    },
                    Err(e) => rejected.push(RejectedRecord {
                        line: lineno,
                        reason: format!("invalid json: {e}"),
                    }),
                }
            }
        }
        CorpusFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(reader);
            for (i, rec) in rdr.deserialize::<RawRecord>().enumerate() {
                let lineno = i + 2; // header is line 1
                match rec {
                    Ok(raw) => match validate(raw, lineno) {
                        Ok(a) => articles.push(a),
                        Err(r) => rejected.push(r),
                    },
                    Err(e) => rejected.push(RejectedRecord {
                        line: lineno,
                        reason: format!("invalid csv row: {e}"),
                    }),
                }
            }
        }
    }
    let corpus = Corpus::from_articles(articles)?;
    Ok((corpus, rejected))
}

/// Per-document token statistics, split by field.
#[derive(Debug, Clone)]
pub struct DocStats {
    /// occurrences of each term per field
    pub counts: HashMap<TermId, [u32; NUM_FIELDS]>,
    /// token count per field
    pub field_len: [u32; NUM_FIELDS],
}

impl DocStats {
    pub fn total_len(&self) -> u32 {
        self.field_len.iter().sum()
    }

    /// Pooled count of a term over all fields.
    pub fn count(&self, term: TermId) -> u32 {
        self.counts
            .get(&term)
            .map(|c| c.iter().sum())
            .unwrap_or(0)
    }

    pub fn count_in(&self, term: TermId, field: Field) -> u32 {
        self.counts
            .get(&term)
            .map(|c| c[field as usize])
            .unwrap_or(0)
    }
}

/// Corpus-wide frequency statistics consumed by the scoring modules.
#[derive(Debug, Clone)]
pub struct CorpusStats {
    vocab: Vec<String>,
    term_ids: HashMap<String, TermId>,
    docs: Vec<DocStats>,
    /// f_t: corpus-wide count of each term, all fields pooled
    term_totals: Vec<u64>,
    /// number of documents containing each term (in any field)
    doc_freq: Vec<u32>,
    total_tokens: u64,
    avg_field_len: [f64; NUM_FIELDS],
    n_docs: usize,
}

impl CorpusStats {
    /// Tokenizes every article and accumulates all counts. Errors on an
    /// empty corpus.
    pub fn build(corpus: &Corpus) -> Result<CorpusStats> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut vocab: Vec<String> = Vec::new();
        let mut term_ids: HashMap<String, TermId> = HashMap::new();
        let mut docs = Vec::with_capacity(corpus.len());
        let mut term_totals: Vec<u64> = Vec::new();
        let mut doc_freq: Vec<u32> = Vec::new();
        let mut total_tokens = 0u64;
        let mut len_sums = [0u64; NUM_FIELDS];

        for article in corpus.articles() {
            let mut counts: HashMap<TermId, [u32; NUM_FIELDS]> = HashMap::new();
            let mut field_len = [0u32; NUM_FIELDS];
            for field in FIELDS {
                for token in tokenize(article.field_text(field)) {
                    let tid = *term_ids.entry(token.clone()).or_insert_with(|| {
                        vocab.push(token);
                        term_totals.push(0);
                        doc_freq.push(0);
                        (vocab.len() - 1) as TermId
                    });
                    counts.entry(tid).or_default()[field as usize] += 1;
                    term_totals[tid as usize] += 1;
                    field_len[field as usize] += 1;
                    total_tokens += 1;
                }
            }
            for tid in counts.keys() {
                doc_freq[*tid as usize] += 1;
            }
            for f in 0..NUM_FIELDS {
                len_sums[f] += field_len[f] as u64;
            }
            docs.push(DocStats { counts, field_len });
        }

        let n_docs = corpus.len();
        let avg_field_len = [
            len_sums[0] as f64 / n_docs as f64,
            len_sums[1] as f64 / n_docs as f64,
        ];
        Ok(CorpusStats {
            vocab,
            term_ids,
            docs,
            term_totals,
            doc_freq,
            total_tokens,
            avg_field_len,
            n_docs,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn term_id(&self, term: &str) -> Option<TermId> {
        self.term_ids.get(term).copied()
    }

    pub fn term(&self, tid: TermId) -> &str {
        &self.vocab[tid as usize]
    }

    pub fn doc(&self, idx: usize) -> &DocStats {
        &self.docs[idx]
    }

    pub fn docs(&self) -> &[DocStats] {
        &self.docs
    }

    /// f_t: corpus count of a term, all fields pooled.
    pub fn term_total(&self, tid: TermId) -> u64 {
        self.term_totals[tid as usize]
    }

    /// df(t): number of documents containing the term.
    pub fn doc_freq(&self, tid: TermId) -> u32 {
        self.doc_freq[tid as usize]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn avg_field_len(&self, field: Field) -> f64 {
        self.avg_field_len[field as usize]
    }
}
