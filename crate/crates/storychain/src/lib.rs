//! Detection and analysis of news story chains.
//!
//! The pipeline scores every pair of articles published within a moving
//! time window using two complementary similarity measures — overlap of
//! distinctive keyword profiles and query-expanded fielded BM25 retrieval —
//! combines them into a directed weighted similarity network, and extracts
//! story clusters by minimising a hierarchical map equation over the
//! network's random-walk flow.
//!
//! Modules:
//! - [`corpus`]: article model, JSONL/CSV ingestion, tokenisation, corpus
//!   statistics
//! - [`keywords`]: distinctive keyword scoring and profile overlap
//! - [`retrieval`]: fielded BM25 with Bo1 query expansion and score
//!   normalisation
//! - [`simnet`]: windowed pair enumeration, pair scoring, network assembly,
//!   threshold calibration
//! - [`community`]: map-equation flow clustering with hierarchical
//!   refinement
//! - [`analysis`]: classifier evaluation and story-level statistics
//! - [`synth`]: synthetic corpora with planted stories, for demos and
//!   end-to-end checks
//! - [`config`] / [`pipeline`]: file-driven configuration and the staged
//!   command pipeline behind the CLI

pub mod analysis;
pub mod community;
pub mod config;
pub mod corpus;
pub mod error;
pub mod keywords;
pub mod pipeline;
pub mod retrieval;
pub mod simnet;
pub mod synth;

pub use analysis::{evaluate, EvalReport};
pub use community::{hierarchical_cluster, ClusterTree};
pub use config::{load_config, PipelineConfig};
pub use corpus::{load_corpus, Article, Corpus, CorpusFormat, CorpusStats};
pub use error::{Error, Result};
pub use keywords::{keyword_profile, keyword_similarity, kwscore};
pub use retrieval::{bm25f_score, bo1_expand, build_index, normalized_bm25f, Bm25fParams};
pub use simnet::{build_network, window_pairs, PairScorer, SimilarityNetwork};
