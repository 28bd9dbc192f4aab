//! Fielded BM25 retrieval with Bo1 query expansion: turn one article into
//! an expanded query, score every other article, and print the ranking
//! normalized by the article's own self-score.
//!
//! Run with: cargo run --example bm25f_retrieval

use storychain::corpus::{Corpus, CorpusStats};
use storychain::retrieval::{bm25f_score, bo1_expand, build_index, Bm25fParams};
use storychain::synth::{generate, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig {
        n_stories: 4,
        ..SynthConfig::default()
    });
    let corpus = Corpus::from_articles(synth.articles)?;
    let stats = CorpusStats::build(&corpus)?;
    let index = build_index(&stats, Bm25fParams::default())?;

    let source = corpus.index_of("story000art00").expect("planted article");
    let query = bo1_expand(&stats, source, 20);

    println!("query article: {}", corpus.article(source).id);
    println!("expanded terms:");
    for &(t, w) in query.terms.iter().take(10) {
        println!("  {:<24} {w:.3}", stats.term(t));
    }

    let self_score = bm25f_score(&stats, &index, &query, source);
    let mut ranked: Vec<(usize, f64)> = (0..corpus.len())
        .filter(|&d| d != source)
        .map(|d| (d, bm25f_score(&stats, &index, &query, d) / self_score))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));

    println!("\ntop matches (normalized score):");
    for &(d, s) in ranked.iter().take(8) {
        println!("  {:<16} {s:.3}", corpus.article(d).id);
    }
    Ok(())
}
