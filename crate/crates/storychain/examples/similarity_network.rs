//! Build the directed weighted similarity network: score every windowed
//! pair with the keyword and BM25F measures, keep pairs whose symmetric
//! ensemble clears the threshold, and print the resulting edges.
//!
//! Run with: cargo run --example similarity_network

use chrono::Duration;
use storychain::corpus::{Corpus, CorpusStats};
use storychain::retrieval::{build_index, Bm25fParams};
use storychain::simnet::{build_network, PairScorer};
use storychain::synth::{generate, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig {
        n_stories: 4,
        ..SynthConfig::default()
    });
    let corpus = Corpus::from_articles(synth.articles)?;
    let stats = CorpusStats::build(&corpus)?;
    let index = build_index(&stats, Bm25fParams::default())?;
    let scorer = PairScorer::new(&stats, &index, 100, 100.0, 20);

    let network = build_network(&corpus, &scorer, Duration::days(3), 0.35);
    println!(
        "{} articles -> {} directed edges",
        network.n_nodes(),
        network.edges.len()
    );

    println!("\nstrongest edges:");
    let mut edges = network.edges.clone();
    edges.sort_by(|a, b| b.ensemble.total_cmp(&a.ensemble));
    for e in edges.iter().take(10) {
        println!(
            "  {:<16} -> {:<16} keyword={:.3} bm25f={:.3} ensemble={:.3}",
            network.ids[e.from as usize], network.ids[e.to as usize], e.keyword, e.bm25f, e.ensemble
        );
    }
    Ok(())
}
