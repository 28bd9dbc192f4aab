//! End-to-end story detection: similarity network plus map-equation
//! clustering, then compare the recovered clusters against the planted
//! ground truth with pairwise precision/recall/F1.
//!
//! Run with: cargo run --release --example cluster_stories

use chrono::Duration;
use std::collections::HashMap;
use storychain::community::hierarchical_cluster;
use storychain::corpus::{Corpus, CorpusStats};
use storychain::retrieval::{build_index, Bm25fParams};
use storychain::simnet::{build_network, PairScorer};
use storychain::synth::{generate, pairwise_f1, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig::default());
    let truth_by_id: HashMap<String, Option<usize>> = synth.story_of.iter().cloned().collect();
    let corpus = Corpus::from_articles(synth.articles)?;
    let stats = CorpusStats::build(&corpus)?;
    let index = build_index(&stats, Bm25fParams::default())?;
    let scorer = PairScorer::new(&stats, &index, 100, 100.0, 20);
    let network = build_network(&corpus, &scorer, Duration::days(3), 0.35);
    let tree = hierarchical_cluster(&network, 0.15, 42);

    let clusters = tree.top_level_clusters();
    let multi = clusters.iter().filter(|c| c.len() >= 2).count();
    println!(
        "{} articles -> {} top-level clusters ({} with 2+ articles), codelength {:.3} bits",
        corpus.len(),
        clusters.len(),
        multi,
        tree.codelength
    );

    let truth: Vec<Option<usize>> = (0..corpus.len())
        .map(|d| truth_by_id[&corpus.article(d).id])
        .collect();
    let (p, r, f1) = pairwise_f1(&clusters, &truth);
    println!("recovery vs planted stories: precision={p:.3} recall={r:.3} F1={f1:.3}");

    println!("\nlargest clusters:");
    let mut by_size = clusters.clone();
    by_size.sort_by_key(|c| std::cmp::Reverse(c.len()));
    for cluster in by_size.iter().take(5) {
        let ids: Vec<&str> = cluster
            .iter()
            .take(6)
            .map(|&m| corpus.article(m as usize).id.as_str())
            .collect();
        println!("  [{}] {}{}", cluster.len(), ids.join(", "), if cluster.len() > 6 { ", …" } else { "" });
    }
    Ok(())
}
