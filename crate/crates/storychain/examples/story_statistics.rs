//! Story-level statistics on a clustered corpus: cluster-size distribution
//! with mean durations, same-source versus cross-source association of the
//! articles inside multi-article stories, and the follow-up delay
//! histogram that exposes the daily news cycle.
//!
//! Run with: cargo run --release --example story_statistics

use chrono::Duration;
use storychain::analysis::{association_stats, cluster_size_table, followup_histogram, ClusterLevel};
use storychain::community::hierarchical_cluster;
use storychain::corpus::{Corpus, CorpusStats};
use storychain::retrieval::{build_index, Bm25fParams};
use storychain::simnet::{build_network, PairScorer};
use storychain::synth::{generate, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig::default());
    let corpus = Corpus::from_articles(synth.articles)?;
    let stats = CorpusStats::build(&corpus)?;
    let index = build_index(&stats, Bm25fParams::default())?;
    let scorer = PairScorer::new(&stats, &index, 100, 100.0, 20);
    let network = build_network(&corpus, &scorer, Duration::days(3), 0.35);
    let tree = hierarchical_cluster(&network, 0.15, 42);

    let level = ClusterLevel::Top;
    print!("{}", cluster_size_table(&tree, &corpus, level).render_text());
    println!();
    print!("{}", association_stats(&tree, &corpus, level).render_text());

    let hist = followup_histogram(&tree, &corpus, level, 5, Duration::hours(1));
    println!("\nfollow-up delays ({} follow-ups, 1-hour bins):", hist.n_followups);
    for (i, &pct) in hist.percents.iter().enumerate().take(72) {
        if pct > 0.0 {
            println!("  {:>3}h {:>5.1}% {}", i, pct, "#".repeat((pct * 2.0).round() as usize));
        }
    }
    Ok(())
}
