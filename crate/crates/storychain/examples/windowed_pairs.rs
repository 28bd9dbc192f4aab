//! Moving-window pair enumeration: only article pairs published within a
//! fixed number of days of each other are ever compared. Prints how the
//! window shrinks the quadratic pair count.
//!
//! Run with: cargo run --example windowed_pairs

use chrono::Duration;
use storychain::corpus::Corpus;
use storychain::simnet::window_pairs;
use storychain::synth::{generate, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig {
        n_stories: 10,
        n_noise: 150,
        span_days: 60,
        ..SynthConfig::default()
    });
    let corpus = Corpus::from_articles(synth.articles)?;
    let n = corpus.len();
    let all_pairs = n * (n - 1) / 2;

    println!("{n} articles over 60 days -> {all_pairs} unordered pairs in total");
    for days in [1, 2, 3, 7, 14] {
        let count = window_pairs(&corpus, Duration::days(days)).count();
        println!(
            "window = {days:>2} days: {count:>6} pairs ({:.1}% of all)",
            100.0 * count as f64 / all_pairs as f64
        );
    }

    let window = Duration::days(3);
    let (a, b) = window_pairs(&corpus, window).next().expect("some pair");
    println!(
        "\nfirst 3-day pair: {} ({}) ~ {} ({})",
        corpus.article(a).id,
        corpus.article(a).published,
        corpus.article(b).id,
        corpus.article(b).published
    );
    Ok(())
}
