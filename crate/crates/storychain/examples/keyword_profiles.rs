//! Distinctive keyword profiles: for a few articles, print the terms whose
//! within-document relative frequency is far above their corpus rate, and
//! the profile-overlap similarity between article pairs.
//!
//! Run with: cargo run --example keyword_profiles

use storychain::corpus::{Corpus, CorpusStats};
use storychain::keywords::{keyword_profile, keyword_similarity};
use storychain::synth::{generate, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig {
        n_stories: 3,
        ..SynthConfig::default()
    });
    let corpus = Corpus::from_articles(synth.articles)?;
    let stats = CorpusStats::build(&corpus)?;

    let sample: Vec<usize> = (0..corpus.len())
        .filter(|&d| corpus.article(d).id.starts_with("story000") || corpus.article(d).id == "noise0000")
        .collect();

    let profiles: Vec<_> = sample
        .iter()
        .map(|&d| keyword_profile(&stats, d, 100, 100.0))
        .collect();

    for (&d, profile) in sample.iter().zip(&profiles) {
        let terms: Vec<String> = profile
            .terms()
            .iter()
            .take(8)
            .map(|&(t, score)| format!("{} ({score:.0})", stats.term(t)))
            .collect();
        println!("{:<16} {}", corpus.article(d).id, terms.join(", "));
    }

    println!("\npairwise profile overlap:");
    for i in 0..sample.len() {
        for j in (i + 1)..sample.len() {
            let sim = keyword_similarity(&profiles[i], &profiles[j]);
            if sim > 0.0 {
                println!(
                    "  {} ~ {}: {sim:.3}",
                    corpus.article(sample[i]).id,
                    corpus.article(sample[j]).id
                );
            }
        }
    }
    Ok(())
}
