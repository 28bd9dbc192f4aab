//! Evaluate the three pair classifiers (keyword, BM25F, ensemble) against
//! labeled pairs derived from the planted ground truth, printing the
//! accuracy / precision / recall / F1 table.
//!
//! Run with: cargo run --release --example evaluate_classifiers

use chrono::Duration;
use std::collections::HashMap;
use storychain::analysis::{evaluate, LabeledPair, PairPrediction};
use storychain::corpus::{Corpus, CorpusStats};
use storychain::retrieval::{build_index, Bm25fParams};
use storychain::simnet::{classify_pair, window_pairs, PairScorer, Thresholds};
use storychain::synth::{generate, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig {
        n_stories: 8,
        ..SynthConfig::default()
    });
    let truth_by_id: HashMap<String, Option<usize>> = synth.story_of.iter().cloned().collect();
    let corpus = Corpus::from_articles(synth.articles)?;
    let stats = CorpusStats::build(&corpus)?;
    let index = build_index(&stats, Bm25fParams::default())?;
    let scorer = PairScorer::new(&stats, &index, 100, 100.0, 20);

    // every windowed pair, labeled from the planted stories
    let window = Duration::days(3);
    let labels: Vec<LabeledPair> = window_pairs(&corpus, window)
        .map(|(a, b)| {
            let sa = &truth_by_id[&corpus.article(a).id];
            let sb = &truth_by_id[&corpus.article(b).id];
            LabeledPair {
                id_a: corpus.article(a).id.clone(),
                id_b: corpus.article(b).id.clone(),
                related: sa.is_some() && sa == sb,
            }
        })
        .collect();

    let thresholds = Thresholds::default();
    let report = evaluate(&corpus, &labels, window, |a, b| {
        let s = scorer.score(a, b);
        PairPrediction {
            keyword: classify_pair(s.keyword, thresholds.keyword),
            bm25f: classify_pair(s.bm25f_symmetric(), thresholds.bm25f),
            ensemble: classify_pair(s.symmetric(), thresholds.ensemble),
        }
    })?;

    print!("{}", report.render_text());
    Ok(())
}
