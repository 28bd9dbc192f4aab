//! Generate a small synthetic corpus, write it to JSONL, load it back
//! through the normal ingestion path, and print corpus-level statistics.
//!
//! Run with: cargo run --example ingest_stats

use storychain::corpus::{load_corpus, CorpusFormat, CorpusStats, Field};
use storychain::synth::{generate, SynthConfig};

fn main() -> storychain::Result<()> {
    let synth = generate(&SynthConfig {
        n_stories: 5,
        n_noise: 40,
        ..SynthConfig::default()
    });

    let dir = std::env::temp_dir().join("storychain_ingest_example");
    std::fs::create_dir_all(&dir).expect("create temp dir");
    let path = dir.join("corpus.jsonl");
    let mut jsonl = String::new();
    for a in &synth.articles {
        jsonl.push_str(&serde_json::to_string(a).unwrap());
        jsonl.push('\n');
    }
    std::fs::write(&path, jsonl).expect("write corpus");

    let (corpus, rejected) = load_corpus(&path, CorpusFormat::Jsonl)?;
    let stats = CorpusStats::build(&corpus)?;

    println!("loaded {} articles ({} rejected)", corpus.len(), rejected.len());
    println!("vocabulary:      {} terms", stats.vocab_len());
    println!("total tokens:    {}", stats.total_tokens());
    println!("avg title len:   {:.1}", stats.avg_field_len(Field::Title));
    println!("avg body len:    {:.1}", stats.avg_field_len(Field::Body));
    println!(
        "time span:       {} .. {}",
        corpus.article(0).published,
        corpus.article(corpus.len() - 1).published
    );
    println!("content hash:    {}", corpus.content_hash());
    Ok(())
}
