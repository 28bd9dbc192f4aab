//! Synthetic news corpus generator with planted story chains.
//!
//! Planted stories share rare proper nouns; noise articles carry their own
//! unique vocabulary and longer bodies. Publication times follow a daily
//! cycle, with follow-up articles concentrated a few hours, one day, or
//! two days after the initial piece. Used for end-to-end recovery checks
//! and runnable demos.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Article;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_stories: usize,
    pub story_size_min: usize,
    pub story_size_max: usize,
    pub n_noise: usize,
    pub span_days: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_stories: 20,
            story_size_min: 3,
            story_size_max: 15,
            n_noise: 200,
            span_days: 30,
            seed: 42,
        }
    }
}

/// Generated articles plus the planted ground truth: story index per
/// article, `None` for noise.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub articles: Vec<Article>,
    /// parallel to `articles` (pre-sort order matches ids, not time)
    pub story_of: Vec<(String, Option<usize>)>,
}

const SOURCES: [&str; 6] = ["bbc", "mail", "express", "guardian", "mirror", "sun"];

fn common_word(rng: &mut ChaCha8Rng, vocab_size: usize) -> String {
    // heavy-tailed rank distribution over the shared vocabulary
    let u: f64 = rng.random::<f64>();
    let rank = ((vocab_size as f64).powf(u) - 1.0) as usize;
    format!("w{:04}", rank.min(vocab_size - 1))
}

fn common_text(rng: &mut ChaCha8Rng, len: usize) -> Vec<String> {
    (0..len).map(|_| common_word(rng, 2000)).collect()
}

/// Diurnal publication hour: most articles appear in two daytime peaks.
fn diurnal_hour(rng: &mut ChaCha8Rng) -> u32 {
    let weights: [u32; 24] = [
        1, 1, 1, 1, 1, 2, 4, 8, 12, 14, 12, 10, 10, 12, 12, 10, 8, 6, 5, 4, 3, 2, 1, 1,
    ];
    let total: u32 = weights.iter().sum();
    let mut pick = rng.random_range(0..total);
    for (h, &w) in weights.iter().enumerate() {
        if pick < w {
            return h as u32;
        }
        pick -= w;
    }
    12
}

fn shuffle_join(rng: &mut ChaCha8Rng, mut tokens: Vec<String>) -> String {
    use rand::seq::SliceRandom;
    tokens.shuffle(rng);
    tokens.join(" ")
}

pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start: DateTime<Utc> = Utc.with_ymd_and_hms(2013, 4, 1, 0, 0, 0).unwrap();
    let mut articles = Vec::new();
    let mut story_of = Vec::new();

    for story in 0..cfg.n_stories {
        // the story's distinctive vocabulary: every article repeats each
        // noun a fixed number of times, so the keyword score of a noun is
        // total_tokens / (article_len · story_size) — the long noise
        // articles below keep that ratio comfortably above the threshold
        let nouns: Vec<String> = (0..6).map(|k| format!("story{story:03}noun{k}")).collect();
        let size = rng.random_range(cfg.story_size_min..=cfg.story_size_max);
        // story must start early enough for follow-ups to stay in span
        let day0 = rng.random_range(0..(cfg.span_days - 3).max(1));
        let t0 = start + Duration::days(day0) + Duration::hours(diurnal_hour(&mut rng) as i64)
            + Duration::minutes(rng.random_range(0..60));
        for k in 0..size {
            let delay_hours = if k == 0 {
                0.0
            } else {
                // follow-ups cluster a few hours, ~24h or ~48h after the
                // initial piece, mirroring daily news cycles
                match rng.random_range(0..10) {
                    0..=3 => rng.random_range(2.0..10.0),
                    4..=7 => 24.0 + rng.random_range(-1.5..1.5),
                    _ => 48.0 + rng.random_range(-1.5..1.5),
                }
            };
            let published = t0 + Duration::minutes((delay_hours * 60.0) as i64);
            let body_len = rng.random_range(50..80);
            let mut body = common_text(&mut rng, body_len);
            for noun in &nouns {
                for _ in 0..3 {
                    body.push(noun.clone());
                }
            }
            let id = format!("story{story:03}art{k:02}");
            articles.push(Article {
                id: id.clone(),
                source: SOURCES[rng.random_range(0..SOURCES.len())].to_string(),
                title: common_text(&mut rng, 3).join(" "),
                body: shuffle_join(&mut rng, body),
                published,
                url: None,
            });
            story_of.push((id, Some(story)));
        }
    }

    for i in 0..cfg.n_noise {
        let day = rng.random_range(0..cfg.span_days);
        let published = start + Duration::days(day) + Duration::hours(diurnal_hour(&mut rng) as i64)
            + Duration::minutes(rng.random_range(0..60));
        let body_len = rng.random_range(700..1200);
        let mut body = common_text(&mut rng, body_len);
        // a private vocabulary so the article has keywords of its own
        for k in 0..3 {
            let token = format!("noise{i:04}tok{k}");
            for _ in 0..3 {
                body.push(token.clone());
            }
        }
        let id = format!("noise{i:04}");
        articles.push(Article {
            id: id.clone(),
            source: SOURCES[rng.random_range(0..SOURCES.len())].to_string(),
            title: format!("noise{i:04}tok0 {} {}", common_word(&mut rng, 2000), common_word(&mut rng, 2000)),
            body: shuffle_join(&mut rng, body),
            published,
            url: None,
        });
        story_of.push((id, None));
    }

    SynthCorpus { articles, story_of }
}

/// Pairwise precision/recall/F1 of predicted clusters against a planted
/// grouping. A pair is positive when both articles share a planted story;
/// noise articles belong to no story.
pub fn pairwise_f1(pred_clusters: &[Vec<u32>], truth: &[Option<usize>]) -> (f64, f64, f64) {
    let mut tp = 0u64;
    let mut predicted_pos = 0u64;
    for cluster in pred_clusters {
        for (i, &a) in cluster.iter().enumerate() {
            for &b in &cluster[i + 1..] {
                predicted_pos += 1;
                if let (Some(sa), Some(sb)) = (truth[a as usize], truth[b as usize]) {
                    if sa == sb {
                        tp += 1;
                    }
                }
            }
        }
    }
    // count of truly positive pairs from planted story sizes
    let mut sizes: std::collections::HashMap<usize, u64> = std::collections::HashMap::new();
    for t in truth.iter().flatten() {
        *sizes.entry(*t).or_default() += 1;
    }
    let actual_pos: u64 = sizes.values().map(|&s| s * (s - 1) / 2).sum();
    let precision = if predicted_pos == 0 { 0.0 } else { tp as f64 / predicted_pos as f64 };
    let recall = if actual_pos == 0 { 0.0 } else { tp as f64 / actual_pos as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}
