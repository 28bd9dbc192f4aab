//! The staged pipeline behind the CLI: ingest → cluster → eval → stats,
//! plus a `run` command chaining all of them. Every stage reads its inputs
//! from disk and writes plain-text artifacts to the configured output
//! directory, so stages can be re-run and inspected independently.

use std::path::Path;

use chrono::Duration;
use serde_json::json;

use crate::analysis::{
    association_stats, cluster_size_table, evaluate, followup_histogram, load_labels, EvalReport,
    LabeledPair, PairPrediction,
};
use crate::community::{hierarchical_cluster, ClusterTree, ModuleNode, TreeNode};
use crate::config::{PipelineConfig, ThresholdSetting};
use crate::corpus::{load_corpus, Corpus, CorpusStats, Field};
use crate::error::{Error, Result};
use crate::retrieval::{build_index, load_index_cache, save_index_cache, FieldedIndex};
use crate::simnet::{build_network, calibrate_threshold, classify_pair, PairScorer, Thresholds};

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs `f` on a rayon pool of `workers` threads (0 = rayon's default).
fn with_workers<T>(workers: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("failed to build worker pool")
            .install(f)
    }
}

fn load_and_report(cfg: &PipelineConfig) -> Result<Corpus> {
    let (corpus, rejected) = load_corpus(&cfg.corpus_path, cfg.corpus_format)?;
    for r in &rejected {
        eprintln!("warning: skipped record at line {}: {}", r.line, r.reason);
    }
    Ok(corpus)
}

/// `ingest`: parse and validate the raw corpus, then write the normalized
/// time-sorted articles (corpus.jsonl) and summary statistics (stats.json).
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<()> {
    ensure_dir(&cfg.output_dir)?;
    let corpus = load_and_report(cfg)?;
    let stats = CorpusStats::build(&corpus)?;

    let mut jsonl = String::new();
    for a in corpus.articles() {
        jsonl.push_str(&serde_json::to_string(a).expect("article serializes"));
        jsonl.push('\n');
    }
    write_file(&cfg.output_dir.join("corpus.jsonl"), &jsonl)?;

    let summary = json!({
        "n_articles": corpus.len(),
        "vocabulary": stats.vocab_len(),
        "total_tokens": stats.total_tokens(),
        "avg_title_len": stats.avg_field_len(Field::Title),
        "avg_body_len": stats.avg_field_len(Field::Body),
        "first_published": corpus.article(0).published.to_rfc3339(),
        "last_published": corpus.article(corpus.len() - 1).published.to_rfc3339(),
        "content_hash": corpus.content_hash(),
    });
    write_file(
        &cfg.output_dir.join("stats.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
    )?;
    println!("ingested {} articles", corpus.len());
    Ok(())
}

fn build_or_load_index(cfg: &PipelineConfig, corpus: &Corpus, stats: &CorpusStats) -> Result<FieldedIndex> {
    let params = cfg.bm25f_params();
    if !cfg.index_cache {
        return build_index(stats, params);
    }
    let cache_path = cfg.output_dir.join("index.bin");
    let hash = corpus.content_hash();
    match load_index_cache(&cache_path, &hash) {
        Ok(index) => {
            eprintln!("loaded index cache from {}", cache_path.display());
            Ok(index)
        }
        Err(_) => {
            let index = build_index(stats, params)?;
            save_index_cache(&cache_path, &index, &hash)?;
            Ok(index)
        }
    }
}

/// Scores every labeled pair inside the window; used both for threshold
/// calibration and for evaluation.
fn score_labeled_pairs(
    corpus: &Corpus,
    scorer: &PairScorer,
    labels: &[LabeledPair],
    window: Duration,
) -> Result<Vec<(usize, usize, crate::simnet::PairScore, bool)>> {
    let mut out = Vec::new();
    for pair in labels {
        let a = corpus
            .index_of(&pair.id_a)
            .ok_or_else(|| Error::UnknownId(pair.id_a.clone()))?;
        let b = corpus
            .index_of(&pair.id_b)
            .ok_or_else(|| Error::UnknownId(pair.id_b.clone()))?;
        let gap = corpus.article(a).published - corpus.article(b).published;
        if gap > window || -gap > window {
            continue;
        }
        out.push((a, b, scorer.score(a, b), pair.related));
    }
    Ok(out)
}

/// Resolves the three thresholds: fixed values pass through, calibrated
/// ones maximize F1 over the labeled pairs. Without labels, calibration
/// falls back to the default with a warning.
fn resolve_thresholds(cfg: &PipelineConfig, corpus: &Corpus, scorer: &PairScorer) -> Result<Thresholds> {
    let settings = [cfg.theta_keyword, cfg.theta_bm25f, cfg.theta_ensemble];
    let needs_calibration = settings.iter().any(|s| *s == ThresholdSetting::Calibrate);
    let scored = if needs_calibration {
        match &cfg.labels_path {
            Some(path) => {
                let labels = load_labels(path)?;
                Some(score_labeled_pairs(corpus, scorer, &labels, cfg.window())?)
            }
            None => {
                eprintln!(
                    "warning: threshold calibration requested but no labels_path set; using default {}",
                    Thresholds::default().ensemble
                );
                None
            }
        }
    } else {
        None
    };

    let resolve = |setting: ThresholdSetting, pick: fn(&crate::simnet::PairScore) -> f64, fallback: f64| match setting {
        ThresholdSetting::Fixed(v) => v,
        ThresholdSetting::Calibrate => match &scored {
            Some(rows) => {
                let pairs: Vec<(f64, bool)> =
                    rows.iter().map(|(_, _, s, label)| (pick(s), *label)).collect();
                calibrate_threshold(&pairs)
            }
            None => fallback,
        },
    };

    let d = Thresholds::default();
    Ok(Thresholds {
        keyword: resolve(cfg.theta_keyword, |s| s.keyword, d.keyword),
        bm25f: resolve(cfg.theta_bm25f, |s| s.bm25f_symmetric(), d.bm25f),
        ensemble: resolve(cfg.theta_ensemble, |s| s.symmetric(), d.ensemble),
    })
}

/// `cluster`: score windowed pairs, assemble the similarity network, and
/// extract the hierarchical story partition. Writes edges.tsv, tree.txt
/// and cluster_summary.txt (plus profiles.tsv when configured).
pub fn cmd_cluster(cfg: &PipelineConfig) -> Result<()> {
    ensure_dir(&cfg.output_dir)?;
    let corpus = load_and_report(cfg)?;
    let stats = CorpusStats::build(&corpus)?;
    let index = build_or_load_index(cfg, &corpus, &stats)?;

    with_workers(cfg.workers, || -> Result<()> {
        let scorer = PairScorer::new(&stats, &index, cfg.keyword_top_k, cfg.keyword_min_score, cfg.bo1_terms);
        let thresholds = resolve_thresholds(cfg, &corpus, &scorer)?;
        eprintln!(
            "thresholds: keyword={:.2} bm25f={:.2} ensemble={:.2}",
            thresholds.keyword, thresholds.bm25f, thresholds.ensemble
        );

        if cfg.dump_profiles {
            let mut out = String::from("article_id\tkeywords\n");
            for d in 0..corpus.len() {
                let terms: Vec<&str> = scorer
                    .profile(d)
                    .terms()
                    .iter()
                    .map(|&(t, _)| stats.term(t))
                    .collect();
                out.push_str(&format!("{}\t{}\n", corpus.article(d).id, terms.join(" ")));
            }
            write_file(&cfg.output_dir.join("profiles.tsv"), &out)?;
        }

        let network = build_network(&corpus, &scorer, cfg.window(), thresholds.ensemble);
        let mut edges_out = String::from("from\tto\tkeyword\tbm25f\tensemble\n");
        for e in &network.edges {
            edges_out.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                network.ids[e.from as usize], network.ids[e.to as usize], e.keyword, e.bm25f, e.ensemble
            ));
        }
        write_file(&cfg.output_dir.join("edges.tsv"), &edges_out)?;

        if network.edges.is_empty() {
            eprintln!("warning: similarity network has no edges; every article becomes a singleton");
        }
        let tree = hierarchical_cluster(&network, cfg.teleport, cfg.seed);
        write_file(&cfg.output_dir.join("tree.txt"), &tree.render(&network.ids))?;

        let multi = tree.roots.iter().filter(|m| m.size >= 2).count();
        let summary = format!(
            "articles:            {}\n\
             directed edges:      {}\n\
             top-level modules:   {}\n\
             multi-article:       {}\n\
             codelength (bits):   {:.6}\n\
             hierarchy depth:     {}\n\
             thresholds:          keyword={:.2} bm25f={:.2} ensemble={:.2}\n",
            corpus.len(),
            network.edges.len(),
            tree.roots.len(),
            multi,
            tree.codelength,
            tree.depth(),
            thresholds.keyword,
            thresholds.bm25f,
            thresholds.ensemble
        );
        write_file(&cfg.output_dir.join("cluster_summary.txt"), &summary)?;
        println!("{summary}");
        Ok(())
    })
}

/// `eval`: score the labeled pairs with all three classifiers and write
/// predictions.tsv plus the evaluation report (text and CSV).
pub fn cmd_eval(cfg: &PipelineConfig) -> Result<EvalReport> {
    ensure_dir(&cfg.output_dir)?;
    let labels_path = cfg
        .labels_path
        .as_ref()
        .ok_or_else(|| Error::Config("eval requires labels_path".into()))?;
    let labels = load_labels(labels_path)?;
    let corpus = load_and_report(cfg)?;
    let stats = CorpusStats::build(&corpus)?;
    let index = build_or_load_index(cfg, &corpus, &stats)?;

    with_workers(cfg.workers, || -> Result<EvalReport> {
        let scorer = PairScorer::new(&stats, &index, cfg.keyword_top_k, cfg.keyword_min_score, cfg.bo1_terms);
        let thresholds = resolve_thresholds(cfg, &corpus, &scorer)?;

        let mut predictions =
            String::from("id_a\tid_b\tkeyword_score\tbm25f_score\tensemble_score\tkeyword_related\tbm25f_related\tensemble_related\n");
        let report = evaluate(&corpus, &labels, cfg.window(), |a, b| {
            let s = scorer.score(a, b);
            let pred = PairPrediction {
                keyword: classify_pair(s.keyword, thresholds.keyword),
                bm25f: classify_pair(s.bm25f_symmetric(), thresholds.bm25f),
                ensemble: classify_pair(s.symmetric(), thresholds.ensemble),
            };
            predictions.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\n",
                corpus.article(a).id,
                corpus.article(b).id,
                s.keyword,
                s.bm25f_symmetric(),
                s.symmetric(),
                pred.keyword as u8,
                pred.bm25f as u8,
                pred.ensemble as u8
            ));
            pred
        })?;

        write_file(&cfg.output_dir.join("predictions.tsv"), &predictions)?;
        write_file(&cfg.output_dir.join("eval_report.txt"), &report.render_text())?;
        write_file(&cfg.output_dir.join("eval_report.csv"), &report.render_csv())?;
        println!("{}", report.render_text());
        Ok(report)
    })
}

/// Parses a rendered tree (one "1:2:3 article_id" line per article) back
/// into a `ClusterTree`. Codelengths are not stored in the rendering and
/// come back as zero.
pub fn parse_tree(text: &str, corpus: &Corpus) -> Result<ClusterTree> {
    // interior representation while assembling: children keyed by position
    struct Builder {
        children: std::collections::BTreeMap<usize, BuilderChild>,
    }
    enum BuilderChild {
        Leaf(u32),
        Module(Builder),
    }
    impl Builder {
        fn new() -> Builder {
            Builder {
                children: std::collections::BTreeMap::new(),
            }
        }
        fn insert(&mut self, path: &[usize], leaf: u32, line: usize) -> Result<()> {
            let (&head, rest) = path.split_first().expect("non-empty path");
            if rest.is_empty() {
                if self.children.insert(head, BuilderChild::Leaf(leaf)).is_some() {
                    return Err(Error::Malformed {
                        line,
                        reason: "duplicate tree position".into(),
                    });
                }
                return Ok(());
            }
            let entry = self
                .children
                .entry(head)
                .or_insert_with(|| BuilderChild::Module(Builder::new()));
            match entry {
                BuilderChild::Module(b) => b.insert(rest, leaf, line),
                BuilderChild::Leaf(_) => Err(Error::Malformed {
                    line,
                    reason: "tree position is both a leaf and a module".into(),
                }),
            }
        }
        fn finish(self) -> ModuleNode {
            let children: Vec<TreeNode> = self
                .children
                .into_values()
                .map(|c| match c {
                    BuilderChild::Leaf(x) => TreeNode::Leaf(x),
                    BuilderChild::Module(b) => TreeNode::Module(b.finish()),
                })
                .collect();
            let size = children
                .iter()
                .map(|c| match c {
                    TreeNode::Leaf(_) => 1,
                    TreeNode::Module(m) => m.size,
                })
                .sum();
            ModuleNode {
                children,
                size,
                codelength: 0.0,
            }
        }
    }

    let mut root = Builder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (path_str, id) = trimmed.split_once(' ').ok_or_else(|| Error::Malformed {
            line,
            reason: "expected \"path article_id\"".into(),
        })?;
        let path: Vec<usize> = path_str
            .split(':')
            .map(|p| {
                p.parse::<usize>().map_err(|_| Error::Malformed {
                    line,
                    reason: format!("bad path component {p:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if path.is_empty() {
            return Err(Error::Malformed {
                line,
                reason: "empty path".into(),
            });
        }
        let leaf = corpus
            .index_of(id.trim())
            .ok_or_else(|| Error::UnknownId(id.trim().to_string()))? as u32;
        root.insert(&path, leaf, line)?;
    }

    let roots = root
        .finish()
        .children
        .into_iter()
        .map(|c| match c {
            TreeNode::Leaf(x) => ModuleNode {
                children: vec![TreeNode::Leaf(x)],
                size: 1,
                codelength: 0.0,
            },
            TreeNode::Module(m) => m,
        })
        .collect();
    Ok(ClusterTree {
        roots,
        codelength: 0.0,
    })
}

/// `stats`: read tree.txt back and write the story-level tables — size
/// distribution, source association, and the follow-up delay histogram.
pub fn cmd_stats(cfg: &PipelineConfig) -> Result<()> {
    ensure_dir(&cfg.output_dir)?;
    let corpus = load_and_report(cfg)?;
    let tree_path = cfg.output_dir.join("tree.txt");
    let tree = parse_tree(&read_file(&tree_path)?, &corpus)?;
    stats_from_tree(cfg, &corpus, &tree)
}

fn stats_from_tree(cfg: &PipelineConfig, corpus: &Corpus, tree: &ClusterTree) -> Result<()> {
    let level = cfg.stats_level;
    let sizes = cluster_size_table(tree, corpus, level);
    write_file(&cfg.output_dir.join("size_table.txt"), &sizes.render_text())?;
    write_file(&cfg.output_dir.join("size_table.csv"), &sizes.render_csv())?;

    let assoc = association_stats(tree, corpus, level);
    write_file(&cfg.output_dir.join("associations.txt"), &assoc.render_text())?;
    write_file(&cfg.output_dir.join("associations.csv"), &assoc.render_csv())?;

    let bin = Duration::seconds((cfg.histogram_bin_hours * 3600.0).round() as i64);
    let hist = followup_histogram(tree, corpus, level, cfg.min_cluster, bin);
    write_file(&cfg.output_dir.join("followup_histogram.csv"), &hist.render_csv())?;
    if hist.is_empty() {
        eprintln!(
            "warning: no cluster reached min_cluster={}, follow-up histogram is empty",
            cfg.min_cluster
        );
    }

    println!("{}", sizes.render_text());
    println!("{}", assoc.render_text());
    Ok(())
}

/// `run`: the full pipeline — ingest, cluster, eval (when labels are
/// configured) and stats, sharing one output directory.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<()> {
    cmd_ingest(cfg)?;
    cmd_cluster(cfg)?;
    if cfg.labels_path.is_some() {
        cmd_eval(cfg)?;
    }
    cmd_stats(cfg)
}
