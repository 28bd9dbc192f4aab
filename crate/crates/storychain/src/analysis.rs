//! Classifier evaluation against labeled pairs and descriptive story
//! statistics: size-bin tables, source-association counts and the
//! follow-up delay histogram.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use chrono::Duration;
use serde::Deserialize;

use crate::community::ClusterTree;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Confusion counts for one binary classifier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall.
    pub fn f1(&self) -> f64 {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

fn ratio(num: u64, denom: u64) -> f64 {
    if denom == 0 {
        0.0
    } else {
        num as f64 / denom as f64
    }
}

/// Rounds to 3 decimals for report presentation.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

pub const CLASSIFIER_NAMES: [&str; 3] = ["keyword", "bm25f", "ensemble"];

/// Per-classifier evaluation against hand-labeled pairs.
#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    /// confusion counts for keyword, bm25f and ensemble classifiers
    pub counts: [ConfusionCounts; 3],
    pub n_articles: usize,
    pub n_article_pairs: u64,
    /// labeled pairs outside the moving window, excluded from counts
    pub excluded_outside_window: u64,
}

impl EvalReport {
    /// Plain-text table mirroring the validation-table layout, metrics
    /// rounded to 3 decimals.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<16}{:>10}{:>10}{:>10}\n", "Classifier:", "Keyword", "BM25F", "Ensemble"));
        let metric_rows: [(&str, fn(&ConfusionCounts) -> f64); 4] = [
            ("Accuracy", ConfusionCounts::accuracy),
            ("Precision", ConfusionCounts::precision),
            ("Recall", ConfusionCounts::recall),
            ("F1", ConfusionCounts::f1),
        ];
        for (name, f) in metric_rows {
            out.push_str(&format!(
                "{:<16}{:>10.3}{:>10.3}{:>10.3}\n",
                name,
                round3(f(&self.counts[0])),
                round3(f(&self.counts[1])),
                round3(f(&self.counts[2]))
            ));
        }
        let count_rows: [(&str, fn(&ConfusionCounts) -> u64); 4] = [
            ("True Positive", |c| c.tp),
            ("True Negative", |c| c.tn),
            ("False Positive", |c| c.fp),
            ("False Negative", |c| c.fn_),
        ];
        for (name, f) in count_rows {
            out.push_str(&format!(
                "{:<16}{:>10}{:>10}{:>10}\n",
                name,
                f(&self.counts[0]),
                f(&self.counts[1]),
                f(&self.counts[2])
            ));
        }
        out.push_str(&format!("{:<16}{:>10}\n", "N_articles", self.n_articles));
        out.push_str(&format!("{:<16}{:>10}\n", "N_article_pairs", self.n_article_pairs));
        if self.excluded_outside_window > 0 {
            out.push_str(&format!(
                "(excluded {} labeled pairs outside the window)\n",
                self.excluded_outside_window
            ));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("classifier,tp,tn,fp,fn,accuracy,precision,recall,f1\n");
        for (i, name) in CLASSIFIER_NAMES.iter().enumerate() {
            let c = &self.counts[i];
            out.push_str(&format!(
                "{},{},{},{},{},{:.3},{:.3},{:.3},{:.3}\n",
                name,
                c.tp,
                c.tn,
                c.fp,
                c.fn_,
                round3(c.accuracy()),
                round3(c.precision()),
                round3(c.recall()),
                round3(c.f1())
            ));
        }
        out
    }
}

/// A hand-coded pair: two article ids and a relatedness judgment.
#[derive(Debug, Clone)]
pub struct LabeledPair {
    pub id_a: String,
    pub id_b: String,
    pub related: bool,
}

#[derive(Deserialize)]
struct RawLabel {
    id_a: String,
    id_b: String,
    related: String,
}

/// Reads labeled pairs from CSV with header id_a, id_b, related (0/1).
pub fn load_labels<P: AsRef<Path>>(path: P) -> Result<Vec<LabeledPair>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rdr = csv::Reader::from_reader(BufReader::new(file));
    let mut labels = Vec::new();
    for (i, rec) in rdr.deserialize::<RawLabel>().enumerate() {
        let line = i + 2;
        let raw = rec.map_err(|e| Error::Malformed {
            line,
            reason: e.to_string(),
        })?;
        let related = match raw.related.trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Malformed {
                    line,
                    reason: format!("related must be 0 or 1, got {other:?}"),
                })
            }
        };
        labels.push(LabeledPair {
            id_a: raw.id_a,
            id_b: raw.id_b,
            related,
        });
    }
    Ok(labels)
}

/// Predicted relatedness of one pair under the three classifiers.
#[derive(Debug, Clone, Copy)]
pub struct PairPrediction {
    pub keyword: bool,
    pub bm25f: bool,
    pub ensemble: bool,
}

/// Scores every labeled pair (via `predict`) and accumulates confusion
/// counts per classifier. Pairs outside the window are excluded and
/// tallied; unknown ids are fatal.
pub fn evaluate<F>(
    corpus: &Corpus,
    labels: &[LabeledPair],
    window: Duration,
    mut predict: F,
) -> Result<EvalReport>
where
    F: FnMut(usize, usize) -> PairPrediction,
{
    let mut report = EvalReport::default();
    let mut seen_articles: std::collections::HashSet<usize> = std::collections::HashSet::new();
    for pair in labels {
        let a = corpus
            .index_of(&pair.id_a)
            .ok_or_else(|| Error::UnknownId(pair.id_a.clone()))?;
        let b = corpus
            .index_of(&pair.id_b)
            .ok_or_else(|| Error::UnknownId(pair.id_b.clone()))?;
        let gap = corpus.article(a).published - corpus.article(b).published;
        if gap > window || -gap > window {
            report.excluded_outside_window += 1;
            continue;
        }
        seen_articles.insert(a);
        seen_articles.insert(b);
        let pred = predict(a, b);
        report.counts[0].record(pred.keyword, pair.related);
        report.counts[1].record(pred.bm25f, pair.related);
        report.counts[2].record(pred.ensemble, pair.related);
        report.n_article_pairs += 1;
    }
    report.n_articles = seen_articles.len();
    Ok(report)
}

/// Which tree level counts as "a story".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterLevel {
    Top,
    LeafModules,
}

impl std::str::FromStr for ClusterLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top" => Ok(ClusterLevel::Top),
            "leaf" | "leaf-modules" => Ok(ClusterLevel::LeafModules),
            other => Err(Error::Config(format!("unknown cluster level {other:?}"))),
        }
    }
}

fn clusters_at(tree: &ClusterTree, level: ClusterLevel) -> Vec<Vec<u32>> {
    match level {
        ClusterLevel::Top => tree.top_level_clusters(),
        ClusterLevel::LeafModules => tree.leaf_level_clusters(),
    }
}

/// Duration of a cluster in fractional days: last minus first publication.
fn cluster_duration_days(corpus: &Corpus, members: &[u32]) -> f64 {
    let times: Vec<i64> = members
        .iter()
        .map(|&m| corpus.article(m as usize).published.timestamp())
        .collect();
    let min = *times.iter().min().unwrap();
    let max = *times.iter().max().unwrap();
    (max - min) as f64 / 86_400.0
}

pub const SIZE_BIN_LABELS: [&str; 5] = ["2-10", "11-20", "21-30", "31-40", "40+"];

fn size_bin(size: usize) -> usize {
    match size {
        2..=10 => 0,
        11..=20 => 1,
        21..=30 => 2,
        31..=40 => 3,
        _ => 4,
    }
}

/// One row of the cluster-size table.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SizeBinRow {
    pub n_clusters: u64,
    pub n_articles: u64,
    pub pct_of_corpus: f64,
    pub mean_duration_days: f64,
}

/// Cluster-size distribution over clusters of size ≥ 2; singletons are
/// excluded from "articles in clusters".
#[derive(Debug, Clone, Default)]
pub struct SizeTable {
    pub bins: [SizeBinRow; 5],
    pub total: SizeBinRow,
}

pub fn cluster_size_table(tree: &ClusterTree, corpus: &Corpus, level: ClusterLevel) -> SizeTable {
    let mut table = SizeTable::default();
    let n_total = corpus.len() as f64;
    let mut duration_sums = [0.0f64; 5];
    let mut total_duration = 0.0f64;
    for members in clusters_at(tree, level) {
        if members.len() < 2 {
            continue;
        }
        let bin = size_bin(members.len());
        let duration = cluster_duration_days(corpus, &members);
        table.bins[bin].n_clusters += 1;
        table.bins[bin].n_articles += members.len() as u64;
        duration_sums[bin] += duration;
        table.total.n_clusters += 1;
        table.total.n_articles += members.len() as u64;
        total_duration += duration;
    }
    for (i, row) in table.bins.iter_mut().enumerate() {
        row.pct_of_corpus = if n_total > 0.0 { 100.0 * row.n_articles as f64 / n_total } else { 0.0 };
        row.mean_duration_days = if row.n_clusters > 0 {
            duration_sums[i] / row.n_clusters as f64
        } else {
            0.0
        };
    }
    table.total.pct_of_corpus = if n_total > 0.0 {
        100.0 * table.total.n_articles as f64 / n_total
    } else {
        0.0
    };
    table.total.mean_duration_days = if table.total.n_clusters > 0 {
        total_duration / table.total.n_clusters as f64
    } else {
        0.0
    };
    table
}

impl SizeTable {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "{:<14}{:>10}{:>12}{:>12}{:>18}\n",
            "Cluster size", "N", "Articles", "% of total", "Avg duration (d)"
        );
        for (i, row) in self.bins.iter().enumerate() {
            out.push_str(&format!(
                "{:<14}{:>10}{:>12}{:>11.0}%{:>18.1}\n",
                SIZE_BIN_LABELS[i], row.n_clusters, row.n_articles, row.pct_of_corpus, row.mean_duration_days
            ));
        }
        out.push_str(&format!(
            "{:<14}{:>10}{:>12}{:>11.0}%{:>18.1}\n",
            "Total",
            self.total.n_clusters,
            self.total.n_articles,
            self.total.pct_of_corpus,
            self.total.mean_duration_days
        ));
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("bin,n_clusters,n_articles,pct_of_corpus,mean_duration_days\n");
        for (i, row) in self.bins.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{:.4},{:.4}\n",
                SIZE_BIN_LABELS[i], row.n_clusters, row.n_articles, row.pct_of_corpus, row.mean_duration_days
            ));
        }
        out.push_str(&format!(
            "total,{},{},{:.4},{:.4}\n",
            self.total.n_clusters, self.total.n_articles, self.total.pct_of_corpus, self.total.mean_duration_days
        ));
        out
    }
}

/// Counts of articles clustered with at least one article of the same /
/// of a different source. The two categories are not exclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AssociationStats {
    pub n_articles: usize,
    pub same_source: u64,
    pub cross_source: u64,
}

impl AssociationStats {
    pub fn same_source_pct(&self) -> f64 {
        if self.n_articles == 0 {
            0.0
        } else {
            100.0 * self.same_source as f64 / self.n_articles as f64
        }
    }

    pub fn cross_source_pct(&self) -> f64 {
        if self.n_articles == 0 {
            0.0
        } else {
            100.0 * self.cross_source as f64 / self.n_articles as f64
        }
    }

    pub fn render_text(&self) -> String {
        format!(
            "Number of articles{:>42}\nAssociated with an article in the same source{:>15}{:>7.0}%\nAssociated with an article in another source{:>16}{:>7.0}%\n",
            self.n_articles, self.same_source, self.same_source_pct(), self.cross_source, self.cross_source_pct()
        )
    }

    pub fn render_csv(&self) -> String {
        format!(
            "metric,count,pct\nn_articles,{},100.0\nsame_source,{},{:.4}\ncross_source,{},{:.4}\n",
            self.n_articles,
            self.same_source,
            self.same_source_pct(),
            self.cross_source,
            self.cross_source_pct()
        )
    }
}

pub fn association_stats(tree: &ClusterTree, corpus: &Corpus, level: ClusterLevel) -> AssociationStats {
    let mut stats = AssociationStats {
        n_articles: corpus.len(),
        ..Default::default()
    };
    for members in clusters_at(tree, level) {
        if members.len() < 2 {
            continue;
        }
        let mut source_counts: HashMap<&str, usize> = HashMap::new();
        for &m in &members {
            *source_counts.entry(corpus.article(m as usize).source.as_str()).or_default() += 1;
        }
        for &m in &members {
            let source = corpus.article(m as usize).source.as_str();
            if source_counts[source] >= 2 {
                stats.same_source += 1;
            }
            if members.len() > source_counts[source] {
                stats.cross_source += 1;
            }
        }
    }
    stats
}

/// Delay histogram of follow-up articles: for each cluster of at least
/// `min_cluster` articles, the time from its earliest article to every
/// later one, binned, as a percentage of all follow-ups.
#[derive(Debug, Clone, Default)]
pub struct FollowupHistogram {
    pub bin: Duration,
    /// percentage of follow-ups per bin, indexed by bin number
    pub percents: Vec<f64>,
    pub n_followups: u64,
}

impl FollowupHistogram {
    pub fn is_empty(&self) -> bool {
        self.n_followups == 0
    }

    /// Two-column CSV (hours, percent), plot-ready.
    pub fn render_csv(&self) -> String {
        let bin_hours = self.bin.num_seconds() as f64 / 3600.0;
        let mut out = String::from("hours,percent\n");
        for (i, pct) in self.percents.iter().enumerate() {
            out.push_str(&format!("{:.2},{:.4}\n", i as f64 * bin_hours, pct));
        }
        out
    }
}

pub fn followup_histogram(
    tree: &ClusterTree,
    corpus: &Corpus,
    level: ClusterLevel,
    min_cluster: usize,
    bin: Duration,
) -> FollowupHistogram {
    let bin_secs = bin.num_seconds().max(1);
    let mut counts: Vec<u64> = Vec::new();
    let mut total = 0u64;
    for members in clusters_at(tree, level) {
        if members.len() < min_cluster {
            continue;
        }
        let first = members
            .iter()
            .map(|&m| corpus.article(m as usize).published.timestamp())
            .min()
            .unwrap();
        for &m in &members {
            let delta = corpus.article(m as usize).published.timestamp() - first;
            if delta <= 0 {
                continue;
            }
            let idx = (delta / bin_secs) as usize;
            if counts.len() <= idx {
                counts.resize(idx + 1, 0);
            }
            counts[idx] += 1;
            total += 1;
        }
    }
    let percents = counts
        .iter()
        .map(|&c| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 })
        .collect();
    FollowupHistogram {
        bin,
        percents,
        n_followups: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::{hierarchical_cluster, ClusterTree};
    use crate::corpus::Article;
    use crate::simnet::{SimilarityEdge, SimilarityNetwork};
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn article(id: &str, source: &str, published: chrono::DateTime<Utc>) -> Article {
        Article {
            id: id.to_string(),
            source: source.to_string(),
            title: String::new(),
            body: String::new(),
            published,
            url: None,
        }
    }

    fn ts(day: u32, hour: u32) -> chrono::DateTime<Utc> {
        Utc.with_ymd_and_hms(2013, 4, day, hour, 0, 0).unwrap()
    }

    fn clustered_net(ids: &[&str], groups: &[&[u32]]) -> SimilarityNetwork {
        let mut edges = Vec::new();
        for group in groups {
            for &a in group.iter() {
                for &b in group.iter() {
                    if a != b {
                        edges.push(SimilarityEdge {
                            from: a,
                            to: b,
                            keyword: 0.8,
                            bm25f: 0.8,
                            ensemble: 0.8,
                        });
                    }
                }
            }
        }
        SimilarityNetwork {
            ids: ids.iter().map(|s| s.to_string()).collect(),
            edges,
        }
    }

    #[test]
    fn table_one_arithmetic() {
        let ensemble = ConfusionCounts {
            tp: 49,
            tn: 20642,
            fp: 4,
            fn_: 10,
        };
        assert_eq!(round3(ensemble.accuracy()), 0.999);
        assert!((ensemble.precision() - 49.0 / 53.0).abs() < 1e-12);
        assert!((ensemble.recall() - 49.0 / 59.0).abs() < 1e-12);
        assert_eq!(round3(ensemble.f1()), 0.875);
    }

    #[test]
    fn all_negative_baseline() {
        // predicting "not related" everywhere on a 59/20,705 split
        let c = ConfusionCounts {
            tp: 0,
            tn: 20646,
            fp: 0,
            fn_: 59,
        };
        assert!(c.accuracy() > 0.99);
        assert_eq!(c.recall(), 0.0);
        assert_eq!(c.f1(), 0.0);
    }

    proptest! {
        #[test]
        fn metric_identities(tp in 0u64..500, tn in 0u64..500, fp in 0u64..500, fn_ in 0u64..500) {
            let c = ConfusionCounts { tp, tn, fp, fn_ };
            prop_assert_eq!(c.total(), tp + tn + fp + fn_);
            if tp + fp > 0 {
                prop_assert!((c.precision() - tp as f64 / (tp + fp) as f64).abs() < 1e-12);
            }
            if tp + fn_ > 0 {
                prop_assert!((c.recall() - tp as f64 / (tp + fn_) as f64).abs() < 1e-12);
            }
            let (p, r) = (c.precision(), c.recall());
            if p + r > 0.0 {
                prop_assert!((c.f1() - 2.0 * p * r / (p + r)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn evaluate_window_exclusion_and_unknown_id() {
        let corpus = Corpus::from_articles(vec![
            article("a", "s1", ts(15, 10)),
            article("b", "s1", ts(16, 10)),
            article("c", "s2", ts(25, 10)),
        ])
        .unwrap();
        let labels = vec![
            LabeledPair { id_a: "a".into(), id_b: "b".into(), related: true },
            LabeledPair { id_a: "a".into(), id_b: "c".into(), related: false },
        ];
        let report = evaluate(&corpus, &labels, Duration::days(3), |_, _| PairPrediction {
            keyword: true,
            bm25f: true,
            ensemble: true,
        })
        .unwrap();
        assert_eq!(report.n_article_pairs, 1);
        assert_eq!(report.excluded_outside_window, 1);
        assert_eq!(report.counts[2].tp, 1);

        let bad = vec![LabeledPair { id_a: "a".into(), id_b: "zzz".into(), related: true }];
        assert!(matches!(
            evaluate(&corpus, &bad, Duration::days(3), |_, _| PairPrediction {
                keyword: false,
                bm25f: false,
                ensemble: false
            }),
            Err(Error::UnknownId(_))
        ));
    }

    fn singleton_tree(n: u32) -> (ClusterTree, Corpus) {
        let ids: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        let net = SimilarityNetwork {
            ids: ids.clone(),
            edges: Vec::new(),
        };
        let tree = hierarchical_cluster(&net, 0.15, 42);
        let corpus = Corpus::from_articles(
            (0..n)
                .map(|i| article(&format!("a{i}"), "s", ts(15, i % 24)))
                .collect(),
        )
        .unwrap();
        (tree, corpus)
    }

    #[test]
    fn all_singletons_empty_table() {
        let (tree, corpus) = singleton_tree(5);
        let table = cluster_size_table(&tree, &corpus, ClusterLevel::Top);
        assert_eq!(table.total.n_clusters, 0);
        assert_eq!(table.total.pct_of_corpus, 0.0);
        let assoc = association_stats(&tree, &corpus, ClusterLevel::Top);
        assert_eq!(assoc.same_source, 0);
        assert_eq!(assoc.cross_source, 0);
        let hist = followup_histogram(&tree, &corpus, ClusterLevel::Top, 10, Duration::hours(1));
        assert!(hist.is_empty());
    }

    #[test]
    fn one_cluster_of_twelve_in_hundred() {
        let ids: Vec<String> = (0..100).map(|i| format!("a{i:03}")).collect();
        let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        let members: Vec<u32> = (0..12).collect();
        let net = clustered_net(&id_refs, &[&members]);
        let tree = hierarchical_cluster(&net, 0.15, 42);
        let corpus = Corpus::from_articles(
            (0..100)
                .map(|i| article(&format!("a{i:03}"), "s", ts(15, 0) + Duration::minutes(i)))
                .collect(),
        )
        .unwrap();
        let table = cluster_size_table(&tree, &corpus, ClusterLevel::Top);
        assert_eq!(table.bins[1].n_clusters, 1);
        assert_eq!(table.bins[1].n_articles, 12);
        assert!((table.bins[1].pct_of_corpus - 12.0).abs() < 1e-9);
    }

    #[test]
    fn association_same_and_cross_source() {
        // 10-article fixture, hand-counted: cluster {0,1} same source,
        // cluster {2,3,4} mixed sources, rest singleton
        let ids: Vec<String> = (0..10).map(|i| format!("a{i}")).collect();
        let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        let net = clustered_net(&id_refs, &[&[0, 1], &[2, 3, 4]]);
        let tree = hierarchical_cluster(&net, 0.15, 42);
        let sources = ["p", "p", "q", "q", "r", "x", "x", "x", "x", "x"];
        let corpus = Corpus::from_articles(
            (0..10)
                .map(|i| article(&format!("a{i}"), sources[i], ts(15, 0) + Duration::minutes(i as i64)))
                .collect(),
        )
        .unwrap();
        let assoc = association_stats(&tree, &corpus, ClusterLevel::Top);
        // same source: a0,a1 (p+p) and a2,a3 (q+q) → 4
        assert_eq!(assoc.same_source, 4);
        // cross source: a2,a3,a4 (q,q,r mix) → 3
        assert_eq!(assoc.cross_source, 3);
    }

    #[test]
    fn followup_spike_at_24h() {
        let ids = ["a0", "a1"];
        let net = clustered_net(&ids, &[&[0, 1]]);
        let tree = hierarchical_cluster(&net, 0.15, 42);
        let corpus = Corpus::from_articles(vec![
            article("a0", "s", ts(15, 10)),
            article("a1", "s", ts(16, 10)),
        ])
        .unwrap();
        let hist = followup_histogram(&tree, &corpus, ClusterLevel::Top, 2, Duration::hours(1));
        assert_eq!(hist.n_followups, 1);
        assert_eq!(hist.percents[24], 100.0);
        assert!(hist.percents[..24].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn histogram_percentages_sum_to_100() {
        let ids: Vec<String> = (0..8).map(|i| format!("a{i}")).collect();
        let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        let members: Vec<u32> = (0..8).collect();
        let net = clustered_net(&id_refs, &[&members]);
        let tree = hierarchical_cluster(&net, 0.15, 42);
        let corpus = Corpus::from_articles(
            (0..8)
                .map(|i| article(&format!("a{i}"), "s", ts(15, 0) + Duration::minutes(i * 97)))
                .collect(),
        )
        .unwrap();
        let hist = followup_histogram(&tree, &corpus, ClusterLevel::Top, 2, Duration::hours(1));
        let sum: f64 = hist.percents.iter().sum();
        assert!((sum - 100.0).abs() < 0.01);
    }

    #[test]
    fn labels_csv_round_trip_and_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        std::fs::write(&path, "id_a,id_b,related\na,b,1\na,c,0\n").unwrap();
        let labels = load_labels(&path).unwrap();
        assert_eq!(labels.len(), 2);
        assert!(labels[0].related);
        assert!(!labels[1].related);

        std::fs::write(&path, "id_a,id_b,related\na,b,maybe\n").unwrap();
        match load_labels(&path) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }
}
