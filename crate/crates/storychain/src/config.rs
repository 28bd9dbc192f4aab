//! Pipeline configuration: flat key = value text file, every scoring and
//! clustering parameter exposed with its default.

use std::path::{Path, PathBuf};

use chrono::Duration;

use crate::analysis::ClusterLevel;
use crate::corpus::CorpusFormat;
use crate::error::{Error, Result};
use crate::retrieval::Bm25fParams;

/// A classifier threshold: fixed, or calibrated on the labeled pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSetting {
    Fixed(f64),
    Calibrate,
}

impl std::str::FromStr for ThresholdSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "calibrate" {
            return Ok(ThresholdSetting::Calibrate);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("threshold must be a number or \"calibrate\", got {s:?}")))?;
        if !(0.0 < v && v < 1.0) {
            return Err(Error::Config(format!("threshold must be in (0,1), got {v}")));
        }
        Ok(ThresholdSetting::Fixed(v))
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus_path: PathBuf,
    pub corpus_format: CorpusFormat,
    /// moving window in days
    pub window_days: f64,
    pub keyword_top_k: usize,
    pub keyword_min_score: f64,
    pub k1: f64,
    pub b_title: f64,
    pub b_body: f64,
    pub boost_title: f64,
    pub boost_body: f64,
    pub bo1_terms: usize,
    pub theta_keyword: ThresholdSetting,
    pub theta_bm25f: ThresholdSetting,
    pub theta_ensemble: ThresholdSetting,
    pub labels_path: Option<PathBuf>,
    pub teleport: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// pair-scoring worker threads, 0 = all cores
    pub workers: usize,
    pub index_cache: bool,
    pub stats_level: ClusterLevel,
    pub min_cluster: usize,
    pub histogram_bin_hours: f64,
    pub dump_profiles: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_path: PathBuf::from("corpus.jsonl"),
            corpus_format: CorpusFormat::Jsonl,
            window_days: 3.0,
            keyword_top_k: 100,
            keyword_min_score: 100.0,
            k1: 1.2,
            b_title: 1.0,
            b_body: 1.0,
            boost_title: 2.0,
            boost_body: 1.0,
            bo1_terms: 20,
            theta_keyword: ThresholdSetting::Calibrate,
            theta_bm25f: ThresholdSetting::Calibrate,
            theta_ensemble: ThresholdSetting::Calibrate,
            labels_path: None,
            teleport: 0.15,
            seed: 42,
            output_dir: PathBuf::from("out"),
            workers: 0,
            index_cache: false,
            stats_level: ClusterLevel::Top,
            min_cluster: 10,
            histogram_bin_hours: 1.0,
            dump_profiles: false,
        }
    }
}

impl PipelineConfig {
    pub fn window(&self) -> Duration {
        Duration::seconds((self.window_days * 86_400.0).round() as i64)
    }

    pub fn bm25f_params(&self) -> Bm25fParams {
        Bm25fParams {
            k1: self.k1,
            b: [self.b_title, self.b_body],
            boost: [self.boost_title, self.boost_body],
        }
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("invalid value for {key}: {what}"));
        macro_rules! num {
            ($t:ty) => {
                value.parse::<$t>().map_err(|_| bad(value))?
            };
        }
        match key {
            "corpus_path" => self.corpus_path = PathBuf::from(value),
            "corpus_format" => self.corpus_format = value.parse()?,
            "window_days" => self.window_days = num!(f64),
            "keyword_top_k" => self.keyword_top_k = num!(usize),
            "keyword_min_score" => self.keyword_min_score = num!(f64),
            "k1" => self.k1 = num!(f64),
            "b_title" => self.b_title = num!(f64),
            "b_body" => self.b_body = num!(f64),
            "boost_title" => self.boost_title = num!(f64),
            "boost_body" => self.boost_body = num!(f64),
            "bo1_terms" => self.bo1_terms = num!(usize),
            "theta_keyword" => self.theta_keyword = value.parse()?,
            "theta_bm25f" => self.theta_bm25f = value.parse()?,
            "theta_ensemble" => self.theta_ensemble = value.parse()?,
            "labels_path" => self.labels_path = Some(PathBuf::from(value)),
            "teleport" => self.teleport = num!(f64),
            "seed" => self.seed = num!(u64),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "workers" => self.workers = num!(usize),
            "index_cache" => self.index_cache = num!(bool),
            "stats_level" => self.stats_level = value.parse()?,
            "min_cluster" => self.min_cluster = num!(usize),
            "histogram_bin_hours" => self.histogram_bin_hours = num!(f64),
            "dump_profiles" => self.dump_profiles = num!(bool),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_days <= 0.0 {
            return Err(Error::Config("window_days must be positive".into()));
        }
        if !(0.0 < self.teleport && self.teleport < 1.0) {
            return Err(Error::Config("teleport must be in (0,1)".into()));
        }
        if self.keyword_top_k == 0 || self.bo1_terms == 0 {
            return Err(Error::Config("keyword_top_k and bo1_terms must be positive".into()));
        }
        if self.histogram_bin_hours <= 0.0 {
            return Err(Error::Config("histogram_bin_hours must be positive".into()));
        }
        self.bm25f_params().validate()
    }
}

/// Parses a flat key = value config file. '#' starts a comment.
pub fn load_config<P: AsRef<Path>>(path: P) -> Result<PipelineConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut cfg = PipelineConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        cfg.apply(key.trim(), value.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}
