//! Relevance functions and the ranking pipeline.

mod intervals;
mod scores;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use intervals::{minimal_intervals, Interval};
pub use scores::{
    bm25, bm25_k, clarke_score, idf, lu_document_score, lu_interval_score, normalize_components, song_score, tf_idf,
    tp_from_span, tp_score,
};

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::index::StatTables;
use crate::lexicon::LemmaId;
use crate::query::{Query, SearchResult, TermStats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankFunction {
    /// Sorted by TP, then by BM25.
    TpBm25,
    /// Sorted by TP, then by TF-IDF.
    TpTfIdf,
    /// `alpha * SR + beta * IR + gamma * TP` over normalized components.
    WeiSum { alpha: f64, beta: f64, gamma: f64 },
    /// Sum of capped inverse interval lengths per document.
    IntervalSum,
    /// BM25 mixed with boundary-weighted interval scores.
    IntervalOpt,
    /// Sum of inverse-square interval weights per document.
    IntervalSumSq,
}

impl RankFunction {
    pub fn weisum(alpha: f64, beta: f64, gamma: f64) -> Self {
        RankFunction::WeiSum { alpha, beta, gamma }
    }

    /// The nine functions compared in the experiment grid.
    pub fn evaluated() -> Vec<RankFunction> {
        vec![
            RankFunction::TpBm25,
            RankFunction::TpTfIdf,
            RankFunction::weisum(0.0, 0.75, 0.25),
            RankFunction::weisum(0.0, 0.5, 0.5),
            RankFunction::weisum(0.0, 0.25, 0.75),
            RankFunction::weisum(0.0, 0.1, 0.9),
            RankFunction::IntervalSum,
            RankFunction::IntervalOpt,
            RankFunction::IntervalSumSq,
        ]
    }

    /// Whether scores are replaced by `1 / rank` after sorting.
    pub fn is_two_level(&self) -> bool {
        matches!(self, RankFunction::TpBm25 | RankFunction::TpTfIdf)
    }

    pub fn validate(&self) -> Result<()> {
        if let RankFunction::WeiSum { alpha, beta, gamma } = *self {
            let ok = [alpha, beta, gamma].iter().all(|w| *w >= 0.0 && w.is_finite())
                && (alpha + beta + gamma - 1.0).abs() < 1e-9;
            if !ok {
                return Err(Error::Config(format!("WeiSum weights must be non-negative and sum to 1, got {self}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for RankFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankFunction::TpBm25 => f.write_str("TP_BM25"),
            RankFunction::TpTfIdf => f.write_str("TP_TFIDF"),
            RankFunction::WeiSum { alpha, beta, gamma } => write!(f, "WeiSum({alpha},{beta},{gamma})"),
            RankFunction::IntervalSum => f.write_str("IntervalSum"),
            RankFunction::IntervalOpt => f.write_str("IntervalOpt"),
            RankFunction::IntervalSumSq => f.write_str("IntervalSumSq"),
        }
    }
}

impl FromStr for RankFunction {
    type Err = Error;

    /// Accepts the display form, e.g. `TP_BM25` or `WeiSum(0,0.1,0.9)`,
    /// case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let f = match t.as_str() {
            "tp_bm25" => RankFunction::TpBm25,
            "tp_tfidf" => RankFunction::TpTfIdf,
            "intervalsum" => RankFunction::IntervalSum,
            "intervalopt" => RankFunction::IntervalOpt,
            "intervalsumsq" => RankFunction::IntervalSumSq,
            _ => {
                let args = t
                    .strip_prefix("weisum")
                    .map(|r| r.trim_start_matches(['(', ',', '_']).trim_end_matches(')'))
                    .ok_or_else(|| Error::Config(format!("unknown rank function {s:?}")))?;
                let w: Vec<f64> = args
                    .split([',', '_'])
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Config(format!("bad WeiSum weights in {s:?}")))?;
                match w[..] {
                    [a, b, g] => RankFunction::weisum(a, b, g),
                    [b, g] => RankFunction::weisum(0.0, b, g),
                    _ => return Err(Error::Config(format!("WeiSum needs three weights: {s:?}"))),
                }
            }
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankConfig {
    pub function: RankFunction,
    pub k1: f64,
    pub b: f64,
    pub lambda_lu: f64,
    pub k_clarke: f64,
    pub lambda_song: f64,
    pub gamma_song: f64,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            function: RankFunction::weisum(0.0, 0.1, 0.9),
            k1: 1.2,
            b: 0.75,
            lambda_lu: 0.4,
            k_clarke: 16.0,
            lambda_song: 1.0,
            gamma_song: 1.0,
        }
    }
}

impl RankConfig {
    pub fn with_function(function: RankFunction) -> Self {
        RankConfig { function, ..RankConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.function.validate()?;
        if !(self.k1 > 0.0) {
            return Err(Error::Config(format!("k1 must be positive, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::Config(format!("b must lie in [0, 1], got {}", self.b)));
        }
        if !(0.0..=1.0).contains(&self.lambda_lu) {
            return Err(Error::Config(format!("lambda_lu must lie in [0, 1], got {}", self.lambda_lu)));
        }
        if !(self.k_clarke > 0.0) {
            return Err(Error::Config(format!("k_clarke must be positive, got {}", self.k_clarke)));
        }
        Ok(())
    }

    /// Sets one `key=value` option. Unknown keys return `Ok(false)`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        let num = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: not a number: {value:?}")))
        };
        match key.trim() {
            "function" | "function_id" => self.function = value.parse()?,
            "k1" => self.k1 = num()?,
            "b" => self.b = num()?,
            "lambda_lu" => self.lambda_lu = num()?,
            "k_clarke" => self.k_clarke = num()?,
            "lambda_song" => self.lambda_song = num()?,
            "gamma_song" => self.gamma_song = num()?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Reads `key=value` lines; `#` starts a comment. Keys this type does
    /// not know are ignored so one file can configure several components.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RankConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("line {}", n + 1), "expected key=value"))?;
            config.apply(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Scores and sorts results by descending relevance, ties broken by
/// ascending `(doc, p)`.
///
/// Document-level functions give all results of a document the same score.
/// Two-level functions sort by TP, then by the IR score, and store `1 / rank`
/// in `r`. Far results have TP 0 and no intervals.
pub fn rank(
    results: Vec<SearchResult>,
    config: &RankConfig,
    query: &Query,
    terms: &TermStats,
    stats: &StatTables,
) -> Result<Vec<SearchResult>> {
    config.validate()?;
    let lemmas: Vec<LemmaId> = query.lemma_ids();
    let n = query.len();
    let tp = |r: &SearchResult| if r.is_far() { 0.0 } else { tp_from_span(r.l - 1, n) };
    let mut bm25_cache: HashMap<DocId, f64> = HashMap::new();
    let mut bm25_of = |doc: DocId| {
        *bm25_cache
            .entry(doc)
            .or_insert_with(|| bm25(&lemmas, doc, terms, stats, config.k1, config.b))
    };
    let per_doc_sum = |weight: &dyn Fn(&SearchResult) -> f64| {
        let mut sums: HashMap<DocId, f64> = HashMap::new();
        for r in &results {
            *sums.entry(r.doc).or_insert(0.0) += if r.is_far() { 0.0 } else { weight(r) };
        }
        sums
    };

    let mut keyed: Vec<(f64, f64, SearchResult)> = match config.function {
        RankFunction::TpBm25 => results.iter().map(|r| (tp(r), bm25_of(r.doc), *r)).collect(),
        RankFunction::TpTfIdf => results
            .iter()
            .map(|r| (tp(r), tf_idf(&lemmas, r.doc, terms, stats), *r))
            .collect(),
        RankFunction::WeiSum { beta, gamma, .. } => {
            let ir: Vec<f64> = results.iter().map(|r| bm25_of(r.doc)).collect();
            let tps: Vec<f64> = results.iter().map(tp).collect();
            normalize_components(&ir, &tps)
                .into_iter()
                .zip(&results)
                .map(|((i, t), r)| (beta * i + gamma * t, 0.0, *r))
                .collect()
        }
        RankFunction::IntervalSum => {
            let sums = per_doc_sum(&|r| clarke_score(r.l, config.k_clarke));
            results.iter().map(|r| (sums[&r.doc], 0.0, *r)).collect()
        }
        RankFunction::IntervalSumSq => {
            let sums = per_doc_sum(&|r| tp_from_span(r.l - 1, n));
            results.iter().map(|r| (sums[&r.doc], 0.0, *r)).collect()
        }
        RankFunction::IntervalOpt => {
            let weight = |l: LemmaId| idf(terms.df(l), stats.dc());
            let weights: Vec<f64> = lemmas.iter().map(|&l| weight(l)).collect();
            let mut intervals: HashMap<DocId, Vec<f64>> = HashMap::new();
            for r in &results {
                let entry = intervals.entry(r.doc).or_default();
                if let (false, Some((bl, br))) = (r.is_far(), r.boundary) {
                    entry.push(lu_interval_score(weight(bl), weight(br), r.l));
                }
            }
            let lambda = config.lambda_lu;
            let mut doc_score: HashMap<DocId, f64> = HashMap::new();
            for (&doc, scores) in &intervals {
                let dl = f64::from(stats.dl(doc).unwrap_or(0));
                let k = bm25_k(dl, stats.avg_dl(), config.k1, config.b);
                let lu = lu_document_score(scores, &weights, k, config.k1);
                doc_score.insert(doc, (1.0 - lambda) * bm25_of(doc) + 2.0 * lambda * lu);
            }
            results.iter().map(|r| (doc_score[&r.doc], 0.0, *r)).collect()
        }
    };
    keyed.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then(a.2.doc.cmp(&b.2.doc))
            .then(a.2.p.cmp(&b.2.p))
    });
    let two_level = config.function.is_two_level();
    Ok(keyed
        .into_iter()
        .enumerate()
        .map(|(i, (score, _, mut r))| {
            r.r = if two_level { 1.0 / (i + 1) as f64 } else { score };
            r
        })
        .collect())
}
