//! Comparison of additional-index results against baseline results.

mod metrics;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use metrics::{ep, levenshtein, ndcg_at, precision_at, records_equal};

use crate::error::{Error, Result};
use crate::index::IndexSet;
use crate::query::{search_ordinary, two_step_search, Query, SearchOutput, DEFAULT_FIRST_STEP_THRESHOLD};
use crate::ranking::{rank, RankConfig, RankFunction};

/// Where the compared (instance) result list comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InstanceSource {
    /// Two-step search over the additional indexes.
    #[default]
    TwoStep,
    /// The baseline search itself; every metric must come out perfect.
    Ideal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub lrd: u32,
    pub n_values: Vec<usize>,
    pub max_query_lengths: Vec<usize>,
    pub first_step_threshold: usize,
    /// Largest N of the NDCG surface.
    pub surface_n: usize,
    /// Largest max|Q| of the NDCG surface.
    pub surface_max_q: usize,
    /// Scoring parameters; the function field is overridden per function.
    pub rank: RankConfig,
    pub instance: InstanceSource,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            lrd: 50,
            n_values: vec![10, 30],
            max_query_lengths: vec![3, 5, 9],
            first_step_threshold: DEFAULT_FIRST_STEP_THRESHOLD,
            surface_n: 30,
            surface_max_q: 9,
            rank: RankConfig::default(),
            instance: InstanceSource::TwoStep,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lrd < 1 {
            return Err(Error::Config("lrd must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::Config("n_values must be non-empty and positive".into()));
        }
        if self.max_query_lengths.is_empty() {
            return Err(Error::Config("max_query_lengths must be non-empty".into()));
        }
        self.rank.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub levenshtein: f64,
    pub precision: f64,
    pub ndcg: f64,
}

/// All three metrics for lists cut at `n`.
pub fn compare(ideal: &[crate::query::SearchResult], instance: &[crate::query::SearchResult], n: usize, lrd: u32) -> Metrics {
    let cut = |v: &[crate::query::SearchResult]| v.len().min(n);
    Metrics {
        levenshtein: levenshtein(&ideal[..cut(ideal)], &instance[..cut(instance)], lrd) as f64,
        precision: precision_at(ideal, instance, n, lrd),
        ndcg: ndcg_at(ideal, instance, n, lrd),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub function: RankFunction,
    pub n: usize,
    pub max_q: usize,
    /// Number of queries in the bucket; means are NaN when it is zero.
    pub queries: usize,
    pub mean_levenshtein: f64,
    pub mean_precision: f64,
    pub mean_ndcg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub function: RankFunction,
    pub n: usize,
    pub max_q: usize,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub query: usize,
    pub length: usize,
    pub function: RankFunction,
    pub n: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub surface: Vec<SurfacePoint>,
    /// Metrics of every query at every report cut-off.
    pub per_query: Vec<QueryMetrics>,
}

impl EvalReport {
    pub fn row(&self, function: RankFunction, n: usize, max_q: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.function == function && r.n == n && r.max_q == max_q)
    }

    pub fn report_tsv(&self) -> String {
        let mut out = String::from("function_id\tN\tmax_q\tmean_levenshtein\tmean_precision\tmean_ndcg\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.function, r.n, r.max_q, r.mean_levenshtein, r.mean_precision, r.mean_ndcg
            );
        }
        out
    }

    pub fn surface_tsv(&self) -> String {
        let mut out = String::from("function_id\tN\tmax_q\tndcg\n");
        for s in &self.surface {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", s.function, s.n, s.max_q, s.ndcg);
        }
        out
    }

    pub fn write_report(&self, path: &Path) -> Result<()> {
        fs::write(path, self.report_tsv())?;
        Ok(())
    }

    pub fn write_surface(&self, path: &Path) -> Result<()> {
        fs::write(path, self.surface_tsv())?;
        Ok(())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Ranked Ideal and Instance lists of one query under one function.
pub fn ranked_lists(
    query: &Query,
    ideal: &SearchOutput,
    instance: &SearchOutput,
    function: RankFunction,
    config: &EvalConfig,
    index: &IndexSet,
) -> Result<(Vec<crate::query::SearchResult>, Vec<crate::query::SearchResult>)> {
    let rc = RankConfig { function, ..config.rank };
    let stats = index.stats();
    let a = rank(ideal.results.clone(), &rc, query, &ideal.stats, stats)?;
    let b = rank(instance.results.clone(), &rc, query, &instance.stats, stats)?;
    Ok((a, b))
}

/// Runs both search paths for every query, ranks each with every function
/// and averages the metrics per cut-off and cumulative query-length bucket.
pub fn run_experiment(
    queries: &[Query],
    index: &IndexSet,
    functions: &[RankFunction],
    config: &EvalConfig,
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    config.validate()?;
    for f in functions {
        f.validate()?;
    }
    let max_n = config.surface_n.max(config.n_values.iter().copied().max().unwrap_or(0));
    // ndcg[f][q][n - 1] and the report metrics per (f, q, n index).
    let mut ndcg = vec![vec![vec![0.0; max_n]; queries.len()]; functions.len()];
    let mut report = EvalReport::default();
    for (qi, query) in queries.iter().enumerate() {
        let ideal = search_ordinary(query, index, None)?;
        let instance = match config.instance {
            InstanceSource::TwoStep => two_step_search(query, index, config.first_step_threshold)?,
            InstanceSource::Ideal => ideal.clone(),
        };
        for (fi, &function) in functions.iter().enumerate() {
            let (a, b) = ranked_lists(query, &ideal, &instance, function, config, index)?;
            for n in 1..=max_n {
                ndcg[fi][qi][n - 1] = ndcg_at(&a, &b, n, config.lrd);
            }
            for &n in &config.n_values {
                report.per_query.push(QueryMetrics {
                    query: qi,
                    length: query.len(),
                    function,
                    n,
                    metrics: compare(&a, &b, n, config.lrd),
                });
            }
        }
    }
    for &function in functions {
        for &n in &config.n_values {
            for &max_q in &config.max_query_lengths {
                let bucket: Vec<&QueryMetrics> = report
                    .per_query
                    .iter()
                    .filter(|m| m.function == function && m.n == n && m.length <= max_q)
                    .collect();
                report.rows.push(ReportRow {
                    function,
                    n,
                    max_q,
                    queries: bucket.len(),
                    mean_levenshtein: mean(bucket.iter().map(|m| m.metrics.levenshtein)),
                    mean_precision: mean(bucket.iter().map(|m| m.metrics.precision)),
                    mean_ndcg: mean(bucket.iter().map(|m| m.metrics.ndcg)),
                });
            }
        }
    }
    for (fi, &function) in functions.iter().enumerate() {
        for n in 1..=config.surface_n {
            for max_q in 1..=config.surface_max_q {
                let values = queries
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| q.len() <= max_q)
                    .map(|(qi, _)| ndcg[fi][qi][n - 1]);
                report.surface.push(SurfacePoint { function, n, max_q, ndcg: mean(values) });
            }
        }
    }
    Ok(report)
}
