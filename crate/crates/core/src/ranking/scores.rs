//! Scalar scoring formulas.

use crate::corpus::DocId;
use crate::index::StatTables;
use crate::lexicon::LemmaId;
use crate::query::TermStats;

/// Proximity rank of a fragment of span `span` (last minus first position)
/// holding `n` query words. A one-word query scores 1.
pub fn tp_from_span(span: u32, n: usize) -> f64 {
    if n <= 1 {
        return 1.0;
    }
    let denom = f64::from(span) - (n as f64 - 2.0);
    1.0 / (denom * denom)
}

/// Proximity rank of one position per query word.
pub fn tp_score(positions: &[u32]) -> f64 {
    let (Some(lo), Some(hi)) = (positions.iter().min(), positions.iter().max()) else {
        return 1.0;
    };
    tp_from_span(hi - lo, positions.len())
}

/// Smoothed IDF, never negative.
pub fn idf(df: u32, dc: u32) -> f64 {
    let (df, dc) = (f64::from(df), f64::from(dc));
    (1.0 + (dc - df + 0.5) / (df + 0.5)).ln().max(0.0)
}

/// Length normalization `K` of BM25 for a document of length `dl`.
pub fn bm25_k(dl: f64, avg_dl: f64, k1: f64, b: f64) -> f64 {
    let ratio = if avg_dl > 0.0 { dl / avg_dl } else { 1.0 };
    k1 * (1.0 - b + b * ratio)
}

pub fn bm25(lemmas: &[LemmaId], doc: DocId, terms: &TermStats, stats: &StatTables, k1: f64, b: f64) -> f64 {
    let dl = f64::from(stats.dl(doc).unwrap_or(0));
    let k = bm25_k(dl, stats.avg_dl(), k1, b);
    lemmas
        .iter()
        .map(|&e| {
            let tf = f64::from(terms.tf(e, doc));
            if tf == 0.0 {
                return 0.0;
            }
            idf(terms.df(e), stats.dc()) * tf * (1.0 + k1) / (tf + k)
        })
        .sum()
}

pub fn tf_idf(lemmas: &[LemmaId], doc: DocId, terms: &TermStats, stats: &StatTables) -> f64 {
    lemmas
        .iter()
        .map(|&e| f64::from(terms.tf(e, doc)) * idf(terms.df(e), stats.dc()))
        .sum()
}

/// `min(K / length, 1)`.
pub fn clarke_score(length: u32, k: f64) -> f64 {
    (k / f64::from(length)).min(1.0)
}

/// Boundary-weighted inverse-square interval score.
pub fn lu_interval_score(w_l: f64, w_r: f64, length: u32) -> f64 {
    let len = f64::from(length);
    w_l * w_r / (len * len)
}

/// Saturated sum of interval scores for one document.
pub fn lu_document_score(interval_scores: &[f64], weights: &[f64], k: f64, k1: f64) -> f64 {
    let sum: f64 = interval_scores.iter().sum();
    let k_prime = k * weights.iter().map(|w| w.min(1.0)).sum::<f64>();
    let denom = sum + k_prime;
    if denom == 0.0 {
        0.0
    } else {
        sum * (1.0 + k1) / denom
    }
}

pub fn song_score(n_i: u32, length: u32, lambda: f64, gamma: f64) -> f64 {
    f64::from(n_i).powf(lambda) / f64::from(length).powf(gamma)
}

/// Divides each component by its maximum over the set; an all-zero
/// component stays zero.
pub fn normalize_components(ir: &[f64], tp: &[f64]) -> Vec<(f64, f64)> {
    fn scale(v: &[f64]) -> Vec<f64> {
        let max = v.iter().copied().fold(0.0f64, f64::max);
        v.iter().map(|&x| if max > 0.0 { x / max } else { 0.0 }).collect()
    }
    scale(ir).into_iter().zip(scale(tp)).collect()
}
