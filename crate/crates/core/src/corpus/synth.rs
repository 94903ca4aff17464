use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Geometric, Zipf};

use super::{DocId, Document};
use crate::lexicon::tokenize;

/// Parameters of a synthetic Zipf-distributed corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub doc_count: u32,
    pub mean_doc_len: u32,
    pub vocab_size: u32,
    pub zipf_exponent: f64,
    pub rng_seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            doc_count: 1000,
            mean_doc_len: 150,
            vocab_size: 5000,
            zipf_exponent: 1.1,
            rng_seed: 42,
        }
    }
}

/// Token text for a vocabulary rank (rank 1 is the most probable word).
pub fn synthetic_word(rank: u64) -> String {
    format!("w{rank}")
}

/// Generates documents whose words are drawn from a Zipf distribution over
/// `vocab_size` synthetic words. Lengths are `mean/2` plus a geometric tail
/// with mean `mean/2`, so no document is empty.
pub fn generate_corpus(spec: &GenSpec) -> Vec<Document> {
    if spec.doc_count == 0 {
        return Vec::new();
    }
    let mut rng = StdRng::seed_from_u64(spec.rng_seed);
    let vocab = f64::from(spec.vocab_size.max(1));
    let zipf = Zipf::new(vocab, spec.zipf_exponent.max(f64::MIN_POSITIVE))
        .expect("zipf parameters are positive");
    let base = spec.mean_doc_len / 2;
    let tail_mean = f64::from((spec.mean_doc_len - base).max(1));
    let tail = Geometric::new(1.0 / (tail_mean + 1.0)).expect("probability in (0, 1]");
    let vocabulary: Vec<String> = (1..=spec.vocab_size.max(1) as u64).map(synthetic_word).collect();

    (0..spec.doc_count)
        .map(|i| {
            let len = (u64::from(base) + tail.sample(&mut rng)).max(1);
            let words: Vec<&str> = (0..len)
                .map(|_| vocabulary[zipf.sample(&mut rng) as usize - 1].as_str())
                .collect();
            Document {
                id: DocId(i),
                text: words.join(" "),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryGenSpec {
    pub count: usize,
    /// Relative weights for query lengths 1, 2, 3, ...
    pub length_weights: Vec<f64>,
    /// Width of the document window the query words are drawn from.
    pub window: u32,
    pub rng_seed: u64,
}

impl Default for QueryGenSpec {
    fn default() -> Self {
        QueryGenSpec {
            count: 500,
            // 80% of queries have one to three words, mean length about 2.4
            length_weights: vec![0.35, 0.30, 0.15, 0.09, 0.05, 0.02, 0.02, 0.01, 0.01],
            window: 24,
            rng_seed: 7,
        }
    }
}

/// Samples queries from word windows of corpus documents, so most queries
/// have at least one matching document.
pub fn generate_queries(corpus: &[Document], spec: &QueryGenSpec) -> Vec<String> {
    let docs: Vec<Vec<String>> = corpus
        .iter()
        .map(|d| tokenize(&d.text).into_iter().map(|(t, _)| t).collect())
        .filter(|t: &Vec<String>| !t.is_empty())
        .collect();
    if spec.count == 0 || docs.is_empty() || spec.length_weights.is_empty() {
        return Vec::new();
    }
    let mut rng = StdRng::seed_from_u64(spec.rng_seed);
    let lengths = WeightedIndex::new(&spec.length_weights).expect("non-negative weights with a positive sum");
    let mut queries = Vec::with_capacity(spec.count);
    while queries.len() < spec.count {
        let want = lengths.sample(&mut rng) + 1;
        let tokens = &docs[rng.random_range(0..docs.len())];
        let width = (spec.window as usize).max(want).min(tokens.len());
        let start = rng.random_range(0..=tokens.len() - width);
        let mut picked = rand::seq::index::sample(&mut rng, width, want.min(width)).into_vec();
        picked.sort_unstable();
        let words: Vec<&str> = picked.iter().map(|&i| tokens[start + i].as_str()).collect();
        queries.push(words.join(" "));
    }
    queries
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn zero_documents() {
        let spec = GenSpec { doc_count: 0, ..Default::default() };
        assert!(generate_corpus(&spec).is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GenSpec { doc_count: 20, ..Default::default() };
        assert_eq!(generate_corpus(&spec), generate_corpus(&spec));
        let other = GenSpec { rng_seed: 43, ..spec };
        assert_ne!(generate_corpus(&spec), generate_corpus(&other));

        let corpus = generate_corpus(&spec);
        let q = QueryGenSpec { count: 30, ..Default::default() };
        assert_eq!(generate_queries(&corpus, &q), generate_queries(&corpus, &q));
        assert!(generate_queries(&corpus, &QueryGenSpec { count: 0, ..q }).is_empty());
    }

    #[test]
    fn rank_frequency_slope_follows_exponent() {
        let spec = GenSpec {
            doc_count: 400,
            mean_doc_len: 150,
            vocab_size: 5000,
            zipf_exponent: 1.1,
            rng_seed: 1,
        };
        let mut counts: HashMap<String, f64> = HashMap::new();
        for doc in generate_corpus(&spec) {
            for w in doc.text.split(' ') {
                *counts.entry(w.to_string()).or_default() += 1.0;
            }
        }
        let mut freq: Vec<f64> = counts.into_values().collect();
        freq.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // least squares over the well-sampled head of the distribution
        let pts: Vec<(f64, f64)> = freq
            .iter()
            .take(200)
            .enumerate()
            .map(|(i, &f)| (((i + 1) as f64).ln(), f.ln()))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let cov: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let var: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = cov / var;
        assert!((slope + 1.1).abs() <= 0.11, "slope {slope}");
    }

    #[test]
    fn query_lengths_are_mostly_short() {
        let corpus = generate_corpus(&GenSpec { doc_count: 50, ..Default::default() });
        let queries = generate_queries(&corpus, &QueryGenSpec::default());
        assert_eq!(queries.len(), 500);
        let short = queries.iter().filter(|q| q.split(' ').count() <= 3).count();
        let frac = short as f64 / queries.len() as f64;
        assert!((0.7..=0.9).contains(&frac), "{frac}");
    }
}
