use std::collections::{BTreeMap, HashMap};

use proptest::prelude::*;
use proxsearch::corpus::{DocId, Document};
use proxsearch::index::{build_indexes, IndexSet};
use proxsearch::lexicon::{tokenize, LemmaId, LemmaTable, Lexicon, LexiconConfig};
use proxsearch::query::{two_step_search, Query, SearchResult, FAR};
use proxsearch::ranking::{rank, RankConfig, RankFunction};
use proxsearch::Error;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Setup {
    index: IndexSet,
    tokens: Vec<Vec<LemmaId>>,
}

fn setup(seed: u64) -> Setup {
    let mut rng = StdRng::seed_from_u64(seed);
    let texts: Vec<String> = (0..60)
        .map(|_| {
            let len = rng.random_range(1..40);
            (0..len)
                .map(|_| {
                    let x: f64 = rng.random();
                    format!("t{}", (x * x * 20.0) as usize)
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let docs: Vec<Document> =
        texts.iter().enumerate().map(|(i, t)| Document { id: DocId(i as u32), text: t.clone() }).collect();
    let config = LexiconConfig { sw_count: 3, fu_count: 4, ts: 9, max_distance: 4 };
    let lexicon = Lexicon::build(texts.iter().map(String::as_str), LemmaTable::Identity, config).unwrap();
    let index = build_indexes(&docs, &lexicon).unwrap();
    let tokens = texts
        .iter()
        .map(|t| tokenize(t).into_iter().map(|(w, _)| lexicon.id(&w).unwrap()).collect())
        .collect();
    Setup { index, tokens }
}

/// BM25 and TF-IDF computed directly from the token lists.
struct Brute<'a> {
    tokens: &'a [Vec<LemmaId>],
    lemmas: Vec<LemmaId>,
}

impl Brute<'_> {
    fn tf(&self, l: LemmaId, d: DocId) -> f64 {
        self.tokens[d.0 as usize].iter().filter(|&&x| x == l).count() as f64
    }

    fn idf(&self, l: LemmaId) -> f64 {
        let n = self.tokens.len() as f64;
        let df = self.tokens.iter().filter(|t| t.contains(&l)).count() as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln().max(0.0)
    }

    fn k(&self, d: DocId) -> f64 {
        let total: usize = self.tokens.iter().map(Vec::len).sum();
        let avg = total as f64 / self.tokens.len() as f64;
        1.2 * (0.25 + 0.75 * self.tokens[d.0 as usize].len() as f64 / avg)
    }

    fn bm25(&self, d: DocId) -> f64 {
        self.lemmas
            .iter()
            .map(|&l| {
                let tf = self.tf(l, d);
                self.idf(l) * tf * 2.2 / (tf + self.k(d))
            })
            .sum()
    }

    fn tf_idf(&self, d: DocId) -> f64 {
        self.lemmas.iter().map(|&l| self.tf(l, d) * self.idf(l)).sum()
    }
}

fn tp(r: &SearchResult, n: usize) -> f64 {
    if r.l == FAR {
        0.0
    } else if n == 1 {
        1.0
    } else {
        let d = f64::from(r.l - 1) - (n as f64 - 2.0);
        1.0 / (d * d)
    }
}

fn sorted_by(mut keyed: Vec<(f64, f64, SearchResult)>) -> Vec<(f64, SearchResult)> {
    keyed.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(b.1.partial_cmp(&a.1).unwrap())
            .then((a.2.doc, a.2.p).cmp(&(b.2.doc, b.2.p)))
    });
    keyed.into_iter().map(|(s, _, r)| (s, r)).collect()
}

fn brute_rank(function: RankFunction, results: &[SearchResult], n: usize, brute: &Brute<'_>) -> Vec<(f64, SearchResult)> {
    match function {
        RankFunction::TpBm25 | RankFunction::TpTfIdf => {
            let ir = |d| if function == RankFunction::TpBm25 { brute.bm25(d) } else { brute.tf_idf(d) };
            let keyed = results.iter().map(|r| (tp(r, n), ir(r.doc), *r)).collect();
            sorted_by(keyed).into_iter().enumerate().map(|(i, (_, r))| (1.0 / (i + 1) as f64, r)).collect()
        }
        RankFunction::WeiSum { beta, gamma, .. } => {
            let max_ir = results.iter().map(|r| brute.bm25(r.doc)).fold(0.0, f64::max);
            let max_tp = results.iter().map(|r| tp(r, n)).fold(0.0, f64::max);
            let norm = |x: f64, m: f64| if m > 0.0 { x / m } else { 0.0 };
            sorted_by(
                results
                    .iter()
                    .map(|r| (beta * norm(brute.bm25(r.doc), max_ir) + gamma * norm(tp(r, n), max_tp), 0.0, *r))
                    .collect(),
            )
        }
        RankFunction::IntervalSum | RankFunction::IntervalSumSq => {
            let mut sums: HashMap<DocId, f64> = HashMap::new();
            for r in results {
                let w = if r.l == FAR {
                    0.0
                } else if function == RankFunction::IntervalSum {
                    (16.0 / f64::from(r.l)).min(1.0)
                } else {
                    tp(r, n)
                };
                *sums.entry(r.doc).or_default() += w;
            }
            sorted_by(results.iter().map(|r| (sums[&r.doc], 0.0, *r)).collect())
        }
        RankFunction::IntervalOpt => {
            let mut by_doc: BTreeMap<DocId, f64> = BTreeMap::new();
            for r in results {
                let sum = by_doc.entry(r.doc).or_default();
                if r.l != FAR {
                    let toks = &brute.tokens[r.doc.0 as usize];
                    let left = toks[r.p as usize];
                    let right = toks[(r.p + r.l - 1) as usize];
                    let len = f64::from(r.l);
                    *sum += brute.idf(left) * brute.idf(right) / (len * len);
                }
            }
            let weights: f64 = brute.lemmas.iter().map(|&l| brute.idf(l).min(1.0)).sum();
            let score = |d: DocId| {
                let s = by_doc[&d];
                let denom = s + brute.k(d) * weights;
                let lu = if denom == 0.0 { 0.0 } else { s * 2.2 / denom };
                0.6 * brute.bm25(d) + 0.8 * lu
            };
            sorted_by(results.iter().map(|r| (score(r.doc), 0.0, *r)).collect())
        }
    }
}

#[test]
fn every_function_matches_direct_computation() {
    for seed in 0..4 {
        let s = setup(seed);
        let lexicon = s.index.lexicon();
        let mut rng = StdRng::seed_from_u64(100 + seed);
        for _ in 0..40 {
            let n = rng.random_range(1..=4);
            let qs: Vec<LemmaId> = (0..n).map(|_| LemmaId(rng.random_range(0..lexicon.len() as u32))).collect();
            let q = Query::from_lemmas(&qs, lexicon).unwrap();
            let out = two_step_search(&q, &s.index, 15).unwrap();
            let mut lemmas = qs.clone();
            lemmas.sort();
            lemmas.dedup();
            let brute = Brute { tokens: &s.tokens, lemmas };
            for function in RankFunction::evaluated() {
                let config = RankConfig::with_function(function);
                let got = rank(out.results.clone(), &config, &q, &out.stats, s.index.stats()).unwrap();
                let want = brute_rank(function, &out.results, n, &brute);
                assert_eq!(got.len(), want.len());
                for (g, (score, w)) in got.iter().zip(&want) {
                    assert_eq!((g.doc, g.p, g.l), (w.doc, w.p, w.l), "{function} {qs:?}");
                    assert!((g.r - score).abs() < 1e-9, "{function} {qs:?}: {} vs {score}", g.r);
                }
            }
        }
    }
}

#[test]
fn single_result_examples() {
    let s = setup(9);
    let lexicon = s.index.lexicon();
    let q = Query::from_lemmas(&[LemmaId(0)], lexicon).unwrap();
    let one = vec![SearchResult { doc: DocId(0), p: 0, l: 1, r: 0.0, boundary: Some((LemmaId(0), LemmaId(0))) }];
    let out = two_step_search(&q, &s.index, 15).unwrap();
    for function in RankFunction::evaluated() {
        let config = RankConfig::with_function(function);
        let ranked = rank(one.clone(), &config, &q, &out.stats, s.index.stats()).unwrap();
        assert_eq!(ranked.len(), 1);
        if function.is_two_level() {
            assert_eq!(ranked[0].r, 1.0);
        }
    }
    assert!(rank(Vec::new(), &RankConfig::default(), &q, &out.stats, s.index.stats()).unwrap().is_empty());
}

#[test]
fn tp_bm25_breaks_tp_ties_by_bm25() {
    let s = setup(3);
    let lexicon = s.index.lexicon();
    let qs = [LemmaId(0), LemmaId(1)];
    let q = Query::from_lemmas(&qs, lexicon).unwrap();
    let out = two_step_search(&q, &s.index, 15).unwrap();
    let brute = Brute { tokens: &s.tokens, lemmas: qs.to_vec() };
    let config = RankConfig::with_function(RankFunction::TpBm25);
    let ranked = rank(out.results, &config, &q, &out.stats, s.index.stats()).unwrap();
    let mut ties = 0;
    for w in ranked.windows(2) {
        let (a, b) = (tp(&w[0], 2), tp(&w[1], 2));
        assert!(a >= b);
        if a == b {
            assert!(brute.bm25(w[0].doc) >= brute.bm25(w[1].doc) - 1e-12);
            ties += 1;
        }
    }
    assert!(ties > 0);
}

#[test]
fn weisum_without_proximity_orders_by_bm25() {
    let s = setup(5);
    let q = Query::from_lemmas(&[LemmaId(2), LemmaId(6)], s.index.lexicon()).unwrap();
    let out = two_step_search(&q, &s.index, 15).unwrap();
    let config = RankConfig::with_function(RankFunction::weisum(0.0, 1.0, 0.0));
    let ranked = rank(out.results, &config, &q, &out.stats, s.index.stats()).unwrap();
    let brute = Brute { tokens: &s.tokens, lemmas: vec![LemmaId(2), LemmaId(6)] };
    assert!(ranked.windows(2).all(|w| brute.bm25(w[0].doc) >= brute.bm25(w[1].doc) - 1e-12));
}

#[test]
fn function_names_round_trip() {
    for f in RankFunction::evaluated() {
        assert_eq!(f.to_string().parse::<RankFunction>().unwrap(), f);
    }
    assert_eq!(RankFunction::weisum(0.0, 0.1, 0.9).to_string(), "WeiSum(0,0.1,0.9)");
    assert_eq!("tp_bm25".parse::<RankFunction>().unwrap(), RankFunction::TpBm25);
    assert!(matches!("BM42".parse::<RankFunction>(), Err(Error::Config(_))));
    assert!(matches!("WeiSum(0.5,0.5,0.5)".parse::<RankFunction>(), Err(Error::Config(_))));
}

#[test]
fn rank_config_file_syntax() {
    let c = RankConfig::parse("# weights\nfunction = IntervalOpt\nk1=1.5\nsw_count=10\n").unwrap();
    assert_eq!(c.function, RankFunction::IntervalOpt);
    assert_eq!(c.k1, 1.5);
    assert_eq!(c.b, 0.75);
    assert!(RankConfig::parse("k1").is_err());
    assert!(RankConfig::parse("k1=fast").is_err());
}

fn arb_results() -> impl Strategy<Value = Vec<(u32, u32, u32)>> {
    prop::collection::btree_set((0u32..20, 0u32..40), 0..30).prop_flat_map(|keys| {
        let n = keys.len();
        (Just(keys), prop::collection::vec(prop_oneof![2u32..12, Just(FAR)], n))
            .prop_map(|(keys, ls)| keys.into_iter().zip(ls).map(|((d, p), l)| (d, p, l)).collect())
    })
}

fn to_results(v: &[(u32, u32, u32)]) -> Vec<SearchResult> {
    v.iter()
        .map(|&(d, p, l)| {
            let boundary = (l != FAR).then_some((LemmaId(0), LemmaId(1)));
            SearchResult { doc: DocId(d), p: if l == FAR { 0 } else { p }, l, r: 0.0, boundary }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_returns_a_permutation(v in arb_results(), fi in 0usize..9) {
        let s = setup(1);
        let q = Query::from_lemmas(&[LemmaId(0), LemmaId(1)], s.index.lexicon()).unwrap();
        let out = two_step_search(&q, &s.index, 15).unwrap();
        let input = to_results(&v);
        let config = RankConfig::with_function(RankFunction::evaluated()[fi]);
        let ranked = rank(input.clone(), &config, &q, &out.stats, s.index.stats()).unwrap();
        let key = |r: &SearchResult| (r.doc, r.p, r.l);
        let mut a: Vec<_> = input.iter().map(key).collect();
        let mut b: Vec<_> = ranked.iter().map(key).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
        prop_assert!(ranked.windows(2).all(|w| w[0].r >= w[1].r));
    }

    #[test]
    fn interval_sum_grows_with_more_intervals(v in arb_results(), extra in 2u32..12) {
        let s = setup(1);
        let q = Query::from_lemmas(&[LemmaId(0), LemmaId(1)], s.index.lexicon()).unwrap();
        let out = two_step_search(&q, &s.index, 15).unwrap();
        let config = RankConfig::with_function(RankFunction::IntervalSum);
        let input = to_results(&v);
        prop_assume!(!input.is_empty());
        let doc = input[0].doc;
        let score_of = |rs: Vec<SearchResult>| {
            rank(rs, &config, &q, &out.stats, s.index.stats()).unwrap().into_iter().find(|r| r.doc == doc).unwrap().r
        };
        let before = score_of(input.clone());
        let mut more = input;
        more.push(SearchResult { doc, p: 1000, l: extra, r: 0.0, boundary: Some((LemmaId(0), LemmaId(1))) });
        prop_assert!(score_of(more) > before);
    }
}
