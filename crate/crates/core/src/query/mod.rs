//! Query model, classification and the three search paths.

mod additional;
mod ordinary;
mod two_step;

use std::collections::BTreeMap;
use std::fmt;

pub use additional::{main_cell, search_additional};
pub use ordinary::search_ordinary;
pub use two_step::{two_step_search, DEFAULT_FIRST_STEP_THRESHOLD};

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::index::{DtaEntry, IndexSet, PairKey, TripleKey};
use crate::lexicon::{tokenize, LemmaId, Lexicon, Tier};
use crate::ranking::minimal_intervals;

/// Fragment length given to results that only the document-level step found.
pub const FAR: u32 = (1 << 31) - 1;

/// One lemma alternative of a query word. `id` is `None` when the lemma does
/// not occur in the indexed corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryLemma {
    pub text: String,
    pub id: Option<LemmaId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryWord {
    pub index: usize,
    pub token: String,
    pub lemmas: Vec<QueryLemma>,
}

impl QueryWord {
    /// Ids of the alternatives that occur in the corpus.
    pub fn ids(&self) -> impl Iterator<Item = LemmaId> + '_ {
        self.lemmas.iter().filter_map(|l| l.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    words: Vec<QueryWord>,
}

impl Query {
    pub fn parse(text: &str, lexicon: &Lexicon) -> Result<Self> {
        let words: Vec<QueryWord> = tokenize(text)
            .into_iter()
            .enumerate()
            .map(|(index, (token, _))| {
                let lemmas = lexicon
                    .lemmatize(&token)
                    .into_iter()
                    .map(|l| QueryLemma { id: lexicon.id(&l.text), text: l.text })
                    .collect();
                QueryWord { index, token, lemmas }
            })
            .collect();
        if words.is_empty() {
            return Err(Error::EmptyQuery);
        }
        Ok(Query { words })
    }

    /// A query with exactly one lemma per word.
    pub fn from_lemmas(lemmas: &[LemmaId], lexicon: &Lexicon) -> Result<Self> {
        if lemmas.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let words = lemmas
            .iter()
            .enumerate()
            .map(|(index, &id)| {
                let text = lexicon.text(id).to_string();
                QueryWord { index, token: text.clone(), lemmas: vec![QueryLemma { text, id: Some(id) }] }
            })
            .collect();
        Ok(Query { words })
    }

    pub fn words(&self) -> &[QueryWord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Every distinct lemma id over all alternatives, ascending.
    pub fn lemma_ids(&self) -> Vec<LemmaId> {
        let mut ids: Vec<LemmaId> = self.words.iter().flat_map(QueryWord::ids).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tokens: Vec<&str> = self.words.iter().map(|w| w.token.as_str()).collect();
        f.write_str(&tokens.join(" "))
    }
}

/// Parses query text against a lexicon.
pub fn parse_query(text: &str, lexicon: &Lexicon) -> Result<Query> {
    Query::parse(text, lexicon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QueryType {
    /// Stop lemmas only.
    Qt1,
    /// Frequently used lemmas only.
    Qt2,
    /// Ordinary lemmas only.
    Qt3,
    /// Stop lemmas mixed with non-stop lemmas.
    Qt4,
    /// Frequently used plus ordinary lemmas, no stop lemmas.
    Qt5,
}

impl fmt::Display for QueryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            QueryType::Qt1 => 1,
            QueryType::Qt2 => 2,
            QueryType::Qt3 => 3,
            QueryType::Qt4 => 4,
            QueryType::Qt5 => 5,
        };
        write!(f, "QT{n}")
    }
}

fn alternative_order(lexicon: &Lexicon, lemma: &QueryLemma) -> u64 {
    lemma.id.map_or(u64::MAX, |id| lexicon.fl_order(id))
}

/// Tier of a word: that of its most frequent alternative.
pub fn word_tier(word: &QueryWord, lexicon: &Lexicon) -> Tier {
    word.lemmas
        .iter()
        .min_by_key(|l| alternative_order(lexicon, l))
        .and_then(|l| l.id)
        .map_or(Tier::Ordinary, |id| lexicon.tier_of(id))
}

/// Lowest FL order among a word's alternatives; unknown lemmas count as
/// rarer than anything ranked.
pub(crate) fn word_fl_order(word: &QueryWord, lexicon: &Lexicon) -> u64 {
    word.lemmas.iter().map(|l| alternative_order(lexicon, l)).min().unwrap_or(u64::MAX)
}

fn classify_tiers(tiers: impl IntoIterator<Item = Tier>) -> QueryType {
    let (mut stop, mut fu, mut ord) = (false, false, false);
    for t in tiers {
        match t {
            Tier::Stop => stop = true,
            Tier::FrequentlyUsed => fu = true,
            Tier::Ordinary => ord = true,
        }
    }
    match (stop, fu, ord) {
        (true, false, false) => QueryType::Qt1,
        (true, _, _) => QueryType::Qt4,
        (false, true, false) => QueryType::Qt2,
        (false, true, true) => QueryType::Qt5,
        (false, false, _) => QueryType::Qt3,
    }
}

pub fn classify(query: &Query, lexicon: &Lexicon) -> QueryType {
    classify_tiers(query.words.iter().map(|w| word_tier(w, lexicon)))
}

/// Query type of a query with one concrete lemma per word.
pub(crate) fn classify_lemmas(lemmas: &[LemmaId], lexicon: &Lexicon) -> QueryType {
    classify_tiers(lemmas.iter().map(|&l| lexicon.tier_of(l)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub doc: DocId,
    /// Fragment start.
    pub p: u32,
    /// Fragment length in words, or [`FAR`].
    pub l: u32,
    pub r: f64,
    /// Lowest query lemma id at the first and at the last fragment position.
    pub boundary: Option<(LemmaId, LemmaId)>,
}

impl SearchResult {
    pub fn far(doc: DocId) -> Self {
        SearchResult { doc, p: 0, l: FAR, r: 0.0, boundary: None }
    }

    pub fn is_far(&self) -> bool {
        self.l == FAR
    }
}

/// Index reads performed by a search, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexAccess {
    /// NSW-ordinary list, with or without its NSW stream.
    Ordinary { lemma: LemmaId, nsw: bool },
    /// Only the `(ID)` stream of an ordinary list.
    OrdinaryIds(LemmaId),
    Pair(PairKey),
    Triple(TripleKey),
    /// Every `(f, x, x)` key of a stop lemma.
    TripleScan(LemmaId),
    /// NSW streams of every non-stop list.
    NswScan,
    DocLevel(LemmaId),
    /// Baseline word-level list.
    WordLevel(LemmaId),
    Dta(LemmaId),
}

/// TF and DF of the query lemmas.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermStats {
    entries: BTreeMap<LemmaId, DtaEntry>,
}

impl TermStats {
    pub fn insert(&mut self, lemma: LemmaId, entry: DtaEntry) {
        self.entries.insert(lemma, entry);
    }

    pub fn df(&self, lemma: LemmaId) -> u32 {
        self.entries.get(&lemma).map_or(0, |e| e.df)
    }

    pub fn tf(&self, lemma: LemmaId, doc: DocId) -> u32 {
        self.entries.get(&lemma).map_or(0, |e| e.tf_in(doc))
    }

    pub fn lemmas(&self) -> impl Iterator<Item = LemmaId> + '_ {
        self.entries.keys().copied()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchOutput {
    /// Sorted by `(doc, p)` unless stated otherwise by the producer.
    pub results: Vec<SearchResult>,
    pub stats: TermStats,
    pub access: Vec<IndexAccess>,
}

/// Appends ranked results as `query_id TAB rank TAB doc_id TAB p TAB l TAB r`
/// lines, ranks starting at 1.
pub fn write_results_tsv(out: &mut String, query_id: usize, results: &[SearchResult]) {
    use std::fmt::Write as _;
    for (i, r) in results.iter().enumerate() {
        let _ = writeln!(out, "{query_id}\t{}\t{}\t{}\t{}\t{}", i + 1, r.doc, r.p, r.l, r.r);
    }
}

/// Candidate positions per document per lemma.
pub(crate) type DocCands = BTreeMap<DocId, BTreeMap<LemmaId, Vec<u32>>>;

pub(crate) fn add_cand(cands: &mut DocCands, doc: DocId, lemma: LemmaId, pos: u32) {
    cands.entry(doc).or_default().entry(lemma).or_default().push(pos);
}

/// Turns candidate positions into minimal-interval results, optionally
/// keeping only intervals whose span `q - p` is within `max_span`.
pub(crate) fn results_from_candidates(query: &Query, cands: DocCands, max_span: Option<u32>) -> Vec<SearchResult> {
    let mut out = Vec::new();
    let mut words: Vec<Vec<(u32, LemmaId)>> = vec![Vec::new(); query.len()];
    for (doc, mut by_lemma) in cands {
        for ps in by_lemma.values_mut() {
            ps.sort_unstable();
            ps.dedup();
        }
        let mut complete = true;
        for (slot, word) in words.iter_mut().zip(&query.words) {
            slot.clear();
            for id in word.ids() {
                if let Some(ps) = by_lemma.get(&id) {
                    slot.extend(ps.iter().map(|&p| (p, id)));
                }
            }
            if slot.is_empty() {
                complete = false;
                break;
            }
            slot.sort_unstable();
            slot.dedup_by_key(|e| e.0);
        }
        if !complete {
            continue;
        }
        let positions: Vec<Vec<u32>> = words.iter().map(|w| w.iter().map(|e| e.0).collect()).collect();
        let boundary_at = |pos: u32| {
            words
                .iter()
                .filter_map(|w| w.binary_search_by_key(&pos, |e| e.0).ok().map(|i| w[i].1))
                .min()
                .expect("interval ends on a query word")
        };
        for iv in minimal_intervals(doc, &positions) {
            if max_span.is_some_and(|m| iv.span() > m) {
                continue;
            }
            out.push(SearchResult {
                doc,
                p: iv.p,
                l: iv.len(),
                r: 0.0,
                boundary: Some((boundary_at(iv.p), boundary_at(iv.q))),
            });
        }
    }
    out
}

/// DF from DTA when the lemma is covered, otherwise the posting count.
pub(crate) fn lemma_frequency(index: &IndexSet, lemma: LemmaId) -> Result<u64> {
    if let Some(e) = index.stats().dta(lemma) {
        return Ok(u64::from(e.df));
    }
    Ok(index.ordinary_list(lemma)?.map_or(0, |l| l.count()))
}

/// Counts TF/DF from a list of `(doc, pos)` postings.
pub(crate) fn count_postings(docs: impl IntoIterator<Item = DocId>) -> DtaEntry {
    let mut entry = DtaEntry::default();
    for doc in docs {
        match entry.tf.last_mut() {
            Some(last) if last.0 == doc => last.1 += 1,
            _ => entry.tf.push((doc, 1)),
        }
    }
    entry.df = entry.tf.len() as u32;
    entry
}
