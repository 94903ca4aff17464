//! Proximity search over the additional indexes, dispatched per query type.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::index::{DtaEntry, IndexSet, OrdinaryLayout, OrdinaryList, PairKey, TripleKey};
use crate::lexicon::{LemmaId, Tier};

use super::{
    add_cand, classify_lemmas, count_postings, lemma_frequency, results_from_candidates, DocCands, IndexAccess,
    Query, QueryType, SearchOutput,
};

/// Beyond this many alternative combinations the baseline lists are read.
pub const MAX_COMBINATIONS: usize = 32;

type Anchor = (DocId, u32);

/// Distinct lemmas of one alternative combination with their multiplicity
/// and first word index, in order of first appearance.
struct Combo {
    lemmas: Vec<(LemmaId, usize, usize)>,
}

impl Combo {
    fn new(lemmas: &[LemmaId]) -> Self {
        let mut out: Vec<(LemmaId, usize, usize)> = Vec::new();
        for (i, &l) in lemmas.iter().enumerate() {
            match out.iter_mut().find(|e| e.0 == l) {
                Some(e) => e.1 += 1,
                None => out.push((l, 1, i)),
            }
        }
        Combo { lemmas: out }
    }

    fn multiplicity(&self, lemma: LemmaId) -> usize {
        self.lemmas.iter().find(|e| e.0 == lemma).map_or(0, |e| e.1)
    }
}

struct Ctx<'a> {
    index: &'a IndexSet,
    cands: DocCands,
    access: Vec<IndexAccess>,
}

impl Ctx<'_> {
    fn tier(&self, lemma: LemmaId) -> Tier {
        self.index.lexicon().tier_of(lemma)
    }

    /// Lemma among `pool` with minimal frequency, ties to the earlier word.
    fn rarest(&self, pool: impl IntoIterator<Item = (LemmaId, usize)>) -> Result<Option<LemmaId>> {
        let mut best: Option<(u64, usize, LemmaId)> = None;
        for (lemma, first) in pool {
            let f = lemma_frequency(self.index, lemma)?;
            if best.is_none_or(|b| (f, first) < (b.0, b.1)) {
                best = Some((f, first, lemma));
            }
        }
        Ok(best.map(|b| b.2))
    }

    fn pair(&mut self, key: PairKey) -> Result<Vec<crate::index::PostingWV>> {
        self.access.push(IndexAccess::Pair(key));
        self.index.pair_postings(key)
    }

    fn triple(&mut self, key: TripleKey) -> Result<Vec<crate::index::PostingFST>> {
        self.access.push(IndexAccess::Triple(key));
        self.index.triple_postings(key)
    }

    /// Every occurrence of a non-stop lemma, NSW stream skipped.
    fn full_list(&mut self, lemma: LemmaId) -> Result<()> {
        self.access.push(IndexAccess::Ordinary { lemma, nsw: false });
        if let Some(list) = self.index.ordinary_list(lemma)? {
            for p in list.postings()? {
                add_cand(&mut self.cands, p.doc, lemma, p.pos);
            }
        }
        Ok(())
    }
}

fn group_anchors<T>(items: &[T], key: impl Fn(&T) -> Anchor) -> Vec<(Anchor, Range<usize>)> {
    let mut out: Vec<(Anchor, Range<usize>)> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let a = key(item);
        match out.last_mut() {
            Some((last, range)) if *last == a => range.end = i + 1,
            _ => out.push((a, i..i + 1)),
        }
    }
    out
}

/// Anchors present in every grouped stream, with each stream's posting range.
fn leapfrog(groups: &[Vec<(Anchor, Range<usize>)>]) -> Vec<(Anchor, Vec<Range<usize>>)> {
    let mut out = Vec::new();
    if groups.is_empty() || groups.iter().any(Vec::is_empty) {
        return out;
    }
    let mut at = vec![0usize; groups.len()];
    loop {
        let target = groups.iter().zip(&at).map(|(g, &i)| g[i].0).max().expect("non-empty");
        let mut aligned = true;
        for (g, i) in groups.iter().zip(at.iter_mut()) {
            *i += g[*i..].partition_point(|e| e.0 < target);
            if *i == g.len() {
                return out;
            }
            aligned &= g[*i].0 == target;
        }
        if aligned {
            out.push((target, groups.iter().zip(&at).map(|(g, &i)| g[i].1.clone()).collect()));
            for (g, i) in groups.iter().zip(at.iter_mut()) {
                *i += 1;
                if *i == g.len() {
                    return out;
                }
            }
        }
    }
}

/// Main-Cell over `(w, v)` streams: `w` is the rarest frequently used lemma.
fn main_cell_candidates(ctx: &mut Ctx<'_>, combo: &Combo) -> Result<()> {
    let fu = combo.lemmas.iter().filter(|e| ctx.tier(e.0) == Tier::FrequentlyUsed).map(|e| (e.0, e.2));
    let w = ctx.rarest(fu.collect::<Vec<_>>())?.expect("a frequently used lemma");
    let mut others: Vec<LemmaId> = combo.lemmas.iter().map(|e| e.0).filter(|&l| l != w).collect();
    if others.is_empty() {
        others.push(w);
    }
    let mut streams = Vec::with_capacity(others.len());
    for &v in &others {
        streams.push(ctx.pair(PairKey { w, v })?);
    }
    let groups: Vec<_> = streams.iter().map(|s| group_anchors(s, |p| (p.doc, p.pos))).collect();
    for ((doc, pos), ranges) in leapfrog(&groups) {
        add_cand(&mut ctx.cands, doc, w, pos);
        for ((stream, range), &v) in streams.iter().zip(ranges).zip(&others) {
            for p in &stream[range] {
                add_cand(&mut ctx.cands, doc, v, p.pos.wrapping_add_signed(p.d));
            }
        }
    }
    Ok(())
}

/// Every occurrence of one stop lemma, rebuilt from `(f, x, x)` and
/// `(x, a, a)` postings, NSW records and the first-occurrence list.
fn reconstruct_stop(ctx: &mut Ctx<'_>, a: LemmaId) -> Result<()> {
    let index = ctx.index;
    ctx.access.push(IndexAccess::TripleScan(a));
    let lo = TripleKey { f: a, s: LemmaId(0), t: LemmaId(0) };
    let hi = TripleKey { f: LemmaId(a.0 + 1), s: LemmaId(0), t: LemmaId(0) };
    for (key, blob) in index.triple_table().range(&lo, &hi) {
        if key.s != key.t {
            continue;
        }
        for p in crate::index::postings::decode_fst(blob)? {
            add_cand(&mut ctx.cands, p.doc, a, p.pos);
            if key.s == a {
                add_cand(&mut ctx.cands, p.doc, a, p.pos.wrapping_add_signed(p.d1));
                add_cand(&mut ctx.cands, p.doc, a, p.pos.wrapping_add_signed(p.d2));
            }
        }
    }
    for x in 0..a.0 {
        if let Some(blob) = index.triple_table().get(&TripleKey { f: LemmaId(x), s: a, t: a }) {
            for p in crate::index::postings::decode_fst(blob)? {
                add_cand(&mut ctx.cands, p.doc, a, p.pos.wrapping_add_signed(p.d1));
                add_cand(&mut ctx.cands, p.doc, a, p.pos.wrapping_add_signed(p.d2));
            }
        }
    }
    ctx.access.push(IndexAccess::NswScan);
    for (_, blob) in index.ordinary_table().iter() {
        let list = OrdinaryList::parse(blob)?;
        if list.layout() == OrdinaryLayout::StopFirst {
            continue;
        }
        for p in list.postings_with_nsw()? {
            for &(lemma, off) in &p.nsw.entries {
                if lemma == a {
                    add_cand(&mut ctx.cands, p.doc, a, p.pos.wrapping_add_signed(off));
                }
            }
        }
    }
    ctx.access.push(IndexAccess::Ordinary { lemma: a, nsw: false });
    if let Some(list) = index.ordinary_list(a)? {
        for p in list.postings()? {
            add_cand(&mut ctx.cands, p.doc, a, p.pos);
        }
    }
    Ok(())
}

/// Stop lemmas only: intersect `(a1, x, y)` keys on the anchor of the most
/// frequent lemma `a1`.
fn stop_candidates(ctx: &mut Ctx<'_>, combo: &Combo) -> Result<()> {
    let mut distinct: Vec<LemmaId> = combo.lemmas.iter().map(|e| e.0).collect();
    distinct.sort_unstable();
    let a1 = distinct[0];
    if distinct.len() == 1 {
        if combo.multiplicity(a1) == 1 {
            return reconstruct_stop(ctx, a1);
        }
        for p in ctx.triple(TripleKey { f: a1, s: a1, t: a1 })? {
            add_cand(&mut ctx.cands, p.doc, a1, p.pos);
            add_cand(&mut ctx.cands, p.doc, a1, p.pos.wrapping_add_signed(p.d1));
            add_cand(&mut ctx.cands, p.doc, a1, p.pos.wrapping_add_signed(p.d2));
        }
        return Ok(());
    }
    let keys: Vec<TripleKey> = distinct[1..]
        .chunks(2)
        .map(|c| TripleKey { f: a1, s: c[0], t: *c.last().expect("non-empty chunk") })
        .collect();
    let mut streams = Vec::with_capacity(keys.len());
    for &key in &keys {
        streams.push(ctx.triple(key)?);
    }
    let groups: Vec<_> = streams.iter().map(|s| group_anchors(s, |p| (p.doc, p.pos))).collect();
    for ((doc, pos), ranges) in leapfrog(&groups) {
        add_cand(&mut ctx.cands, doc, a1, pos);
        for ((stream, range), key) in streams.iter().zip(ranges).zip(&keys) {
            for p in &stream[range] {
                add_cand(&mut ctx.cands, doc, key.s, p.pos.wrapping_add_signed(p.d1));
                add_cand(&mut ctx.cands, doc, key.t, p.pos.wrapping_add_signed(p.d2));
            }
        }
    }
    Ok(())
}

/// Stop and non-stop lemmas: stop occurrences come from the NSW records of
/// the rarest non-stop lemma `w`.
fn mixed_candidates(ctx: &mut Ctx<'_>, combo: &Combo) -> Result<()> {
    let (stops, nonstop): (Vec<&(LemmaId, usize, usize)>, Vec<_>) = combo.lemmas.iter().partition(|e| ctx.tier(e.0) == Tier::Stop);
    let w = ctx.rarest(nonstop.iter().map(|e| (e.0, e.2)))?.expect("a non-stop lemma");
    ctx.access.push(IndexAccess::Ordinary { lemma: w, nsw: true });
    if let Some(list) = ctx.index.ordinary_list(w)? {
        for p in list.postings_with_nsw()? {
            let near_all = stops.iter().all(|s| p.nsw.entries.iter().any(|e| e.0 == s.0));
            if !near_all {
                continue;
            }
            add_cand(&mut ctx.cands, p.doc, w, p.pos);
            for &(lemma, off) in &p.nsw.entries {
                if stops.iter().any(|s| s.0 == lemma) {
                    add_cand(&mut ctx.cands, p.doc, lemma, p.pos.wrapping_add_signed(off));
                }
            }
        }
    }
    let fu: Vec<(LemmaId, usize)> = nonstop
        .iter()
        .filter(|e| ctx.tier(e.0) == Tier::FrequentlyUsed)
        .map(|e| (e.0, e.2))
        .collect();
    for &&(v, _, _) in nonstop.iter().filter(|e| e.0 != w) {
        if ctx.tier(v) == Tier::FrequentlyUsed {
            if ctx.tier(w) == Tier::FrequentlyUsed {
                for p in ctx.pair(PairKey { w, v })? {
                    add_cand(&mut ctx.cands, p.doc, v, p.pos.wrapping_add_signed(p.d));
                }
            } else {
                for p in ctx.pair(PairKey { w: v, v: w })? {
                    add_cand(&mut ctx.cands, p.doc, v, p.pos);
                }
            }
        } else if ctx.index.lexicon().in_dta(v) && !fu.is_empty() {
            let x = ctx.rarest(fu.iter().copied())?.expect("non-empty");
            for p in ctx.pair(PairKey { w: x, v })? {
                add_cand(&mut ctx.cands, p.doc, v, p.pos.wrapping_add_signed(p.d));
            }
        } else {
            ctx.full_list(v)?;
        }
    }
    Ok(())
}

fn combo_candidates(ctx: &mut Ctx<'_>, lemmas: &[LemmaId]) -> Result<()> {
    let combo = Combo::new(lemmas);
    match classify_lemmas(lemmas, ctx.index.lexicon()) {
        QueryType::Qt1 => stop_candidates(ctx, &combo),
        QueryType::Qt2 | QueryType::Qt5 if combo.lemmas.len() == 1 && combo.lemmas[0].1 == 1 => {
            ctx.full_list(combo.lemmas[0].0)
        }
        QueryType::Qt2 | QueryType::Qt5 => main_cell_candidates(ctx, &combo),
        QueryType::Qt3 => {
            for &(lemma, _, _) in &combo.lemmas {
                ctx.full_list(lemma)?;
            }
            Ok(())
        }
        QueryType::Qt4 => mixed_candidates(ctx, &combo),
    }
}

/// TF/DF of one lemma: DTA when covered, otherwise counted from the ordinary
/// list with the NSW stream skipped.
fn term_entry(index: &IndexSet, lemma: LemmaId, access: &mut Vec<IndexAccess>) -> Result<DtaEntry> {
    if let Some(e) = index.stats().dta(lemma) {
        access.push(IndexAccess::Dta(lemma));
        return Ok(e.clone());
    }
    access.push(IndexAccess::Ordinary { lemma, nsw: false });
    let docs = match index.ordinary_list(lemma)? {
        Some(list) => list.postings()?.into_iter().map(|p| p.doc).collect(),
        None => Vec::new(),
    };
    Ok(count_postings(docs))
}

fn combinations(per_word: &[Vec<LemmaId>]) -> Vec<Vec<LemmaId>> {
    let mut out: Vec<Vec<LemmaId>> = vec![Vec::new()];
    for alts in per_word {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alts.iter().map(move |&a| {
                    let mut next = prefix.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
    }
    out
}

fn run(query: &Query, index: &IndexSet, main_cell_only: bool) -> Result<SearchOutput> {
    let radius = index.lexicon().config().max_distance;
    let mut out = SearchOutput::default();
    for lemma in query.lemma_ids() {
        let entry = term_entry(index, lemma, &mut out.access)?;
        out.stats.insert(lemma, entry);
    }
    let per_word: Vec<Vec<LemmaId>> = query.words().iter().map(|w| w.ids().collect()).collect();
    if per_word.iter().any(Vec::is_empty) {
        return Ok(out);
    }
    let count = per_word.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
    let mut ctx = Ctx { index, cands: BTreeMap::new(), access: std::mem::take(&mut out.access) };
    if main_cell_only {
        let lemmas: Vec<LemmaId> = per_word.iter().map(|a| a[0]).collect();
        main_cell_candidates(&mut ctx, &Combo::new(&lemmas))?;
    } else if count.is_none_or(|c| c > MAX_COMBINATIONS) {
        for lemma in query.lemma_ids() {
            ctx.access.push(IndexAccess::WordLevel(lemma));
            for p in index.word_postings(lemma)? {
                add_cand(&mut ctx.cands, p.doc, lemma, p.pos);
            }
        }
    } else {
        for combo in combinations(&per_word) {
            combo_candidates(&mut ctx, &combo)?;
        }
    }
    out.access = ctx.access;
    out.results = results_from_candidates(query, ctx.cands, Some(radius));
    Ok(out)
}

/// Proximity search through the additional indexes. Returns every minimal
/// fragment of span at most `max_distance` that contains all query words.
pub fn search_additional(query: &Query, index: &IndexSet) -> Result<SearchOutput> {
    run(query, index, false)
}

/// Main-Cell search for a query of frequently used and ordinary lemmas with
/// at least two distinct lemmas and one lemma per word.
pub fn main_cell(query: &Query, index: &IndexSet) -> Result<SearchOutput> {
    let lemmas: Option<Vec<LemmaId>> = query
        .words()
        .iter()
        .map(|w| if w.lemmas.len() == 1 { w.lemmas[0].id } else { None })
        .collect();
    let lemmas = lemmas.ok_or_else(|| Error::Config("main_cell needs one known lemma per word".into()))?;
    let qt = classify_lemmas(&lemmas, index.lexicon());
    if !matches!(qt, QueryType::Qt2 | QueryType::Qt5) || Combo::new(&lemmas).lemmas.len() < 2 {
        return Err(Error::Config(format!("main_cell does not apply to a {qt} query")));
    }
    run(query, index, true)
}
