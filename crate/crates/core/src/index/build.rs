//! In-memory construction of every index family from a corpus.

use crate::corpus::{DocId, Document};
use crate::error::{Error, Result};
use crate::lexicon::{tokenize, LemmaId, Lexicon, Tier};

use super::postings::{OrdinaryStream, PositionalStream};
use super::stats::{DtaEntry, StatTables};
use super::table::{PairKey, TableBuilder, TripleKey};
use super::IndexSet;

/// One `(f, s, t)` posting before the document id is attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FstEntry {
    pub key: TripleKey,
    pub pos: u32,
    pub d1: i32,
    pub d2: i32,
}

/// Enumerates `(f, s, t)` postings for the stop-lemma occurrences of one
/// document.
///
/// For every occurrence of `f`, `s` and `t` range over the other stop
/// occurrences within `max_distance` of it whose lemmas are not more frequent
/// than `f`. When `s` and `t` are the same lemma the `s` occurrence must not
/// come after the `t` occurrence; the same occurrence may fill both slots,
/// which yields the pair postings `(f, x, x)`.
///
/// Output is sorted by key, then `(pos, d1, d2)`.
pub fn enumerate_fst_keys(stop_positions: &[(LemmaId, Vec<u32>)], max_distance: u32) -> Vec<FstEntry> {
    let mut occ: Vec<(u32, LemmaId)> = stop_positions
        .iter()
        .flat_map(|(lemma, positions)| positions.iter().map(move |&p| (p, *lemma)))
        .collect();
    occ.sort_unstable();
    occ.dedup();
    let mut out = Vec::new();
    let mut lo = 0usize;
    let mut near: Vec<(u32, LemmaId)> = Vec::new();
    for &(fp, f) in &occ {
        while occ[lo].0 + max_distance < fp {
            lo += 1;
        }
        near.clear();
        near.extend(
            occ[lo..]
                .iter()
                .take_while(|o| o.0 <= fp + max_distance)
                .filter(|o| o.0 != fp && o.1 >= f),
        );
        for &(sp, s) in &near {
            for &(tp, t) in &near {
                if t < s || (t == s && tp < sp) {
                    continue;
                }
                out.push(FstEntry {
                    key: TripleKey { f, s, t },
                    pos: fp,
                    d1: sp as i32 - fp as i32,
                    d2: tp as i32 - fp as i32,
                });
            }
        }
    }
    out.sort_unstable();
    out
}

/// Lemma occurrences `(pos, lemma)` of one document, sorted and deduplicated,
/// plus the document length in tokens.
pub fn document_occurrences(lexicon: &Lexicon, text: &str) -> Result<(Vec<(u32, LemmaId)>, u32)> {
    let tokens = tokenize(text);
    let mut occ = Vec::with_capacity(tokens.len());
    for (token, pos) in &tokens {
        for lemma in lexicon.token_lemma_ids(token)? {
            occ.push((*pos, lemma));
        }
    }
    occ.sort_unstable();
    occ.dedup();
    Ok((occ, tokens.len() as u32))
}

/// Builds every index family. Documents must be sorted by ascending id.
pub fn build_indexes(documents: &[Document], lexicon: &Lexicon) -> Result<IndexSet> {
    if documents.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(Error::Config("documents must have strictly ascending ids".into()));
    }
    let config = *lexicon.config();
    let radius = config.max_distance;
    let n_lemmas = lexicon.len();
    let tiers: Vec<Tier> = (0..n_lemmas).map(|i| lexicon.tier_of(LemmaId(i as u32))).collect();

    let mut word: TableBuilder<LemmaId, PositionalStream> = TableBuilder::new();
    let mut doc_level: TableBuilder<LemmaId, PositionalStream> = TableBuilder::new();
    let mut ordinary: TableBuilder<LemmaId, OrdinaryStream> = TableBuilder::new();
    let mut pairs: TableBuilder<PairKey, PositionalStream> = TableBuilder::new();
    let mut triples: TableBuilder<TripleKey, PositionalStream> = TableBuilder::new();
    let mut dta: Vec<Option<DtaEntry>> = (0..n_lemmas)
        .map(|i| lexicon.in_dta(LemmaId(i as u32)).then(DtaEntry::default))
        .collect();
    let mut dl = Vec::with_capacity(documents.len());

    let mut by_lemma: Vec<(LemmaId, Vec<u32>)> = Vec::new();
    let mut stops: Vec<(LemmaId, Vec<u32>)> = Vec::new();
    let mut nsw: Vec<(LemmaId, i32)> = Vec::new();
    for doc in documents {
        let id: DocId = doc.id;
        let (occ, length) = document_occurrences(lexicon, &doc.text)?;
        dl.push((id, length));

        by_lemma.clear();
        let mut sorted = occ.clone();
        sorted.sort_unstable_by_key(|o| (o.1, o.0));
        for &(pos, lemma) in &sorted {
            match by_lemma.last_mut() {
                Some((l, positions)) if *l == lemma => positions.push(pos),
                _ => by_lemma.push((lemma, vec![pos])),
            }
        }

        stops.clear();
        for (lemma, positions) in &by_lemma {
            let lemma = *lemma;
            let stream = word.stream(lemma);
            for &p in positions {
                stream.push(id, p);
            }
            doc_level.stream(lemma).push(id, positions[0]);
            if let Some(entry) = dta[lemma.0 as usize].as_mut() {
                entry.df += 1;
                entry.tf.push((id, positions.len() as u32));
            }
            if tiers[lemma.0 as usize] == Tier::Stop {
                ordinary.stream(lemma).push_stop_first(id, positions[0]);
                stops.push((lemma, positions.clone()));
            }
        }

        // Window of occurrences around each position, shared by NSW and (w, v).
        let mut lo = 0usize;
        for &(pos, lemma) in &occ {
            let tier = tiers[lemma.0 as usize];
            if tier == Tier::Stop {
                continue;
            }
            while occ[lo].0 + radius < pos {
                lo += 1;
            }
            let window = occ[lo..].iter().take_while(|o| o.0 <= pos + radius).filter(|o| o.0 != pos);
            nsw.clear();
            for &(p, other) in window {
                let d = p as i32 - pos as i32;
                match tiers[other.0 as usize] {
                    Tier::Stop => nsw.push((other, d)),
                    _ if tier == Tier::FrequentlyUsed => {
                        pairs.stream(PairKey { w: lemma, v: other }).push_wv(id, pos, d);
                    }
                    _ => {}
                }
            }
            nsw.sort_unstable_by_key(|e| (e.1, e.0));
            ordinary.stream(lemma).push(id, pos, &nsw);
        }

        for e in enumerate_fst_keys(&stops, radius) {
            triples.stream(e.key).push_fst(id, e.pos, e.d1, e.d2);
        }
    }

    Ok(IndexSet::from_parts(
        lexicon.clone(),
        word.finish(PositionalStream::seal),
        ordinary.finish(OrdinaryStream::seal),
        pairs.finish(PositionalStream::seal),
        triples.finish(PositionalStream::seal),
        doc_level.finish(PositionalStream::seal),
        StatTables::new(dta, dl),
    ))
}
