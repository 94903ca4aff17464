//! Proximity step followed by a document-level step.

use std::collections::BTreeSet;

use crate::corpus::DocId;
use crate::error::Result;
use crate::index::IndexSet;
use crate::lexicon::{LemmaId, Tier};

use super::{search_additional, word_fl_order, IndexAccess, Query, QueryWord, SearchOutput, SearchResult};

pub const DEFAULT_FIRST_STEP_THRESHOLD: usize = 15;

fn doc_set(
    index: &IndexSet,
    word: &QueryWord,
    id_streams: bool,
    access: &mut Vec<IndexAccess>,
) -> Result<BTreeSet<DocId>> {
    let mut docs = BTreeSet::new();
    for lemma in word.ids() {
        if id_streams {
            access.push(IndexAccess::OrdinaryIds(lemma));
            if let Some(list) = index.ordinary_list(lemma)? {
                docs.extend(list.doc_ids()?);
            }
        } else {
            access.push(IndexAccess::DocLevel(lemma));
            docs.extend(index.doc_level_postings(lemma)?.into_iter().map(|p| p.doc));
        }
    }
    Ok(docs)
}

fn in_dta_table(index: &IndexSet, lemma: LemmaId, doc: DocId) -> bool {
    index.stats().dta(lemma).is_some_and(|e| e.tf_in(doc) > 0)
}

/// Documents containing every query word, computed without positions.
///
/// With `many_first_step` (the first step produced enough results) words
/// whose lemmas are all DTA-covered are evaluated through DTA only, and the
/// remaining words through the document-level index. Otherwise only stop
/// words go through DTA and the rest read the `(ID)` stream of the ordinary
/// index. When every word would move to DTA, the word with the rarest lemma
/// is kept as the list to read.
fn second_step(query: &Query, index: &IndexSet, many_first_step: bool, access: &mut Vec<IndexAccess>) -> Result<Vec<DocId>> {
    let lexicon = index.lexicon();
    if query.words().iter().any(|w| w.ids().next().is_none()) {
        return Ok(Vec::new());
    }
    let via_dta = |w: &QueryWord| {
        if many_first_step {
            w.ids().all(|l| lexicon.in_dta(l))
        } else {
            w.ids().all(|l| lexicon.tier_of(l) == Tier::Stop)
        }
    };
    let (mut listed, mut filtered): (Vec<&QueryWord>, Vec<&QueryWord>) = query.words().iter().partition(|w| !via_dta(w));
    if listed.is_empty() {
        let keep = filtered
            .iter()
            .enumerate()
            .max_by_key(|(i, w)| (word_fl_order(w, lexicon), std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .expect("non-empty query");
        listed.push(filtered.remove(keep));
    }
    let mut docs: Option<BTreeSet<DocId>> = None;
    for word in listed {
        let set = doc_set(index, word, !many_first_step, access)?;
        docs = Some(match docs {
            None => set,
            Some(prev) => prev.intersection(&set).copied().collect(),
        });
    }
    let docs = docs.unwrap_or_default();
    for word in &filtered {
        access.extend(word.ids().map(IndexAccess::Dta));
    }
    Ok(docs
        .into_iter()
        .filter(|&d| filtered.iter().all(|w| w.ids().any(|l| in_dta_table(index, l, d))))
        .collect())
}

/// Step-1 proximity results followed by one far result for each document
/// that only the second step found.
pub fn two_step_search(query: &Query, index: &IndexSet, first_step_threshold: usize) -> Result<SearchOutput> {
    let mut out = search_additional(query, index)?;
    let many = out.results.len() >= first_step_threshold;
    let found: BTreeSet<DocId> = out.results.iter().map(|r| r.doc).collect();
    let docs = second_step(query, index, many, &mut out.access)?;
    out.results.extend(docs.into_iter().filter(|d| !found.contains(d)).map(SearchResult::far));
    Ok(out)
}
