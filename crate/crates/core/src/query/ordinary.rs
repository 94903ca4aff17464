//! Baseline search over the word-level index.

use crate::error::Result;
use crate::index::IndexSet;

use super::{add_cand, count_postings, results_from_candidates, DocCands, IndexAccess, Query, SearchOutput};

/// Every minimal fragment containing all query words, read from full
/// word-level posting lists. `max_distance_filter` drops fragments whose span
/// exceeds it.
pub fn search_ordinary(query: &Query, index: &IndexSet, max_distance_filter: Option<u32>) -> Result<SearchOutput> {
    let mut out = SearchOutput::default();
    let mut cands = DocCands::new();
    for lemma in query.lemma_ids() {
        out.access.push(IndexAccess::WordLevel(lemma));
        let postings = index.word_postings(lemma)?;
        out.stats.insert(lemma, count_postings(postings.iter().map(|p| p.doc)));
        for p in postings {
            add_cand(&mut cands, p.doc, lemma, p.pos);
        }
    }
    out.results = results_from_candidates(query, cands, max_distance_filter);
    Ok(out)
}
