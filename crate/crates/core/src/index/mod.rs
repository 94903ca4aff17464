//! Index families: word-level baseline, NSW-ordinary, `(w, v)`, `(f, s, t)`,
//! document-level, plus statistics.

mod build;
mod persist;
pub mod postings;
mod stats;
mod table;

use std::fmt;

pub use build::{build_indexes, document_occurrences, enumerate_fst_keys, FstEntry};
pub use persist::{load, persist, MANIFEST_FILE};
pub use postings::{
    DocLevelPosting, NswRecord, OrdinaryLayout, OrdinaryList, Posting, PostingFST, PostingOrdinary, PostingWV,
};
pub use stats::{DtaEntry, StatTables};
pub use table::{blob_count, PairKey, PostingTable, TableKey, TripleKey};

use crate::error::Result;
use crate::lexicon::{LemmaId, Lexicon};

/// Bumped whenever an on-disk layout changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct IndexSet {
    lexicon: Lexicon,
    word: PostingTable<LemmaId>,
    ordinary: PostingTable<LemmaId>,
    pairs: PostingTable<PairKey>,
    triples: PostingTable<TripleKey>,
    doc_level: PostingTable<LemmaId>,
    stats: StatTables,
}

/// Key and posting totals per family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexCounts {
    pub documents: u64,
    pub lemmas: u64,
    pub word: (u64, u64),
    pub ordinary: (u64, u64),
    pub pairs: (u64, u64),
    pub triples: (u64, u64),
    pub doc_level: (u64, u64),
    pub dta_lemmas: u64,
}

impl fmt::Display for IndexCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents\t{}", self.documents)?;
        writeln!(f, "lemmas\t{}", self.lemmas)?;
        for (name, (keys, postings)) in [
            ("word", self.word),
            ("ordinary", self.ordinary),
            ("wv", self.pairs),
            ("fst", self.triples),
            ("doc", self.doc_level),
        ] {
            writeln!(f, "{name}\tkeys={keys}\tpostings={postings}")?;
        }
        write!(f, "dta_lemmas\t{}", self.dta_lemmas)
    }
}

fn totals<K: TableKey>(table: &PostingTable<K>) -> (u64, u64) {
    let postings = table.iter().map(|(_, b)| blob_count(b).unwrap_or(0)).sum();
    (table.len() as u64, postings)
}

impl IndexSet {
    pub(crate) fn from_parts(
        lexicon: Lexicon,
        word: PostingTable<LemmaId>,
        ordinary: PostingTable<LemmaId>,
        pairs: PostingTable<PairKey>,
        triples: PostingTable<TripleKey>,
        doc_level: PostingTable<LemmaId>,
        stats: StatTables,
    ) -> Self {
        IndexSet { lexicon, word, ordinary, pairs, triples, doc_level, stats }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn stats(&self) -> &StatTables {
        &self.stats
    }

    /// Baseline word-level `(ID, P)` index over every lemma.
    pub fn word_table(&self) -> &PostingTable<LemmaId> {
        &self.word
    }

    pub fn ordinary_table(&self) -> &PostingTable<LemmaId> {
        &self.ordinary
    }

    pub fn pair_table(&self) -> &PostingTable<PairKey> {
        &self.pairs
    }

    pub fn triple_table(&self) -> &PostingTable<TripleKey> {
        &self.triples
    }

    pub fn doc_level_table(&self) -> &PostingTable<LemmaId> {
        &self.doc_level
    }

    pub fn counts(&self) -> IndexCounts {
        IndexCounts {
            documents: u64::from(self.stats.dc()),
            lemmas: self.lexicon.len() as u64,
            word: totals(&self.word),
            ordinary: totals(&self.ordinary),
            pairs: totals(&self.pairs),
            triples: totals(&self.triples),
            doc_level: totals(&self.doc_level),
            dta_lemmas: self.stats.dta_lemmas().count() as u64,
        }
    }

    pub fn word_postings(&self, lemma: LemmaId) -> Result<Vec<Posting>> {
        self.word.get(&lemma).map_or(Ok(Vec::new()), postings::decode_positions)
    }

    pub fn ordinary_list(&self, lemma: LemmaId) -> Result<Option<OrdinaryList<'_>>> {
        self.ordinary.get(&lemma).map(OrdinaryList::parse).transpose()
    }

    pub fn pair_postings(&self, key: PairKey) -> Result<Vec<PostingWV>> {
        self.pairs.get(&key).map_or(Ok(Vec::new()), postings::decode_wv)
    }

    pub fn has_pair(&self, key: PairKey) -> bool {
        self.pairs.get(&key).is_some()
    }

    pub fn triple_postings(&self, key: TripleKey) -> Result<Vec<PostingFST>> {
        self.triples.get(&key).map_or(Ok(Vec::new()), postings::decode_fst)
    }

    pub fn doc_level_postings(&self, lemma: LemmaId) -> Result<Vec<DocLevelPosting>> {
        self.doc_level.get(&lemma).map_or(Ok(Vec::new()), postings::decode_doc_level)
    }
}
