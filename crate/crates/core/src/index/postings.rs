//! Posting record shapes and their delta/varint stream encodings.
//!
//! Every blob starts with the posting count. Document ids are delta coded;
//! positions are delta coded within a document and absolute at a document
//! change; signed distances are zigzag coded.

use crate::codec::{put_signed, put_varint, Reader};
use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::lexicon::LemmaId;

/// Lists shorter than this keep `(ID, P)` in one stream next to `(NSW)`.
pub const SHORT_LIST_THRESHOLD: u64 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting {
    pub doc: DocId,
    pub pos: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PostingWV {
    pub doc: DocId,
    /// Position of `w`.
    pub pos: u32,
    /// `position(v) - position(w)`.
    pub d: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PostingFST {
    pub doc: DocId,
    /// Position of `f`.
    pub pos: u32,
    pub d1: i32,
    pub d2: i32,
}

/// Signed offsets of the stop lemmas around an ordinary-index posting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NswRecord {
    pub entries: Vec<(LemmaId, i32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PostingOrdinary {
    pub doc: DocId,
    pub pos: u32,
    pub nsw: NswRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocLevelPosting {
    pub doc: DocId,
    pub first_pos: u32,
}

/// Shared `(ID, P)` delta state.
#[derive(Debug, Default, Clone, Copy)]
struct DocPosState {
    doc: u32,
    pos: u32,
}

impl DocPosState {
    fn put(&mut self, out: &mut Vec<u8>, doc: DocId, pos: u32) {
        debug_assert!(doc.0 >= self.doc);
        let dd = doc.0 - self.doc;
        put_varint(out, u64::from(dd));
        if dd == 0 {
            debug_assert!(pos >= self.pos);
            put_varint(out, u64::from(pos - self.pos));
        } else {
            put_varint(out, u64::from(pos));
        }
        self.doc = doc.0;
        self.pos = pos;
    }

    fn take(&mut self, r: &mut Reader<'_>) -> Result<Posting> {
        let dd = r.varint_u32()?;
        let p = r.varint_u32()?;
        self.doc = self.doc.checked_add(dd).ok_or_else(overflow)?;
        self.pos = if dd == 0 { self.pos.checked_add(p).ok_or_else(overflow)? } else { p };
        Ok(Posting { doc: DocId(self.doc), pos: self.pos })
    }
}

fn overflow() -> Error {
    Error::Format("posting value overflow".into())
}

fn seal(count: u64, body: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 4);
    put_varint(&mut out, count);
    out.extend_from_slice(body);
    out
}

fn to_i32(v: i64) -> Result<i32> {
    i32::try_from(v).map_err(|_| overflow())
}

/// Builder for `(ID, P)`, `(ID, P, D)` and `(ID, P, D1, D2)` streams.
#[derive(Debug, Default)]
pub struct PositionalStream {
    bytes: Vec<u8>,
    state: DocPosState,
    count: u64,
}

impl PositionalStream {
    pub fn push(&mut self, doc: DocId, pos: u32) {
        self.state.put(&mut self.bytes, doc, pos);
        self.count += 1;
    }

    pub fn push_wv(&mut self, doc: DocId, pos: u32, d: i32) {
        self.push(doc, pos);
        put_signed(&mut self.bytes, i64::from(d));
    }

    pub fn push_fst(&mut self, doc: DocId, pos: u32, d1: i32, d2: i32) {
        self.push(doc, pos);
        put_signed(&mut self.bytes, i64::from(d1));
        put_signed(&mut self.bytes, i64::from(d2));
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn seal(self) -> Vec<u8> {
        seal(self.count, &self.bytes)
    }
}

fn decode_with<T>(blob: &[u8], mut item: impl FnMut(Posting, &mut Reader<'_>) -> Result<T>) -> Result<Vec<T>> {
    let mut r = Reader::new(blob);
    let count = r.varint()?;
    let mut state = DocPosState::default();
    let mut out = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        let p = state.take(&mut r)?;
        out.push(item(p, &mut r)?);
    }
    if !r.is_empty() {
        return Err(Error::Format("trailing bytes after postings".into()));
    }
    Ok(out)
}

pub fn decode_positions(blob: &[u8]) -> Result<Vec<Posting>> {
    decode_with(blob, |p, _| Ok(p))
}

pub fn decode_doc_level(blob: &[u8]) -> Result<Vec<DocLevelPosting>> {
    decode_with(blob, |p, _| Ok(DocLevelPosting { doc: p.doc, first_pos: p.pos }))
}

pub fn decode_wv(blob: &[u8]) -> Result<Vec<PostingWV>> {
    decode_with(blob, |p, r| {
        Ok(PostingWV { doc: p.doc, pos: p.pos, d: to_i32(r.signed()?)? })
    })
}

pub fn decode_fst(blob: &[u8]) -> Result<Vec<PostingFST>> {
    decode_with(blob, |p, r| {
        Ok(PostingFST {
            doc: p.doc,
            pos: p.pos,
            d1: to_i32(r.signed()?)?,
            d2: to_i32(r.signed()?)?,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdinaryLayout {
    /// Separate `(ID)`, `(P)` and `(NSW)` streams.
    Split = 0,
    /// Short list: `(ID, P)` and `(NSW)`.
    Short = 1,
    /// Stop lemma: first occurrence per document, no NSW stream.
    StopFirst = 2,
}

/// Builder for an ordinary-index key.
#[derive(Debug, Default)]
pub struct OrdinaryStream {
    ids: Vec<u8>,
    pos: Vec<u8>,
    nsw: Vec<u8>,
    last_doc: u32,
    last_pos: u32,
    count: u64,
    stop: Option<PositionalStream>,
}

impl OrdinaryStream {
    pub fn push(&mut self, doc: DocId, pos: u32, nsw: &[(LemmaId, i32)]) {
        debug_assert!(self.stop.is_none());
        let dd = doc.0 - self.last_doc;
        put_varint(&mut self.ids, u64::from(dd));
        let p = if dd == 0 && self.count > 0 { pos - self.last_pos } else { pos };
        put_varint(&mut self.pos, u64::from(p));
        put_varint(&mut self.nsw, nsw.len() as u64);
        for &(lemma, off) in nsw {
            put_varint(&mut self.nsw, u64::from(lemma.0));
            put_signed(&mut self.nsw, i64::from(off));
        }
        self.last_doc = doc.0;
        self.last_pos = pos;
        self.count += 1;
    }

    pub fn push_stop_first(&mut self, doc: DocId, first_pos: u32) {
        self.stop.get_or_insert_with(PositionalStream::default).push(doc, first_pos);
    }

    pub fn seal(self) -> Vec<u8> {
        let mut out = Vec::new();
        if let Some(stop) = self.stop {
            put_varint(&mut out, stop.count);
            out.push(OrdinaryLayout::StopFirst as u8);
            put_varint(&mut out, stop.bytes.len() as u64);
            out.extend_from_slice(&stop.bytes);
            return out;
        }
        put_varint(&mut out, self.count);
        if self.count < SHORT_LIST_THRESHOLD {
            let mut combined = Vec::with_capacity(self.ids.len() + self.pos.len());
            let (mut ri, mut rp) = (Reader::new(&self.ids), Reader::new(&self.pos));
            while !ri.is_empty() {
                put_varint(&mut combined, ri.varint().expect("own stream"));
                put_varint(&mut combined, rp.varint().expect("own stream"));
            }
            out.push(OrdinaryLayout::Short as u8);
            for stream in [&combined[..], &self.nsw[..]] {
                put_varint(&mut out, stream.len() as u64);
                out.extend_from_slice(stream);
            }
        } else {
            out.push(OrdinaryLayout::Split as u8);
            for stream in [&self.ids[..], &self.pos[..], &self.nsw[..]] {
                put_varint(&mut out, stream.len() as u64);
                out.extend_from_slice(stream);
            }
        }
        out
    }
}

/// Parsed view over an ordinary-index blob.
#[derive(Debug, Clone, Copy)]
pub struct OrdinaryList<'a> {
    layout: OrdinaryLayout,
    count: u64,
    /// `(ID)` for split layout, `(ID, P)` otherwise.
    first: &'a [u8],
    positions: &'a [u8],
    nsw: &'a [u8],
}

impl<'a> OrdinaryList<'a> {
    pub fn parse(blob: &'a [u8]) -> Result<Self> {
        let mut r = Reader::new(blob);
        let count = r.varint()?;
        let layout = match r.bytes(1)?[0] {
            0 => OrdinaryLayout::Split,
            1 => OrdinaryLayout::Short,
            2 => OrdinaryLayout::StopFirst,
            other => return Err(Error::Format(format!("unknown ordinary layout {other}"))),
        };
        let stream = |r: &mut Reader<'a>| -> Result<&'a [u8]> {
            let len = r.varint()? as usize;
            r.bytes(len)
        };
        let first = stream(&mut r)?;
        let (positions, nsw) = match layout {
            OrdinaryLayout::Split => (stream(&mut r)?, stream(&mut r)?),
            OrdinaryLayout::Short => (&[][..], stream(&mut r)?),
            OrdinaryLayout::StopFirst => (&[][..], &[][..]),
        };
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes in ordinary list".into()));
        }
        Ok(OrdinaryList { layout, count, first, positions, nsw })
    }

    pub fn layout(&self) -> OrdinaryLayout {
        self.layout
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn has_nsw(&self) -> bool {
        self.layout != OrdinaryLayout::StopFirst
    }

    /// The raw `(ID)` stream; only present in the split layout.
    pub fn id_stream(&self) -> Option<&'a [u8]> {
        (self.layout == OrdinaryLayout::Split).then_some(self.first)
    }

    pub fn nsw_stream(&self) -> Option<&'a [u8]> {
        self.has_nsw().then_some(self.nsw)
    }

    /// Document id of every posting, reading only the `(ID)` stream when the
    /// layout allows it.
    pub fn doc_ids(&self) -> Result<Vec<DocId>> {
        if self.layout != OrdinaryLayout::Split {
            return Ok(self.postings()?.into_iter().map(|p| p.doc).collect());
        }
        let mut r = Reader::new(self.first);
        let mut doc = 0u32;
        let mut out = Vec::with_capacity(self.count as usize);
        for _ in 0..self.count {
            doc = doc.checked_add(r.varint_u32()?).ok_or_else(overflow)?;
            out.push(DocId(doc));
        }
        Ok(out)
    }

    /// `(ID, P)` postings with the NSW stream skipped.
    pub fn postings(&self) -> Result<Vec<Posting>> {
        let mut out = Vec::with_capacity(self.count as usize);
        match self.layout {
            OrdinaryLayout::Split => {
                let (mut ri, mut rp) = (Reader::new(self.first), Reader::new(self.positions));
                let (mut doc, mut pos) = (0u32, 0u32);
                for i in 0..self.count {
                    let dd = ri.varint_u32()?;
                    let p = rp.varint_u32()?;
                    doc = doc.checked_add(dd).ok_or_else(overflow)?;
                    pos = if dd == 0 && i > 0 { pos.checked_add(p).ok_or_else(overflow)? } else { p };
                    out.push(Posting { doc: DocId(doc), pos });
                }
            }
            OrdinaryLayout::Short | OrdinaryLayout::StopFirst => {
                let mut r = Reader::new(self.first);
                let mut state = DocPosState::default();
                for _ in 0..self.count {
                    out.push(state.take(&mut r)?);
                }
            }
        }
        Ok(out)
    }

    /// Full `(ID, P, NSW)` records. Stop-lemma lists yield empty NSW records.
    pub fn postings_with_nsw(&self) -> Result<Vec<PostingOrdinary>> {
        let base = self.postings()?;
        if !self.has_nsw() {
            return Ok(base
                .into_iter()
                .map(|p| PostingOrdinary { doc: p.doc, pos: p.pos, nsw: NswRecord::default() })
                .collect());
        }
        let mut r = Reader::new(self.nsw);
        base.into_iter()
            .map(|p| {
                let n = r.varint()? as usize;
                let mut entries = Vec::with_capacity(n);
                for _ in 0..n {
                    let lemma = LemmaId(r.varint_u32()?);
                    entries.push((lemma, to_i32(r.signed()?)?));
                }
                Ok(PostingOrdinary { doc: p.doc, pos: p.pos, nsw: NswRecord { entries } })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted_postings() -> impl Strategy<Value = Vec<(u32, u32, i32)>> {
        proptest::collection::vec((0u32..50, 0u32..400, -12i32..=12), 0..300).prop_map(|mut v| {
            v.sort();
            v.dedup();
            v
        })
    }

    proptest! {
        #[test]
        fn ordinary_layouts_decode_identically(raw in sorted_postings()) {
            let mut s = OrdinaryStream::default();
            for &(doc, pos, d) in &raw {
                s.push(DocId(doc), pos, &[(LemmaId(d.unsigned_abs()), d)]);
            }
            let blob = s.seal();
            let list = OrdinaryList::parse(&blob).unwrap();
            let expect_layout = if (raw.len() as u64) < SHORT_LIST_THRESHOLD {
                OrdinaryLayout::Short
            } else {
                OrdinaryLayout::Split
            };
            prop_assert_eq!(list.layout(), expect_layout);
            let full = list.postings_with_nsw().unwrap();
            prop_assert_eq!(full.len(), raw.len());
            for (p, &(doc, pos, d)) in full.iter().zip(&raw) {
                prop_assert_eq!(p.doc, DocId(doc));
                prop_assert_eq!(p.pos, pos);
                prop_assert_eq!(&p.nsw.entries, &vec![(LemmaId(d.unsigned_abs()), d)]);
            }
            let ids = list.doc_ids().unwrap();
            prop_assert!(ids.iter().zip(&raw).all(|(a, b)| a.0 == b.0));
        }

        #[test]
        fn fst_stream_round_trip(raw in sorted_postings()) {
            let mut s = PositionalStream::default();
            for &(doc, pos, d) in &raw {
                s.push_fst(DocId(doc), pos, d, -d);
            }
            let got = decode_fst(&s.seal()).unwrap();
            let want: Vec<PostingFST> = raw
                .iter()
                .map(|&(doc, pos, d)| PostingFST { doc: DocId(doc), pos, d1: d, d2: -d })
                .collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn stop_first_has_no_nsw() {
        let mut s = OrdinaryStream::default();
        s.push_stop_first(DocId(3), 4);
        s.push_stop_first(DocId(5), 0);
        let blob = s.seal();
        let list = OrdinaryList::parse(&blob).unwrap();
        assert_eq!(list.layout(), OrdinaryLayout::StopFirst);
        assert!(list.nsw_stream().is_none());
        assert_eq!(
            list.postings().unwrap(),
            vec![Posting { doc: DocId(3), pos: 4 }, Posting { doc: DocId(5), pos: 0 }]
        );
    }

    #[test]
    fn corrupt_blob_is_rejected() {
        let mut s = PositionalStream::default();
        s.push_wv(DocId(1), 2, -3);
        let mut blob = s.seal();
        blob.push(0);
        assert!(decode_wv(&blob).is_err());
        assert!(decode_wv(&blob[..2]).is_err());
    }
}
