//! DTA and DL tables.

use std::io::{Read, Write};

use crate::codec::{put_varint, Reader};
use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::lexicon::LemmaId;

const MAGIC: &[u8; 4] = b"PSST";

/// Term statistics for one lemma: `df` plus `(doc, tf)` sorted by doc.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DtaEntry {
    pub df: u32,
    pub tf: Vec<(DocId, u32)>,
}

impl DtaEntry {
    pub fn tf_in(&self, doc: DocId) -> u32 {
        self.tf
            .binary_search_by_key(&doc, |e| e.0)
            .map_or(0, |i| self.tf[i].1)
    }

    pub fn total(&self) -> u64 {
        self.tf.iter().map(|e| u64::from(e.1)).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatTables {
    /// Indexed by lemma id; only lemmas with `fl_rank < ts` are populated.
    dta: Vec<Option<DtaEntry>>,
    dl: Vec<(DocId, u32)>,
    avg_dl: f64,
}

impl StatTables {
    pub(crate) fn new(dta: Vec<Option<DtaEntry>>, dl: Vec<(DocId, u32)>) -> Self {
        let avg_dl = if dl.is_empty() {
            0.0
        } else {
            dl.iter().map(|e| f64::from(e.1)).sum::<f64>() / dl.len() as f64
        };
        StatTables { dta, dl, avg_dl }
    }

    pub fn dc(&self) -> u32 {
        self.dl.len() as u32
    }

    pub fn avg_dl(&self) -> f64 {
        self.avg_dl
    }

    pub fn dl(&self, doc: DocId) -> Option<u32> {
        self.dl.binary_search_by_key(&doc, |e| e.0).ok().map(|i| self.dl[i].1)
    }

    pub fn doc_lengths(&self) -> &[(DocId, u32)] {
        &self.dl
    }

    pub fn dta(&self, lemma: LemmaId) -> Option<&DtaEntry> {
        self.dta.get(lemma.0 as usize).and_then(Option::as_ref)
    }

    pub fn dta_lemmas(&self) -> impl Iterator<Item = (LemmaId, &DtaEntry)> {
        self.dta
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|e| (LemmaId(i as u32), e)))
    }

    pub fn write_to(&self, out: &mut impl Write) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&super::FORMAT_VERSION.to_le_bytes());
        put_varint(&mut buf, self.dl.len() as u64);
        let mut prev = 0u32;
        for &(doc, len) in &self.dl {
            put_varint(&mut buf, u64::from(doc.0 - prev));
            put_varint(&mut buf, u64::from(len));
            prev = doc.0;
        }
        put_varint(&mut buf, self.dta.len() as u64);
        for entry in &self.dta {
            match entry {
                None => buf.push(0),
                Some(e) => {
                    buf.push(1);
                    put_varint(&mut buf, u64::from(e.df));
                    put_varint(&mut buf, e.tf.len() as u64);
                    let mut prev = 0u32;
                    for &(doc, tf) in &e.tf {
                        put_varint(&mut buf, u64::from(doc.0 - prev));
                        put_varint(&mut buf, u64::from(tf));
                        prev = doc.0;
                    }
                }
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(input: &mut impl Read) -> Result<Self> {
        let mut buf = Vec::new();
        input.read_to_end(&mut buf)?;
        if buf.len() < 8 || &buf[..4] != MAGIC {
            return Err(Error::Format("bad stats magic".into()));
        }
        let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
        if version != super::FORMAT_VERSION {
            return Err(Error::Format(format!(
                "format version {version}, expected {}",
                super::FORMAT_VERSION
            )));
        }
        let mut r = Reader::new(&buf[8..]);
        let n = r.varint()? as usize;
        let mut dl = Vec::with_capacity(n.min(1 << 24));
        let mut doc = 0u32;
        for i in 0..n {
            let delta = r.varint_u32()?;
            if i > 0 && delta == 0 {
                return Err(Error::Format("duplicate document in DL table".into()));
            }
            doc = doc.checked_add(delta).ok_or_else(|| Error::Format("doc id overflow".into()))?;
            dl.push((DocId(doc), r.varint_u32()?));
        }
        let m = r.varint()? as usize;
        let mut dta = Vec::with_capacity(m.min(1 << 24));
        for _ in 0..m {
            match r.bytes(1)?[0] {
                0 => dta.push(None),
                1 => {
                    let df = r.varint_u32()?;
                    let k = r.varint()? as usize;
                    let mut tf = Vec::with_capacity(k.min(1 << 24));
                    let mut doc = 0u32;
                    for _ in 0..k {
                        doc = doc
                            .checked_add(r.varint_u32()?)
                            .ok_or_else(|| Error::Format("doc id overflow".into()))?;
                        tf.push((DocId(doc), r.varint_u32()?));
                    }
                    dta.push(Some(DtaEntry { df, tf }));
                }
                other => return Err(Error::Format(format!("bad DTA tag {other}"))),
            }
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes in stats".into()));
        }
        Ok(StatTables::new(dta, dl))
    }
}
