use std::collections::HashMap;
use std::hash::Hash;
use std::io::{Read, Write};

use crate::codec::Reader;
use crate::error::{Error, Result};
use crate::lexicon::LemmaId;

/// Key of a posting table: one, two or three lemma components.
pub trait TableKey: Copy + Ord + Hash {
    const ARITY: usize;
    fn parts(&self) -> [u32; 3];
    fn from_parts(parts: &[u32]) -> Self;
}

impl TableKey for LemmaId {
    const ARITY: usize = 1;
    fn parts(&self) -> [u32; 3] {
        [self.0, 0, 0]
    }
    fn from_parts(parts: &[u32]) -> Self {
        LemmaId(parts[0])
    }
}

/// `(w, v)`: `w` frequently used, `v` frequently used or ordinary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairKey {
    pub w: LemmaId,
    pub v: LemmaId,
}

impl TableKey for PairKey {
    const ARITY: usize = 2;
    fn parts(&self) -> [u32; 3] {
        [self.w.0, self.v.0, 0]
    }
    fn from_parts(parts: &[u32]) -> Self {
        PairKey { w: LemmaId(parts[0]), v: LemmaId(parts[1]) }
    }
}

/// `(f, s, t)` over stop lemmas with `f <= s <= t` in FL order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripleKey {
    pub f: LemmaId,
    pub s: LemmaId,
    pub t: LemmaId,
}

impl TripleKey {
    /// Orders three stop lemmas; stop lemma ids coincide with FL ranks.
    pub fn normalized(a: LemmaId, b: LemmaId, c: LemmaId) -> Self {
        let mut k = [a, b, c];
        k.sort_unstable();
        TripleKey { f: k[0], s: k[1], t: k[2] }
    }
}

impl TableKey for TripleKey {
    const ARITY: usize = 3;
    fn parts(&self) -> [u32; 3] {
        [self.f.0, self.s.0, self.t.0]
    }
    fn from_parts(parts: &[u32]) -> Self {
        TripleKey { f: LemmaId(parts[0]), s: LemmaId(parts[1]), t: LemmaId(parts[2]) }
    }
}

/// Immutable key → encoded posting list map stored in three flat arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostingTable<K> {
    keys: Vec<K>,
    offsets: Vec<u64>,
    data: Vec<u8>,
}

impl<K: TableKey> Default for PostingTable<K> {
    fn default() -> Self {
        PostingTable { keys: Vec::new(), offsets: vec![0], data: Vec::new() }
    }
}

impl<K: TableKey> PostingTable<K> {
    pub fn from_blobs(mut blobs: Vec<(K, Vec<u8>)>) -> Self {
        blobs.sort_unstable_by_key(|b| b.0);
        let total = blobs.iter().map(|b| b.1.len()).sum();
        let mut table = PostingTable {
            keys: Vec::with_capacity(blobs.len()),
            offsets: Vec::with_capacity(blobs.len() + 1),
            data: Vec::with_capacity(total),
        };
        table.offsets.push(0);
        for (key, blob) in blobs {
            table.keys.push(key);
            table.data.extend_from_slice(&blob);
            table.offsets.push(table.data.len() as u64);
        }
        table
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, key: &K) -> Option<&[u8]> {
        let i = self.keys.binary_search(key).ok()?;
        Some(self.blob(i))
    }

    fn blob(&self, i: usize) -> &[u8] {
        &self.data[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (K, &[u8])> + '_ {
        self.keys.iter().enumerate().map(|(i, k)| (*k, self.blob(i)))
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    /// Keys in the half-open range `[from, to)`.
    pub fn range(&self, from: &K, to: &K) -> impl Iterator<Item = (K, &[u8])> + '_ {
        let lo = self.keys.partition_point(|k| k < from);
        let hi = self.keys.partition_point(|k| k < to);
        (lo..hi).map(move |i| (self.keys[i], self.blob(i)))
    }

    pub fn write_to(&self, out: &mut impl Write, magic: &[u8; 4]) -> Result<()> {
        out.write_all(magic)?;
        out.write_all(&super::FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(K::ARITY as u32).to_le_bytes())?;
        out.write_all(&(self.keys.len() as u64).to_le_bytes())?;
        for key in &self.keys {
            for part in &key.parts()[..K::ARITY] {
                out.write_all(&part.to_le_bytes())?;
            }
        }
        for off in &self.offsets {
            out.write_all(&off.to_le_bytes())?;
        }
        out.write_all(&self.data)?;
        Ok(())
    }

    pub fn read_from(input: &mut impl Read, magic: &[u8; 4]) -> Result<Self> {
        let mut buf = Vec::new();
        input.read_to_end(&mut buf)?;
        let bad = |m: &str| Error::Format(m.to_string());
        if buf.len() < 20 || &buf[..4] != magic {
            return Err(bad("bad magic"));
        }
        let u32_at = |at: usize| u32::from_le_bytes(buf[at..at + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != super::FORMAT_VERSION {
            return Err(Error::Format(format!(
                "format version {version}, expected {}",
                super::FORMAT_VERSION
            )));
        }
        if u32_at(8) as usize != K::ARITY {
            return Err(bad("key arity mismatch"));
        }
        let n = u64::from_le_bytes(buf[12..20].try_into().unwrap()) as usize;
        let keys_end = 20 + n * 4 * K::ARITY;
        let offs_end = keys_end + (n + 1) * 8;
        if buf.len() < offs_end {
            return Err(bad("truncated table"));
        }
        let mut keys = Vec::with_capacity(n);
        let mut parts = [0u32; 3];
        for i in 0..n {
            for (j, part) in parts.iter_mut().enumerate().take(K::ARITY) {
                *part = u32_at(20 + (i * K::ARITY + j) * 4);
            }
            keys.push(K::from_parts(&parts));
        }
        let offsets: Vec<u64> = (0..=n)
            .map(|i| u64::from_le_bytes(buf[keys_end + i * 8..keys_end + i * 8 + 8].try_into().unwrap()))
            .collect();
        let data = buf[offs_end..].to_vec();
        if offsets[0] != 0
            || offsets.windows(2).any(|w| w[0] > w[1])
            || offsets[n] as usize != data.len()
            || keys.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(bad("inconsistent table layout"));
        }
        Ok(PostingTable { keys, offsets, data })
    }
}

/// Accumulates per-key streams while documents are appended in id order.
#[derive(Debug)]
pub struct TableBuilder<K, S> {
    streams: HashMap<K, S>,
}

impl<K: TableKey, S: Default> TableBuilder<K, S> {
    pub fn new() -> Self {
        TableBuilder { streams: HashMap::new() }
    }

    pub fn stream(&mut self, key: K) -> &mut S {
        self.streams.entry(key).or_default()
    }

    pub fn finish(self, mut seal: impl FnMut(S) -> Vec<u8>) -> PostingTable<K> {
        let blobs = self.streams.into_iter().map(|(k, s)| (k, seal(s))).collect();
        PostingTable::from_blobs(blobs)
    }
}

/// Reads the posting count prefix shared by every blob.
pub fn blob_count(blob: &[u8]) -> Result<u64> {
    Reader::new(blob).varint()
}
