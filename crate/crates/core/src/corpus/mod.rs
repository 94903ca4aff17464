//! Corpus ingestion plus synthetic corpus and query generation.

mod synth;

pub use synth::{generate_corpus, generate_queries, GenSpec, QueryGenSpec};

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId(pub u32);

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: DocId,
    pub text: String,
}

/// Loads a corpus from a `doc_id TAB text` file, or from a directory of
/// plain-text files whose sorted names define the document ids.
/// Documents are returned sorted by id.
pub fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        files
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(Document {
                    id: DocId(i as u32),
                    text: fs::read_to_string(&p)?,
                })
            })
            .collect()
    } else {
        parse_corpus(&fs::read_to_string(path)?, &path.display().to_string())
    }
}

pub fn parse_corpus(text: &str, origin: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let location = || format!("{origin}:{}", n + 1);
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(location(), "expected doc_id<TAB>text"))?;
        let id: u32 = id
            .trim()
            .parse()
            .map_err(|_| Error::parse(location(), format!("bad document id {id:?}")))?;
        if !seen.insert(id) {
            return Err(Error::parse(location(), format!("duplicate document id {id}")));
        }
        docs.push(Document {
            id: DocId(id),
            text: body.to_string(),
        });
    }
    docs.sort_by_key(|d| d.id);
    Ok(docs)
}

pub fn write_corpus(docs: &[Document], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for doc in docs {
        let text = doc.text.replace(['\t', '\n', '\r'], " ");
        writeln!(out, "{}\t{}", doc.id, text)?;
    }
    out.flush()?;
    Ok(())
}

/// One query per line; blank lines are skipped.
pub fn read_queries(path: &Path) -> Result<Vec<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

pub fn write_queries(queries: &[String], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for q in queries {
        writeln!(out, "{q}")?;
    }
    out.flush()?;
    Ok(())
}
