//! On-disk layout: one file per family plus a plain-text manifest.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lexicon::{LemmaTable, Lexicon};

use super::stats::StatTables;
use super::table::{PostingTable, TableKey};
use super::{IndexSet, FORMAT_VERSION};

pub const MANIFEST_FILE: &str = "manifest.txt";
const LEXICON_FILE: &str = "lexicon.tsv";
const LEMMA_TABLE_FILE: &str = "lemma_table.tsv";
const STATS_FILE: &str = "stats.bin";

const FAMILIES: [(&str, &[u8; 4]); 5] = [
    ("word.idx", b"PSWD"),
    ("ordinary.idx", b"PSOR"),
    ("wv.idx", b"PSWV"),
    ("fst.idx", b"PSFT"),
    ("doc.idx", b"PSDL"),
];

fn write_table<K: TableKey>(dir: &Path, family: usize, table: &PostingTable<K>) -> Result<()> {
    let (name, magic) = FAMILIES[family];
    let mut out = BufWriter::new(fs::File::create(dir.join(name))?);
    table.write_to(&mut out, magic)?;
    out.flush()?;
    Ok(())
}

fn read_table<K: TableKey>(dir: &Path, family: usize) -> Result<PostingTable<K>> {
    let (name, magic) = FAMILIES[family];
    let mut input = BufReader::new(fs::File::open(dir.join(name))?);
    PostingTable::read_from(&mut input, magic)
}

fn manifest(index: &IndexSet) -> String {
    let c = index.lexicon().config();
    let table = match index.lexicon().table() {
        LemmaTable::Identity => "identity",
        LemmaTable::Map(_) => "map",
    };
    format!(
        "format_version={FORMAT_VERSION}\nsw_count={}\nfu_count={}\nts={}\nmax_distance={}\nlemma_table={table}\n{}\n",
        c.sw_count,
        c.fu_count,
        c.ts,
        c.max_distance,
        index.counts()
    )
}

/// Writes every family into `dir`, creating it if needed.
pub fn persist(index: &IndexSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    index.lexicon().write(&dir.join(LEXICON_FILE))?;
    let table_path = dir.join(LEMMA_TABLE_FILE);
    match index.lexicon().table() {
        LemmaTable::Map(_) => index.lexicon().table().write(&table_path)?,
        LemmaTable::Identity if table_path.exists() => fs::remove_file(&table_path)?,
        LemmaTable::Identity => {}
    }
    write_table(dir, 0, &index.word)?;
    write_table(dir, 1, &index.ordinary)?;
    write_table(dir, 2, &index.pairs)?;
    write_table(dir, 3, &index.triples)?;
    write_table(dir, 4, &index.doc_level)?;
    let mut out = BufWriter::new(fs::File::create(dir.join(STATS_FILE))?);
    index.stats.write_to(&mut out)?;
    out.flush()?;
    fs::write(dir.join(MANIFEST_FILE), manifest(index))?;
    Ok(())
}

/// Loads an index directory written by [`persist`].
pub fn load(dir: &Path) -> Result<IndexSet> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let version = text
        .lines()
        .find_map(|l| l.strip_prefix("format_version="))
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| Error::Format("manifest lacks format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("format version {version}, expected {FORMAT_VERSION}")));
    }
    let table_path = dir.join(LEMMA_TABLE_FILE);
    let table = if table_path.exists() { Some(LemmaTable::read(&table_path)?) } else { None };
    let lexicon = Lexicon::read(&dir.join(LEXICON_FILE), table)?;
    let stats = StatTables::read_from(&mut BufReader::new(fs::File::open(dir.join(STATS_FILE))?))?;
    Ok(IndexSet::from_parts(
        lexicon,
        read_table(dir, 0)?,
        read_table(dir, 1)?,
        read_table(dir, 2)?,
        read_table(dir, 3)?,
        read_table(dir, 4)?,
        stats,
    ))
}
