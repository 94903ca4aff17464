//! Tokenization, lemmatization and frequency ranking of lemmas.
//!
//! Every lemma known to a [`Lexicon`] gets a dense [`LemmaId`]. Dictionary
//! lemmas are numbered by their FL rank (position in the frequency-sorted
//! lemma list), so comparing ids of dictionary lemmas compares their FL
//! ranks. Lemmas that are missing from the lemma table are kept after the
//! dictionary with an FL rank of `-1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Splits text into maximal runs of alphanumeric characters, lowercased.
/// Positions are consecutive word ordinals starting at zero.
pub fn tokenize(text: &str) -> Vec<(String, u32)> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|word| !word.is_empty())
        .enumerate()
        .map(|(pos, word)| (word.to_lowercase(), pos as u32))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LemmaId(pub u32);

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A lemma together with its FL rank. `None` stands for the out-of-dictionary
/// rank `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma {
    pub text: String,
    pub fl_rank: Option<u32>,
}

impl Lemma {
    /// The FL rank as a signed number, `-1` for out-of-dictionary lemmas.
    pub fn fl_number(&self) -> i64 {
        self.fl_rank.map_or(-1, i64::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Stop,
    FrequentlyUsed,
    Ordinary,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Stop => "stop",
            Tier::FrequentlyUsed => "frequently-used",
            Tier::Ordinary => "ordinary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexiconConfig {
    pub sw_count: u32,
    pub fu_count: u32,
    /// Lemmas with an FL rank below this bound have their TF/DF kept in memory.
    pub ts: u32,
    pub max_distance: u32,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            sw_count: 500,
            fu_count: 1050,
            ts: 5000,
            max_distance: 12,
        }
    }
}

impl LexiconConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sw_count == 0 || self.fu_count == 0 {
            return Err(Error::Config(
                "sw_count and fu_count must be positive".into(),
            ));
        }
        if u64::from(self.ts) < u64::from(self.sw_count) + u64::from(self.fu_count) {
            return Err(Error::Config(format!(
                "ts ({}) must be at least sw_count + fu_count ({})",
                self.ts,
                u64::from(self.sw_count) + u64::from(self.fu_count)
            )));
        }
        if self.max_distance == 0 {
            return Err(Error::Config("max_distance must be at least 1".into()));
        }
        Ok(())
    }

    pub fn tier(&self, fl_rank: Option<u32>) -> Tier {
        match fl_rank {
            Some(r) if r < self.sw_count => Tier::Stop,
            Some(r) if u64::from(r) < u64::from(self.sw_count) + u64::from(self.fu_count) => {
                Tier::FrequentlyUsed
            }
            _ => Tier::Ordinary,
        }
    }
}

/// Classifies a lemma into its frequency tier.
pub fn tier(lemma: &Lemma, config: &LexiconConfig) -> Tier {
    config.tier(lemma.fl_rank)
}

/// Maps tokens to their lemmas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LemmaTable {
    /// Every token is its own (dictionary) lemma.
    Identity,
    /// Explicit token → lemmas listing. Tokens absent from the map that are
    /// not lemmas themselves are out-of-dictionary and become their own lemma
    /// with FL rank `-1`.
    Map(LemmaMap),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LemmaMap {
    tokens: BTreeMap<String, Vec<String>>,
    lemmas: BTreeSet<String>,
}

impl LemmaMap {
    pub fn insert(&mut self, token: &str, lemma: &str) {
        let lemmas = self.tokens.entry(token.to_string()).or_default();
        if !lemmas.iter().any(|l| l == lemma) {
            lemmas.push(lemma.to_string());
        }
        self.lemmas.insert(lemma.to_string());
    }
}

impl LemmaTable {
    /// Parses `token TAB lemma` lines. A token may be listed several times.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = LemmaMap::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, lemma) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(format!("lemma table line {}", n + 1), "expected token<TAB>lemma"))?;
            let (token, lemma) = (token.trim().to_lowercase(), lemma.trim().to_lowercase());
            if token.is_empty() || lemma.is_empty() {
                return Err(Error::parse(format!("lemma table line {}", n + 1), "empty field"));
            }
            map.insert(&token, &lemma);
        }
        Ok(LemmaTable::Map(map))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        if let LemmaTable::Map(map) = self {
            for (token, lemmas) in &map.tokens {
                for lemma in lemmas {
                    writeln!(out, "{token}\t{lemma}")?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Lemma texts for a token and whether they come from the dictionary.
    fn lookup<'a>(&'a self, token: &'a str) -> (Vec<&'a str>, bool) {
        match self {
            LemmaTable::Identity => (vec![token], true),
            LemmaTable::Map(map) => match map.tokens.get(token) {
                Some(lemmas) => (lemmas.iter().map(String::as_str).collect(), true),
                None => (vec![token], map.lemmas.contains(token)),
            },
        }
    }

    fn dictionary_lemmas(&self) -> BTreeSet<&str> {
        match self {
            LemmaTable::Identity => BTreeSet::new(),
            LemmaTable::Map(map) => map.lemmas.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    config: LexiconConfig,
    table: LemmaTable,
    names: Vec<String>,
    ids: HashMap<String, LemmaId>,
    /// Number of dictionary lemmas; ids below this have `fl_rank == id`.
    ranked: u32,
}

impl Lexicon {
    /// Counts lemma occurrences over the corpus and ranks dictionary lemmas by
    /// decreasing count, ties broken by lemma text.
    pub fn build<'a, I>(documents: I, table: LemmaTable, config: LexiconConfig) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        config.validate()?;
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut outside: BTreeSet<String> = BTreeSet::new();
        let mut docs = 0usize;
        for text in documents {
            docs += 1;
            for (token, _) in tokenize(text) {
                let (lemmas, known) = table.lookup(&token);
                for lemma in lemmas {
                    if known {
                        *counts.entry(lemma.to_string()).or_insert(0) += 1;
                    } else {
                        outside.insert(lemma.to_string());
                    }
                }
            }
        }
        if docs == 0 {
            return Err(Error::EmptyCorpus);
        }
        for lemma in table.dictionary_lemmas() {
            counts.entry(lemma.to_string()).or_insert(0);
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let ranked = ranked.into_iter().map(|(lemma, _)| lemma).collect();
        Self::assemble(ranked, outside.into_iter().collect(), table, config)
    }

    /// Builds a lexicon from an explicit FL list (index = FL rank).
    pub fn from_ranked(ranked: Vec<String>, table: LemmaTable, config: LexiconConfig) -> Result<Self> {
        config.validate()?;
        Self::assemble(ranked, Vec::new(), table, config)
    }

    fn assemble(
        ranked: Vec<String>,
        outside: Vec<String>,
        table: LemmaTable,
        config: LexiconConfig,
    ) -> Result<Self> {
        let count = ranked.len();
        let mut names = ranked;
        names.extend(outside);
        let mut ids = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if ids.insert(name.clone(), LemmaId(i as u32)).is_some() {
                return Err(Error::Config(format!("lemma {name:?} listed twice")));
            }
        }
        Ok(Lexicon {
            config,
            table,
            names,
            ids,
            ranked: count as u32,
        })
    }

    pub fn config(&self) -> &LexiconConfig {
        &self.config
    }

    pub fn table(&self) -> &LemmaTable {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, text: &str) -> Option<LemmaId> {
        self.ids.get(text).copied()
    }

    pub fn text(&self, id: LemmaId) -> &str {
        &self.names[id.0 as usize]
    }

    pub fn fl_rank(&self, id: LemmaId) -> Option<u32> {
        (id.0 < self.ranked).then_some(id.0)
    }

    /// Sort key where lower means more frequent. Out-of-dictionary lemmas
    /// sort after every ranked lemma.
    pub fn fl_order(&self, id: LemmaId) -> u64 {
        match self.fl_rank(id) {
            Some(r) => u64::from(r),
            None => u64::from(u32::MAX) + 1 + u64::from(id.0),
        }
    }

    pub fn tier_of(&self, id: LemmaId) -> Tier {
        self.config.tier(self.fl_rank(id))
    }

    /// Whether TF/DF for the lemma live in the in-memory DTA table.
    pub fn in_dta(&self, id: LemmaId) -> bool {
        self.fl_rank(id).is_some_and(|r| r < self.config.ts)
    }

    pub fn lemma(&self, id: LemmaId) -> Lemma {
        Lemma {
            text: self.text(id).to_string(),
            fl_rank: self.fl_rank(id),
        }
    }

    /// Every lemma listed for the token, or the token itself with rank `-1`
    /// when the table does not know it.
    pub fn lemmatize(&self, token: &str) -> Vec<Lemma> {
        let (lemmas, _) = self.table.lookup(token);
        lemmas
            .into_iter()
            .map(|text| Lemma {
                text: text.to_string(),
                fl_rank: self.id(text).and_then(|id| self.fl_rank(id)),
            })
            .collect()
    }

    /// Lemma ids for a token of an indexed document.
    pub fn token_lemma_ids(&self, token: &str) -> Result<Vec<LemmaId>> {
        let (lemmas, _) = self.table.lookup(token);
        lemmas
            .into_iter()
            .map(|text| self.id(text).ok_or_else(|| Error::UnknownLemma(text.to_string())))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        let c = &self.config;
        let table = match self.table {
            LemmaTable::Identity => "identity",
            LemmaTable::Map(_) => "map",
        };
        writeln!(
            out,
            "#lexicon\tsw_count={}\tfu_count={}\tts={}\tmax_distance={}\ttable={}",
            c.sw_count, c.fu_count, c.ts, c.max_distance, table
        )?;
        for (i, name) in self.names.iter().enumerate() {
            let rank = self.fl_rank(LemmaId(i as u32)).map_or(-1, i64::from);
            writeln!(out, "{name}\t{rank}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a lexicon file; `table` must be supplied when the header says
    /// the lexicon was built with a lemma map.
    pub fn read(path: &Path, table: Option<LemmaTable>) -> Result<Self> {
        let reader = BufReader::new(fs::File::open(path)?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(path.display().to_string(), "missing header"))?;
        let mut fields = header.split('\t');
        if fields.next() != Some("#lexicon") {
            return Err(Error::parse(path.display().to_string(), "bad header"));
        }
        let mut kv = HashMap::new();
        for field in fields {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(path.display().to_string(), format!("bad header field {field:?}")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let num = |key: &str| -> Result<u32> {
            kv.get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(path.display().to_string(), format!("missing {key}")))
        };
        let config = LexiconConfig {
            sw_count: num("sw_count")?,
            fu_count: num("fu_count")?,
            ts: num("ts")?,
            max_distance: num("max_distance")?,
        };
        let table = match kv.get("table").map(String::as_str) {
            Some("identity") => LemmaTable::Identity,
            Some("map") => table.ok_or_else(|| {
                Error::Format("lexicon was built with a lemma map but none was supplied".into())
            })?,
            other => return Err(Error::parse(path.display().to_string(), format!("unknown table kind {other:?}"))),
        };
        let mut ranked = Vec::new();
        let mut outside = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            let (name, rank) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(format!("{}:{}", path.display(), n + 2), "expected lemma<TAB>rank"))?;
            let rank: i64 = rank
                .parse()
                .map_err(|_| Error::parse(format!("{}:{}", path.display(), n + 2), "bad rank"))?;
            if rank < 0 {
                outside.push(name.to_string());
            } else {
                if rank as usize != ranked.len() || !outside.is_empty() {
                    return Err(Error::parse(format!("{}:{}", path.display(), n + 2), "ranks out of order"));
                }
                ranked.push(name.to_string());
            }
        }
        config.validate()?;
        Self::assemble(ranked, outside, table, config)
    }
}
