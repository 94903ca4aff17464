//! Command-line front end: index building, search, experiments and
//! synthetic data generation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use proxsearch::corpus::{generate_corpus, generate_queries, read_corpus, read_queries, write_corpus, write_queries};
use proxsearch::corpus::{GenSpec, QueryGenSpec};
use proxsearch::eval::{run_experiment, EvalConfig};
use proxsearch::index::{build_indexes, load, persist};
use proxsearch::lexicon::{LemmaTable, Lexicon, LexiconConfig};
use proxsearch::query::{search_additional, search_ordinary, two_step_search, write_results_tsv, Query};
use proxsearch::query::DEFAULT_FIRST_STEP_THRESHOLD;
use proxsearch::ranking::{rank, RankConfig, RankFunction};

#[derive(Parser, Debug)]
#[command(name = "proxsearch", version, about = "Proximity full-text search with multi-component key indexes")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Each one may also be given in the
/// `--config` file as `key=value`; flags win over the file.
#[derive(Args, Debug)]
struct Flags {
    /// key=value configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Index directory.
    #[arg(long = "index", global = true, value_name = "DIR")]
    index_dir: Option<PathBuf>,
    /// Corpus file (`doc_id TAB text` lines) or directory of text files.
    #[arg(long = "corpus", global = true, value_name = "PATH")]
    corpus_path: Option<PathBuf>,
    /// `token TAB lemma` table; without it every token is its own lemma.
    #[arg(long = "lemma-table", global = true, value_name = "FILE")]
    lemma_table_path: Option<PathBuf>,
    #[arg(long, global = true)]
    sw_count: Option<u32>,
    #[arg(long, global = true)]
    fu_count: Option<u32>,
    #[arg(long, global = true)]
    ts: Option<u32>,
    #[arg(long, global = true)]
    max_distance: Option<u32>,
    /// Fragment length below which two results compare by position.
    #[arg(long, global = true)]
    lrd: Option<u32>,
    /// Relevance function, e.g. `TP_BM25` or `WeiSum(0,0.1,0.9)`.
    #[arg(long, global = true)]
    function: Option<String>,
    /// Cut-offs N of the report, comma separated.
    #[arg(long = "n", global = true, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    /// Maximal query lengths of the report buckets, comma separated.
    #[arg(long = "max-q", global = true, value_delimiter = ',')]
    max_query_lengths: Option<Vec<usize>>,
    #[arg(long, global = true)]
    first_step_threshold: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build and persist every index family for a corpus.
    Build,
    /// Run one query, or every line of a query file, and print ranked TSV.
    Search {
        #[arg(long, value_enum, default_value_t = Mode::TwoStep)]
        mode: Mode,
        /// Query file, one query per line; ids number the non-blank lines from 1.
        #[arg(long, value_name = "FILE", conflicts_with = "query")]
        queries: Option<PathBuf>,
        /// Id printed in the first column for a single query.
        #[arg(long, default_value_t = 1)]
        query_id: usize,
        /// Query text.
        #[arg(required_unless_present = "queries")]
        query: Vec<String>,
    },
    /// Compare baseline and two-step results and write report.tsv and
    /// ndcg_surface.tsv.
    Eval {
        #[arg(long, value_name = "FILE")]
        queries: PathBuf,
        /// Output directory.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        /// Functions to evaluate (repeatable); defaults to the full grid.
        #[arg(long = "functions", value_name = "FUNCTION")]
        functions: Vec<String>,
    },
    /// Write a synthetic Zipf corpus.
    GenCorpus {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        docs: u32,
        #[arg(long, default_value_t = 150)]
        mean_len: u32,
        #[arg(long, default_value_t = 5000)]
        vocab: u32,
        #[arg(long, default_value_t = 1.1)]
        zipf: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sample queries from the windows of a corpus.
    GenQueries {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 24)]
        window: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ordinary,
    Additional,
    TwoStep,
}

/// Fully resolved settings: defaults, then the config file, then flags.
#[derive(Debug, Clone)]
struct CliConfig {
    index_dir: Option<PathBuf>,
    corpus_path: Option<PathBuf>,
    lemma_table_path: Option<PathBuf>,
    lexicon: LexiconConfig,
    lrd: u32,
    rank: RankConfig,
    functions: Vec<RankFunction>,
    n_values: Vec<usize>,
    max_query_lengths: Vec<usize>,
    first_step_threshold: usize,
}

impl Default for CliConfig {
    fn default() -> Self {
        let eval = EvalConfig::default();
        CliConfig {
            index_dir: None,
            corpus_path: None,
            lemma_table_path: None,
            lexicon: LexiconConfig::default(),
            lrd: eval.lrd,
            rank: eval.rank,
            functions: RankFunction::evaluated(),
            n_values: eval.n_values,
            max_query_lengths: eval.max_query_lengths,
            first_step_threshold: DEFAULT_FIRST_STEP_THRESHOLD,
        }
    }
}

/// Marks failures that come from bad arguments or settings (exit code 1).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| usage(format!("{key}: invalid value {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

/// Function lists in files are separated by whitespace or `;` because the
/// WeiSum syntax itself contains commas.
fn parse_functions(value: &str) -> Result<Vec<RankFunction>> {
    value
        .split([';', ' ', '\t'])
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: proxsearch::Error| usage(e.to_string())))
        .collect()
}

impl CliConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "index_dir" => self.index_dir = Some(value.into()),
            "corpus_path" => self.corpus_path = Some(value.into()),
            "lemma_table_path" => self.lemma_table_path = Some(value.into()),
            "sw_count" => self.lexicon.sw_count = parse_num(key, value)?,
            "fu_count" => self.lexicon.fu_count = parse_num(key, value)?,
            "ts" => self.lexicon.ts = parse_num(key, value)?,
            "max_distance" => self.lexicon.max_distance = parse_num(key, value)?,
            "lrd" => self.lrd = parse_num(key, value)?,
            "n_values" => self.n_values = parse_list(key, value)?,
            "max_query_lengths" => self.max_query_lengths = parse_list(key, value)?,
            "first_step_threshold" => self.first_step_threshold = parse_num(key, value)?,
            "functions" => self.functions = parse_functions(value)?,
            _ => {
                let known = self.rank.apply(key, value).map_err(|e| usage(e.to_string()))?;
                if !known {
                    bail!(usage(format!("unknown configuration key {key:?}")));
                }
            }
        }
        Ok(())
    }

    fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config = CliConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
            config
                .apply(key.trim(), value)
                .with_context(|| format!("{}:{}", path.display(), n + 1))?;
        }
        Ok(config)
    }

    fn resolve(flags: &Flags) -> Result<Self> {
        let mut c = match &flags.config {
            Some(path) => Self::from_file(path)?,
            None => CliConfig::default(),
        };
        if let Some(v) = &flags.index_dir {
            c.index_dir = Some(v.clone());
        }
        if let Some(v) = &flags.corpus_path {
            c.corpus_path = Some(v.clone());
        }
        if let Some(v) = &flags.lemma_table_path {
            c.lemma_table_path = Some(v.clone());
        }
        c.lexicon.sw_count = flags.sw_count.unwrap_or(c.lexicon.sw_count);
        c.lexicon.fu_count = flags.fu_count.unwrap_or(c.lexicon.fu_count);
        c.lexicon.ts = flags.ts.unwrap_or(c.lexicon.ts);
        c.lexicon.max_distance = flags.max_distance.unwrap_or(c.lexicon.max_distance);
        c.lrd = flags.lrd.unwrap_or(c.lrd);
        if let Some(f) = &flags.function {
            c.rank.function = f.parse().map_err(|e: proxsearch::Error| usage(e.to_string()))?;
        }
        if let Some(v) = &flags.n_values {
            c.n_values = v.clone();
        }
        if let Some(v) = &flags.max_query_lengths {
            c.max_query_lengths = v.clone();
        }
        c.first_step_threshold = flags.first_step_threshold.unwrap_or(c.first_step_threshold);
        c.lexicon.validate().map_err(|e| usage(e.to_string()))?;
        c.rank.validate().map_err(|e| usage(e.to_string()))?;
        Ok(c)
    }

    fn index_dir(&self) -> Result<&Path> {
        self.index_dir.as_deref().ok_or_else(|| usage("--index is required"))
    }

    fn corpus_path(&self) -> Result<&Path> {
        self.corpus_path.as_deref().ok_or_else(|| usage("--corpus is required"))
    }
}

fn cmd_build(config: &CliConfig) -> Result<()> {
    let dir = config.index_dir()?;
    let corpus = config.corpus_path()?;
    let docs = read_corpus(corpus).with_context(|| format!("reading corpus {}", corpus.display()))?;
    let table = match &config.lemma_table_path {
        Some(path) => LemmaTable::read(path).with_context(|| format!("reading lemma table {}", path.display()))?,
        None => LemmaTable::Identity,
    };
    let lexicon = Lexicon::build(docs.iter().map(|d| d.text.as_str()), table, config.lexicon)?;
    let index = build_indexes(&docs, &lexicon)?;
    persist(&index, dir).with_context(|| format!("writing index to {}", dir.display()))?;
    println!("{}", index.counts());
    Ok(())
}

fn cmd_search(config: &CliConfig, mode: Mode, queries: Option<&Path>, query_id: usize, words: &[String]) -> Result<()> {
    let dir = config.index_dir()?;
    let index = load(dir).with_context(|| format!("loading index {}", dir.display()))?;
    let texts: Vec<(usize, String)> = match queries {
        Some(path) => read_queries(path)
            .with_context(|| format!("reading queries {}", path.display()))?
            .into_iter()
            .enumerate()
            .map(|(i, q)| (i + 1, q))
            .collect(),
        None => vec![(query_id, words.join(" "))],
    };
    let mut out = String::new();
    for (id, text) in texts {
        let query = Query::parse(&text, index.lexicon()).with_context(|| format!("query {id}: {text:?}"))?;
        let found = match mode {
            Mode::Ordinary => search_ordinary(&query, &index, None)?,
            Mode::Additional => search_additional(&query, &index)?,
            Mode::TwoStep => two_step_search(&query, &index, config.first_step_threshold)?,
        };
        let ranked = rank(found.results, &config.rank, &query, &found.stats, index.stats())?;
        write_results_tsv(&mut out, id, &ranked);
    }
    let mut stdout = io::stdout().lock();
    stdout.write_all(out.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

fn cmd_eval(config: &CliConfig, queries: &Path, out: &Path, functions: &[String]) -> Result<()> {
    let dir = config.index_dir()?;
    let index = load(dir).with_context(|| format!("loading index {}", dir.display()))?;
    let functions = if functions.is_empty() {
        config.functions.clone()
    } else {
        parse_functions(&functions.join(";"))?
    };
    let texts = read_queries(queries).with_context(|| format!("reading queries {}", queries.display()))?;
    let parsed = texts
        .iter()
        .map(|t| Query::parse(t, index.lexicon()))
        .collect::<proxsearch::Result<Vec<_>>>()?;
    let eval = EvalConfig {
        lrd: config.lrd,
        n_values: config.n_values.clone(),
        max_query_lengths: config.max_query_lengths.clone(),
        first_step_threshold: config.first_step_threshold,
        rank: config.rank,
        ..EvalConfig::default()
    };
    let report = run_experiment(&parsed, &index, &functions, &eval)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    report.write_report(&out.join("report.tsv"))?;
    report.write_surface(&out.join("ndcg_surface.tsv"))?;
    print!("{}", report.report_tsv());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = CliConfig::resolve(&cli.flags)?;
    match cli.command {
        Command::Build => cmd_build(&config),
        Command::Search { mode, queries, query_id, query } => {
            cmd_search(&config, mode, queries.as_deref(), query_id, &query)
        }
        Command::Eval { queries, out, functions } => cmd_eval(&config, &queries, &out, &functions),
        Command::GenCorpus { out, docs, mean_len, vocab, zipf, seed } => {
            if vocab == 0 || mean_len == 0 || !(zipf > 0.0) {
                bail!(usage("gen-corpus needs positive --vocab, --mean-len and --zipf"));
            }
            let spec = GenSpec { doc_count: docs, mean_doc_len: mean_len, vocab_size: vocab, zipf_exponent: zipf, rng_seed: seed };
            write_corpus(&generate_corpus(&spec), &out).with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
        Command::GenQueries { out, count, window, seed } => {
            let corpus = config.corpus_path()?;
            let docs = read_corpus(corpus).with_context(|| format!("reading corpus {}", corpus.display()))?;
            let spec = QueryGenSpec { count, window, rng_seed: seed, ..QueryGenSpec::default() };
            write_queries(&generate_queries(&docs, &spec), &out).with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
    }
}

/// 2 for filesystem and index-format failures, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|cause| cause.downcast_ref::<Usage>().is_some()) {
        return 1;
    }
    let io = err.chain().any(|cause| {
        cause.downcast_ref::<io::Error>().is_some()
            || cause
                .downcast_ref::<proxsearch::Error>()
                .is_some_and(|e| e.is_io() || matches!(e, proxsearch::Error::Format(_)))
    });
    if io {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
