use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_proxsearch"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn proxsearch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const TOY: &str = "0\tthe cat sat on the mat\n\
1\tthe dog sat on the log near the cat\n\
2\ta cat and a dog\n\
3\tthe mat\n\
4\tcat cat cat the the\n\
5\tdog on log\n\
6\tthe quick brown fox jumps over the lazy dog\n\
7\tsat the cat\n\
8\tnothing relevant here\n\
9\tthe cat is far far far far far far far far far far far far far away from the mat\n";

const SMALL: [&str; 8] = ["--sw-count", "2", "--fu-count", "3", "--ts", "6", "--max-distance", "3"];

fn toy_index(dir: &Path) -> std::path::PathBuf {
    let corpus = dir.join("corpus.tsv");
    fs::write(&corpus, TOY).unwrap();
    let index = dir.join("index");
    let mut args = vec!["build", "--corpus", p(&corpus), "--index", p(&index)];
    args.extend(SMALL);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    index
}

fn parse_rows(tsv: &str) -> Vec<(usize, usize, u32, u32, u32)> {
    tsv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            assert_eq!(f.len(), 6, "{l}");
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect()
}

#[test]
fn build_prints_brute_force_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.tsv");
    fs::write(&corpus, TOY).unwrap();
    let index = dir.path().join("index");
    let mut args = vec!["build", "--corpus", p(&corpus), "--index", p(&index)];
    args.extend(SMALL);
    let out = run(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    let docs: Vec<Vec<&str>> = TOY.lines().map(|l| l.split_once('\t').unwrap().1.split(' ').collect()).collect();
    let tokens: usize = docs.iter().map(Vec::len).sum();
    let lemmas: BTreeSet<&str> = docs.iter().flatten().copied().collect();
    let per_doc_lemmas: usize = docs.iter().map(|d| d.iter().collect::<BTreeSet<_>>().len()).sum();
    assert!(text.contains("documents\t10\n"), "{text}");
    assert!(text.contains(&format!("lemmas\t{}\n", lemmas.len())), "{text}");
    assert!(text.contains(&format!("word\tkeys={}\tpostings={tokens}\n", lemmas.len())), "{text}");
    assert!(text.contains(&format!("doc\tkeys={}\tpostings={per_doc_lemmas}\n", lemmas.len())), "{text}");
    for name in ["word.idx", "ordinary.idx", "wv.idx", "fst.idx", "doc.idx", "stats.bin", "lexicon.tsv", "manifest.txt"] {
        assert!(index.join(name).is_file(), "{name}");
    }
}

#[test]
fn build_twice_gives_identical_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let first = fs::read(index.join("manifest.txt")).unwrap();
    let again = dir.path().join("again");
    let corpus = dir.path().join("corpus.tsv");
    let mut args = vec!["build", "--corpus", p(&corpus), "--index", p(&again)];
    args.extend(SMALL);
    assert!(run(&args).status.success());
    assert_eq!(fs::read(again.join("manifest.txt")).unwrap(), first);
    assert_eq!(fs::read(again.join("wv.idx")).unwrap(), fs::read(index.join("wv.idx")).unwrap());
}

#[test]
fn build_on_empty_corpus_fails() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.tsv");
    fs::write(&corpus, "").unwrap();
    let out = run(&["build", "--corpus", p(&corpus), "--index", p(&dir.path().join("i"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn missing_inputs_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["build", "--corpus", p(&dir.path().join("nope.tsv")), "--index", p(&dir.path().join("i"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["search", "--index", p(&dir.path().join("none")), "cat"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    assert_eq!(run(&["search", "--index", p(&index), "--mode", "sideways", "cat"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["search", "--index", p(&index), "--function", "BM42", "cat"]).status.code(), Some(1));
    assert_eq!(run(&["search", "--index", p(&index), "..."]).status.code(), Some(1));
    assert_eq!(run(&["build", "--corpus", "x", "--index", "y", "--sw-count", "0"]).status.code(), Some(1));
    assert_eq!(run(&["search", "cat"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn query_without_matches_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    for mode in ["ordinary", "additional", "two-step"] {
        let out = run(&["search", "--index", p(&index), "--mode", mode, "zebra", "cat"]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn two_step_adds_exactly_the_far_documents() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    for (query, words) in [("cat mat", vec!["cat", "mat"]), ("the dog", vec!["the", "dog"]), ("sat cat", vec!["sat", "cat"])] {
        let add = parse_rows(&stdout(&run(&["search", "--index", p(&index), "--mode", "additional", query])));
        let two = parse_rows(&stdout(&run(&["search", "--index", p(&index), "--mode", "two-step", query])));
        let add_docs: BTreeSet<u32> = add.iter().map(|r| r.2).collect();
        let far: BTreeSet<u32> = two.iter().filter(|r| r.4 == (1 << 31) - 1).map(|r| r.2).collect();
        let oracle: BTreeSet<u32> = TOY
            .lines()
            .map(|l| l.split_once('\t').unwrap())
            .filter(|(_, text)| words.iter().all(|w| text.split(' ').any(|t| t == *w)))
            .map(|(id, _)| id.parse().unwrap())
            .filter(|d| !add_docs.contains(d))
            .collect();
        assert_eq!(far, oracle, "{query}");
        assert_eq!(two.len(), add.len() + far.len());
    }
}

#[test]
fn search_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let out = run(&["search", "--index", p(&index), "--mode", "ordinary", "--function", "TP_BM25", "--query-id", "4", "cat", "mat"]);
    assert!(out.status.success());
    let rows = parse_rows(&stdout(&out));
    assert!(!rows.is_empty());
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.0, 4);
        assert_eq!(r.1, i + 1);
    }
    // The far fragment of document 9 is ranked last by proximity.
    assert_eq!(rows.last().unwrap().2, 9);

    let queries = dir.path().join("q.txt");
    fs::write(&queries, "cat mat\n\nthe dog\n").unwrap();
    let out = run(&["search", "--index", p(&index), "--queries", p(&queries)]);
    let ids: BTreeSet<usize> = parse_rows(&stdout(&out)).iter().map(|r| r.0).collect();
    assert_eq!(ids, BTreeSet::from([1, 2]));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let config = dir.path().join("run.conf");
    fs::write(&config, format!("# toy\nindex_dir={}\nfunction=IntervalSum\n", index.display())).unwrap();
    let from_file = stdout(&run(&["--config", p(&config), "search", "cat", "the"]));
    let flagged = stdout(&run(&["search", "--index", p(&index), "--function", "IntervalSum", "cat", "the"]));
    assert_eq!(from_file, flagged);
    let overridden = stdout(&run(&["--config", p(&config), "search", "--function", "TP_BM25", "cat", "the"]));
    let direct = stdout(&run(&["search", "--index", p(&index), "--function", "TP_BM25", "cat", "the"]));
    assert_eq!(overridden, direct);
    assert_ne!(overridden, from_file);

    fs::write(&config, "colour=blue\n").unwrap();
    assert_eq!(run(&["--config", p(&config), "search", "--index", p(&index), "cat"]).status.code(), Some(1));
    fs::write(&config, "lrd=many\n").unwrap();
    assert_eq!(run(&["--config", p(&config), "search", "--index", p(&index), "cat"]).status.code(), Some(1));
    assert_eq!(run(&["--config", p(&dir.path().join("absent.conf")), "search", "cat"]).status.code(), Some(2));
}

#[test]
fn eval_writes_report_and_surface() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let queries = dir.path().join("q.txt");
    fs::write(&queries, "cat mat\nthe dog\nsat on the\ncat\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "eval", "--index", p(&index), "--queries", p(&queries), "--out", p(&out_dir),
        "--functions", "TP_BM25", "--functions", "WeiSum(0,0.1,0.9)", "--n", "1,5,10", "--max-q", "1,3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(out_dir.join("report.tsv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 2 * 3 * 2);
    assert_eq!(stdout(&out), report);
    let surface = fs::read_to_string(out_dir.join("ndcg_surface.tsv")).unwrap();
    assert_eq!(surface.lines().count(), 1 + 2 * 30 * 9);

    let keys: BTreeSet<Vec<&str>> = report.lines().skip(1).map(|l| l.split('\t').take(3).collect()).collect();
    assert!(keys.contains(&vec!["WeiSum(0,0.1,0.9)", "10", "3"]));
}

#[test]
fn eval_single_identical_query_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let queries = dir.path().join("q.txt");
    // Both words are adjacent wherever they co-occur, so both paths agree.
    fs::write(&queries, "sat on\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["eval", "--index", p(&index), "--queries", p(&queries), "--out", p(&out_dir), "--functions", "TP_BM25"]);
    assert!(out.status.success());
    for line in fs::read_to_string(out_dir.join("report.tsv")).unwrap().lines().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(&f[3..], ["0", "1", "1"], "{line}");
    }
}

#[test]
fn eval_rejects_empty_query_file() {
    let dir = tempfile::tempdir().unwrap();
    let index = toy_index(dir.path());
    let queries = dir.path().join("q.txt");
    fs::write(&queries, "\n\n").unwrap();
    let out = run(&["eval", "--index", p(&index), "--queries", p(&queries), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generated_data_round_trips_through_build_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("gen.tsv");
    let queries = dir.path().join("gen_q.txt");
    let out = run(&["gen-corpus", "--out", p(&corpus), "--docs", "50", "--mean-len", "40", "--vocab", "300", "--seed", "5"]);
    assert!(out.status.success());
    let again = dir.path().join("gen2.tsv");
    run(&["gen-corpus", "--out", p(&again), "--docs", "50", "--mean-len", "40", "--vocab", "300", "--seed", "5"]);
    assert_eq!(fs::read(&corpus).unwrap(), fs::read(&again).unwrap());
    assert_eq!(fs::read_to_string(&corpus).unwrap().lines().count(), 50);

    let out = run(&["gen-queries", "--corpus", p(&corpus), "--out", p(&queries), "--count", "20"]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&queries).unwrap().lines().count(), 20);

    let index = dir.path().join("idx");
    let out = run(&["build", "--corpus", p(&corpus), "--index", p(&index), "--sw-count", "10", "--fu-count", "30", "--ts", "100"]);
    assert!(out.status.success());
    let out = run(&["search", "--index", p(&index), "--queries", p(&queries)]);
    assert!(out.status.success());
    assert!(!out.stdout.is_empty());
}
