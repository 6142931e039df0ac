use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const PERMIT: &str = "# ::id ex.1\n# ::snt Abuse of rights is not permitted.\n\
(p / permit-01 :polarity - :ARG1 (a / abuse-01 :ARG1 (r / right-05)))\n";

const WANT_EAT: &str = "# ::id ex.2\n# ::snt The boy wants to eat.\n\
(w / want-01 :ARG0 (b / boy) :ARG1 (e / eat-01 :ARG0 b))\n";

fn amrseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amrseq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = amrseq(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        s(&p)
    }
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn preprocess_writes_aligned_files() {
    let w = Work::new();
    let corpus = w.file("c.txt", PERMIT);
    let (seqs, snts, vocab, ids) = (w.path("q"), w.path("n"), w.path("v"), w.path("i"));
    ok(&[
        "preprocess",
        &corpus,
        "--seqs-out",
        &s(&seqs),
        "--snts-out",
        &s(&snts),
        "--vocab-out",
        &s(&vocab),
        "--ids-out",
        &s(&ids),
        "--min-count",
        "1",
    ]);
    assert_eq!(
        read(&seqs),
        "permit-01 :polarity - - :ARG1 abuse-01 :ARG1 right-05 right-05 abuse-01 permit-01\n"
    );
    assert_eq!(read(&snts), "Abuse of rights is not permitted.\n");
    assert_eq!(read(&ids), "ex.1\n");
    let v = read(&vocab);
    assert!(v.starts_with("<<unk>>\t0\n"));
    assert!(v.contains(":ARG1\t2\n"));
    assert!(v.contains("permit-01\t2\n"));
}

#[test]
fn preprocess_default_threshold_replaces_singletons() {
    let w = Work::new();
    let corpus = w.file("c.txt", WANT_EAT);
    let seqs = w.path("q");
    ok(&[
        "preprocess",
        &corpus,
        "--seqs-out",
        &s(&seqs),
        "--snts-out",
        &s(&w.path("n")),
    ]);
    // Every concept is emitted on entry and on exit, so at the default
    // threshold nothing is replaced.
    assert!(!read(&seqs).contains("<<unk>>"));
    assert!(w.path("q.vocab").exists());

    ok(&[
        "preprocess",
        &corpus,
        "--seqs-out",
        &s(&seqs),
        "--snts-out",
        &s(&w.path("n")),
        "--min-count",
        "3",
    ]);
    // `boy` appears four times; want-01 and eat-01 twice each.
    assert_eq!(read(&seqs).matches("<<unk>>").count(), 4);
}

#[test]
fn empty_input_gives_empty_outputs() {
    let w = Work::new();
    let corpus = w.file("c.txt", "");
    let (seqs, snts) = (w.path("q"), w.path("n"));
    ok(&[
        "preprocess",
        &corpus,
        "--seqs-out",
        &s(&seqs),
        "--snts-out",
        &s(&snts),
    ]);
    assert_eq!(read(&seqs), "");
    assert_eq!(read(&snts), "");
    assert_eq!(read(&w.path("q.vocab")), "<<unk>>\t0\n");
}

#[test]
fn strict_mode_names_the_bad_record() {
    let w = Work::new();
    let corpus = w.file(
        "c.txt",
        &format!("{PERMIT}\n# ::id bad\n(x / thing :ARG0 (y / other)\n"),
    );
    let out = amrseq(&[
        "preprocess",
        &corpus,
        "--seqs-out",
        &s(&w.path("q")),
        "--snts-out",
        &s(&w.path("n")),
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("record 1"), "{err}");
    assert!(!w.path("q").exists());

    // Without --strict the record is skipped.
    ok(&[
        "preprocess",
        &corpus,
        "--seqs-out",
        &s(&w.path("q")),
        "--snts-out",
        &s(&w.path("n")),
    ]);
    assert_eq!(read(&w.path("q")).lines().count(), 1);
}

#[test]
fn delinearize_clean_sequence_has_no_diagnostics() {
    let w = Work::new();
    let seqs = w.file(
        "q",
        "permit-01 :polarity - - :ARG1 abuse-01 :ARG1 right-05 right-05 abuse-01 permit-01\n",
    );
    let out = w.path("out.txt");
    let report = ok(&["delinearize", &seqs, "--out", &s(&out), "--strict"]);
    assert_eq!(report, "");
    let text = read(&out);
    assert!(text.contains("# ::id 1"));
    assert!(text.contains("(x0 / permit-01"));
    assert!(text.contains(":polarity -"));
}

#[test]
fn delinearize_repairs_truncation() {
    let w = Work::new();
    let seqs = w.file("q", "permit-01 :ARG1 abuse-01 :ARG1 right-05 right-05\n");
    let out = w.path("out.txt");
    let report = ok(&["delinearize", &seqs, "--out", &s(&out)]);
    assert_eq!(report.lines().count(), 2, "{report}");
    assert!(report
        .lines()
        .all(|l| l.contains("syntax-error: implicit close")));

    let strict = amrseq(&["delinearize", &seqs, "--out", &s(&out), "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("line 1"));
}

#[test]
fn delinearize_relation_first_is_a_syntax_error() {
    let w = Work::new();
    let seqs = w.file("q", "a a\n:ARG0 dog dog\n");
    let out = w.path("out.txt");
    let strict = amrseq(&["delinearize", &seqs, "--out", &s(&out), "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
    let err = String::from_utf8_lossy(&strict.stderr);
    assert!(
        err.contains("line 2") && err.contains("RelationWithoutNode"),
        "{err}"
    );

    let report = ok(&["delinearize", &seqs, "--out", &s(&out), "--repair"]);
    assert!(
        report.starts_with("2\t2\tsyntax-error: dropped token 0"),
        "{report}"
    );
    assert_eq!(read(&out).matches("# ::id").count(), 2);
}

#[test]
fn smatch_gold_against_itself() {
    let w = Work::new();
    let gold = w.file("g.txt", &format!("{PERMIT}\n{WANT_EAT}"));
    let out = ok(&["smatch", &gold, &gold]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "ex.1\t1\t1\t1");
    assert_eq!(lines[1], "ex.2\t1\t1\t1");
    assert_eq!(lines[2], "#micro\t1\t1\t1");
}

#[test]
fn smatch_rejects_misaligned_corpora() {
    let w = Work::new();
    let gold = w.file("g.txt", &format!("{PERMIT}\n{WANT_EAT}"));
    let one = w.file("s.txt", PERMIT);
    let out = amrseq(&["smatch", &gold, &one]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("has 2 records"));

    let swapped = w.file("t.txt", &format!("{WANT_EAT}\n{PERMIT}"));
    let out = amrseq(&["smatch", &gold, &swapped]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

fn field(line: &str, i: usize) -> f64 {
    line.split('\t').nth(i).unwrap().parse().unwrap()
}

#[test]
fn pipeline_composition_equals_loss() {
    let w = Work::new();
    let corpus = s(&w.path("synth.txt"));
    ok(&[
        "synth",
        "--n",
        "60",
        "--dup-concept-rate",
        "0.3",
        "--reentrancy-rate",
        "0.2",
        "--out",
        &corpus,
    ]);
    let (seqs, ids, back) = (w.path("q"), w.path("i"), w.path("back.txt"));
    ok(&[
        "preprocess",
        &corpus,
        "--seqs-out",
        &s(&seqs),
        "--snts-out",
        &s(&w.path("n")),
        "--ids-out",
        &s(&ids),
        "--min-count",
        "1",
    ]);
    ok(&[
        "delinearize",
        &s(&seqs),
        "--ids",
        &s(&ids),
        "--out",
        &s(&back),
        "--strict",
    ]);
    let scored = ok(&["smatch", &corpus, &s(&back)]);
    let mean = field(scored.lines().last().unwrap(), 1);

    let loss_out = ok(&["loss", &corpus, "--out", &s(&w.path("per_graph.tsv"))]);
    let all = loss_out.lines().last().unwrap();
    assert!(all.starts_with("#all\t60\t"));
    assert!((field(all, 2) - mean).abs() < 1e-12);
    assert!((field(all, 3) - (1.0 - mean)).abs() < 1e-12);
    assert_eq!(read(&w.path("per_graph.tsv")).lines().count(), 60);
}

#[test]
fn loss_over_several_files() {
    let w = Work::new();
    let a = w.file("a.txt", PERMIT);
    // Two distinct nodes sharing a concept cannot be told apart after
    // linearization.
    let b = w.file("b.txt", "(d / dog :ARG0-of (e / dog))\n");
    let out = ok(&["loss", &a, &b]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(field(lines[0], 2), 1.0);
    assert!(field(lines[1], 2) < 1.0);
    assert!(lines[2].starts_with("#all\t2\t"));
}

#[test]
fn stats_reports_counts() {
    let w = Work::new();
    let c = w.file("c.txt", &format!("{PERMIT}\n{WANT_EAT}"));
    let out = ok(&["stats", &c]);
    assert!(out.contains("records\t2\n"));
    assert!(out.contains("reentrant_edges\t1\n"));
}

#[test]
fn synth_is_deterministic() {
    let w = Work::new();
    let (a, b, c) = (w.path("a"), w.path("b"), w.path("c"));
    for (p, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        ok(&[
            "synth",
            "--n",
            "20",
            "--seed",
            seed,
            "--reentrancy-rate",
            "0.3",
            "--out",
            &s(p),
        ]);
    }
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(read(&a).matches("# ::id synth.").count(), 20);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(amrseq(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        amrseq(&[
            "synth",
            "--n",
            "3",
            "--reentrancy-rate",
            "1.5",
            "--out",
            "x"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        amrseq(&["loss", "x", "--restarts", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(amrseq(&["--help"]).status.code(), Some(0));
    assert_eq!(amrseq(&["--version"]).status.code(), Some(0));
}

#[test]
fn missing_input_is_a_data_error() {
    let out = amrseq(&["stats", "/nonexistent/corpus.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn workers_flag_is_accepted() {
    let w = Work::new();
    let c = w.file("c.txt", PERMIT);
    ok(&["--workers", "2", "stats", &c]);
    assert_eq!(
        amrseq(&["--workers", "0", "stats", &c]).status.code(),
        Some(1)
    );
}
