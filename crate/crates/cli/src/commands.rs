use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use amrseq_core::{
    apply_vocab, build_vocab, corpus_stats, delinearize, information_loss, linearize_with_report,
    read_corpus, smatch as score_pair, synthetic_corpus, Corpus, CorpusRecord, CorpusWarning,
    LossError, LossReport, Mode, ScoreReport, SynthConfig, TokenSeq,
};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use crate::{DelinearizeArgs, LossArgs, PreprocessArgs, SmatchArgs, StatsArgs, SynthArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

/// Bad input exits with [`EXIT_DATA`]; a linearizer round-trip failure is a
/// broken invariant of our own and exits with [`EXIT_INTERNAL`].
pub fn exit_code(e: &anyhow::Error) -> u8 {
    let internal = e.chain().any(|c| {
        matches!(
            c.downcast_ref::<LossError>(),
            Some(LossError::RoundTrip { .. })
        )
    });
    if internal {
        EXIT_INTERNAL
    } else {
        EXIT_DATA
    }
}

/// Write through a temporary file in the target directory so readers never
/// see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn emit(path: Option<&PathBuf>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            io::stdout().lock().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn load(path: &Path, strict: bool) -> Result<Corpus> {
    let read = read_corpus(path, strict).with_context(|| format!("{}", path.display()))?;
    let skipped = read
        .warnings
        .iter()
        .filter(|w| matches!(w, CorpusWarning::Skipped { .. }))
        .count();
    if skipped > 0 {
        log::warn!("{}: skipped {skipped} malformed records", path.display());
    }
    if read.corpus.is_empty() {
        log::warn!("{}: no records", path.display());
    }
    Ok(read.corpus)
}

pub fn preprocess(a: &PreprocessArgs) -> Result<()> {
    let corpus = load(&a.corpus, a.mode.strict_or(false))?;

    let linearized: Vec<_> = corpus
        .records
        .par_iter()
        .map(|r| linearize_with_report(&r.graph))
        .collect();
    for (i, l) in linearized.iter().enumerate() {
        for c in &l.flagged {
            log::warn!("record {}: whitespace replaced in constant {c}", i + 1);
        }
    }
    let seqs: Vec<TokenSeq> = linearized.into_iter().map(|l| l.tokens).collect();
    let vocab = build_vocab(&seqs, a.min_count as usize, a.max_vocab)?;

    let mut seq_text = String::new();
    let mut snt_text = String::new();
    let mut id_text = String::new();
    for (i, (r, s)) in corpus.iter().zip(&seqs).enumerate() {
        let _ = writeln!(seq_text, "{}", apply_vocab(s, &vocab));
        let _ = writeln!(snt_text, "{}", r.sentence.replace('\n', " "));
        let _ = writeln!(
            id_text,
            "{}",
            r.id.clone().unwrap_or_else(|| (i + 1).to_string())
        );
    }

    let vocab_path = a.vocab_out.clone().unwrap_or_else(|| {
        let mut p = a.seqs_out.clone().into_os_string();
        p.push(".vocab");
        p.into()
    });
    write_atomic(&a.seqs_out, &seq_text)?;
    write_atomic(&a.snts_out, &snt_text)?;
    write_atomic(&vocab_path, &vocab.to_tsv())?;
    if let Some(p) = &a.ids_out {
        write_atomic(p, &id_text)?;
    }
    log::info!(
        "{} records, {} kept tokens",
        corpus.len(),
        vocab.kept().len()
    );
    Ok(())
}

pub fn delinearize_cmd(a: &DelinearizeArgs) -> Result<()> {
    let mode = if a.mode.strict_or(false) {
        Mode::Strict
    } else {
        Mode::Repair
    };
    let text = fs::read_to_string(&a.seqs).with_context(|| format!("{}", a.seqs.display()))?;
    let seqs: Vec<TokenSeq> = text
        .lines()
        .map(|l| TokenSeq::new(l.split_whitespace()))
        .collect();
    if seqs.is_empty() {
        log::warn!("{}: no sequences", a.seqs.display());
    }

    let ids: Vec<String> = match &a.ids {
        Some(p) => {
            let ids: Vec<String> = fs::read_to_string(p)
                .with_context(|| format!("{}", p.display()))?
                .lines()
                .map(str::to_string)
                .collect();
            if ids.len() != seqs.len() {
                bail!(
                    "{} has {} ids but {} has {} sequences",
                    p.display(),
                    ids.len(),
                    a.seqs.display(),
                    seqs.len()
                );
            }
            ids
        }
        None => (1..=seqs.len()).map(|i| i.to_string()).collect(),
    };

    let results: Vec<_> = seqs.par_iter().map(|s| delinearize(s, mode)).collect();
    let mut corpus = Corpus::default();
    let mut report = String::new();
    for (line, (result, id)) in results.into_iter().zip(ids).enumerate() {
        let line = line + 1;
        let d = result.with_context(|| format!("{} line {line}", a.seqs.display()))?;
        for diag in &d.diagnostics {
            let _ = writeln!(report, "{line}\t{id}\t{diag}");
        }
        corpus
            .records
            .push(CorpusRecord::new(Some(id), "", d.graph));
    }
    write_atomic(&a.out, &corpus.to_penman())?;
    emit(a.report.as_ref(), &report)
}

fn fmt_report(key: &str, r: &ScoreReport) -> String {
    format!("{key}\t{}\t{}\t{}\n", r.precision, r.recall, r.f1)
}

pub fn smatch(a: &SmatchArgs) -> Result<()> {
    let strict = a.mode.strict_or(true);
    let gold = load(&a.gold, strict)?;
    let system = load(&a.system, strict)?;
    if gold.len() != system.len() {
        bail!(
            "{} has {} records but {} has {}",
            a.gold.display(),
            gold.len(),
            a.system.display(),
            system.len()
        );
    }
    if gold.is_empty() {
        return Ok(());
    }
    for (i, (g, s)) in gold.iter().zip(system.iter()).enumerate() {
        if let (Some(gi), Some(si)) = (&g.id, &s.id) {
            if gi != si {
                bail!(
                    "record {}: gold id {gi} does not match system id {si}",
                    i + 1
                );
            }
        }
    }

    let reports = gold
        .records
        .par_iter()
        .zip(&system.records)
        .map(|(g, s)| {
            score_pair(
                &g.graph,
                &s.graph,
                a.search.restarts as usize,
                a.search.seed,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = String::new();
    for (i, (g, r)) in gold.iter().zip(&reports).enumerate() {
        let key = g.id.clone().unwrap_or_else(|| (i + 1).to_string());
        out.push_str(&fmt_report(&key, r));
    }
    out.push_str(&fmt_report("#micro", &amrseq_core::aggregate(&reports)));
    let mean = reports.iter().map(|r| r.f1).sum::<f64>() / reports.len() as f64;
    let _ = writeln!(out, "#mean-f1\t{mean}");
    emit(a.out.as_ref(), &out)
}

pub fn loss(a: &LossArgs) -> Result<()> {
    let strict = a.mode.strict_or(true);
    let mut reports = Vec::new();
    for path in &a.corpora {
        let corpus = load(path, strict)?;
        if corpus.is_empty() {
            continue;
        }
        let report = information_loss(&corpus, a.search.restarts as usize, a.search.seed)
            .with_context(|| format!("{}", path.display()))?;
        println!(
            "{}\t{}\t{}\t{}",
            path.display(),
            report.n,
            report.mean_smatch,
            report.loss
        );
        reports.push(report);
    }
    let all = LossReport::merge(&reports);
    if let Some(p) = &a.out {
        write_atomic(p, &all.to_tsv())?;
    }
    println!("#all\t{}\t{}\t{}", all.n, all.mean_smatch, all.loss);
    eprintln!("{}", all.summary());
    Ok(())
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let strict = a.mode.strict_or(true);
    for path in &a.corpora {
        let corpus = load(path, strict)?;
        if a.corpora.len() > 1 {
            println!("file\t{}", path.display());
        }
        println!("{}", corpus_stats(&corpus).to_text().trim_end());
    }
    Ok(())
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let mut cfg = SynthConfig::new(a.n, a.reentrancy_rate, a.dup_concept_rate, a.seed);
    cfg.max_variables = a.max_variables as usize;
    let corpus = synthetic_corpus(&cfg);
    if corpus.is_empty() {
        log::warn!("writing an empty corpus");
    }
    write_atomic(&a.out, &corpus.to_penman())
}
