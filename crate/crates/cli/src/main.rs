use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// AMR graph linearization pipeline: preprocess corpora into token
/// sequences, recover graphs from sequences, and score with SMATCH.
#[derive(Debug, Parser)]
#[command(name = "amrseq", version)]
struct Cli {
    /// Upper bound on worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linearize a PENMAN corpus into aligned sentence and token files.
    Preprocess(PreprocessArgs),
    /// Rebuild PENMAN graphs from token sequences, one per line.
    Delinearize(DelinearizeArgs),
    /// Score a system corpus against a gold corpus.
    Smatch(SmatchArgs),
    /// Measure round-trip information loss of one or more corpora.
    Loss(LossArgs),
    /// Print corpus statistics.
    Stats(StatsArgs),
    /// Write a seeded synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ModeArgs {
    /// Fail on the first malformed record or token sequence.
    #[arg(long, conflicts_with = "repair")]
    strict: bool,
    /// Skip or repair malformed input and report what was done.
    #[arg(long)]
    repair: bool,
}

impl ModeArgs {
    fn strict_or(&self, default_strict: bool) -> bool {
        if self.strict {
            true
        } else if self.repair {
            false
        } else {
            default_strict
        }
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Hill-climbing restarts for graphs too large for exact search.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: u64,
    #[arg(long, default_value_t = 13)]
    seed: u64,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    corpus: PathBuf,
    /// Token sequences, one per line.
    #[arg(long)]
    seqs_out: PathBuf,
    /// Source sentences, one per line, aligned with the sequences.
    #[arg(long)]
    snts_out: PathBuf,
    /// Vocabulary (`token<TAB>count`); defaults to SEQS_OUT with a `.vocab` suffix.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Record ids, one per line, aligned with the sequences.
    #[arg(long)]
    ids_out: Option<PathBuf>,
    /// Tokens seen fewer times are replaced by `<<unk>>`.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    min_count: u64,
    /// Keep at most this many non-relation tokens.
    #[arg(long)]
    max_vocab: Option<usize>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
struct DelinearizeArgs {
    seqs: PathBuf,
    /// PENMAN corpus to write.
    #[arg(long)]
    out: PathBuf,
    /// Ids file written by `preprocess --ids-out`.
    #[arg(long)]
    ids: Option<PathBuf>,
    /// Write diagnostics here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
struct SmatchArgs {
    gold: PathBuf,
    system: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the score records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
struct LossArgs {
    #[arg(required = true)]
    corpora: Vec<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    /// Per-graph `id<TAB>f1` records.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(required = true)]
    corpora: Vec<PathBuf>,
    #[command(flatten)]
    mode: ModeArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0, value_parser = parse_rate)]
    reentrancy_rate: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_rate)]
    dup_concept_rate: f64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    max_variables: u64,
    #[arg(long, default_value_t = 13)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_rate(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(commands::EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(commands::EXIT_INTERNAL);
        }
    }

    let result = match &cli.command {
        Command::Preprocess(a) => commands::preprocess(a),
        Command::Delinearize(a) => commands::delinearize_cmd(a),
        Command::Smatch(a) => commands::smatch(a),
        Command::Loss(a) => commands::loss(a),
        Command::Stats(a) => commands::stats(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
