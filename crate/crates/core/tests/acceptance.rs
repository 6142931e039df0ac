//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use amrseq_core::*;
use rand::Rng;

use common::*;

const PERMIT_AMR: &str = "(p / permit-01 :polarity - :ARG1 (a / abuse-01 :ARG1 (r / right-05)))";
const PERMIT_LIN: &str =
    "permit-01 :polarity - - :ARG1 abuse-01 :ARG1 right-05 right-05 abuse-01 permit-01";

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn golden_linearization() -> Outcome {
    let got = linearize(&parse_penman(PERMIT_AMR).unwrap()).to_string();
    check(got == PERMIT_LIN, format!("got {got:?}"))
}

fn trees() -> Vec<AmrGraph> {
    let mut r = rng(1000);
    (0..1000).map(|_| random_tree(&mut r, 12)).collect()
}

fn round_trip_property() -> Outcome {
    let start = Instant::now();
    let graphs = trees();
    let mut failures = 0;
    for g in &graphs {
        let back = delinearize(&linearize(g), Mode::Strict).unwrap().graph;
        if smatch(g, &back, 4, 13).unwrap().f1 != 1.0 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        failures == 0 && elapsed < Duration::from_secs(30),
        format!("{failures} of 1000 below 1.0, {elapsed:.2?} (limit 30 s)"),
    )
}

fn token_count_law() -> Outcome {
    let graphs = trees();
    let bad = graphs
        .iter()
        .filter(|g| {
            // Root visit plus one visit per edge, two tokens per visit, one
            // relation token per edge.
            let visits = g.edges().len() + 1;
            linearize(g).len() != 2 * visits + g.edges().len()
        })
        .count();
    check(
        bad == 0,
        format!("{bad} of 1000 violate |lin| = 2*visits + edges"),
    )
}

fn smatch_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(77);
    let (mut equal, mut exceeded, mut oracle_mismatch) = (0, 0, 0);
    for i in 0..1000u64 {
        let a = random_graph(&mut r, 5);
        let b = random_graph(&mut r, 5);
        let h = smatch_hill_climb(&a, &b, 4, i).unwrap();
        let e = exact_smatch(&a, &b).unwrap();
        let brute = brute_force_matched(&extract_triples(&a), &extract_triples(&b));
        oracle_mismatch += usize::from(e.matched != brute);
        equal += usize::from(h.f1 == e.f1);
        exceeded += usize::from(h.f1 > e.f1);
    }
    let elapsed = start.elapsed();
    check(
        equal >= 990 && exceeded == 0 && oracle_mismatch == 0 && elapsed < Duration::from_secs(60),
        format!(
            "hill == exact on {equal}/1000 (need >= 990), {exceeded} exceed, \
             exact vs brute force mismatches {oracle_mismatch}, {elapsed:.2?} (limit 60 s)"
        ),
    )
}

fn smatch_invariances() -> Outcome {
    let mut r = rng(4242);
    let (mut identity, mut renaming, mut symmetry) = (0, 0, 0);
    for _ in 0..200 {
        let a = random_graph(&mut r, 6);
        let b = random_graph(&mut r, 6);
        identity += usize::from(exact_smatch(&a, &a).unwrap().f1 == 1.0);
        let m = random_renaming(&mut r, &b);
        let rb = rename_variables(&b, &m).unwrap();
        renaming +=
            usize::from(exact_smatch(&a, &rb).unwrap().f1 == exact_smatch(&a, &b).unwrap().f1);
        symmetry +=
            usize::from(exact_smatch(&a, &b).unwrap().f1 == exact_smatch(&b, &a).unwrap().f1);
    }
    check(
        identity == 200 && renaming == 200 && symmetry == 200,
        format!("identity {identity}/200, renaming {renaming}/200, symmetry {symmetry}/200"),
    )
}

fn information_loss_behavior() -> Outcome {
    let rates = [0.0, 0.1, 0.25, 0.5, 1.0];
    let losses: Vec<f64> = rates
        .iter()
        .map(|&rate| {
            let corpus = synthetic_corpus(&SynthConfig::new(200, 0.0, rate, 2018));
            information_loss(&corpus, 4, 13).unwrap().loss
        })
        .collect();
    let monotone = losses.windows(2).all(|w| w[1] >= w[0]);
    check(
        losses[0] == 0.0 && monotone,
        format!("losses at {rates:?}: {losses:.4?}"),
    )
}

fn robust_delinearization() -> Outcome {
    // Model-style output that stops while four nodes are still open.
    let seq: TokenSeq = "enjoy-01 :ARG0 national :mod foreign foreign national \
        :ARG1 <<unk>> <<unk>> :ARG1-of <<unk>> <<unk>> :condition provide-01 \
        :polarity - - :ARG0 or :op1 law :mod <<unk>> <<unk>>"
        .parse()
        .unwrap();
    let strict = delinearize(&seq, Mode::Strict);
    let strict_ok = strict
        == Err(DelinearizeError {
            index: 21,
            kind: DelinearizeErrorKind::UnclosedNodes { open: 4 },
        });
    let repaired = delinearize(&seq, Mode::Repair).unwrap();
    let closes: Vec<(String, usize)> = repaired
        .diagnostics
        .iter()
        .filter_map(|d| match d {
            Diagnostic::ImplicitClose {
                concept,
                opened,
                at: 25,
            } => Some((concept.clone(), *opened)),
            _ => None,
        })
        .collect();
    let expected_closes = vec![
        ("law".to_string(), 21),
        ("or".to_string(), 19),
        ("provide-01".to_string(), 14),
        ("enjoy-01".to_string(), 0),
    ];
    let collision = repaired.diagnostics.contains(&Diagnostic::NodeCollision {
        concept: UNK.into(),
        nodes: 3,
    });
    let text = serialize_penman(&repaired.graph, false);
    let expected_graph = "(x0 / enjoy-01 :ARG0 (x1 / national :mod (x2 / foreign)) \
        :ARG1 (x3 / <<unk>>) :ARG1-of x3 :condition (x4 / provide-01 :polarity - \
        :ARG0 (x5 / or :op1 (x6 / law :mod x3))))";
    check(
        strict_ok && closes == expected_closes && collision && text == expected_graph,
        format!(
            "strict {strict:?}; repairs {}; graph {text}",
            repaired.syntax_repairs()
        ),
    )
}

fn penman_fuzz() -> Outcome {
    let mut r = rng(31337);
    let alphabet: Vec<char> = "()/:\" -a0\n\té~".chars().collect();
    let (mut parsed, mut rejected, mut crashes, mut unlocated, mut invalid) = (0, 0, 0, 0, 0);
    for i in 0..10_000 {
        let g = if i % 2 == 0 {
            random_graph(&mut r, 7)
        } else {
            random_tree(&mut r, 12)
        };
        let text = serialize_penman(&g, r.random_bool(0.5));
        let mut chars: Vec<char> = text.chars().collect();
        let pos = r.random_range(0..chars.len());
        let c = alphabet[r.random_range(0..alphabet.len())];
        match r.random_range(0..3) {
            0 => chars[pos] = c,
            1 => {
                chars.remove(pos);
            }
            _ => chars.insert(pos, c),
        }
        let mutated: String = chars.into_iter().collect();
        match catch_unwind(AssertUnwindSafe(|| parse_penman(&mutated))) {
            Err(_) => crashes += 1,
            Ok(Ok(g)) => {
                parsed += 1;
                let again = parse_penman(&serialize_penman(&g, false));
                if again.map(|h| extract_triples(&h)) != Ok(extract_triples(&g)) {
                    invalid += 1;
                }
            }
            Ok(Err(e)) => {
                rejected += 1;
                if e.offset > mutated.len() {
                    unlocated += 1;
                }
            }
        }
    }
    check(
        crashes == 0 && unlocated == 0 && invalid == 0,
        format!(
            "{parsed} parsed, {rejected} rejected, {crashes} crashes, \
             {unlocated} unlocated errors, {invalid} invalid graphs"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden linearization of the permit example", golden_linearization),
        (
            "round trip of 1000 distinct-concept trees",
            round_trip_property,
        ),
        ("token-count law on 1000 trees", token_count_law),
        (
            "hill climbing vs exact on 1000 pairs",
            smatch_oracle_equivalence,
        ),
        ("smatch identity, renaming, symmetry", smatch_invariances),
        (
            "information loss vs duplicate-concept rate",
            information_loss_behavior,
        ),
        ("repair and strict de-linearization", robust_delinearization),
        ("penman single-character fuzz", penman_fuzz),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = run();
        let tag = if outcome.ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {name}: {}", outcome.detail);
        failed += usize::from(!outcome.ok);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
