//! Information loss of the linearize / de-linearize round trip, corpus
//! statistics, and a seeded synthetic corpus generator.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{AmrGraph, Concept, Edge, Relation, Target, Variable};
use crate::linearize::{delinearize, linearize, DelinearizeError, Mode};
use crate::penman::{Corpus, CorpusRecord};
use crate::smatch::{smatch, SmatchError};

#[derive(Debug, Error)]
pub enum LossError {
    #[error("cannot measure loss on an empty corpus")]
    EmptyCorpus,
    #[error("record {index}: linearizer output rejected: {source}")]
    RoundTrip {
        index: usize,
        #[source]
        source: DelinearizeError,
    },
    #[error(transparent)]
    Smatch(#[from] SmatchError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossReport {
    pub n: usize,
    /// Record id (or 1-based position when the record has none) and F1.
    pub per_graph: Vec<(String, f64)>,
    pub mean_smatch: f64,
    pub loss: f64,
}

impl LossReport {
    fn from_scores(per_graph: Vec<(String, f64)>) -> Self {
        let n = per_graph.len();
        let sum: f64 = per_graph.iter().map(|(_, f)| f).sum();
        let mean_smatch = if n == 0 { 0.0 } else { sum / n as f64 };
        LossReport {
            n,
            per_graph,
            mean_smatch,
            loss: 1.0 - mean_smatch,
        }
    }

    /// Line-delimited `id<TAB>f1` records.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, f1) in &self.per_graph {
            let _ = writeln!(out, "{id}\t{f1:.6}");
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "graphs: {}\nmean smatch: {:.4}\ninformation loss: {:.4}",
            self.n, self.mean_smatch, self.loss
        )
    }

    /// Combines several reports into one over all of their graphs.
    pub fn merge<'a>(reports: impl IntoIterator<Item = &'a LossReport>) -> LossReport {
        LossReport::from_scores(
            reports
                .into_iter()
                .flat_map(|r| r.per_graph.iter().cloned())
                .collect(),
        )
    }
}

pub(crate) fn record_key(index: usize, r: &CorpusRecord) -> String {
    r.id.clone().unwrap_or_else(|| (index + 1).to_string())
}

/// Round-trips every graph through [`linearize`] and strict [`delinearize`]
/// and averages the SMATCH F1 against the original.
///
/// Scoring uses [`smatch`], so graphs small enough for exact search are
/// scored without search noise.
pub fn information_loss(
    corpus: &Corpus,
    restarts: usize,
    seed: u64,
) -> Result<LossReport, LossError> {
    if corpus.is_empty() {
        return Err(LossError::EmptyCorpus);
    }
    let scores = corpus
        .records
        .par_iter()
        .enumerate()
        .map(|(index, r)| {
            let back = delinearize(&linearize(&r.graph), Mode::Strict)
                .map_err(|source| LossError::RoundTrip { index, source })?;
            let report = smatch(&r.graph, &back.graph, restarts, seed)?;
            Ok((record_key(index, r), report.f1))
        })
        .collect::<Result<Vec<_>, LossError>>()?;
    Ok(LossReport::from_scores(scores))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusStats {
    pub records: usize,
    pub sentence_tokens: usize,
    pub mean_sentence_tokens: f64,
    pub variable_nodes: usize,
    pub constant_nodes: usize,
    pub edges: usize,
    pub concept_vocabulary: usize,
    pub reentrant_edges: usize,
    /// Fraction of graphs with at least one re-entrancy.
    pub reentrancy_rate: f64,
    /// Fraction of graphs where two variable nodes share a concept.
    pub duplicate_concept_rate: f64,
    pub missing_sentences: usize,
}

impl CorpusStats {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let rows: [(&str, String); 11] = [
            ("records", self.records.to_string()),
            ("sentence_tokens", self.sentence_tokens.to_string()),
            (
                "mean_sentence_tokens",
                format!("{:.2}", self.mean_sentence_tokens),
            ),
            ("variable_nodes", self.variable_nodes.to_string()),
            ("constant_nodes", self.constant_nodes.to_string()),
            ("edges", self.edges.to_string()),
            ("concept_vocabulary", self.concept_vocabulary.to_string()),
            ("reentrant_edges", self.reentrant_edges.to_string()),
            ("reentrancy_rate", format!("{:.4}", self.reentrancy_rate)),
            (
                "duplicate_concept_rate",
                format!("{:.4}", self.duplicate_concept_rate),
            ),
            ("missing_sentences", self.missing_sentences.to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k}\t{v}");
        }
        out
    }
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut s = CorpusStats {
        records: corpus.len(),
        ..CorpusStats::default()
    };
    let mut concepts = HashSet::new();
    let mut reentrant_graphs = 0;
    let mut dup_graphs = 0;
    for r in corpus.iter() {
        s.sentence_tokens += r.sentence.split_whitespace().count();
        s.missing_sentences += usize::from(r.sentence.trim().is_empty());
        s.variable_nodes += r.graph.variable_count();
        s.constant_nodes += r.graph.constant_count();
        s.edges += r.graph.edges().len();
        concepts.extend(r.graph.instances().map(|(_, c)| c.clone()));
        let reent = r.graph.reentrancy_count();
        s.reentrant_edges += reent;
        reentrant_graphs += usize::from(reent > 0);
        dup_graphs += usize::from(r.graph.has_duplicate_concepts());
    }
    s.concept_vocabulary = concepts.len();
    if s.records > 0 {
        let n = s.records as f64;
        s.mean_sentence_tokens = s.sentence_tokens as f64 / n;
        s.reentrancy_rate = reentrant_graphs as f64 / n;
        s.duplicate_concept_rate = dup_graphs as f64 / n;
    }
    s
}

/// Parameters of [`synthetic_corpus`].
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    /// Per-node probability of an extra re-entrant edge.
    pub reentrancy_rate: f64,
    /// Per-node probability of reusing a concept already in the graph.
    pub dup_concept_rate: f64,
    pub seed: u64,
    /// Variable nodes per graph are drawn uniformly from `1..=max_variables`.
    pub max_variables: usize,
    /// Per-node probability of a constant attribute.
    pub constant_rate: f64,
}

impl SynthConfig {
    pub fn new(n: usize, reentrancy_rate: f64, dup_concept_rate: f64, seed: u64) -> Self {
        SynthConfig {
            n,
            reentrancy_rate,
            dup_concept_rate,
            seed,
            max_variables: 8,
            constant_rate: 0.2,
        }
    }
}

const WORDS: [&str; 24] = [
    "permit", "abuse", "right", "want", "eat", "dog", "bone", "person", "law", "provide", "enjoy",
    "national", "foreign", "guard", "appoint", "commence", "subject", "regulate", "treaty",
    "adult", "office", "locate", "domicile", "private",
];
const RELATIONS: [&str; 10] = [
    ":ARG0",
    ":ARG1",
    ":ARG2",
    ":mod",
    ":location",
    ":time",
    ":poss",
    ":domain",
    ":ARG0-of",
    ":ARG1-of",
];
const ATTRIBUTES: [(&str, &str); 4] = [
    (":polarity", "-"),
    (":quant", "2"),
    (":mode", "imperative"),
    (":value", "\"x\""),
];

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

/// One random rooted graph. Every random draw happens regardless of the
/// rates, so two configurations that differ only in rates produce graphs
/// with the same shape and the same candidate choices.
fn synth_graph(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> AmrGraph {
    let size = rng.random_range(1..=cfg.max_variables.max(1));
    let mut concepts: Vec<String> = Vec::with_capacity(size);
    let mut used = HashSet::new();
    let mut edges = Vec::new();
    let var = |i: usize| Variable::new(format!("v{i}")).expect("valid");

    for i in 0..size {
        // Fresh concept distinct from all earlier ones in this graph.
        let drawn = format!("{}-{:02}", pick(rng, &WORDS), rng.random_range(1..100));
        let fresh = if used.contains(&drawn) {
            format!("{drawn}-{i}")
        } else {
            drawn
        };
        let dup_roll: f64 = rng.random();
        let dup_source = rng.random_range(0..i.max(1));
        let concept = if i > 0 && dup_roll < cfg.dup_concept_rate {
            concepts[dup_source].clone()
        } else {
            fresh
        };
        used.insert(concept.clone());
        concepts.push(concept);

        let parent = rng.random_range(0..i.max(1));
        let rel = pick(rng, &RELATIONS);
        if i > 0 {
            edges.push(Edge::new(
                var(parent),
                Relation::new(*rel).expect("valid"),
                Target::Var(var(i)),
            ));
        }

        let const_roll: f64 = rng.random();
        let (arel, aval) = pick(rng, &ATTRIBUTES);
        if const_roll < cfg.constant_rate {
            edges.push(Edge::new(
                var(i),
                Relation::new(*arel).expect("valid"),
                Target::Const(Concept::new(*aval).expect("valid")),
            ));
        }
    }

    for i in 1..size {
        let roll: f64 = rng.random();
        let from = rng.random_range(0..size);
        let rel = pick(rng, &RELATIONS);
        if roll < cfg.reentrancy_rate && from != i {
            edges.push(Edge::new(
                var(from),
                Relation::new(*rel).expect("valid"),
                Target::Var(var(i)),
            ));
        }
    }

    AmrGraph::new(
        var(0),
        concepts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (var(i), Concept::new(c).expect("valid"))),
        edges,
    )
    .expect("generated graph is rooted")
}

/// `n` seeded random rooted graphs with controlled re-entrancy and
/// duplicate-concept rates. Each record's sentence is its concept words in
/// depth-first order.
pub fn synthetic_corpus(cfg: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n)
        .map(|i| {
            let graph = synth_graph(cfg, &mut rng);
            let sentence = graph
                .dfs_order()
                .iter()
                .filter_map(|v| graph.concept_of(v))
                .map(|c| c.as_str().split('-').next().unwrap_or_default())
                .collect::<Vec<_>>()
                .join(" ");
            CorpusRecord::new(Some(format!("synth.{}", i + 1)), sentence, graph)
        })
        .collect()
}
