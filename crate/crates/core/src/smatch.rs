//! SMATCH: triple-overlap F1 under the best injective variable alignment.
//!
//! Two searches are provided. [`smatch_hill_climb`] is the usual
//! restart-based local search (steepest ascent over "move one image" and
//! "swap two images"). [`exact_smatch`] is a branch-and-bound search over all
//! injective alignments, usable when the smaller graph has at most
//! [`EXACT_LIMIT`] variables.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{extract_triples, AmrGraph, TripleSet, Variable};

/// Largest smaller-side variable count accepted by [`exact_smatch`].
pub const EXACT_LIMIT: usize = 8;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SmatchError {
    #[error("restarts must be at least 1")]
    ZeroRestarts,
    #[error("exact search limited to {EXACT_LIMIT} variables, got {0}; use hill climbing")]
    TooLarge(usize),
    #[error("cannot score an empty list of pairs")]
    EmptyCorpus,
    #[error("alignment is not injective at {0}")]
    NotInjective(Variable),
}

/// Partial injective map from variables of one graph to variables of another.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment(BTreeMap<Variable, Variable>);

impl Alignment {
    pub fn new(pairs: impl IntoIterator<Item = (Variable, Variable)>) -> Result<Self, SmatchError> {
        let mut map = BTreeMap::new();
        let mut images = HashSet::new();
        for (a, b) in pairs {
            if !images.insert(b.clone()) {
                return Err(SmatchError::NotInjective(b));
            }
            if let Some(old) = map.insert(a, b) {
                images.remove(&old);
            }
        }
        Ok(Alignment(map))
    }

    pub fn get(&self, v: &Variable) -> Option<&Variable> {
        self.0.get(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Variable)> {
        self.0.iter()
    }

    /// The same alignment read in the other direction.
    pub fn inverse(&self) -> Alignment {
        Alignment(self.0.iter().map(|(a, b)| (b.clone(), a.clone())).collect())
    }
}

/// Precision, recall and F1 for one comparison. Totals include the top
/// pseudo-triple.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub total_a: usize,
    pub total_b: usize,
    pub alignment: Alignment,
}

impl ScoreReport {
    /// Precision is measured against `total_b` (the system side) and recall
    /// against `total_a` (the gold side).
    pub fn from_counts(
        matched: usize,
        total_a: usize,
        total_b: usize,
        alignment: Alignment,
    ) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        ScoreReport {
            precision: ratio(matched, total_b),
            recall: ratio(matched, total_a),
            f1: ratio(2 * matched, total_a + total_b),
            matched,
            total_a,
            total_b,
            alignment,
        }
    }
}

/// Number of matched triples of `a` against `b` under `m`, plus one when the
/// tops correspond.
pub fn matched_count(a: &TripleSet, b: &TripleSet, m: &Alignment) -> usize {
    let mut matched = 0;
    for (v, c) in &a.instances {
        if let Some(w) = m.get(v) {
            matched += usize::from(b.instances.contains(&(w.clone(), c.clone())));
        }
    }
    for (v, r, c) in &a.attributes {
        if let Some(w) = m.get(v) {
            matched += usize::from(b.attributes.contains(&(w.clone(), r.clone(), c.clone())));
        }
    }
    for (s, r, t) in &a.relations {
        if let (Some(ms), Some(mt)) = (m.get(s), m.get(t)) {
            matched += usize::from(b.relations.contains(&(ms.clone(), r.clone(), mt.clone())));
        }
    }
    if m.get(&a.top) == Some(&b.top) {
        matched += 1;
    }
    matched
}

/// Triple totals (top included) of a triple set.
fn total(t: &TripleSet) -> usize {
    t.triple_count() + 1
}

/// Index-based scoring problem. `unary[i][j]` holds everything that depends
/// only on mapping `i -> j` (instance, attributes, top); relation triples are
/// scored through `rels`.
struct Problem {
    a_vars: Vec<Variable>,
    b_vars: Vec<Variable>,
    unary: Vec<Vec<u32>>,
    same_concept: Vec<Vec<bool>>,
    rels: Vec<(usize, u32, usize)>,
    b_rels: HashSet<(usize, u32, usize)>,
    b_labels: HashSet<u32>,
    /// Relation triples incident to each `a` variable, each listed once.
    incident: Vec<Vec<usize>>,
}

impl Problem {
    fn new(a: &TripleSet, b: &TripleSet) -> Self {
        let a_vars: Vec<Variable> = a.variables().cloned().collect();
        let b_vars: Vec<Variable> = b.variables().cloned().collect();
        let a_idx: HashMap<&Variable, usize> =
            a_vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let b_idx: HashMap<&Variable, usize> =
            b_vars.iter().enumerate().map(|(i, v)| (v, i)).collect();

        let a_concept: Vec<_> = a.instances.iter().map(|(_, c)| c).collect();
        let b_concept: Vec<_> = b.instances.iter().map(|(_, c)| c).collect();

        let mut a_attrs = vec![Vec::new(); a_vars.len()];
        for (v, r, c) in &a.attributes {
            a_attrs[a_idx[v]].push((r, c));
        }
        let mut b_attrs = vec![HashSet::new(); b_vars.len()];
        for (v, r, c) in &b.attributes {
            b_attrs[b_idx[v]].insert((r, c));
        }

        let a_top = a_idx[&a.top];
        let b_top = b_idx[&b.top];
        let mut unary = vec![vec![0u32; b_vars.len()]; a_vars.len()];
        let mut same_concept = vec![vec![false; b_vars.len()]; a_vars.len()];
        for i in 0..a_vars.len() {
            for j in 0..b_vars.len() {
                let same = a_concept[i] == b_concept[j];
                same_concept[i][j] = same;
                let attrs = a_attrs[i]
                    .iter()
                    .filter(|x| b_attrs[j].contains(*x))
                    .count();
                let top = i == a_top && j == b_top;
                unary[i][j] = u32::from(same) + attrs as u32 + u32::from(top);
            }
        }

        let mut labels: HashMap<&str, u32> = HashMap::new();
        let rels: Vec<_> = a
            .relations
            .iter()
            .map(|(s, r, t)| (a_idx[s], intern(&mut labels, r.as_str()), a_idx[t]))
            .collect();
        let b_rels: HashSet<_> = b
            .relations
            .iter()
            .map(|(s, r, t)| (b_idx[s], intern(&mut labels, r.as_str()), b_idx[t]))
            .collect();
        let b_labels = b_rels.iter().map(|&(_, l, _)| l).collect();

        let mut incident = vec![Vec::new(); a_vars.len()];
        for (k, &(s, _, t)) in rels.iter().enumerate() {
            incident[s].push(k);
            if t != s {
                incident[t].push(k);
            }
        }

        Problem {
            a_vars,
            b_vars,
            unary,
            same_concept,
            rels,
            b_rels,
            b_labels,
            incident,
        }
    }

    fn rel_match(&self, k: usize, m: &[Option<usize>]) -> u32 {
        let (s, l, t) = self.rels[k];
        match (m[s], m[t]) {
            (Some(ms), Some(mt)) => u32::from(self.b_rels.contains(&(ms, l, mt))),
            _ => 0,
        }
    }

    fn score(&self, m: &[Option<usize>]) -> u32 {
        let unary: u32 = m
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| self.unary[i][j]))
            .sum();
        let rel: u32 = (0..self.rels.len()).map(|k| self.rel_match(k, m)).sum();
        unary + rel
    }

    /// Score contribution of the variables in `vars` (at most two): their
    /// unary terms plus every relation triple touching them, once each.
    fn local(&self, m: &[Option<usize>], vars: &[usize]) -> i64 {
        let mut total = 0i64;
        for (n, &i) in vars.iter().enumerate() {
            if let Some(j) = m[i] {
                total += i64::from(self.unary[i][j]);
            }
            for &k in &self.incident[i] {
                let (s, _, t) = self.rels[k];
                let seen_before = vars[..n].iter().any(|&p| p == s || p == t);
                if !seen_before {
                    total += i64::from(self.rel_match(k, m));
                }
            }
        }
        total
    }

    fn alignment(&self, m: &[Option<usize>]) -> Alignment {
        Alignment(
            m.iter()
                .enumerate()
                .filter_map(|(i, j)| j.map(|j| (self.a_vars[i].clone(), self.b_vars[j].clone())))
                .collect(),
        )
    }
}

fn intern<'a>(labels: &mut HashMap<&'a str, u32>, label: &'a str) -> u32 {
    let next = labels.len() as u32;
    *labels.entry(label).or_insert(next)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for one restart, derived only from the user seed and the restart
/// index.
fn restart_seed(seed: u64, restart: usize) -> u64 {
    splitmix64(seed ^ splitmix64(restart as u64))
}

fn random_fill(m: &mut [Option<usize>], nb: usize, rng: &mut ChaCha8Rng) {
    let used: HashSet<usize> = m.iter().flatten().copied().collect();
    let mut free: Vec<usize> = (0..nb).filter(|j| !used.contains(j)).collect();
    free.shuffle(rng);
    let mut open: Vec<usize> = (0..m.len()).filter(|&i| m[i].is_none()).collect();
    open.shuffle(rng);
    for (i, j) in open.into_iter().zip(free) {
        m[i] = Some(j);
    }
}

fn smart_init(p: &Problem, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    let nb = p.b_vars.len();
    let mut m = vec![None; p.a_vars.len()];
    let mut used = vec![false; nb];
    for (i, slot) in m.iter_mut().enumerate() {
        let best = (0..nb)
            .filter(|&j| !used[j] && p.same_concept[i][j])
            .max_by_key(|&j| (p.unary[i][j], std::cmp::Reverse(j)));
        if let Some(j) = best {
            used[j] = true;
            *slot = Some(j);
        }
    }
    random_fill(&mut m, nb, rng);
    m
}

/// Steepest-ascent climb to a local optimum; returns the final score.
fn climb(p: &Problem, m: &mut [Option<usize>]) -> u32 {
    let na = p.a_vars.len();
    let nb = p.b_vars.len();
    let mut used = vec![false; nb];
    for j in m.iter().flatten() {
        used[*j] = true;
    }
    loop {
        let mut best: Option<(i64, usize, Option<usize>, Option<usize>)> = None;
        let mut consider = |delta: i64, mv: (usize, Option<usize>, Option<usize>)| {
            if delta > 0 && best.is_none_or(|(d, ..)| delta > d) {
                best = Some((delta, mv.0, mv.1, mv.2));
            }
        };
        for i in 0..na {
            let before = p.local(m, &[i]);
            let old = m[i];
            for j in (0..nb).filter(|&j| !used[j]) {
                m[i] = Some(j);
                let delta = p.local(m, &[i]) - before;
                consider(delta, (i, Some(j), None));
            }
            m[i] = old;
            for k in i + 1..na {
                if m[i] == m[k] {
                    continue;
                }
                let before = p.local(m, &[i, k]);
                m.swap(i, k);
                let delta = p.local(m, &[i, k]) - before;
                m.swap(i, k);
                // Encoded as "i takes k's image" with k as the swap partner.
                consider(delta, (i, m[k], Some(k)));
            }
        }
        match best {
            None => return p.score(m),
            Some((_, i, _, Some(k))) => m.swap(i, k),
            Some((_, i, Some(j), None)) => {
                if let Some(old) = m[i] {
                    used[old] = false;
                }
                used[j] = true;
                m[i] = Some(j);
            }
            Some((_, _, None, None)) => unreachable!("moves always target an image"),
        }
    }
}

fn hill_climb_problem(p: &Problem, restarts: usize, seed: u64) -> (u32, Vec<Option<usize>>) {
    let mut best: Option<(u32, Vec<Option<usize>>)> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(seed, r));
        let mut m = if r == 0 {
            smart_init(p, &mut rng)
        } else {
            let mut m = vec![None; p.a_vars.len()];
            random_fill(&mut m, p.b_vars.len(), &mut rng);
            m
        };
        let score = climb(p, &mut m);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, m));
        }
    }
    best.expect("at least one restart")
}

/// Hill-climbing SMATCH. Restart 0 starts from a greedy concept match, the
/// others from uniformly random injections; the best result is kept.
/// Deterministic for a given `(restarts, seed)`.
pub fn smatch_hill_climb(
    a: &AmrGraph,
    b: &AmrGraph,
    restarts: usize,
    seed: u64,
) -> Result<ScoreReport, SmatchError> {
    if restarts == 0 {
        return Err(SmatchError::ZeroRestarts);
    }
    let (ta, tb) = (extract_triples(a), extract_triples(b));
    let p = Problem::new(&ta, &tb);
    let (score, m) = hill_climb_problem(&p, restarts, seed);
    Ok(ScoreReport::from_counts(
        score as usize,
        total(&ta),
        total(&tb),
        p.alignment(&m),
    ))
}

struct Search<'p> {
    p: &'p Problem,
    order: Vec<usize>,
    /// Relation triples completed when `order[d]` is assigned.
    closing: Vec<Vec<usize>>,
    unary_bound: Vec<u32>,
    rel_bound: Vec<u32>,
    m: Vec<Option<usize>>,
    used: Vec<bool>,
    best: u32,
    best_m: Vec<Option<usize>>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, score: u32) {
        if depth == self.order.len() {
            if score > self.best {
                self.best = score;
                self.best_m = self.m.clone();
            }
            return;
        }
        if score + self.unary_bound[depth] + self.rel_bound[depth] <= self.best {
            return;
        }
        let i = self.order[depth];
        let nb = self.p.b_vars.len();
        let mut cands: Vec<usize> = (0..nb).filter(|&j| !self.used[j]).collect();
        cands.sort_by_key(|&j| std::cmp::Reverse(self.p.unary[i][j]));
        for j in cands {
            self.m[i] = Some(j);
            self.used[j] = true;
            let gained = self.p.unary[i][j]
                + self.closing[depth]
                    .iter()
                    .map(|&k| self.p.rel_match(k, &self.m))
                    .sum::<u32>();
            self.run(depth + 1, score + gained);
            self.used[j] = false;
            self.m[i] = None;
        }
    }
}

/// Best score over all injections of `p.a_vars` into `p.b_vars`, which must
/// not be smaller.
fn exact_problem(p: &Problem) -> (u32, Vec<Option<usize>>) {
    let na = p.a_vars.len();
    debug_assert!(na <= p.b_vars.len());
    let max_unary: Vec<u32> = p
        .unary
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .collect();
    let mut order: Vec<usize> = (0..na).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(max_unary[i] as usize + p.incident[i].len()));
    let mut position = vec![0; na];
    for (d, &i) in order.iter().enumerate() {
        position[i] = d;
    }
    let mut closing = vec![Vec::new(); na];
    let mut possible_at = vec![0u32; na + 1];
    for (k, &(s, l, t)) in p.rels.iter().enumerate() {
        let d = position[s].max(position[t]);
        closing[d].push(k);
        if p.b_labels.contains(&l) {
            possible_at[d] += 1;
        }
    }
    let mut unary_bound = vec![0u32; na + 1];
    let mut rel_bound = vec![0u32; na + 1];
    for d in (0..na).rev() {
        unary_bound[d] = unary_bound[d + 1] + max_unary[order[d]];
        rel_bound[d] = rel_bound[d + 1] + possible_at[d];
    }

    // Incumbent from one greedy climb to sharpen pruning.
    let (seed_score, seed_m) = hill_climb_problem(p, 1, 0);
    let mut search = Search {
        p,
        order,
        closing,
        unary_bound,
        rel_bound,
        m: vec![None; na],
        used: vec![false; p.b_vars.len()],
        best: seed_score,
        best_m: seed_m,
    };
    search.run(0, 0);
    (search.best, search.best_m)
}

/// Globally optimal SMATCH by branch and bound.
pub fn exact_smatch(a: &AmrGraph, b: &AmrGraph) -> Result<ScoreReport, SmatchError> {
    let smaller = a.variable_count().min(b.variable_count());
    if smaller > EXACT_LIMIT {
        return Err(SmatchError::TooLarge(smaller));
    }
    let (ta, tb) = (extract_triples(a), extract_triples(b));
    let (score, alignment) = if ta.instances.len() <= tb.instances.len() {
        let p = Problem::new(&ta, &tb);
        let (s, m) = exact_problem(&p);
        (s, p.alignment(&m))
    } else {
        let p = Problem::new(&tb, &ta);
        let (s, m) = exact_problem(&p);
        (s, p.alignment(&m).inverse())
    };
    Ok(ScoreReport::from_counts(
        score as usize,
        total(&ta),
        total(&tb),
        alignment,
    ))
}

/// Exact search when the smaller graph has at most [`EXACT_LIMIT`]
/// variables, hill climbing otherwise.
pub fn smatch(
    a: &AmrGraph,
    b: &AmrGraph,
    restarts: usize,
    seed: u64,
) -> Result<ScoreReport, SmatchError> {
    match exact_smatch(a, b) {
        Err(SmatchError::TooLarge(_)) => smatch_hill_climb(a, b, restarts, seed),
        other => other,
    }
}

/// Micro-averaged score over a list of pairs plus the per-pair reports.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusScore {
    pub aggregate: ScoreReport,
    pub pairs: Vec<ScoreReport>,
}

/// Scores every pair with [`smatch`] (in parallel, results in input order)
/// and aggregates by summing matched and total counts.
pub fn corpus_smatch(
    pairs: &[(AmrGraph, AmrGraph)],
    restarts: usize,
    seed: u64,
) -> Result<CorpusScore, SmatchError> {
    if pairs.is_empty() {
        return Err(SmatchError::EmptyCorpus);
    }
    let reports = pairs
        .par_iter()
        .map(|(a, b)| smatch(a, b, restarts, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorpusScore {
        aggregate: aggregate(&reports),
        pairs: reports,
    })
}

/// Micro average of already computed reports.
pub fn aggregate(reports: &[ScoreReport]) -> ScoreReport {
    let (m, ta, tb) = reports.iter().fold((0, 0, 0), |(m, ta, tb), r| {
        (m + r.matched, ta + r.total_a, tb + r.total_b)
    });
    ScoreReport::from_counts(m, ta, tb, Alignment::default())
}
