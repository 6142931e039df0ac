//! Test-only graph generators and a brute-force SMATCH oracle.
#![allow(dead_code)]

use std::collections::HashSet;

use amrseq_core::{AmrGraph, Concept, Edge, Relation, Target, TripleSet, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn var(i: usize) -> Variable {
    Variable::new(format!("n{i}")).unwrap()
}

fn rel(s: &str) -> Relation {
    Relation::new(s).unwrap()
}

const RELS: [&str; 5] = [":ARG0", ":ARG1", ":mod", ":op1", ":ARG0-of"];
const CONSTS: [&str; 4] = ["-", "+", "7", "\"Kyoto\""];

/// Random tree with pairwise-distinct concepts and at most `max_nodes`
/// nodes counting constant leaves.
pub fn random_tree(rng: &mut ChaCha8Rng, max_nodes: usize) -> AmrGraph {
    let total = rng.random_range(1..=max_nodes);
    let mut instances = vec![(var(0), Concept::new("c0-01").unwrap())];
    let mut edges = Vec::new();
    let mut attrs = HashSet::new();
    for i in 1..total {
        let parent = instances[rng.random_range(0..instances.len())].0.clone();
        let r = RELS[rng.random_range(0..RELS.len())];
        if rng.random_bool(0.25) {
            let c = CONSTS[rng.random_range(0..CONSTS.len())];
            if attrs.insert((parent.clone(), r, c)) {
                edges.push(Edge::new(
                    parent,
                    rel(r),
                    Target::Const(Concept::new(c).unwrap()),
                ));
            }
        } else {
            let v = var(i);
            instances.push((v.clone(), Concept::new(format!("c{i}-01")).unwrap()));
            edges.push(Edge::new(parent, rel(r), Target::Var(v)));
        }
    }
    AmrGraph::new(var(0), instances, edges).unwrap()
}

/// Random rooted graph with up to `max_vars` variables drawn from a small
/// concept alphabet (so ties and collisions are common), plus random
/// re-entrant edges and constants.
pub fn random_graph(rng: &mut ChaCha8Rng, max_vars: usize) -> AmrGraph {
    let n = rng.random_range(1..=max_vars);
    let alphabet = ["a", "b", "c", "d"];
    let mut instances = Vec::new();
    let mut edges = Vec::new();
    for i in 0..n {
        let c = alphabet[rng.random_range(0..alphabet.len())];
        instances.push((var(i), Concept::new(c).unwrap()));
        if i > 0 {
            let p = rng.random_range(0..i);
            edges.push(Edge::new(
                var(p),
                rel(RELS[rng.random_range(0..3)]),
                Target::Var(var(i)),
            ));
        }
    }
    for _ in 0..rng.random_range(0..=n) {
        let s = rng.random_range(0..n);
        let t = rng.random_range(0..n);
        edges.push(Edge::new(
            var(s),
            rel(RELS[rng.random_range(0..3)]),
            Target::Var(var(t)),
        ));
    }
    for i in 0..n {
        if rng.random_bool(0.3) {
            edges.push(Edge::new(
                var(i),
                rel(":polarity"),
                Target::Const(Concept::new(CONSTS[rng.random_range(0..2)]).unwrap()),
            ));
        }
    }
    AmrGraph::new(var(0), instances, edges).unwrap()
}

/// Random bijective renaming of a graph's variables to fresh names.
pub fn random_renaming(
    rng: &mut ChaCha8Rng,
    g: &AmrGraph,
) -> std::collections::HashMap<Variable, Variable> {
    use rand::seq::SliceRandom;
    let vars: Vec<Variable> = g.variables().cloned().collect();
    let mut fresh: Vec<Variable> = (0..vars.len())
        .map(|i| Variable::new(format!("z{i}")).unwrap())
        .collect();
    fresh.shuffle(rng);
    vars.into_iter().zip(fresh).collect()
}

/// Matched triples of `a` against `b` for an index mapping, counted straight
/// from the triple sets.
fn count(
    a: &TripleSet,
    b: &TripleSet,
    av: &[Variable],
    bv: &[Variable],
    m: &[Option<usize>],
) -> usize {
    let image = |v: &Variable| -> Option<&Variable> {
        let i = av.iter().position(|x| x == v)?;
        m[i].map(|j| &bv[j])
    };
    let mut n = 0;
    for (v, c) in &a.instances {
        if let Some(w) = image(v) {
            n += b.instances.iter().filter(|(x, d)| x == w && d == c).count();
        }
    }
    for (v, r, c) in &a.attributes {
        if let Some(w) = image(v) {
            n += b
                .attributes
                .iter()
                .filter(|(x, s, d)| x == w && s == r && d == c)
                .count();
        }
    }
    for (s, r, t) in &a.relations {
        if let (Some(x), Some(y)) = (image(s), image(t)) {
            n += b
                .relations
                .iter()
                .filter(|(p, q, o)| p == x && q == r && o == y)
                .count();
        }
    }
    if image(&a.top) == Some(&b.top) {
        n += 1;
    }
    n
}

/// Maximum matched count over every partial injective map, by enumeration.
pub fn brute_force_matched(a: &TripleSet, b: &TripleSet) -> usize {
    let av: Vec<Variable> = a.instances.iter().map(|(v, _)| v.clone()).collect();
    let bv: Vec<Variable> = b.instances.iter().map(|(v, _)| v.clone()).collect();
    let mut m = vec![None; av.len()];
    let mut used = vec![false; bv.len()];
    let mut best = 0;
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        a: &TripleSet,
        b: &TripleSet,
        av: &[Variable],
        bv: &[Variable],
        m: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut usize,
    ) {
        if i == av.len() {
            *best = (*best).max(count(a, b, av, bv, m));
            return;
        }
        m[i] = None;
        rec(i + 1, a, b, av, bv, m, used, best);
        for j in 0..bv.len() {
            if !used[j] {
                used[j] = true;
                m[i] = Some(j);
                rec(i + 1, a, b, av, bv, m, used, best);
                used[j] = false;
            }
        }
        m[i] = None;
    }
    rec(0, a, b, &av, &bv, &mut m, &mut used, &mut best);
    best
}

pub fn f1(matched: usize, total_a: usize, total_b: usize) -> f64 {
    2.0 * matched as f64 / (total_a + total_b) as f64
}
