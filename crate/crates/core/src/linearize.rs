//! Variable removal, depth-first linearization and de-linearization.
//!
//! A graph is flattened by a depth-first walk that drops variables and
//! parentheses. Each node emits its concept when first entered and again
//! once all of its outgoing edges are done, so the repeated concept marks
//! the end of the subtree:
//!
//! ```text
//! (p / permit-01 :polarity - :ARG1 (a / abuse-01 :ARG1 (r / right-05)))
//! permit-01 :polarity - - :ARG1 abuse-01 :ARG1 right-05 right-05 abuse-01 permit-01
//! ```
//!
//! Re-entrant references are written leaf-style (`dog dog`). Recovery runs a
//! stack machine over the tokens and then merges every node that carries the
//! same concept label, which is how re-entrancies come back and also where
//! distinct same-concept nodes collide.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use thiserror::Error;

use crate::graph::{AmrGraph, Concept, Edge, Relation, Target, Variable};

/// Whitespace-free token sequence produced by [`linearize`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Builds a sequence, splitting any token that contains whitespace.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TokenSeq(
            tokens
                .into_iter()
                .flat_map(|t| {
                    t.as_ref()
                        .split_whitespace()
                        .map(str::to_string)
                        .collect::<Vec<_>>()
                })
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub(crate) fn from_vec_unchecked(tokens: Vec<String>) -> Self {
        TokenSeq(tokens)
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl FromStr for TokenSeq {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(TokenSeq::new(s.split_whitespace()))
    }
}

/// Relation tokens start with `:` and have a nonempty tail.
pub fn is_relation_token(tok: &str) -> bool {
    tok.len() > 1 && tok.starts_with(':')
}

/// Tokens that de-linearization turns back into constant leaves when they
/// end up childless: `-`, `+`, numbers, quoted strings and the `:mode`
/// keywords.
pub fn is_constant_token(tok: &str) -> bool {
    const KEYWORDS: [&str; 3] = ["imperative", "expressive", "interrogative"];
    matches!(tok, "-" | "+")
        || (tok.len() >= 2 && tok.starts_with('"') && tok.ends_with('"'))
        || KEYWORDS.contains(&tok)
        || is_number(tok)
}

fn is_number(tok: &str) -> bool {
    let body = tok.strip_prefix(['-', '+']).unwrap_or(tok);
    !body.is_empty()
        && body.starts_with(|c: char| c.is_ascii_digit())
        && body.parse::<f64>().is_ok()
}

fn token_of(c: &Concept, flagged: &mut Vec<String>) -> String {
    let s = c.as_str();
    if s.contains(char::is_whitespace) {
        flagged.push(s.to_string());
        s.split_whitespace().collect::<Vec<_>>().join("_")
    } else {
        s.to_string()
    }
}

/// PENMAN-like text with variables removed. Variable nodes keep their
/// parentheses; re-entrant references become the referenced concept.
pub fn remove_variables(g: &AmrGraph) -> String {
    fn walk<'a>(
        g: &'a AmrGraph,
        v: &'a Variable,
        adj: &HashMap<&'a Variable, Vec<&'a Edge>>,
        seen: &mut HashSet<&'a Variable>,
        out: &mut String,
    ) {
        seen.insert(v);
        out.push('(');
        out.push_str(g.concept_of(v).expect("defined").as_str());
        for e in adj.get(v).into_iter().flatten() {
            out.push(' ');
            out.push_str(e.relation.as_str());
            out.push(' ');
            match &e.target {
                Target::Const(c) => out.push_str(c.as_str()),
                Target::Var(t) if seen.contains(t) => {
                    out.push_str(g.concept_of(t).expect("defined").as_str())
                }
                Target::Var(t) => walk(g, t, adj, seen, out),
            }
        }
        out.push(')');
    }
    let adj = g.adjacency();
    let mut out = String::new();
    walk(g, g.root(), &adj, &mut HashSet::new(), &mut out);
    out
}

/// Linearization plus the quoted constants whose internal whitespace had to
/// be replaced by `_`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linearized {
    pub tokens: TokenSeq,
    pub flagged: Vec<String>,
}

pub fn linearize(g: &AmrGraph) -> TokenSeq {
    linearize_with_report(g).tokens
}

pub fn linearize_with_report(g: &AmrGraph) -> Linearized {
    fn walk<'a>(
        g: &'a AmrGraph,
        v: &'a Variable,
        adj: &HashMap<&'a Variable, Vec<&'a Edge>>,
        seen: &mut HashSet<&'a Variable>,
        out: &mut Vec<String>,
        flagged: &mut Vec<String>,
    ) {
        seen.insert(v);
        let concept = token_of(g.concept_of(v).expect("defined"), flagged);
        out.push(concept.clone());
        for e in adj.get(v).into_iter().flatten() {
            out.push(e.relation.as_str().to_string());
            match &e.target {
                Target::Const(c) => {
                    let tok = token_of(c, flagged);
                    out.push(tok.clone());
                    out.push(tok);
                }
                Target::Var(t) if seen.contains(t) => {
                    let tok = token_of(g.concept_of(t).expect("defined"), flagged);
                    out.push(tok.clone());
                    out.push(tok);
                }
                Target::Var(t) => walk(g, t, adj, seen, out, flagged),
            }
        }
        out.push(concept);
    }
    let adj = g.adjacency();
    let mut out = Vec::with_capacity(3 * g.edges().len() + 2);
    let mut flagged = Vec::new();
    walk(
        g,
        g.root(),
        &adj,
        &mut HashSet::new(),
        &mut out,
        &mut flagged,
    );
    Linearized {
        tokens: TokenSeq::from_vec_unchecked(out),
        flagged,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Any token that neither opens nor closes a node legally is an error.
    #[default]
    Strict,
    /// Malformed input is repaired and every repair is reported.
    Repair,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DelinearizeErrorKind {
    Empty,
    /// A relation token with no open node to attach to.
    RelationWithoutNode(String),
    /// A relation token directly after another relation token.
    ConsecutiveRelations(String),
    /// A concept token that does not close the innermost open node.
    UnexpectedConcept {
        token: String,
        expected: String,
    },
    /// Any token after the root node was closed.
    TrailingToken(String),
    /// The input ends right after a relation token.
    DanglingRelation(String),
    /// The input ends while nodes are still open; `open` counts them.
    UnclosedNodes {
        open: usize,
    },
    InvalidToken(String),
}

/// Located de-linearization failure. `index` is the offending token's
/// position; for [`DelinearizeErrorKind::UnclosedNodes`] it is the opening
/// token of the innermost unclosed node.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{kind:?} at token {index}")]
pub struct DelinearizeError {
    pub index: usize,
    pub kind: DelinearizeErrorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticClass {
    NodeCollision,
    SyntaxError,
}

/// A recovery event worth reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    /// `nodes` distinct nodes with this concept were merged into one.
    NodeCollision { concept: String, nodes: usize },
    /// A node opened at `opened` was closed without its closing token;
    /// `at` is where the close was inserted.
    ImplicitClose {
        concept: String,
        opened: usize,
        at: usize,
    },
    /// A token was discarded.
    DroppedToken {
        index: usize,
        token: String,
        reason: DelinearizeErrorKind,
    },
    /// Nothing could be recovered; a single placeholder node was produced.
    EmptyGraph,
}

impl Diagnostic {
    pub fn class(&self) -> DiagnosticClass {
        match self {
            Diagnostic::NodeCollision { .. } => DiagnosticClass::NodeCollision,
            _ => DiagnosticClass::SyntaxError,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NodeCollision { concept, nodes } => {
                write!(f, "node-collision: {nodes} nodes merged into {concept}")
            }
            Diagnostic::ImplicitClose {
                concept,
                opened,
                at,
            } => write!(
                f,
                "syntax-error: implicit close of {concept} (opened at token {opened}) at token {at}"
            ),
            Diagnostic::DroppedToken {
                index,
                token,
                reason,
            } => write!(
                f,
                "syntax-error: dropped token {index} {token:?} ({reason:?})"
            ),
            Diagnostic::EmptyGraph => write!(f, "syntax-error: nothing recoverable"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delinearized {
    pub graph: AmrGraph,
    pub diagnostics: Vec<Diagnostic>,
}

impl Delinearized {
    pub fn syntax_repairs(&self) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| d.class() == DiagnosticClass::SyntaxError)
            .count()
    }
}

/// Placeholder concept for unrecoverable input and out-of-vocabulary tokens.
pub const UNK: &str = "<<unk>>";

struct RawNode {
    concept: String,
    children: Vec<(String, usize)>,
}

/// Rebuild a graph from a token sequence.
///
/// A concept token at the start or right after a relation opens a node;
/// anywhere else it must equal the innermost open node's concept and closes
/// it. Afterwards childless non-root nodes whose token passes
/// [`is_constant_token`] become constants, and all remaining nodes that share
/// a concept label are merged. Variables `x0, x1, ...` follow first-open
/// order.
pub fn delinearize(seq: &TokenSeq, mode: Mode) -> Result<Delinearized, DelinearizeError> {
    let toks = seq.tokens();
    let mut diagnostics = Vec::new();
    let fail = |index: usize, kind: DelinearizeErrorKind, diags: &mut Vec<Diagnostic>| {
        if mode == Mode::Strict {
            Err(DelinearizeError { index, kind })
        } else {
            diags.push(Diagnostic::DroppedToken {
                index,
                token: toks[index].clone(),
                reason: kind,
            });
            Ok(())
        }
    };

    let mut nodes: Vec<RawNode> = Vec::new();
    let mut opened_at: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut pending: Option<(usize, &str)> = None;
    let mut root_closed = false;

    for (i, tok) in toks.iter().enumerate() {
        let tok = tok.as_str();
        if root_closed {
            fail(
                i,
                DelinearizeErrorKind::TrailingToken(tok.into()),
                &mut diagnostics,
            )?;
            continue;
        }
        if is_relation_token(tok) {
            if stack.is_empty() {
                fail(
                    i,
                    DelinearizeErrorKind::RelationWithoutNode(tok.into()),
                    &mut diagnostics,
                )?;
            } else if let Some((pi, prev)) = pending {
                if mode == Mode::Strict {
                    return Err(DelinearizeError {
                        index: i,
                        kind: DelinearizeErrorKind::ConsecutiveRelations(tok.into()),
                    });
                }
                diagnostics.push(Diagnostic::DroppedToken {
                    index: pi,
                    token: prev.to_string(),
                    reason: DelinearizeErrorKind::ConsecutiveRelations(tok.into()),
                });
                pending = Some((i, tok));
            } else {
                pending = Some((i, tok));
            }
            continue;
        }

        if Concept::new(tok).is_err() {
            fail(
                i,
                DelinearizeErrorKind::InvalidToken(tok.into()),
                &mut diagnostics,
            )?;
            continue;
        }

        if nodes.is_empty() || pending.is_some() {
            let id = nodes.len();
            nodes.push(RawNode {
                concept: tok.to_string(),
                children: Vec::new(),
            });
            opened_at.push(i);
            if let Some((_, rel)) = pending.take() {
                let parent = *stack
                    .last()
                    .expect("relation only pending under an open node");
                nodes[parent].children.push((rel.to_string(), id));
            }
            stack.push(id);
            continue;
        }

        let top = *stack.last().expect("stack nonempty before root closes");
        if nodes[top].concept == tok {
            stack.pop();
        } else if mode == Mode::Strict {
            return Err(DelinearizeError {
                index: i,
                kind: DelinearizeErrorKind::UnexpectedConcept {
                    token: tok.into(),
                    expected: nodes[top].concept.clone(),
                },
            });
        } else if let Some(depth) = stack.iter().rposition(|&n| nodes[n].concept == tok) {
            while stack.len() > depth + 1 {
                let n = stack.pop().unwrap();
                diagnostics.push(Diagnostic::ImplicitClose {
                    concept: nodes[n].concept.clone(),
                    opened: opened_at[n],
                    at: i,
                });
            }
            stack.pop();
        } else {
            diagnostics.push(Diagnostic::DroppedToken {
                index: i,
                token: tok.into(),
                reason: DelinearizeErrorKind::UnexpectedConcept {
                    token: tok.into(),
                    expected: nodes[top].concept.clone(),
                },
            });
        }
        if stack.is_empty() {
            root_closed = true;
        }
    }

    if let Some((pi, rel)) = pending {
        fail(
            pi,
            DelinearizeErrorKind::DanglingRelation(rel.into()),
            &mut diagnostics,
        )?;
    }
    if let Some(&innermost) = stack.last() {
        if mode == Mode::Strict {
            return Err(DelinearizeError {
                index: opened_at[innermost],
                kind: DelinearizeErrorKind::UnclosedNodes { open: stack.len() },
            });
        }
        while let Some(n) = stack.pop() {
            diagnostics.push(Diagnostic::ImplicitClose {
                concept: nodes[n].concept.clone(),
                opened: opened_at[n],
                at: toks.len(),
            });
        }
    }
    if nodes.is_empty() {
        if mode == Mode::Strict {
            return Err(DelinearizeError {
                index: 0,
                kind: DelinearizeErrorKind::Empty,
            });
        }
        diagnostics.push(Diagnostic::EmptyGraph);
        nodes.push(RawNode {
            concept: UNK.to_string(),
            children: Vec::new(),
        });
    }

    let graph = collapse(&nodes, &mut diagnostics);
    Ok(Delinearized { graph, diagnostics })
}

fn collapse(nodes: &[RawNode], diagnostics: &mut Vec<Diagnostic>) -> AmrGraph {
    let is_const: Vec<bool> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| i != 0 && n.children.is_empty() && is_constant_token(&n.concept))
        .collect();

    // concept -> (variable, number of raw nodes merged)
    let mut groups: IndexMap<&str, (Variable, usize)> = IndexMap::new();
    let mut var_of: Vec<Option<Variable>> = vec![None; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        if is_const[i] {
            continue;
        }
        let next = groups.len();
        let entry = groups.entry(n.concept.as_str()).or_insert_with(|| {
            (
                Variable::new(format!("x{next}")).expect("valid variable"),
                0,
            )
        });
        entry.1 += 1;
        var_of[i] = Some(entry.0.clone());
    }
    for (concept, (_, count)) in &groups {
        if *count > 1 {
            diagnostics.push(Diagnostic::NodeCollision {
                concept: concept.to_string(),
                nodes: *count,
            });
        }
    }

    let mut edges = Vec::new();
    for (i, n) in nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| !n.children.is_empty())
    {
        let source = var_of[i].clone().expect("parents are variable nodes");
        for (rel, child) in &n.children {
            let target = if is_const[*child] {
                Target::Const(Concept::new(nodes[*child].concept.as_str()).expect("validated"))
            } else {
                Target::Var(var_of[*child].clone().expect("assigned"))
            };
            edges.push(Edge::new(
                source.clone(),
                Relation::new(rel.as_str()).expect("relation token"),
                target,
            ));
        }
    }
    let instances = groups
        .iter()
        .map(|(c, (v, _))| (v.clone(), Concept::new(*c).expect("validated")));
    AmrGraph::new(var_of[0].clone().expect("root"), instances, edges)
        .expect("collapsed tree is rooted")
}
