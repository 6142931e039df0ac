//! Rooted, labeled AMR graph model and triple extraction.
//!
//! Nodes are either *variable nodes* (identified by a [`Variable`] and
//! carrying a [`Concept`]) or *constant leaves* (a bare [`Concept`] that only
//! ever appears as an edge target, such as `-` in `:polarity -`). Edges are
//! kept in the order they were read; graph equality for most purposes is
//! triple-set equality.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Errors raised while constructing or transforming a graph.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("invalid variable name {0:?}")]
    InvalidVariable(String),
    #[error("invalid concept label {0:?}")]
    InvalidConcept(String),
    #[error("invalid relation label {0:?}")]
    InvalidRelation(String),
    #[error("variable {0} is defined more than once")]
    DuplicateVariable(Variable),
    #[error("variable {0} is used but never defined")]
    UndefinedVariable(Variable),
    #[error("root variable {0} is not defined")]
    UndefinedRoot(Variable),
    #[error("variable {0} is not reachable from the root")]
    Unreachable(Variable),
    #[error("variable mapping is missing an image for {0}")]
    MappingNotTotal(Variable),
    #[error("variable mapping sends two variables to {0}")]
    MappingNotInjective(Variable),
}

/// Per-graph node identifier, e.g. `p` or `a2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        let bad = |c: char| c.is_whitespace() || matches!(c, '/' | '(' | ')' | ':' | '"');
        if name.is_empty() || name.chars().any(bad) {
            return Err(GraphError::InvalidVariable(name));
        }
        Ok(Variable(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Node content: an English word, a frameset such as `want-01`, or a
/// keyword/constant such as `-`.
///
/// Whitespace is only permitted inside a double-quoted label (string
/// constants such as `"New York"`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Concept(String);

impl Concept {
    pub fn new(label: impl Into<String>) -> Result<Self, GraphError> {
        let label = label.into();
        let quoted = is_quoted(&label);
        let ok = !label.is_empty()
            && label
                .chars()
                .all(|c| quoted || !(c.is_whitespace() || c == '(' || c == ')'));
        let ok = ok && (!quoted || !label.contains(['\n', '\r']));
        if ok {
            Ok(Concept(label))
        } else {
            Err(GraphError::InvalidConcept(label))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_quoted(&self) -> bool {
        is_quoted(&self.0)
    }
}

fn is_quoted(s: &str) -> bool {
    s.len() >= 2 && s.starts_with('"') && s.ends_with('"')
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Edge label, always starting with `:`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation(String);

impl Relation {
    pub fn new(label: impl Into<String>) -> Result<Self, GraphError> {
        let label = label.into();
        let bad = |c: char| c.is_whitespace() || matches!(c, '(' | ')' | '"');
        if label.len() < 2 || !label.starts_with(':') || label.chars().any(bad) {
            return Err(GraphError::InvalidRelation(label));
        }
        Ok(Relation(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `true` for inverse relations such as `:ARG0-of`. No normalization is
    /// performed anywhere on the basis of this flag.
    pub fn is_inverse(&self) -> bool {
        self.0.len() > 4 && self.0.ends_with("-of")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Target of an edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Var(Variable),
    Const(Concept),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: Variable,
    pub relation: Relation,
    pub target: Target,
}

impl Edge {
    pub fn new(source: Variable, relation: Relation, target: Target) -> Self {
        Edge {
            source,
            relation,
            target,
        }
    }
}

/// Borrowed view of one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Node<'a> {
    pub variable: Option<&'a Variable>,
    pub concept: &'a Concept,
}

/// A rooted, directed, labeled graph.
///
/// Immutable once built: every variable is defined once, every edge source
/// and variable target is defined, and every variable is reachable from the
/// root. Exact duplicate edges are dropped on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmrGraph {
    root: Variable,
    instances: IndexMap<Variable, Concept>,
    edges: Vec<Edge>,
}

impl AmrGraph {
    pub fn new(
        root: Variable,
        instances: impl IntoIterator<Item = (Variable, Concept)>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let mut map = IndexMap::new();
        for (var, concept) in instances {
            if map.contains_key(&var) {
                return Err(GraphError::DuplicateVariable(var));
            }
            map.insert(var, concept);
        }
        if !map.contains_key(&root) {
            return Err(GraphError::UndefinedRoot(root));
        }

        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for edge in edges {
            if !map.contains_key(&edge.source) {
                return Err(GraphError::UndefinedVariable(edge.source));
            }
            if let Target::Var(v) = &edge.target {
                if !map.contains_key(v) {
                    return Err(GraphError::UndefinedVariable(v.clone()));
                }
            }
            if seen.insert(edge.clone()) {
                kept.push(edge);
            }
        }

        let graph = AmrGraph {
            root,
            instances: map,
            edges: kept,
        };
        let reached: HashSet<&Variable> = graph.dfs_order().into_iter().collect();
        if let Some(v) = graph.instances.keys().find(|v| !reached.contains(v)) {
            return Err(GraphError::Unreachable(v.clone()));
        }
        Ok(graph)
    }

    pub fn root(&self) -> &Variable {
        &self.root
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Variables with their concepts, in definition order.
    pub fn instances(&self) -> impl Iterator<Item = (&Variable, &Concept)> {
        self.instances.iter()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.instances.keys()
    }

    pub fn concept_of(&self, var: &Variable) -> Option<&Concept> {
        self.instances.get(var)
    }

    pub fn variable_count(&self) -> usize {
        self.instances.len()
    }

    pub fn constant_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e.target, Target::Const(_)))
            .count()
    }

    /// All nodes: variable nodes first, then one constant leaf per
    /// constant-target edge.
    pub fn nodes(&self) -> impl Iterator<Item = Node<'_>> {
        let vars = self.instances.iter().map(|(v, c)| Node {
            variable: Some(v),
            concept: c,
        });
        let consts = self.edges.iter().filter_map(|e| match &e.target {
            Target::Const(c) => Some(Node {
                variable: None,
                concept: c,
            }),
            Target::Var(_) => None,
        });
        vars.chain(consts)
    }

    /// Outgoing edges of `var`, in stored order.
    pub fn outgoing<'a>(&'a self, var: &'a Variable) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| &e.source == var)
    }

    /// Adjacency lists keyed by source, preserving edge order.
    pub(crate) fn adjacency(&self) -> HashMap<&Variable, Vec<&Edge>> {
        let mut adj: HashMap<&Variable, Vec<&Edge>> = HashMap::new();
        for e in &self.edges {
            adj.entry(&e.source).or_default().push(e);
        }
        adj
    }

    /// Variables in first-visit depth-first order from the root.
    pub fn dfs_order(&self) -> Vec<&Variable> {
        let adj = self.adjacency();
        let mut seen = HashSet::new();
        let mut order = Vec::new();
        let mut stack = vec![&self.root];
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            order.push(v);
            if let Some(out) = adj.get(v) {
                for e in out.iter().rev() {
                    if let Target::Var(t) = &e.target {
                        if !seen.contains(t) {
                            stack.push(t);
                        }
                    }
                }
            }
        }
        order
    }

    /// Number of variable-target edges whose target was already visited
    /// when the edge is reached in depth-first order.
    pub fn reentrancy_count(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = HashSet::new();
        let mut count = 0;
        fn walk<'a>(
            v: &'a Variable,
            adj: &HashMap<&'a Variable, Vec<&'a Edge>>,
            seen: &mut HashSet<&'a Variable>,
            count: &mut usize,
        ) {
            seen.insert(v);
            for e in adj.get(v).into_iter().flatten() {
                if let Target::Var(t) = &e.target {
                    if seen.contains(t) {
                        *count += 1;
                    } else {
                        walk(t, adj, seen, count);
                    }
                }
            }
        }
        walk(&self.root, &adj, &mut seen, &mut count);
        count
    }

    /// `true` when two variable nodes share a concept label.
    pub fn has_duplicate_concepts(&self) -> bool {
        let mut seen = HashSet::new();
        self.instances.values().any(|c| !seen.insert(c))
    }
}

/// Instance, attribute, relation and top triples of one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleSet {
    pub instances: BTreeSet<(Variable, Concept)>,
    pub attributes: BTreeSet<(Variable, Relation, Concept)>,
    pub relations: BTreeSet<(Variable, Relation, Variable)>,
    pub top: Variable,
}

impl TripleSet {
    /// Instance + attribute + relation triples; the top pseudo-triple is not
    /// included.
    pub fn triple_count(&self) -> usize {
        self.instances.len() + self.attributes.len() + self.relations.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.instances.iter().map(|(v, _)| v)
    }

    /// Apply a variable renaming to every triple. Variables missing from
    /// `mapping` are kept as they are.
    pub fn renamed(&self, mapping: &HashMap<Variable, Variable>) -> TripleSet {
        let r = |v: &Variable| mapping.get(v).cloned().unwrap_or_else(|| v.clone());
        TripleSet {
            instances: self
                .instances
                .iter()
                .map(|(v, c)| (r(v), c.clone()))
                .collect(),
            attributes: self
                .attributes
                .iter()
                .map(|(v, rel, c)| (r(v), rel.clone(), c.clone()))
                .collect(),
            relations: self
                .relations
                .iter()
                .map(|(s, rel, t)| (r(s), rel.clone(), r(t)))
                .collect(),
            top: r(&self.top),
        }
    }
}

pub fn extract_triples(g: &AmrGraph) -> TripleSet {
    let instances = g
        .instances
        .iter()
        .map(|(v, c)| (v.clone(), c.clone()))
        .collect();
    let mut attributes = BTreeSet::new();
    let mut relations = BTreeSet::new();
    for e in &g.edges {
        match &e.target {
            Target::Const(c) => {
                attributes.insert((e.source.clone(), e.relation.clone(), c.clone()));
            }
            Target::Var(t) => {
                relations.insert((e.source.clone(), e.relation.clone(), t.clone()));
            }
        }
    }
    TripleSet {
        instances,
        attributes,
        relations,
        top: g.root.clone(),
    }
}

/// Rename every variable of `g` through `mapping`, which must be total on
/// the graph's variables and injective there. Entries for variables not in
/// `g` are ignored.
pub fn rename_variables(
    g: &AmrGraph,
    mapping: &HashMap<Variable, Variable>,
) -> Result<AmrGraph, GraphError> {
    let mut images = HashSet::new();
    for v in g.variables() {
        let image = mapping
            .get(v)
            .ok_or_else(|| GraphError::MappingNotTotal(v.clone()))?;
        if !images.insert(image) {
            return Err(GraphError::MappingNotInjective(image.clone()));
        }
    }
    let r = |v: &Variable| mapping[v].clone();
    AmrGraph::new(
        r(&g.root),
        g.instances.iter().map(|(v, c)| (r(v), c.clone())),
        g.edges.iter().map(|e| Edge {
            source: r(&e.source),
            relation: e.relation.clone(),
            target: match &e.target {
                Target::Var(t) => Target::Var(r(t)),
                Target::Const(c) => Target::Const(c.clone()),
            },
        }),
    )
}
