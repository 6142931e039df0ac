//! Reader and writer for PENMAN notation and AMR corpus files.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{AmrGraph, Concept, Edge, GraphError, Relation, Target, Variable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PenmanErrorKind {
    EmptyInput,
    /// An opening parenthesis is never closed.
    UnclosedParen,
    /// A closing parenthesis with nothing open, or text after the root.
    UnexpectedClose,
    TrailingInput,
    ExpectedOpen,
    MissingVariable,
    MissingSlash,
    MissingConcept,
    DuplicateVariable(String),
    MissingTarget(String),
    DanglingReference(String),
    UnterminatedString,
    UnexpectedToken(String),
    Invalid(GraphError),
}

/// A PENMAN syntax error located at a byte offset in the input.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{kind:?} at byte {offset}")]
pub struct PenmanError {
    pub offset: usize,
    pub kind: PenmanErrorKind,
}

impl PenmanError {
    fn new(offset: usize, kind: PenmanErrorKind) -> Self {
        PenmanError { offset, kind }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Slash,
    Relation(&'a str),
    Quoted(&'a str),
    Symbol(&'a str),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok<'_>)>, PenmanError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        match c {
            '(' => {
                toks.push((i, Tok::Open));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::Close));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                let mut closed = false;
                while i < bytes.len() {
                    match bytes[i] {
                        b'\\' => i += 2,
                        b'"' => {
                            i += 1;
                            closed = true;
                            break;
                        }
                        b'\n' | b'\r' => break,
                        _ => i += 1,
                    }
                }
                if !closed || i > bytes.len() {
                    return Err(PenmanError::new(start, PenmanErrorKind::UnterminatedString));
                }
                toks.push((start, Tok::Quoted(&text[start..i])));
            }
            _ => {
                let start = i;
                while i < bytes.len() {
                    let c = text[i..].chars().next().unwrap();
                    if c.is_whitespace() || matches!(c, '(' | ')' | '/' | '"') {
                        break;
                    }
                    i += c.len_utf8();
                }
                let s = &text[start..i];
                if s.starts_with(':') {
                    toks.push((start, Tok::Relation(s)));
                } else {
                    toks.push((start, Tok::Symbol(s)));
                }
            }
        }
    }
    Ok(toks)
}

/// `true` for symbols shaped like AMR variables: one lowercase letter, or
/// lowercase letters followed by digits (`p`, `a2`, `x10`, `vv1`).
pub fn looks_like_variable(s: &str) -> bool {
    let letters = s.bytes().take_while(u8::is_ascii_lowercase).count();
    let digits = s[letters..].bytes().take_while(u8::is_ascii_digit).count();
    letters >= 1 && letters + digits == s.len() && (letters == 1 || digits > 0)
}

enum PendingTarget {
    Node(Variable),
    Symbol { text: String, offset: usize },
    Quoted(String),
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    len: usize,
    instances: Vec<(Variable, Concept)>,
    defined: HashSet<Variable>,
    edges: Vec<(Variable, Relation, PendingTarget)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok<'a>)> {
        self.toks.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map(|(o, _)| *o).unwrap_or(self.len)
    }

    fn invalid(offset: usize, e: GraphError) -> PenmanError {
        PenmanError::new(offset, PenmanErrorKind::Invalid(e))
    }

    /// Parses `( var / concept (relation target)* )`, returning the variable.
    fn node(&mut self) -> Result<Variable, PenmanError> {
        let open_at = match self.peek() {
            Some((o, Tok::Open)) => *o,
            _ => {
                return Err(PenmanError::new(
                    self.offset(),
                    PenmanErrorKind::ExpectedOpen,
                ))
            }
        };
        self.pos += 1;

        let var = match self.peek().cloned() {
            Some((o, Tok::Symbol(s))) => {
                self.pos += 1;
                Variable::new(s).map_err(|e| Self::invalid(o, e))?
            }
            Some((_, Tok::Slash)) | Some((_, Tok::Close)) | Some((_, Tok::Open)) => {
                return Err(PenmanError::new(
                    self.offset(),
                    PenmanErrorKind::MissingVariable,
                ))
            }
            Some((o, _)) => return Err(PenmanError::new(o, PenmanErrorKind::MissingVariable)),
            None => return Err(PenmanError::new(open_at, PenmanErrorKind::UnclosedParen)),
        };
        let var_at = self.toks[self.pos - 1].0;

        match self.peek() {
            Some((_, Tok::Slash)) => self.pos += 1,
            None => return Err(PenmanError::new(open_at, PenmanErrorKind::UnclosedParen)),
            Some((o, _)) => return Err(PenmanError::new(*o, PenmanErrorKind::MissingSlash)),
        }

        let concept = match self.peek().cloned() {
            Some((o, Tok::Symbol(s))) => {
                self.pos += 1;
                Concept::new(s).map_err(|e| Self::invalid(o, e))?
            }
            None => return Err(PenmanError::new(open_at, PenmanErrorKind::UnclosedParen)),
            Some((o, _)) => return Err(PenmanError::new(o, PenmanErrorKind::MissingConcept)),
        };

        if !self.defined.insert(var.clone()) {
            return Err(PenmanError::new(
                var_at,
                PenmanErrorKind::DuplicateVariable(var.to_string()),
            ));
        }
        self.instances.push((var.clone(), concept));

        loop {
            match self.peek().cloned() {
                Some((_, Tok::Close)) => {
                    self.pos += 1;
                    return Ok(var);
                }
                Some((o, Tok::Relation(r))) => {
                    self.pos += 1;
                    let relation = Relation::new(r).map_err(|e| Self::invalid(o, e))?;
                    let target = match self.peek().cloned() {
                        Some((_, Tok::Open)) => PendingTarget::Node(self.node()?),
                        Some((to, Tok::Symbol(s))) => {
                            self.pos += 1;
                            PendingTarget::Symbol {
                                text: s.to_string(),
                                offset: to,
                            }
                        }
                        Some((_, Tok::Quoted(q))) => {
                            self.pos += 1;
                            PendingTarget::Quoted(q.to_string())
                        }
                        _ => {
                            return Err(PenmanError::new(
                                o,
                                PenmanErrorKind::MissingTarget(r.to_string()),
                            ))
                        }
                    };
                    self.edges.push((var.clone(), relation, target));
                }
                None => return Err(PenmanError::new(open_at, PenmanErrorKind::UnclosedParen)),
                Some((o, t)) => {
                    return Err(PenmanError::new(
                        o,
                        PenmanErrorKind::UnexpectedToken(format!("{t:?}")),
                    ))
                }
            }
        }
    }
}

/// Parse one parenthesized AMR expression.
///
/// A bare symbol after a relation is a reference when it names a variable
/// defined anywhere in the expression (before or after the reference). An
/// undefined symbol shaped like a variable (see [`looks_like_variable`]) is
/// a dangling reference; any other bare symbol is a constant.
pub fn parse_penman(text: &str) -> Result<AmrGraph, PenmanError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(PenmanError::new(0, PenmanErrorKind::EmptyInput));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        len: text.len(),
        instances: Vec::new(),
        defined: HashSet::new(),
        edges: Vec::new(),
    };
    let root = p.node()?;
    if let Some((o, t)) = p.peek() {
        let kind = if *t == Tok::Close {
            PenmanErrorKind::UnexpectedClose
        } else {
            PenmanErrorKind::TrailingInput
        };
        return Err(PenmanError::new(*o, kind));
    }

    let mut edges = Vec::with_capacity(p.edges.len());
    for (source, relation, target) in p.edges {
        let target = match target {
            PendingTarget::Node(v) => Target::Var(v),
            PendingTarget::Quoted(q) => {
                Target::Const(Concept::new(q).map_err(|e| Parser::invalid(0, e))?)
            }
            PendingTarget::Symbol { text, offset } => {
                let as_var = Variable::new(text.as_str()).ok();
                match as_var {
                    Some(v) if p.defined.contains(&v) => Target::Var(v),
                    _ if looks_like_variable(&text) => {
                        return Err(PenmanError::new(
                            offset,
                            PenmanErrorKind::DanglingReference(text),
                        ))
                    }
                    _ => Target::Const(Concept::new(text).map_err(|e| Parser::invalid(offset, e))?),
                }
            }
        };
        edges.push(Edge::new(source, relation, target));
    }
    AmrGraph::new(root, p.instances, edges).map_err(|e| Parser::invalid(0, e))
}

/// Write `g` in PENMAN notation. The first depth-first visit of a variable
/// prints `(var / concept ...)`; later visits print the bare variable. With
/// `indent`, each relation starts a new line indented 6 spaces per depth.
pub fn serialize_penman(g: &AmrGraph, indent: bool) -> String {
    let adj = g.adjacency();
    let mut out = String::new();
    let mut seen = HashSet::new();
    write_node(g, g.root(), &adj, &mut seen, 1, indent, &mut out);
    out
}

fn write_node<'a>(
    g: &'a AmrGraph,
    var: &'a Variable,
    adj: &HashMap<&'a Variable, Vec<&'a Edge>>,
    seen: &mut HashSet<&'a Variable>,
    depth: usize,
    indent: bool,
    out: &mut String,
) {
    seen.insert(var);
    let concept = g.concept_of(var).expect("variable defined");
    let _ = write!(out, "({var} / {concept}");
    for e in adj.get(var).into_iter().flatten() {
        if indent {
            out.push('\n');
            out.extend(std::iter::repeat_n(' ', 6 * depth));
        } else {
            out.push(' ');
        }
        out.push_str(e.relation.as_str());
        out.push(' ');
        match &e.target {
            Target::Const(c) => out.push_str(c.as_str()),
            Target::Var(t) if seen.contains(t) => out.push_str(t.as_str()),
            Target::Var(t) => write_node(g, t, adj, seen, depth + 1, indent, out),
        }
    }
    out.push(')');
}

/// One AMR record of a corpus file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusRecord {
    /// Value of the `# ::id` metadata, when present.
    pub id: Option<String>,
    /// Value of `# ::snt`; empty when the record has none.
    pub sentence: String,
    pub graph: AmrGraph,
    /// The record exactly as it appeared in the file, metadata included.
    pub raw_text: String,
}

impl CorpusRecord {
    pub fn new(id: Option<String>, sentence: impl Into<String>, graph: AmrGraph) -> Self {
        let sentence = sentence.into();
        let mut rec = CorpusRecord {
            id,
            sentence,
            graph,
            raw_text: String::new(),
        };
        rec.raw_text = rec.to_penman_record();
        rec
    }

    /// Metadata header plus indented graph, without a trailing blank line.
    pub fn to_penman_record(&self) -> String {
        let mut s = String::new();
        if let Some(id) = &self.id {
            let _ = writeln!(s, "# ::id {id}");
        }
        let _ = writeln!(s, "# ::snt {}", self.sentence);
        s.push_str(&serialize_penman(&self.graph, true));
        s
    }
}

/// Ordered collection of records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub records: Vec<CorpusRecord>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CorpusRecord> {
        self.records.iter()
    }

    /// Serialized corpus: records separated by one blank line.
    pub fn to_penman(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_penman_record());
            out.push_str("\n\n");
        }
        out
    }
}

impl FromIterator<CorpusRecord> for Corpus {
    fn from_iter<I: IntoIterator<Item = CorpusRecord>>(iter: I) -> Self {
        Corpus {
            records: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] io::Error),
    #[error("record {index} (line {line}): {source}")]
    Record {
        index: usize,
        line: usize,
        #[source]
        source: PenmanError,
    },
}

/// Non-fatal problem found while reading a corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CorpusWarning {
    MissingSentence {
        index: usize,
    },
    Skipped {
        index: usize,
        line: usize,
        error: PenmanError,
    },
}

#[derive(Clone, Debug, Default)]
pub struct CorpusRead {
    pub corpus: Corpus,
    pub warnings: Vec<CorpusWarning>,
}

struct RawRecord {
    line: usize,
    text: String,
}

fn split_records(text: &str) -> Vec<RawRecord> {
    let mut out = Vec::new();
    let mut cur: Option<RawRecord> = None;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if let Some(r) = cur.take() {
                out.push(r);
            }
            continue;
        }
        let r = cur.get_or_insert_with(|| RawRecord {
            line: n + 1,
            text: String::new(),
        });
        r.text.push_str(line);
        r.text.push('\n');
    }
    out.extend(cur);
    out
}

fn metadata<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.trim_start().strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(key)?;
    if rest.is_empty() {
        return Some("");
    }
    rest.starts_with(char::is_whitespace).then(|| rest.trim())
}

/// Parse corpus text. Records are separated by blank lines; `#` lines are
/// metadata, of which only `::id` and `::snt` are interpreted. A record
/// made only of comments is ignored.
///
/// In strict mode the first malformed record aborts; otherwise it is
/// skipped with a warning.
pub fn parse_corpus(text: &str, strict: bool) -> Result<CorpusRead, CorpusError> {
    let raws: Vec<RawRecord> = split_records(text)
        .into_iter()
        .filter(|r| r.text.lines().any(|l| !l.trim_start().starts_with('#')))
        .collect();

    let parsed: Vec<_> = raws
        .par_iter()
        .map(|raw| {
            let mut id = None;
            let mut sentence = None;
            let mut body = String::new();
            for line in raw.text.lines() {
                if line.trim_start().starts_with('#') {
                    if let Some(v) = metadata(line, "::id") {
                        id = Some(v.split_whitespace().next().unwrap_or("").to_string())
                            .filter(|s| !s.is_empty());
                    } else if let Some(v) = metadata(line, "::snt") {
                        sentence = Some(v.to_string());
                    }
                    // Keep offsets meaningful by blanking comment lines.
                    body.extend(std::iter::repeat_n(' ', line.len()));
                } else {
                    body.push_str(line);
                }
                body.push('\n');
            }
            parse_penman(&body).map(|g| (id, sentence, g))
        })
        .collect();

    let mut read = CorpusRead::default();
    for (index, (raw, result)) in raws.into_iter().zip(parsed).enumerate() {
        match result {
            Ok((id, sentence, graph)) => {
                if sentence.is_none() {
                    log::warn!("record {index} has no ::snt line");
                    read.warnings.push(CorpusWarning::MissingSentence { index });
                }
                read.corpus.records.push(CorpusRecord {
                    id,
                    sentence: sentence.unwrap_or_default(),
                    graph,
                    raw_text: raw.text,
                });
            }
            Err(error) => {
                let line = raw.line
                    + raw.text[..error.offset.min(raw.text.len())]
                        .matches('\n')
                        .count();
                if strict {
                    return Err(CorpusError::Record {
                        index,
                        line,
                        source: error,
                    });
                }
                log::warn!("skipping record {index} (line {line}): {error}");
                read.warnings
                    .push(CorpusWarning::Skipped { index, line, error });
            }
        }
    }
    Ok(read)
}

pub fn read_corpus(path: impl AsRef<Path>, strict: bool) -> Result<CorpusRead, CorpusError> {
    let text = fs::read_to_string(path)?;
    parse_corpus(&text, strict)
}
