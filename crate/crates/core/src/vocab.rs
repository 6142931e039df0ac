//! Frequency-thresholded vocabulary and infrequent-token replacement.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::linearize::{is_relation_token, TokenSeq, UNK};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VocabError {
    #[error("min_count must be at least 1")]
    ZeroMinCount,
    #[error("line {line}: malformed vocabulary entry {text:?}")]
    Malformed { line: usize, text: String },
}

/// Token counts plus the kept vocabulary.
///
/// Relation tokens and [`UNK`] are always in vocabulary and do not count
/// towards `max_size`; the cap and the frequency threshold apply to every
/// other token (concepts and constants).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabTable {
    counts: HashMap<String, usize>,
    /// Kept non-relation tokens, most frequent first.
    kept: Vec<String>,
    /// Relation tokens seen while building, most frequent first.
    relations: Vec<String>,
    kept_set: HashSet<String>,
    min_count: usize,
    max_size: Option<usize>,
}

pub fn build_vocab<'a>(
    seqs: impl IntoIterator<Item = &'a TokenSeq>,
    min_count: usize,
    max_size: Option<usize>,
) -> Result<VocabTable, VocabError> {
    if min_count == 0 {
        return Err(VocabError::ZeroMinCount);
    }
    // token -> (count, first occurrence)
    let mut stats: HashMap<&str, (usize, usize)> = HashMap::new();
    let mut position = 0;
    for seq in seqs {
        for tok in seq.iter() {
            stats.entry(tok).or_insert((0, position)).0 += 1;
            position += 1;
        }
    }

    let mut ranked: Vec<(&str, usize, usize)> = stats
        .iter()
        .map(|(t, &(c, first))| (*t, c, first))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));

    let relations: Vec<String> = ranked
        .iter()
        .filter(|(t, _, _)| is_relation_token(t))
        .map(|(t, _, _)| t.to_string())
        .collect();
    let mut kept: Vec<String> = ranked
        .iter()
        .filter(|(t, c, _)| !is_relation_token(t) && *t != UNK && *c >= min_count)
        .map(|(t, _, _)| t.to_string())
        .collect();
    if let Some(max) = max_size {
        kept.truncate(max);
    }

    let kept_set = kept.iter().cloned().collect();
    Ok(VocabTable {
        counts: stats
            .into_iter()
            .map(|(t, (c, _))| (t.to_string(), c))
            .collect(),
        kept,
        relations,
        kept_set,
        min_count,
        max_size,
    })
}

impl VocabTable {
    pub fn contains(&self, tok: &str) -> bool {
        tok == UNK || is_relation_token(tok) || self.kept_set.contains(tok)
    }

    pub fn count(&self, tok: &str) -> usize {
        self.counts.get(tok).copied().unwrap_or(0)
    }

    /// Kept non-relation tokens, most frequent first.
    pub fn kept(&self) -> &[String] {
        &self.kept
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn max_size(&self) -> Option<usize> {
        self.max_size
    }

    /// One `token<TAB>count` line per entry: `<<unk>>` first, then relation
    /// tokens, then the kept tokens, each group most frequent first.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{UNK}\t{}", self.count(UNK));
        for t in self.relations.iter().chain(&self.kept) {
            let _ = writeln!(out, "{t}\t{}", self.count(t));
        }
        out
    }

    /// Reads the format written by [`VocabTable::to_tsv`]. Every listed
    /// non-relation token is kept.
    pub fn from_tsv(text: &str) -> Result<Self, VocabError> {
        let mut counts = HashMap::new();
        let mut kept = Vec::new();
        let mut relations = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let malformed = || VocabError::Malformed {
                line: n + 1,
                text: line.to_string(),
            };
            let (tok, count) = line.split_once('\t').ok_or_else(malformed)?;
            let count: usize = count.trim().parse().map_err(|_| malformed())?;
            if tok.is_empty() || tok.contains(char::is_whitespace) {
                return Err(malformed());
            }
            counts.insert(tok.to_string(), count);
            if is_relation_token(tok) {
                relations.push(tok.to_string());
            } else if tok != UNK {
                kept.push(tok.to_string());
            }
        }
        let min_count = kept.iter().map(|t| counts[t]).min().unwrap_or(1).max(1);
        Ok(VocabTable {
            kept_set: kept.iter().cloned().collect(),
            max_size: Some(kept.len()),
            counts,
            kept,
            relations,
            min_count,
        })
    }
}

/// Replace out-of-vocabulary tokens by [`UNK`], preserving length.
pub fn apply_vocab(seq: &TokenSeq, vocab: &VocabTable) -> TokenSeq {
    TokenSeq::from_vec_unchecked(
        seq.iter()
            .map(|t| if vocab.contains(t) { t } else { UNK }.to_string())
            .collect(),
    )
}
