//! AMR graph toolkit: PENMAN reading and writing, depth-first linearization
//! with concept doubling, de-linearization with same-concept collapse,
//! SMATCH scoring and round-trip information loss.
//!
//! ```
//! use amrseq_core::{delinearize, linearize, parse_penman, smatch, Mode};
//!
//! let g = parse_penman("(p / permit-01 :polarity - :ARG1 (a / abuse-01 :ARG1 (r / right-05)))")?;
//! let seq = linearize(&g);
//! assert_eq!(
//!     seq.to_string(),
//!     "permit-01 :polarity - - :ARG1 abuse-01 :ARG1 right-05 right-05 abuse-01 permit-01"
//! );
//! let back = delinearize(&seq, Mode::Strict)?.graph;
//! assert_eq!(smatch(&g, &back, 4, 13)?.f1, 1.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod graph;
pub mod linearize;
pub mod loss;
pub mod penman;
pub mod smatch;
pub mod vocab;

pub use graph::{
    extract_triples, rename_variables, AmrGraph, Concept, Edge, GraphError, Node, Relation, Target,
    TripleSet, Variable,
};
pub use linearize::{
    delinearize, is_constant_token, is_relation_token, linearize, linearize_with_report,
    remove_variables, DelinearizeError, DelinearizeErrorKind, Delinearized, Diagnostic,
    DiagnosticClass, Linearized, Mode, TokenSeq, UNK,
};
pub use loss::{
    corpus_stats, information_loss, synthetic_corpus, CorpusStats, LossError, LossReport,
    SynthConfig,
};
pub use penman::{
    parse_corpus, parse_penman, read_corpus, serialize_penman, Corpus, CorpusError, CorpusRead,
    CorpusRecord, CorpusWarning, PenmanError, PenmanErrorKind,
};
pub use smatch::{
    aggregate, corpus_smatch, exact_smatch, matched_count, smatch, smatch_hill_climb, Alignment,
    CorpusScore, ScoreReport, SmatchError, EXACT_LIMIT,
};
pub use vocab::{apply_vocab, build_vocab, VocabError, VocabTable};
