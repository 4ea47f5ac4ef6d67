//! Corpus ingestion: CoNLL-U parsing, labeled datasets, raw tokenization.
//!
//! Parsing is pure and stateless; parsed structures are immutable and safe
//! to share across threads.

mod conllu;
mod dataset;
mod tokenize;
mod types;

pub use conllu::{parse_conllu, parse_conllu_keyed, write_conllu};
pub use dataset::parse_labeled_dataset;
pub use tokenize::{read_units, tokenize_raw, write_units};
pub use types::{AnnotatedSentence, Label, LabelCounts, LabeledCorpus, LabeledDocument, Token};
