//! Sequence ingestion: alphabets, FASTA records, label tables, datasets and
//! the seeded synthetic generator.

mod alphabet;
mod dataset;
mod fasta;
mod synth;

pub use alphabet::Alphabet;
pub use dataset::{attach_labels, one_hot, Attached, Dataset, LabelTable, LabeledSequence};
pub use fasta::{parse_fasta, write_fasta, FastaRecord};
pub use synth::{synth_dataset, SynthParams, SyntheticDataset};

use thiserror::Error;

/// Errors raised while reading or assembling sequence data. Each message is
/// prefixed with the operation that raised it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqIoError {
    #[error("parse_fasta: input contains no records")]
    EmptyInput,
    #[error("parse_fasta: record '{id}' has illegal residue {residue:?} at position {position}")]
    IllegalResidue {
        id: String,
        /// 1-based offset within the record's concatenated residues.
        position: usize,
        residue: char,
    },
    #[error("parse_fasta: header '{id}' on line {line} has no sequence")]
    HeaderWithoutSequence { id: String, line: usize },
    #[error("parse_fasta: sequence data on line {line} appears before any header")]
    SequenceBeforeHeader { line: usize },
    #[error("parse_fasta: empty record id on line {line}")]
    EmptyId { line: usize },
    #[error("attach_labels: no record has a label")]
    NoLabeledRecords,
    #[error("attach_labels: id '{id}' appears more than once in the label table (line {line})")]
    DuplicateId { id: String, line: usize },
    #[error("attach_labels: malformed label line {line}: expected `id<TAB>class`")]
    MalformedLabelLine { line: usize },
    #[error("one_hot: unknown label '{0}'")]
    UnknownLabel(String),
    #[error("synth_dataset: {0}")]
    InvalidParameter(String),
    #[error("alphabet: {0}")]
    InvalidAlphabet(String),
}
