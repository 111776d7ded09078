use std::collections::{BTreeSet, HashMap};

use super::fasta::{write_fasta, FastaRecord};
use super::SeqIoError;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    pub id: String,
    pub residues: String,
    pub label: String,
}

/// Labeled sequences plus the lexicographically sorted class list that fixes
/// one-hot indexing.
///
/// A dataset may hold a single class; the two-class minimum is enforced by the
/// trainer, which is where it matters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    sequences: Vec<LabeledSequence>,
    classes: Vec<String>,
}

impl Dataset {
    pub fn new(sequences: Vec<LabeledSequence>) -> Self {
        let classes: BTreeSet<&str> = sequences.iter().map(|s| s.label.as_str()).collect();
        let classes = classes.into_iter().map(str::to_string).collect();
        Self { sequences, classes }
    }

    pub fn sequences(&self) -> &[LabeledSequence] {
        &self.sequences
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(label))
            .ok()
    }

    /// n×C one-hot label matrix in sequence order.
    pub fn one_hot_matrix(&self) -> Matrix {
        let mut y = Matrix::zeros(self.len(), self.num_classes());
        for (i, s) in self.sequences.iter().enumerate() {
            let c = self.class_index(&s.label).expect("label is a class");
            y[(i, c)] = 1.0;
        }
        y
    }

    pub fn to_fasta(&self, width: usize) -> String {
        write_fasta(
            self.sequences
                .iter()
                .map(|s| (s.id.as_str(), s.residues.as_str())),
            width,
        )
    }

    /// Two-column `id<TAB>class` table, LF endings, no header.
    pub fn to_labels_tsv(&self) -> String {
        let mut out = String::new();
        for s in &self.sequences {
            out.push_str(&s.id);
            out.push('\t');
            out.push_str(&s.label);
            out.push('\n');
        }
        out
    }
}

/// Id → class lookup parsed from a two-column TSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelTable {
    map: HashMap<String, String>,
}

impl LabelTable {
    /// Parses `id<TAB>class` lines. Blank lines are skipped, CRLF accepted.
    pub fn parse(text: &str) -> Result<Self, SeqIoError> {
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(id), Some(class), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(SeqIoError::MalformedLabelLine { line: lineno + 1 });
            };
            let (id, class) = (id.trim(), class.trim());
            if id.is_empty() || class.is_empty() {
                return Err(SeqIoError::MalformedLabelLine { line: lineno + 1 });
            }
            if map.insert(id.to_string(), class.to_string()).is_some() {
                return Err(SeqIoError::DuplicateId {
                    id: id.to_string(),
                    line: lineno + 1,
                });
            }
        }
        Ok(Self { map })
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self, SeqIoError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut map = HashMap::new();
        for (i, (k, v)) in pairs.into_iter().enumerate() {
            let k = k.into();
            if map.contains_key(&k) {
                return Err(SeqIoError::DuplicateId { id: k, line: i + 1 });
            }
            map.insert(k, v.into());
        }
        Ok(Self { map })
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.map.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Result of joining records with labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attached {
    pub dataset: Dataset,
    /// Ids of records without a label, in input order.
    pub dropped: Vec<String>,
}

/// Joins parsed records with their labels, keeping record order. Unlabeled
/// records are dropped and reported in [`Attached::dropped`].
pub fn attach_labels(
    records: Vec<FastaRecord>,
    labels: &LabelTable,
) -> Result<Attached, SeqIoError> {
    let mut sequences = Vec::with_capacity(records.len());
    let mut dropped = Vec::new();
    for r in records {
        match labels.get(&r.id) {
            Some(label) => sequences.push(LabeledSequence {
                label: label.to_string(),
                id: r.id,
                residues: r.residues,
            }),
            None => dropped.push(r.id),
        }
    }
    if sequences.is_empty() {
        return Err(SeqIoError::NoLabeledRecords);
    }
    Ok(Attached {
        dataset: Dataset::new(sequences),
        dropped,
    })
}

pub fn one_hot(label: &str, classes: &[String]) -> Result<Vec<f64>, SeqIoError> {
    let idx = classes
        .iter()
        .position(|c| c == label)
        .ok_or_else(|| SeqIoError::UnknownLabel(label.to_string()))?;
    let mut v = vec![0.0; classes.len()];
    v[idx] = 1.0;
    Ok(v)
}
