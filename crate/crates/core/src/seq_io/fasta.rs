use std::fmt::Write as _;

use super::{Alphabet, SeqIoError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub id: String,
    pub residues: String,
}

struct Pending {
    id: String,
    line: usize,
    residues: String,
}

impl Pending {
    fn finish(self) -> Result<FastaRecord, SeqIoError> {
        if self.residues.is_empty() {
            return Err(SeqIoError::HeaderWithoutSequence {
                id: self.id,
                line: self.line,
            });
        }
        Ok(FastaRecord {
            id: self.id,
            residues: self.residues,
        })
    }
}

/// Parses FASTA text. The record id is the first whitespace-delimited token of
/// the header. Wrapped sequence lines are concatenated and uppercased; blank
/// lines are ignored; CRLF endings are accepted.
pub fn parse_fasta(text: &str, alphabet: &Alphabet) -> Result<Vec<FastaRecord>, SeqIoError> {
    let mut records = Vec::new();
    let mut current: Option<Pending> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches('\r').trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            if let Some(p) = current.take() {
                records.push(p.finish()?);
            }
            let id = header.split_whitespace().next().unwrap_or("");
            if id.is_empty() {
                return Err(SeqIoError::EmptyId { line: lineno });
            }
            current = Some(Pending {
                id: id.to_string(),
                line: lineno,
                residues: String::new(),
            });
            continue;
        }
        let Some(p) = current.as_mut() else {
            return Err(SeqIoError::SequenceBeforeHeader { line: lineno });
        };
        for c in line.chars() {
            let ok = c.is_ascii() && alphabet.ordinal(c as u8).is_some();
            if !ok {
                return Err(SeqIoError::IllegalResidue {
                    id: p.id.clone(),
                    position: p.residues.len() + 1,
                    residue: c,
                });
            }
            p.residues.push(c.to_ascii_uppercase());
        }
    }
    if let Some(p) = current.take() {
        records.push(p.finish()?);
    }
    if records.is_empty() {
        return Err(SeqIoError::EmptyInput);
    }
    Ok(records)
}

/// Writes records as FASTA with sequence lines wrapped at `width` (0 = no wrap).
pub fn write_fasta<'a, I>(records: I, width: usize) -> String
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut out = String::new();
    for (id, residues) in records {
        let _ = writeln!(out, ">{id}");
        if width == 0 {
            out.push_str(residues);
            out.push('\n');
            continue;
        }
        // residues are ASCII, so byte chunks are char chunks
        for chunk in residues.as_bytes().chunks(width) {
            out.push_str(std::str::from_utf8(chunk).expect("ASCII residues"));
            out.push('\n');
        }
    }
    out
}
