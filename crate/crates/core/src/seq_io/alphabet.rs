use std::fmt;

use super::SeqIoError;

const NO_SYMBOL: u8 = u8::MAX;

/// An ordered residue alphabet. Symbol order defines both the base-|Σ| rank
/// of a mer and the lexicographic order used by minimizers.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<u8>,
    index: [u8; 256],
}

impl Alphabet {
    /// 20 amino acids followed by the ambiguity codes X, B, Z, J and stop `*`.
    pub const AMINO: &'static str = "ACDEFGHIKLMNPQRSTVWYXBZJ*";
    pub const NUCLEOTIDE: &'static str = "ACGTN";

    /// Builds an alphabet from distinct ASCII symbols. Letters are uppercased.
    pub fn new(symbols: &str) -> Result<Self, SeqIoError> {
        if !symbols.is_ascii() {
            return Err(SeqIoError::InvalidAlphabet(format!(
                "symbols must be ASCII, got {symbols:?}"
            )));
        }
        let symbols: Vec<u8> = symbols.bytes().map(|b| b.to_ascii_uppercase()).collect();
        if symbols.len() < 2 {
            return Err(SeqIoError::InvalidAlphabet(
                "at least two symbols are required".into(),
            ));
        }
        if symbols.len() >= NO_SYMBOL as usize {
            return Err(SeqIoError::InvalidAlphabet(format!(
                "at most {} symbols are supported",
                NO_SYMBOL - 1
            )));
        }
        let mut index = [NO_SYMBOL; 256];
        for (ord, &s) in symbols.iter().enumerate() {
            if s.is_ascii_whitespace() || s == b'>' {
                return Err(SeqIoError::InvalidAlphabet(format!(
                    "symbol {:?} cannot appear in FASTA sequence lines",
                    s as char
                )));
            }
            if index[s as usize] != NO_SYMBOL {
                return Err(SeqIoError::InvalidAlphabet(format!(
                    "duplicate symbol {:?}",
                    s as char
                )));
            }
            index[s as usize] = ord as u8;
        }
        Ok(Self { symbols, index })
    }

    pub fn amino() -> Self {
        Self::new(Self::AMINO).expect("builtin alphabet is valid")
    }

    pub fn nucleotide() -> Self {
        Self::new(Self::NUCLEOTIDE).expect("builtin alphabet is valid")
    }

    /// Resolves a preset name (`amino`, `protein`, `nucleotide`, `dna`) or
    /// falls back to treating the argument as a literal symbol list.
    pub fn from_spec(spec: &str) -> Result<Self, SeqIoError> {
        match spec.to_ascii_lowercase().as_str() {
            "amino" | "protein" | "aa" => Ok(Self::amino()),
            "nucleotide" | "dna" | "nt" => Ok(Self::nucleotide()),
            _ => Self::new(spec),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn as_str(&self) -> &str {
        // constructed from ASCII only
        std::str::from_utf8(&self.symbols).expect("ASCII alphabet")
    }

    /// Ordinal of a residue byte, case-insensitive.
    #[inline]
    pub fn ordinal(&self, residue: u8) -> Option<u8> {
        match self.index[residue.to_ascii_uppercase() as usize] {
            NO_SYMBOL => None,
            o => Some(o),
        }
    }

    #[inline]
    pub fn symbol(&self, ordinal: u8) -> u8 {
        self.symbols[ordinal as usize]
    }

    /// Maps residues to ordinals. On failure returns the 0-based offset and
    /// the offending character.
    pub fn encode(&self, residues: &str) -> Result<Vec<u8>, (usize, char)> {
        residues
            .chars()
            .enumerate()
            .map(|(i, c)| {
                if c.is_ascii() {
                    self.ordinal(c as u8).ok_or((i, c))
                } else {
                    Err((i, c))
                }
            })
            .collect()
    }

    pub fn decode(&self, ordinals: &[u8]) -> String {
        ordinals.iter().map(|&o| self.symbol(o) as char).collect()
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::amino()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Alphabet").field(&self.as_str()).finish()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
