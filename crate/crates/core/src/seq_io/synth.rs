use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Alphabet, Dataset, LabeledSequence, SeqIoError};

/// Parameters of the planted-motif generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub num_classes: usize,
    pub per_class: usize,
    pub length: usize,
    pub motif_len: usize,
    /// Per-residue substitution probability, in `[0, 1)`.
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    /// Planted motif of each class, indexed like `dataset.classes()`.
    pub motifs: Vec<String>,
}

impl SynthParams {
    fn validate(&self, alphabet: &Alphabet) -> Result<(), SeqIoError> {
        let bad = |msg: String| Err(SeqIoError::InvalidParameter(msg));
        if self.num_classes < 2 {
            return bad(format!(
                "num_classes must be >= 2, got {}",
                self.num_classes
            ));
        }
        if self.per_class < 1 {
            return bad("per_class must be >= 1".into());
        }
        if self.motif_len < 1 {
            return bad("motif_len must be >= 1".into());
        }
        if self.motif_len > self.length {
            return bad(format!(
                "motif_len ({}) exceeds length ({})",
                self.motif_len, self.length
            ));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad(format!("noise must lie in [0, 1), got {}", self.noise));
        }
        let distinct = u32::try_from(self.motif_len)
            .ok()
            .and_then(|m| (alphabet.len() as u64).checked_pow(m))
            .unwrap_or(u64::MAX);
        if distinct < self.num_classes as u64 {
            return bad(format!(
                "only {distinct} distinct motifs of length {} exist for {} classes",
                self.motif_len, self.num_classes
            ));
        }
        Ok(())
    }
}

/// Generates a seeded dataset in which every class owns a distinct random
/// motif planted once, at a random offset, in otherwise uniform residues.
/// Afterwards each residue is substituted by a different symbol with
/// probability `noise`.
///
/// Sequences are emitted class by class. Class names are zero-padded so that
/// lexicographic order equals generation order.
pub fn synth_dataset(
    params: &SynthParams,
    alphabet: &Alphabet,
) -> Result<SyntheticDataset, SeqIoError> {
    params.validate(alphabet)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sigma = alphabet.len();

    let mut seen = HashSet::new();
    let mut motifs: Vec<Vec<u8>> = Vec::with_capacity(params.num_classes);
    while motifs.len() < params.num_classes {
        let m: Vec<u8> = (0..params.motif_len)
            .map(|_| rng.random_range(0..sigma) as u8)
            .collect();
        if seen.insert(m.clone()) {
            motifs.push(m);
        }
    }

    let class_width = digits(params.num_classes - 1);
    let seq_width = digits(params.per_class - 1);
    let mut sequences = Vec::with_capacity(params.num_classes * params.per_class);
    for (c, motif) in motifs.iter().enumerate() {
        let label = format!("class{c:0class_width$}");
        for i in 0..params.per_class {
            let mut seq: Vec<u8> = (0..params.length)
                .map(|_| rng.random_range(0..sigma) as u8)
                .collect();
            let at = rng.random_range(0..=params.length - params.motif_len);
            seq[at..at + params.motif_len].copy_from_slice(motif);
            if params.noise > 0.0 {
                for r in seq.iter_mut() {
                    if rng.random::<f64>() < params.noise {
                        // uniform over the other sigma - 1 symbols
                        let shift = rng.random_range(1..sigma) as u8;
                        *r = ((*r as usize + shift as usize) % sigma) as u8;
                    }
                }
            }
            sequences.push(LabeledSequence {
                id: format!("syn{c:0class_width$}_{i:0seq_width$}"),
                residues: alphabet.decode(&seq),
                label: label.clone(),
            });
        }
    }

    Ok(SyntheticDataset {
        dataset: Dataset::new(sequences),
        motifs: motifs.iter().map(|m| alphabet.decode(m)).collect(),
    })
}

fn digits(mut n: usize) -> usize {
    let mut d = 1;
    while n >= 10 {
        n /= 10;
        d += 1;
    }
    d
}
