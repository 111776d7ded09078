//! Fixed-width mer count spectra.
//!
//! Every mer is addressed by its base-|Σ| rank: the first residue is the most
//! significant digit and digits are alphabet ordinals.

use super::EmbedError;
use crate::seq_io::Alphabet;

/// Rank of a mer given as alphabet ordinals.
#[inline]
pub fn rank(ordinals: &[u8], sigma: usize) -> usize {
    ordinals
        .iter()
        .fold(0usize, |acc, &o| acc * sigma + o as usize)
}

/// Inverse of [`rank`] for mers of length `len`.
pub fn unrank(mut rank: usize, len: usize, sigma: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (rank % sigma) as u8;
        rank /= sigma;
    }
    out
}

/// Rank of a mer string, or `None` if it holds a symbol outside the alphabet.
pub fn mer_rank(mer: &str, alphabet: &Alphabet) -> Option<usize> {
    let ords = alphabet.encode(mer).ok()?;
    Some(rank(&ords, alphabet.len()))
}

pub fn mer_unrank(rank: usize, len: usize, alphabet: &Alphabet) -> String {
    alphabet.decode(&unrank(rank, len, alphabet.len()))
}

/// All contiguous length-`k` windows, left to right. Empty when the input is
/// shorter than `k` (or `k` is 0).
pub fn enumerate_kmers(residues: &str, k: usize) -> Vec<&str> {
    if k == 0 || residues.len() < k {
        return Vec::new();
    }
    (0..=residues.len() - k)
        .filter_map(|i| residues.get(i..i + k))
        .collect()
}

fn encode(residues: &str, alphabet: &Alphabet) -> Result<Vec<u8>, EmbedError> {
    alphabet
        .encode(residues)
        .map_err(|(pos, residue)| EmbedError::IllegalResidue {
            position: pos + 1,
            residue,
        })
}

fn require_len(len: usize, window: usize) -> Result<(), EmbedError> {
    if len < window {
        return Err(EmbedError::SequenceTooShort {
            id: None,
            len,
            window,
        });
    }
    Ok(())
}

pub(crate) fn kmer_counts(seq: &[u8], k: usize, sigma: usize) -> Vec<u32> {
    let mut counts = vec![0u32; sigma.pow(k as u32)];
    for w in seq.windows(k) {
        counts[rank(w, sigma)] += 1;
    }
    counts
}

/// Count of every k-mer; the vector has |Σ|^k entries and sums to N − k + 1.
pub fn kmer_spectrum(
    residues: &str,
    k: usize,
    alphabet: &Alphabet,
) -> Result<Vec<u32>, EmbedError> {
    super::check_width(alphabet.len(), k)?;
    if k == 0 {
        return Err(EmbedError::InvalidConfig("k must be >= 1".into()));
    }
    let seq = encode(residues, alphabet)?;
    require_len(seq.len(), k)?;
    Ok(kmer_counts(&seq, k, alphabet.len()))
}

/// Smallest length-`m` window of `kmer` or of `kmer` reversed, comparing
/// alphabet ordinals lexicographically. `rev` is scratch space.
pub(crate) fn minimizer_window<'a>(kmer: &'a [u8], m: usize, rev: &'a mut Vec<u8>) -> &'a [u8] {
    rev.clear();
    rev.extend(kmer.iter().rev());
    kmer.windows(m)
        .chain(rev.windows(m))
        .min()
        .expect("0 < m < k")
}

/// Minimizer of a single k-mer: the lexicographically smallest m-window over
/// the k-mer read forward and backward.
pub fn minimizer_of_kmer(kmer: &str, m: usize, alphabet: &Alphabet) -> Result<String, EmbedError> {
    let ords = encode(kmer, alphabet)?;
    if m == 0 || m >= ords.len() {
        return Err(EmbedError::InvalidM { m, k: ords.len() });
    }
    let mut rev = Vec::with_capacity(ords.len());
    Ok(alphabet.decode(minimizer_window(&ords, m, &mut rev)))
}

pub(crate) fn minimizer_counts(seq: &[u8], k: usize, m: usize, sigma: usize) -> Vec<u32> {
    let mut counts = vec![0u32; sigma.pow(m as u32)];
    let mut rev = Vec::with_capacity(k);
    for w in seq.windows(k) {
        counts[rank(minimizer_window(w, m, &mut rev), sigma)] += 1;
    }
    counts
}

/// Minimizer counts over every k-mer; |Σ|^m entries summing to N − k + 1.
pub fn minimizer_spectrum(
    residues: &str,
    k: usize,
    m: usize,
    alphabet: &Alphabet,
) -> Result<Vec<u32>, EmbedError> {
    if m == 0 || m >= k {
        return Err(EmbedError::InvalidM { m, k });
    }
    super::check_width(alphabet.len(), m)?;
    let seq = encode(residues, alphabet)?;
    require_len(seq.len(), k)?;
    Ok(minimizer_counts(&seq, k, m, alphabet.len()))
}

pub(crate) fn spaced_counts(seq: &[u8], k: usize, g: usize, sigma: usize) -> Vec<u32> {
    let mut counts = vec![0u32; sigma.pow(k as u32)];
    // the k-mer taken from each g-mer is its first k residues
    for gmer in seq.windows(g) {
        counts[rank(&gmer[..k], sigma)] += 1;
    }
    counts
}

/// Spaced k-mer counts: one k-mer per g-mer window; |Σ|^k entries summing to
/// N − g + 1.
pub fn spaced_spectrum(
    residues: &str,
    k: usize,
    g: usize,
    alphabet: &Alphabet,
) -> Result<Vec<u32>, EmbedError> {
    if k == 0 || k >= g {
        return Err(EmbedError::InvalidConfig(format!(
            "spaced k-mers need 1 <= k < g, got k={k}, g={g}"
        )));
    }
    super::check_width(alphabet.len(), k)?;
    let seq = encode(residues, alphabet)?;
    require_len(seq.len(), g)?;
    Ok(spaced_counts(&seq, k, g, alphabet.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acgt() -> Alphabet {
        Alphabet::new("ACGT").unwrap()
    }

    fn nonzero(v: &[u32]) -> Vec<(usize, u32)> {
        v.iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i, c))
            .collect()
    }

    #[test]
    fn enumerate_windows() {
        assert_eq!(enumerate_kmers("ACGT", 2), vec!["AC", "CG", "GT"]);
        assert_eq!(enumerate_kmers("AAAA", 3), vec!["AAA", "AAA"]);
        assert!(enumerate_kmers("AC", 3).is_empty());
        assert!(enumerate_kmers("AC", 0).is_empty());
    }

    #[test]
    fn kmer_spectrum_examples() {
        let a = acgt();
        let v = kmer_spectrum("ACGT", 2, &a).unwrap();
        assert_eq!(v.len(), 16);
        let r = |s| mer_rank(s, &a).unwrap();
        assert_eq!(nonzero(&v), vec![(r("AC"), 1), (r("CG"), 1), (r("GT"), 1)]);

        let v = kmer_spectrum("AAAA", 3, &a).unwrap();
        assert_eq!(nonzero(&v), vec![(0, 2)]);

        assert!(matches!(
            kmer_spectrum("AC", 3, &a),
            Err(EmbedError::SequenceTooShort {
                len: 2,
                window: 3,
                ..
            })
        ));
    }

    #[test]
    fn minimizer_examples() {
        let aa = Alphabet::amino();
        assert_eq!(minimizer_of_kmer("ACDEFGHIK", 3, &aa).unwrap(), "ACD");
        assert_eq!(minimizer_of_kmer("AAAA", 2, &aa).unwrap(), "AA");
        assert_eq!(minimizer_of_kmer("CBA", 2, &aa).unwrap(), "AB");
        assert!(matches!(
            minimizer_of_kmer("ACD", 3, &aa),
            Err(EmbedError::InvalidM { m: 3, k: 3 })
        ));
        assert!(minimizer_of_kmer("ACD", 0, &aa).is_err());
    }

    #[test]
    fn minimizer_uses_alphabet_order_not_bytes() {
        // 'T' sorts before 'A' in this alphabet
        let a = Alphabet::new("TGCA").unwrap();
        assert_eq!(minimizer_of_kmer("AAT", 1, &a).unwrap(), "T");
        assert_eq!(minimizer_of_kmer("ACT", 2, &a).unwrap(), "TC");
    }

    #[test]
    fn minimizer_spectrum_examples() {
        let a = acgt();
        let v = minimizer_spectrum("AAAAAAAAAA", 9, 3, &a).unwrap();
        assert_eq!(nonzero(&v), vec![(0, 2)]);
        let v = minimizer_spectrum("ACGTACGTA", 9, 3, &a).unwrap();
        assert_eq!(v.iter().sum::<u32>(), 1);
        assert!(minimizer_spectrum("AAAA", 3, 3, &a).is_err());
    }

    #[test]
    fn spaced_examples() {
        let a = acgt();
        let r = |s| mer_rank(s, &a).unwrap();
        let v = spaced_spectrum("ACGTA", 2, 3, &a).unwrap();
        assert_eq!(nonzero(&v), vec![(r("AC"), 1), (r("CG"), 1), (r("GT"), 1)]);
        let v = spaced_spectrum("AAAAA", 2, 3, &a).unwrap();
        assert_eq!(nonzero(&v), vec![(0, 3)]);
        let v = spaced_spectrum("ACDEFGHIK", 4, 9, &Alphabet::amino()).unwrap();
        assert_eq!(v.iter().sum::<u32>(), 1);
        assert!(spaced_spectrum("AAAAA", 3, 3, &a).is_err());
        assert!(matches!(
            spaced_spectrum("AAAA", 2, 5, &a),
            Err(EmbedError::SequenceTooShort { .. })
        ));
    }

    #[test]
    fn illegal_residue_reported() {
        assert!(matches!(
            kmer_spectrum("AC1", 2, &acgt()),
            Err(EmbedError::IllegalResidue {
                position: 3,
                residue: '1'
            })
        ));
    }

    #[test]
    fn rank_roundtrip_small() {
        let a = acgt();
        for r in 0..64 {
            let mer = mer_unrank(r, 3, &a);
            assert_eq!(mer_rank(&mer, &a), Some(r));
        }
        assert_eq!(mer_rank("AAA", &a), Some(0));
        assert_eq!(mer_rank("TTT", &a), Some(63));
    }
}
