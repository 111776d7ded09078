//! Sequence embeddings: k-mer spectra, minimizer spectra and spaced k-mer
//! spectra over a configurable alphabet, plus PCA for wide outputs.
//!
//! Spectra are dense count vectors of width |Σ|^L where L is the mer length
//! (k, m, or k respectively).

mod pca;
mod spectrum;

pub use pca::{apply_pca, fit_pca, PcaModel};
pub use spectrum::{
    enumerate_kmers, kmer_spectrum, mer_rank, mer_unrank, minimizer_of_kmer, minimizer_spectrum,
    rank, spaced_spectrum, unrank,
};

use std::io;

use rayon::prelude::*;
use thiserror::Error;

use crate::seq_io::{Alphabet, Dataset};
use crate::Matrix;

/// Widest dense spectrum accepted (entries per row).
pub const MAX_WIDTH: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embed: sequence {} of length {len} is shorter than the window {window}", id.as_deref().unwrap_or("<unnamed>"))]
    SequenceTooShort {
        id: Option<String>,
        len: usize,
        window: usize,
    },
    #[error("embed: illegal residue {residue:?} at position {position}")]
    IllegalResidue { position: usize, residue: char },
    #[error("minimizer: m must satisfy 1 <= m < k, got m={m}, k={k}")]
    InvalidM { m: usize, k: usize },
    #[error("embed: {0}")]
    InvalidConfig(String),
    #[error("embed: spectrum width |Σ|^{len} = {sigma}^{len} exceeds {MAX_WIDTH}")]
    TooWide { sigma: usize, len: usize },
    #[error("fit_pca: r must satisfy 1 <= r <= min(n, d) = {max}, got {r}")]
    InvalidR { r: usize, max: usize },
    #[error("fit_pca: at least two rows are required, got {rows}")]
    TooFewRows { rows: usize },
    #[error("fit_pca: input contains non-finite values")]
    NonFinite,
    #[error("apply_pca: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("feature matrix csv: {0}")]
    Csv(String),
    #[error("feature matrix csv: {0}")]
    Io(#[from] io::Error),
}

pub(crate) fn check_width(sigma: usize, len: usize) -> Result<usize, EmbedError> {
    u32::try_from(len)
        .ok()
        .and_then(|l| sigma.checked_pow(l))
        .filter(|&w| w <= MAX_WIDTH)
        .ok_or(EmbedError::TooWide { sigma, len })
}

/// Which spectrum to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Counts of contiguous k-mers.
    KmerSpectrum { k: usize },
    /// Counts of the minimizer (m-mer) of each k-mer.
    Minimizer { k: usize, m: usize },
    /// One k-mer (the leading k residues) per g-mer window.
    Spaced { k: usize, g: usize },
}

impl Method {
    pub const DEFAULT_KMER: Method = Method::KmerSpectrum { k: 3 };
    pub const DEFAULT_MINIMIZER: Method = Method::Minimizer { k: 9, m: 3 };
    pub const DEFAULT_SPACED: Method = Method::Spaced { k: 4, g: 9 };

    pub fn name(&self) -> &'static str {
        match self {
            Method::KmerSpectrum { .. } => "spike2vec",
            Method::Minimizer { .. } => "minimizer",
            Method::Spaced { .. } => "spaced",
        }
    }

    /// Length of the counted mers.
    pub fn mer_len(&self) -> usize {
        match *self {
            Method::KmerSpectrum { k } => k,
            Method::Minimizer { m, .. } => m,
            Method::Spaced { k, .. } => k,
        }
    }

    /// Length of the sliding window; sequences shorter than this are rejected.
    pub fn window(&self) -> usize {
        match *self {
            Method::KmerSpectrum { k } | Method::Minimizer { k, .. } => k,
            Method::Spaced { g, .. } => g,
        }
    }
}

/// A validated method/alphabet pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumConfig {
    method: Method,
    alphabet: Alphabet,
    width: usize,
}

impl SpectrumConfig {
    pub fn new(method: Method, alphabet: Alphabet) -> Result<Self, EmbedError> {
        match method {
            Method::KmerSpectrum { k: 0 } => {
                return Err(EmbedError::InvalidConfig("k must be >= 1".into()))
            }
            Method::Minimizer { k, m } if m == 0 || m >= k => {
                return Err(EmbedError::InvalidM { m, k })
            }
            Method::Spaced { k, g } if k == 0 || k >= g => {
                return Err(EmbedError::InvalidConfig(format!(
                    "spaced k-mers need 1 <= k < g, got k={k}, g={g}"
                )))
            }
            _ => {}
        }
        let width = check_width(alphabet.len(), method.mer_len())?;
        Ok(Self {
            method,
            alphabet,
            width,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of spectrum entries, |Σ|^mer_len.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Spectrum of one sequence.
    pub fn spectrum(&self, residues: &str) -> Result<Vec<u32>, EmbedError> {
        let seq = self.alphabet.encode(residues).map_err(|(pos, residue)| {
            EmbedError::IllegalResidue {
                position: pos + 1,
                residue,
            }
        })?;
        if seq.len() < self.method.window() {
            return Err(EmbedError::SequenceTooShort {
                id: None,
                len: seq.len(),
                window: self.method.window(),
            });
        }
        let sigma = self.alphabet.len();
        Ok(match self.method {
            Method::KmerSpectrum { k } => spectrum::kmer_counts(&seq, k, sigma),
            Method::Minimizer { k, m } => spectrum::minimizer_counts(&seq, k, m, sigma),
            Method::Spaced { k, g } => spectrum::spaced_counts(&seq, k, g, sigma),
        })
    }
}

/// What the columns of a [`FeatureMatrix`] index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Column j counts the mer of rank j.
    MerRank,
    /// Column j is the score on principal component j.
    PrincipalComponent,
    /// Loaded from CSV; the header does not say.
    Unspecified,
}

/// n×d feature rows keyed by sequence id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Matrix,
    pub row_ids: Vec<String>,
    pub columns: ColumnKind,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    /// Writes `id,c0,c1,...` CSV. Floats use the shortest representation that
    /// parses back to the same value.
    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), EmbedError> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let csv_err = |e: csv::Error| EmbedError::Csv(e.to_string());
        let mut header = Vec::with_capacity(self.cols() + 1);
        header.push("id".to_string());
        header.extend((0..self.cols()).map(|j| format!("c{j}")));
        wtr.write_record(&header).map_err(csv_err)?;
        let mut record = Vec::with_capacity(self.cols() + 1);
        for (id, row) in self.row_ids.iter().zip(self.values.row_iter()) {
            record.clear();
            record.push(id.clone());
            record.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&record).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(r: R) -> Result<Self, EmbedError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let csv_err = |e: csv::Error| EmbedError::Csv(e.to_string());
        let header = rdr.headers().map_err(csv_err)?.clone();
        if header.get(0) != Some("id") {
            return Err(EmbedError::Csv("header must start with `id`".into()));
        }
        for (j, h) in header.iter().skip(1).enumerate() {
            if h != format!("c{j}") {
                return Err(EmbedError::Csv(format!(
                    "column {} should be c{j}, found {h:?}",
                    j + 1
                )));
            }
        }
        let d = header.len() - 1;
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != d + 1 {
                return Err(EmbedError::Csv(format!(
                    "row {} has {} fields, expected {}",
                    i + 1,
                    rec.len(),
                    d + 1
                )));
            }
            ids.push(rec[0].to_string());
            for (j, field) in rec.iter().skip(1).enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    EmbedError::Csv(format!(
                        "row {} column c{j}: not a number: {field:?}",
                        i + 1
                    ))
                })?;
                data.push(v);
            }
        }
        let values = Matrix::from_row_major(ids.len(), d, data).expect("row lengths checked");
        Ok(Self {
            values,
            row_ids: ids,
            columns: ColumnKind::Unspecified,
        })
    }
}

/// When to reduce a spectrum with PCA.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcaPolicy {
    /// PCA is applied only when the spectrum width exceeds this.
    pub threshold: usize,
    /// Requested components; capped at min(n, d).
    pub components: usize,
}

impl Default for PcaPolicy {
    fn default() -> Self {
        Self {
            threshold: 1000,
            components: 500,
        }
    }
}

impl PcaPolicy {
    pub const DISABLED: PcaPolicy = PcaPolicy {
        threshold: usize::MAX,
        components: 0,
    };
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub features: FeatureMatrix,
    /// Present when the spectrum was reduced.
    pub pca: Option<PcaModel>,
}

/// Raw spectra for every sequence, one row each, in dataset order.
pub fn spectrum_matrix(ds: &Dataset, cfg: &SpectrumConfig) -> Result<FeatureMatrix, EmbedError> {
    let rows: Vec<Vec<u32>> = ds
        .sequences()
        .par_iter()
        .map(|s| {
            cfg.spectrum(&s.residues).map_err(|e| match e {
                EmbedError::SequenceTooShort { len, window, .. } => EmbedError::SequenceTooShort {
                    id: Some(s.id.clone()),
                    len,
                    window,
                },
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;
    let d = cfg.width();
    let mut values = Matrix::zeros(rows.len(), d);
    for (i, counts) in rows.iter().enumerate() {
        for (dst, &c) in values.row_mut(i).iter_mut().zip(counts) {
            *dst = c as f64;
        }
    }
    Ok(FeatureMatrix {
        values,
        row_ids: ds.sequences().iter().map(|s| s.id.clone()).collect(),
        columns: ColumnKind::MerRank,
    })
}

/// Embeds every sequence and, if the spectrum is wider than
/// `policy.threshold`, projects onto min(components, n, d) principal
/// components fitted on the whole matrix. A single row has no variance to
/// fit, so it is returned unreduced.
pub fn embed_dataset(
    ds: &Dataset,
    cfg: &SpectrumConfig,
    policy: &PcaPolicy,
) -> Result<Embedding, EmbedError> {
    let raw = spectrum_matrix(ds, cfg)?;
    if raw.cols() <= policy.threshold || raw.rows() < 2 {
        return Ok(Embedding {
            features: raw,
            pca: None,
        });
    }
    let r = policy.components.min(raw.rows()).min(raw.cols());
    let model = fit_pca(&raw.values, r)?;
    let values = apply_pca(&model, &raw.values)?;
    Ok(Embedding {
        features: FeatureMatrix {
            values,
            row_ids: raw.row_ids,
            columns: ColumnKind::PrincipalComponent,
        },
        pca: Some(model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq_io::{synth_dataset, LabeledSequence, SynthParams};

    fn dataset(seqs: &[&str]) -> Dataset {
        Dataset::new(
            seqs.iter()
                .enumerate()
                .map(|(i, s)| LabeledSequence {
                    id: format!("s{i}"),
                    residues: s.to_string(),
                    label: if i % 2 == 0 { "a" } else { "b" }.into(),
                })
                .collect(),
        )
    }

    #[test]
    fn config_validation() {
        let a = Alphabet::amino();
        assert!(SpectrumConfig::new(Method::Minimizer { k: 3, m: 3 }, a.clone()).is_err());
        assert!(SpectrumConfig::new(Method::Spaced { k: 9, g: 4 }, a.clone()).is_err());
        assert!(SpectrumConfig::new(Method::KmerSpectrum { k: 0 }, a.clone()).is_err());
        assert!(matches!(
            SpectrumConfig::new(Method::KmerSpectrum { k: 9 }, a.clone()),
            Err(EmbedError::TooWide { sigma: 25, len: 9 })
        ));
        let c = SpectrumConfig::new(Method::DEFAULT_MINIMIZER, a).unwrap();
        assert_eq!(c.width(), 25usize.pow(3));
    }

    #[test]
    fn small_spectrum_skips_pca() {
        let ds = dataset(&["ACGTACGT"; 10]);
        let cfg = SpectrumConfig::new(
            Method::KmerSpectrum { k: 2 },
            Alphabet::new("ACGT").unwrap(),
        )
        .unwrap();
        let e = embed_dataset(&ds, &cfg, &PcaPolicy::default()).unwrap();
        assert!(e.pca.is_none());
        assert_eq!(e.features.values.shape(), (10, 16));
        assert_eq!(e.features.columns, ColumnKind::MerRank);
        for row in e.features.values.row_iter() {
            assert_eq!(row.iter().sum::<f64>(), 7.0);
        }
    }

    #[test]
    fn wide_spectrum_is_reduced() {
        let s = synth_dataset(
            &SynthParams {
                num_classes: 3,
                per_class: 10,
                length: 40,
                motif_len: 5,
                noise: 0.0,
                seed: 3,
            },
            &Alphabet::amino(),
        )
        .unwrap();
        let cfg = SpectrumConfig::new(Method::KmerSpectrum { k: 3 }, Alphabet::amino()).unwrap();
        let policy = PcaPolicy {
            threshold: 1000,
            components: 500,
        };
        let e = embed_dataset(&s.dataset, &cfg, &policy).unwrap();
        assert_eq!(e.features.values.shape(), (30, 30));
        assert_eq!(e.features.columns, ColumnKind::PrincipalComponent);
        assert_eq!(e.pca.unwrap().input_dim(), 15625);
    }

    #[test]
    fn single_row_is_not_reduced() {
        let ds = dataset(&["ACDEFGHIK"]);
        let cfg = SpectrumConfig::new(Method::DEFAULT_MINIMIZER, Alphabet::amino()).unwrap();
        let e = embed_dataset(&ds, &cfg, &PcaPolicy::default()).unwrap();
        assert!(e.pca.is_none());
        assert_eq!(e.features.values.shape(), (1, 15625));
        assert_eq!(e.features.values.row(0).iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn too_short_names_sequence() {
        let ds = dataset(&["ACGTACGT", "AC"]);
        let cfg =
            SpectrumConfig::new(Method::KmerSpectrum { k: 3 }, Alphabet::nucleotide()).unwrap();
        match embed_dataset(&ds, &cfg, &PcaPolicy::DISABLED) {
            Err(EmbedError::SequenceTooShort {
                id,
                len: 2,
                window: 3,
            }) => {
                assert_eq!(id.as_deref(), Some("s1"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let fm = FeatureMatrix {
            values: Matrix::from_rows(&[[1.0, 0.0, 3.0], [0.1, 1e-17, 2.5e300]]).unwrap(),
            row_ids: vec!["x,1".into(), "y".into()],
            columns: ColumnKind::MerRank,
        };
        let mut buf = Vec::new();
        fm.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,c0,c1,c2\n\"x,1\",1,0,3\n"));
        let back = FeatureMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values, fm.values);
        assert_eq!(back.row_ids, fm.row_ids);

        assert!(FeatureMatrix::read_csv("id,c1\na,1\n".as_bytes()).is_err());
        assert!(FeatureMatrix::read_csv("id,c0\na,zz\n".as_bytes()).is_err());
        assert!(FeatureMatrix::read_csv("id,c0\na,1,2\n".as_bytes()).is_err());
    }
}
