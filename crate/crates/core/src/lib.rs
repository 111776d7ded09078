//! Sequence embeddings and an Anderson-accelerated multiclass linear classifier.
//!
//! The crate is split along the pipeline:
//!
//! * [`seq_io`] parses FASTA and label tables into a [`seq_io::Dataset`] and
//!   generates seeded synthetic datasets.
//! * [`embed`] turns sequences into fixed-length count spectra (contiguous
//!   k-mers, minimizers, spaced k-mers) with optional PCA reduction.
//! * [`trainer`] fits a C×d linear model with the averaged-gradient loop and
//!   its fixed-coefficient Anderson history term, and sweeps the coefficient.
//!
//! Dense row-major storage ([`Matrix`]) is shared by all three.

pub mod embed;
pub mod matrix;
pub mod seq_io;
pub mod trainer;

pub use matrix::Matrix;
