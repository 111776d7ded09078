//! Multiclass linear classifier trained with an averaged-gradient loop plus a
//! fixed-coefficient Anderson history term.
//!
//! # Model shape
//!
//! Weights are a C×d matrix `W` (one row per class) rather than a single
//! d-vector: the per-sample update `y − p` is a C-vector, so the contribution
//! to `W` is the outer product `(y − p)·xᵀ`. Per class this is exactly the
//! scalar rule `w_c += (y_c − p_c)·x`.
//!
//! # One iteration
//!
//! 1. For every sample: `scores = W·x`, `p = normalize(scores)`, loss
//!    `−Σ y·ln(max(p, 0) + ε)`, and the accumulated ascent direction
//!    `(y − p)·xᵀ`. Loss, accuracy and direction are averaged over samples.
//! 2. The pre-update `W` is pushed onto a two-slot history.
//! 3. If two earlier iterates `W_{t−1}`, `W_{t−2}` were already recorded the
//!    update is `W + α·(W_{t−1} − W_{t−2}) + step·grad`; otherwise it is
//!    `W + step·grad`. The history term is therefore active from the third
//!    iteration on. `step` defaults to 1, which is the unit-step rule; other
//!    values are an extension for stability experiments.
//!
//! Summation order is fixed (samples, then classes, then features, all
//! ascending) so equal inputs give bitwise-equal traces.

mod io;
mod model;
mod sweep;
mod train;

pub use io::{
    read_model, read_trace_csv, write_model, write_sweep_csv, write_trace_csv, FormatError,
    SavedModel,
};
pub use model::{
    aa_update, accuracy, argmax, batch_gradient, cross_entropy, init_weights, normalize_prediction,
    predict_scores,
};
pub use sweep::{alpha_sweep, default_grid, AlphaSweepResult, SweepEntry};
pub use train::{train, train_observed, ModelState, TrainObserver, TrainRun, UpdateBranch};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// How raw scores become a prediction vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormMode {
    /// `scores / sum(scores)`; entries may be negative or exceed 1.
    PaperSum,
    /// `exp(scores − max) / Σ exp(scores − max)`.
    #[default]
    Softmax,
}

impl NormMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormMode::PaperSum => "paper-sum",
            NormMode::Softmax => "softmax",
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-sum" | "paper_sum" | "sum" => Ok(NormMode::PaperSum),
            "softmax" => Ok(NormMode::Softmax),
            _ => Err(format!(
                "unknown normalization {s:?} (expected paper-sum or softmax)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Weight of the iterate difference, in `[0, 1]`; 0 disables it.
    pub alpha: f64,
    pub iters: usize,
    pub seed: u64,
    pub norm: NormMode,
    /// Guard added inside the logarithm and used as the degenerate-sum cutoff.
    pub epsilon: f64,
    /// Multiplier on the averaged gradient. 1.0 is the unit-step rule.
    pub step: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            iters: 300,
            seed: 0,
            norm: NormMode::Softmax,
            epsilon: 1e-10,
            step: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(TrainError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.iters == 0 {
            return Err(TrainError::InvalidConfig("iters must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub mean_loss: f64,
    pub accuracy: f64,
}

/// Per-iteration training loss and accuracy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub records: Vec<TraceRecord>,
}

impl TrainingTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.mean_loss)
    }

    /// First iteration whose mean loss is at or below `threshold`.
    pub fn iterations_to(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.mean_loss <= threshold)
            .map(|r| r.iteration)
    }

    /// True when both traces hold the same bits in every field.
    pub fn bitwise_eq(&self, other: &TrainingTrace) -> bool {
        self.len() == other.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.iteration == b.iteration
                    && a.mean_loss.to_bits() == b.mean_loss.to_bits()
                    && a.accuracy.to_bits() == b.accuracy.to_bits()
            })
    }
}

#[derive(Debug, Clone, Error)]
pub enum TrainError {
    #[error("{op}: dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("normalize_prediction: |sum(scores)| below epsilon{}", sample.map(|s| format!(" at sample {s}")).unwrap_or_default())]
    DegenerateSum { sample: Option<usize> },
    #[error("aa_update: update produced non-finite weights")]
    NonFiniteUpdate,
    #[error("train: weights diverged to non-finite values at iteration {iteration} ({} iterations recorded)", partial.len())]
    NonFiniteWeights {
        iteration: usize,
        partial: TrainingTrace,
    },
    #[error("train: invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("train: at least two classes are required, got {0}")]
    TooFewClasses(usize),
    #[error("train: no samples")]
    Empty,
    #[error("train: label row {row} is not one-hot")]
    NotOneHot { row: usize },
    #[error("train: feature matrix contains non-finite values")]
    NonFiniteInput,
}
