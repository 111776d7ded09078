use rayon::prelude::*;

use super::train::{train, validate_inputs};
use super::{TrainConfig, TrainError, TrainingTrace};
use crate::Matrix;

/// `0.0, 0.1, …, 1.0`.
pub fn default_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub alpha: f64,
    /// Final mean loss; `None` when training failed.
    pub final_loss: Option<f64>,
    pub iterations_to_threshold: Option<usize>,
    /// Full trace, or the partial trace up to the failure.
    pub trace: TrainingTrace,
    pub failure: Option<String>,
}

impl SweepEntry {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct AlphaSweepResult {
    /// One entry per distinct α, ascending.
    pub entries: Vec<SweepEntry>,
    /// α with the lowest final loss (smallest α on ties); `None` if every
    /// run failed.
    pub best_alpha: Option<f64>,
    pub loss_threshold: f64,
}

impl AlphaSweepResult {
    pub fn entry(&self, alpha: f64) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.alpha == alpha)
    }

    pub fn best(&self) -> Option<&SweepEntry> {
        self.best_alpha.and_then(|a| self.entry(a))
    }

    /// Recomputes `iterations_to_threshold` for every successful run.
    pub fn set_threshold(&mut self, loss_threshold: f64) {
        self.loss_threshold = loss_threshold;
        for e in self.entries.iter_mut().filter(|e| e.failure.is_none()) {
            e.iterations_to_threshold = e.trace.iterations_to(loss_threshold);
        }
    }
}

/// Full-batch training once per α, all from the same seed, selecting α by
/// final training loss. Runs are independent and execute in parallel; a
/// failing α is recorded, not propagated.
pub fn alpha_sweep(
    x: &Matrix,
    y: &Matrix,
    base: &TrainConfig,
    grid: &[f64],
    loss_threshold: f64,
) -> Result<AlphaSweepResult, TrainError> {
    if grid.is_empty() {
        return Err(TrainError::InvalidConfig("alpha grid is empty".into()));
    }
    let mut alphas = grid.to_vec();
    for &a in &alphas {
        TrainConfig { alpha: a, ..*base }.validate()?;
    }
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    validate_inputs(x, y)?;

    let entries: Vec<SweepEntry> = alphas
        .par_iter()
        .map(|&alpha| {
            let cfg = TrainConfig { alpha, ..*base };
            match train(x, y, &cfg) {
                Ok(run) => SweepEntry {
                    alpha,
                    final_loss: run.trace.final_loss(),
                    iterations_to_threshold: run.trace.iterations_to(loss_threshold),
                    trace: run.trace,
                    failure: None,
                },
                Err(e) => {
                    let failure = Some(e.to_string());
                    let trace = match e {
                        TrainError::NonFiniteWeights { partial, .. } => partial,
                        _ => TrainingTrace::default(),
                    };
                    SweepEntry {
                        alpha,
                        final_loss: None,
                        iterations_to_threshold: None,
                        trace,
                        failure,
                    }
                }
            }
        })
        .collect();

    let mut best: Option<(f64, f64)> = None;
    for e in &entries {
        if let Some(loss) = e.final_loss {
            // ascending α, so strict < keeps the smallest α on ties
            if best.is_none_or(|(_, b)| loss < b) {
                best = Some((e.alpha, loss));
            }
        }
    }

    Ok(AlphaSweepResult {
        entries,
        best_alpha: best.map(|(a, _)| a),
        loss_threshold,
    })
}
