use super::model::{self, accumulate_outer, check_shapes, scale};
use super::{NormMode, TraceRecord, TrainConfig, TrainError, TrainingTrace};
use crate::Matrix;

/// Current weights plus the two most recent recorded iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub weights: Matrix,
    /// `W_{t−1}`.
    pub prev: Option<Matrix>,
    /// `W_{t−2}`; only present when `prev` is.
    pub prev2: Option<Matrix>,
    /// Number of completed updates.
    pub iteration: usize,
}

impl ModelState {
    pub fn new(weights: Matrix) -> Self {
        Self {
            weights,
            prev: None,
            prev2: None,
            iteration: 0,
        }
    }

    fn history(&self) -> Option<(&Matrix, &Matrix)> {
        self.prev.as_ref().zip(self.prev2.as_ref())
    }

    /// Applies one update with `grad` and shifts the history window.
    pub fn step(
        &mut self,
        grad: &Matrix,
        alpha: f64,
        step: f64,
    ) -> Result<UpdateBranch, TrainError> {
        let history = self.history();
        let branch = if history.is_some() {
            UpdateBranch::Anderson
        } else {
            UpdateBranch::Gradient
        };
        let next = model::aa_update(&self.weights, grad, history, alpha, step)?;
        let current = std::mem::replace(&mut self.weights, next);
        self.prev2 = self.prev.take();
        self.prev = Some(current);
        self.iteration += 1;
        Ok(branch)
    }
}

/// Which update rule an iteration used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateBranch {
    Gradient,
    Anderson,
}

/// Instrumentation hook, called once per completed iteration.
pub trait TrainObserver {
    fn on_iteration(&mut self, _record: &TraceRecord, _branch: UpdateBranch) {}
}

impl TrainObserver for () {}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub state: ModelState,
    pub trace: TrainingTrace,
    /// Iterations that used the history term.
    pub anderson_steps: usize,
    /// Paper-sum samples whose score sum fell below epsilon (summed over
    /// iterations); each was replaced by the uniform distribution.
    pub degenerate_samples: usize,
}

pub(crate) fn validate_inputs(x: &Matrix, y: &Matrix) -> Result<(), TrainError> {
    if x.rows() == 0 {
        return Err(TrainError::Empty);
    }
    if x.rows() != y.rows() {
        return Err(TrainError::DimensionMismatch {
            op: "train",
            expected: x.rows(),
            got: y.rows(),
        });
    }
    if y.cols() < 2 {
        return Err(TrainError::TooFewClasses(y.cols()));
    }
    for (row, yi) in y.row_iter().enumerate() {
        let ones = yi.iter().filter(|&&v| v == 1.0).count();
        let zeros = yi.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || ones + zeros != yi.len() {
            return Err(TrainError::NotOneHot { row });
        }
    }
    if !x.is_finite() {
        return Err(TrainError::NonFiniteInput);
    }
    Ok(())
}

struct Evaluation {
    grad: Matrix,
    mean_loss: f64,
    accuracy: f64,
    degenerate: usize,
}

/// Loss, accuracy and averaged ascent direction at `w`. Degenerate paper-sum
/// samples fall back to the uniform distribution.
fn evaluate(
    x: &Matrix,
    y: &Matrix,
    w: &Matrix,
    norm: NormMode,
    epsilon: f64,
) -> Result<Evaluation, TrainError> {
    let classes = w.rows();
    let uniform = vec![1.0 / classes as f64; classes];
    let mut grad = Matrix::zeros(classes, w.cols());
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    let mut degenerate = 0usize;
    for (xi, yi) in x.row_iter().zip(y.row_iter()) {
        let scores = model::predict_scores(w, xi)?;
        let p = match model::normalize_prediction(&scores, norm, epsilon) {
            Ok(p) => p,
            Err(TrainError::DegenerateSum { .. }) => {
                degenerate += 1;
                uniform.clone()
            }
            Err(e) => return Err(e),
        };
        total_loss += model::cross_entropy(yi, &p, epsilon);
        if model::argmax(&p) == model::argmax(yi) {
            correct += 1;
        }
        accumulate_outer(&mut grad, yi, &p, xi);
    }
    let n = x.rows();
    scale(&mut grad, n);
    Ok(Evaluation {
        grad,
        mean_loss: total_loss / n as f64,
        accuracy: correct as f64 / n as f64,
        degenerate,
    })
}

/// Trains from `init_weights(C, d, cfg.seed)` for `cfg.iters` iterations.
pub fn train(x: &Matrix, y: &Matrix, cfg: &TrainConfig) -> Result<TrainRun, TrainError> {
    train_observed(x, y, cfg, &mut ())
}

pub fn train_observed<O: TrainObserver + ?Sized>(
    x: &Matrix,
    y: &Matrix,
    cfg: &TrainConfig,
    observer: &mut O,
) -> Result<TrainRun, TrainError> {
    cfg.validate()?;
    validate_inputs(x, y)?;
    let w0 = model::init_weights(y.cols(), x.cols(), cfg.seed);
    check_shapes(x, y, &w0)?;

    let mut state = ModelState::new(w0);
    let mut trace = TrainingTrace {
        records: Vec::with_capacity(cfg.iters),
    };
    let mut anderson_steps = 0;
    let mut degenerate_samples = 0;

    for iteration in 1..=cfg.iters {
        let eval = evaluate(x, y, &state.weights, cfg.norm, cfg.epsilon)?;
        if !eval.mean_loss.is_finite() {
            return Err(TrainError::NonFiniteWeights {
                iteration,
                partial: trace,
            });
        }
        degenerate_samples += eval.degenerate;
        let record = TraceRecord {
            iteration,
            mean_loss: eval.mean_loss,
            accuracy: eval.accuracy,
        };
        trace.records.push(record);

        let branch = match state.step(&eval.grad, cfg.alpha, cfg.step) {
            Ok(b) => b,
            Err(TrainError::NonFiniteUpdate) => {
                return Err(TrainError::NonFiniteWeights {
                    iteration,
                    partial: trace,
                })
            }
            Err(e) => return Err(e),
        };
        if branch == UpdateBranch::Anderson {
            anderson_steps += 1;
        }
        observer.on_iteration(&record, branch);
    }

    Ok(TrainRun {
        state,
        trace,
        anderson_steps,
        degenerate_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::init_weights;

    struct Counter(usize, usize);

    impl TrainObserver for Counter {
        fn on_iteration(&mut self, _r: &TraceRecord, b: UpdateBranch) {
            match b {
                UpdateBranch::Anderson => self.0 += 1,
                UpdateBranch::Gradient => self.1 += 1,
            }
        }
    }

    fn toy() -> (Matrix, Matrix) {
        let x = Matrix::from_rows(&[
            [1.0, 0.0, 0.5],
            [0.9, 0.1, 0.4],
            [0.0, 1.0, 0.3],
            [0.1, 0.8, 0.6],
        ])
        .unwrap();
        let y = Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]).unwrap();
        (x, y)
    }

    #[test]
    fn anderson_branch_count() {
        let (x, y) = toy();
        for iters in [1, 2, 3, 10] {
            let mut c = Counter(0, 0);
            let cfg = TrainConfig {
                alpha: 0.5,
                iters,
                ..Default::default()
            };
            let run = train_observed(&x, &y, &cfg, &mut c).unwrap();
            assert_eq!(c.0, iters.saturating_sub(2));
            assert_eq!(c.1, iters.min(2));
            assert_eq!(run.anderson_steps, c.0);
            assert_eq!(run.trace.len(), iters);
            let its: Vec<usize> = run.trace.records.iter().map(|r| r.iteration).collect();
            assert_eq!(its, (1..=iters).collect::<Vec<_>>());
        }
    }

    #[test]
    fn single_iteration_is_plain_step() {
        let (x, y) = toy();
        let cfg = TrainConfig {
            alpha: 0.7,
            iters: 1,
            seed: 4,
            ..Default::default()
        };
        let run = train(&x, &y, &cfg).unwrap();
        let w0 = init_weights(2, 3, 4);
        let g = model::batch_gradient(&x, &y, &w0, NormMode::Softmax, 1e-10).unwrap();
        let expect = model::aa_update(&w0, &g, None, 0.0, 1.0).unwrap();
        assert_eq!(run.state.weights, expect);
        assert_eq!(run.state.prev.as_ref(), Some(&w0));
        assert!(run.state.prev2.is_none());
    }

    #[test]
    fn history_difference_lags_one_iterate() {
        // the third update uses W_2 − W_1, not W_3 − W_2
        let (x, y) = toy();
        let cfg = TrainConfig {
            alpha: 0.5,
            iters: 3,
            seed: 1,
            ..Default::default()
        };
        let run = train(&x, &y, &cfg).unwrap();
        let mut w = init_weights(2, 3, 1);
        let mut hist = Vec::new();
        for _ in 0..2 {
            let g = model::batch_gradient(&x, &y, &w, NormMode::Softmax, 1e-10).unwrap();
            hist.push(w.clone());
            w = model::aa_update(&w, &g, None, 0.0, 1.0).unwrap();
        }
        let g = model::batch_gradient(&x, &y, &w, NormMode::Softmax, 1e-10).unwrap();
        let w3 = model::aa_update(&w, &g, Some((&hist[1], &hist[0])), 0.5, 1.0).unwrap();
        assert_eq!(run.state.weights, w3);
    }

    #[test]
    fn deterministic() {
        let (x, y) = toy();
        let cfg = TrainConfig {
            alpha: 0.3,
            iters: 25,
            seed: 11,
            ..Default::default()
        };
        let a = train(&x, &y, &cfg).unwrap();
        let b = train(&x, &y, &cfg).unwrap();
        assert!(a.trace.bitwise_eq(&b.trace));
        assert_eq!(a.state, b.state);
    }

    #[test]
    fn softmax_loss_nonnegative_and_decreasing_on_separable_toy() {
        let (x, y) = toy();
        let cfg = TrainConfig {
            alpha: 0.0,
            iters: 200,
            seed: 2,
            ..Default::default()
        };
        let run = train(&x, &y, &cfg).unwrap();
        let floor = -(1.0f64 + 1e-10).ln();
        assert!(run.trace.records.iter().all(|r| r.mean_loss >= floor));
        assert!(run.trace.final_loss().unwrap() < run.trace.records[0].mean_loss);
        assert_eq!(run.trace.records.last().unwrap().accuracy, 1.0);
    }

    #[test]
    fn paper_sum_degenerate_samples_fall_back() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let cfg = TrainConfig {
            norm: NormMode::PaperSum,
            iters: 3,
            ..Default::default()
        };
        let run = train(&x, &y, &cfg).unwrap();
        // the all-zero row always has zero score sum
        assert!(run.degenerate_samples >= 3);
        assert_eq!(run.trace.len(), 3);
    }

    #[test]
    fn divergence_keeps_partial_trace() {
        let x = Matrix::from_rows(&[[1e300, 0.0], [0.0, 1e300]]).unwrap();
        let y = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let cfg = TrainConfig {
            alpha: 1.0,
            iters: 50,
            step: 1e8,
            ..Default::default()
        };
        match train(&x, &y, &cfg) {
            Err(TrainError::NonFiniteWeights { iteration, partial }) => {
                assert!(iteration >= 1);
                assert!(partial.len() == iteration || partial.len() + 1 == iteration);
                assert!(partial.records.iter().all(|r| r.mean_loss.is_finite()));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn input_validation() {
        let (x, y) = toy();
        let bad_alpha = TrainConfig {
            alpha: 1.5,
            ..Default::default()
        };
        assert!(matches!(
            train(&x, &y, &bad_alpha),
            Err(TrainError::InvalidConfig(_))
        ));
        let zero_iters = TrainConfig {
            iters: 0,
            ..Default::default()
        };
        assert!(train(&x, &y, &zero_iters).is_err());
        let one_class = Matrix::from_rows(&[[1.0], [1.0], [1.0], [1.0]]).unwrap();
        assert!(matches!(
            train(&x, &one_class, &TrainConfig::default()),
            Err(TrainError::TooFewClasses(1))
        ));
        let soft = Matrix::from_rows(&[[0.5, 0.5], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            train(&x, &soft, &TrainConfig::default()),
            Err(TrainError::NotOneHot { row: 0 })
        ));
        assert!(train(
            &Matrix::zeros(0, 3),
            &Matrix::zeros(0, 2),
            &TrainConfig::default()
        )
        .is_err());
    }
}
