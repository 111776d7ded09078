use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{NormMode, TrainError};
use crate::Matrix;

/// C×d matrix of i.i.d. standard normal draws, filled row by row from a
/// ChaCha8 stream seeded with `seed` (ziggurat sampling).
pub fn init_weights(classes: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..classes * dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Matrix::from_row_major(classes, dim, data).expect("sized by construction")
}

/// `W·x`.
pub fn predict_scores(w: &Matrix, x: &[f64]) -> Result<Vec<f64>, TrainError> {
    if w.cols() != x.len() {
        return Err(TrainError::DimensionMismatch {
            op: "predict_scores",
            expected: w.cols(),
            got: x.len(),
        });
    }
    Ok(w.row_iter()
        .map(|row| {
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            acc
        })
        .collect())
}

pub fn normalize_prediction(
    scores: &[f64],
    mode: NormMode,
    epsilon: f64,
) -> Result<Vec<f64>, TrainError> {
    match mode {
        NormMode::PaperSum => {
            let mut sum = 0.0;
            for s in scores {
                sum += s;
            }
            if sum.is_nan() || sum.abs() < epsilon {
                return Err(TrainError::DegenerateSum { sample: None });
            }
            Ok(scores.iter().map(|s| s / sum).collect())
        }
        NormMode::Softmax => {
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let mut sum = 0.0;
            for e in &exps {
                sum += e;
            }
            Ok(exps.into_iter().map(|e| e / sum).collect())
        }
    }
}

/// `−Σ y·ln(max(p, 0) + ε)`. Negative when a sum-normalized true-class entry
/// exceeds 1.
pub fn cross_entropy(y: &[f64], p: &[f64], epsilon: f64) -> f64 {
    let mut acc = 0.0;
    for (yi, pi) in y.iter().zip(p) {
        acc += yi * (pi.max(0.0) + epsilon).ln();
    }
    -acc
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_shapes(x: &Matrix, y: &Matrix, w: &Matrix) -> Result<(), TrainError> {
    if x.rows() != y.rows() {
        return Err(TrainError::DimensionMismatch {
            op: "batch_gradient",
            expected: x.rows(),
            got: y.rows(),
        });
    }
    if w.rows() != y.cols() {
        return Err(TrainError::DimensionMismatch {
            op: "batch_gradient",
            expected: y.cols(),
            got: w.rows(),
        });
    }
    if w.cols() != x.cols() {
        return Err(TrainError::DimensionMismatch {
            op: "batch_gradient",
            expected: x.cols(),
            got: w.cols(),
        });
    }
    Ok(())
}

/// `G += (y − p)·xᵀ`
#[inline]
pub(crate) fn accumulate_outer(g: &mut Matrix, y: &[f64], p: &[f64], x: &[f64]) {
    for (c, (yc, pc)) in y.iter().zip(p).enumerate() {
        let r = yc - pc;
        for (gj, xj) in g.row_mut(c).iter_mut().zip(x) {
            *gj += r * xj;
        }
    }
}

#[inline]
pub(crate) fn scale(g: &mut Matrix, n: usize) {
    let n = n as f64;
    for v in g.as_mut_slice() {
        *v /= n;
    }
}

/// Averaged `(y − p)·xᵀ` over all samples, where `p` normalizes `W·x`.
///
/// This is the direction added to `W`; in softmax mode it equals the negative
/// gradient of the mean cross-entropy.
pub fn batch_gradient(
    x: &Matrix,
    y: &Matrix,
    w: &Matrix,
    mode: NormMode,
    epsilon: f64,
) -> Result<Matrix, TrainError> {
    check_shapes(x, y, w)?;
    if x.rows() == 0 {
        return Err(TrainError::Empty);
    }
    let mut g = Matrix::zeros(w.rows(), w.cols());
    for (i, (xi, yi)) in x.row_iter().zip(y.row_iter()).enumerate() {
        let scores = predict_scores(w, xi)?;
        let p = normalize_prediction(&scores, mode, epsilon).map_err(|e| match e {
            TrainError::DegenerateSum { .. } => TrainError::DegenerateSum { sample: Some(i) },
            other => other,
        })?;
        accumulate_outer(&mut g, yi, &p, xi);
    }
    scale(&mut g, x.rows());
    Ok(g)
}

/// One weight update.
///
/// With `history = Some((prev, prev2))` the result is
/// `W + α·(prev − prev2) + step·grad`; without history it is
/// `W + step·grad`.
pub fn aa_update(
    w: &Matrix,
    grad: &Matrix,
    history: Option<(&Matrix, &Matrix)>,
    alpha: f64,
    step: f64,
) -> Result<Matrix, TrainError> {
    let mismatch = |m: &Matrix| TrainError::DimensionMismatch {
        op: "aa_update",
        expected: w.rows() * w.cols(),
        got: m.rows() * m.cols(),
    };
    if grad.shape() != w.shape() {
        return Err(mismatch(grad));
    }
    let mut out = w.clone();
    match history {
        // α = 0 must reproduce the plain update bit for bit, so skip the term
        Some((prev, prev2)) if alpha != 0.0 => {
            if prev.shape() != w.shape() {
                return Err(mismatch(prev));
            }
            if prev2.shape() != w.shape() {
                return Err(mismatch(prev2));
            }
            for (((o, a), b), g) in out
                .as_mut_slice()
                .iter_mut()
                .zip(prev.as_slice())
                .zip(prev2.as_slice())
                .zip(grad.as_slice())
            {
                *o = *o + alpha * (a - b) + step * g;
            }
        }
        _ => {
            for (o, g) in out.as_mut_slice().iter_mut().zip(grad.as_slice()) {
                *o += step * g;
            }
        }
    }
    if !out.is_finite() {
        return Err(TrainError::NonFiniteUpdate);
    }
    Ok(out)
}

/// Fraction of rows where `argmax(p) == argmax(y)`.
pub fn accuracy(y: &Matrix, p: &Matrix) -> Result<f64, TrainError> {
    if y.shape() != p.shape() {
        return Err(TrainError::DimensionMismatch {
            op: "accuracy",
            expected: y.rows(),
            got: p.rows(),
        });
    }
    if y.rows() == 0 {
        return Ok(0.0);
    }
    let hits = y
        .row_iter()
        .zip(p.row_iter())
        .filter(|(a, b)| argmax(a) == argmax(b))
        .count();
    Ok(hits as f64 / y.rows() as f64)
}
