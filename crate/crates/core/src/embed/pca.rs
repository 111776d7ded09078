//! Principal component analysis on centered data.
//!
//! When there are fewer rows than columns the eigenproblem is solved on the
//! n×n Gram matrix and mapped back to feature space, which keeps wide spectra
//! (|Σ|^k columns) tractable. Components are re-orthonormalized afterwards and
//! directions with no variance are completed from the standard basis.

use nalgebra::{DMatrix, SymmetricEigen};

use super::EmbedError;
use crate::Matrix;

/// Fitted projection: column means, d×r orthonormal components and the
/// variance captured along each component.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// d×r, one principal direction per column.
    pub components: Matrix,
    /// Sample variance (n − 1 denominator) along each component, nonincreasing.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn num_components(&self) -> usize {
        self.components.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    /// Maps projected rows back into feature space.
    pub fn reconstruct(&self, projected: &Matrix) -> Result<Matrix, EmbedError> {
        if projected.cols() != self.num_components() {
            return Err(EmbedError::DimensionMismatch {
                expected: self.num_components(),
                got: projected.cols(),
            });
        }
        let p = to_dmatrix(projected);
        let c = to_dmatrix(&self.components);
        let mut out = p * c.transpose();
        for mut row in out.row_iter_mut() {
            for (v, m) in row.iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(from_dmatrix(&out))
    }
}

fn to_dmatrix(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn from_dmatrix(m: &DMatrix<f64>) -> Matrix {
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

fn centered(x: &Matrix) -> (Vec<f64>, DMatrix<f64>) {
    let (n, d) = x.shape();
    let mut mean = vec![0.0; d];
    for row in x.row_iter() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let xc = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    (mean, xc)
}

/// Eigenpairs sorted by nonincreasing eigenvalue (ties keep solver order).
fn sorted_eigen(sym: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    (values, vectors)
}

/// Modified Gram–Schmidt against the columns already accepted. Returns false
/// if `v` is (numerically) in their span.
fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let norm0 = dot(v, v).sqrt();
    if norm0 == 0.0 {
        return false;
    }
    // two passes keep the loss of orthogonality at round-off level
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
    }
    let norm = dot(v, v).sqrt();
    if norm <= 1e-10 * norm0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Flips `v` so its largest-magnitude entry (first one on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Fits `r` principal components. Requires at least two rows and
/// `1 <= r <= min(n, d)`. Rank-deficient input is fine: the surplus
/// components carry zero variance.
pub fn fit_pca(x: &Matrix, r: usize) -> Result<PcaModel, EmbedError> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(EmbedError::TooFewRows { rows: n });
    }
    let max_r = n.min(d);
    if r == 0 || r > max_r {
        return Err(EmbedError::InvalidR { r, max: max_r });
    }
    if !x.is_finite() {
        return Err(EmbedError::NonFinite);
    }
    let (mean, xc) = centered(x);
    let denom = (n - 1) as f64;

    // candidate directions in feature space, paired with their variance
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::with_capacity(r);
    if d <= n {
        let cov = xc.transpose() * &xc / denom;
        let (values, vectors) = sorted_eigen(cov);
        for (j, &lambda) in values.iter().take(r).enumerate() {
            candidates.push((lambda, vectors.column(j).iter().copied().collect()));
        }
    } else {
        let gram = &xc * xc.transpose() / denom;
        let (values, vectors) = sorted_eigen(gram);
        let top = values.first().copied().unwrap_or(0.0).max(0.0);
        let floor = top * 1e-12;
        let mapped = xc.tr_mul(&vectors.columns(0, r));
        for (j, &lambda) in values.iter().take(r).enumerate() {
            if lambda > floor && lambda > 0.0 {
                // ||Xcᵀu||² = (n − 1)·λ for a unit eigenvector u of the Gram matrix
                let scale = 1.0 / (lambda * denom).sqrt();
                candidates.push((lambda, mapped.column(j).iter().map(|x| x * scale).collect()));
            } else {
                candidates.push((0.0, vec![0.0; d]));
            }
        }
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut variance = Vec::with_capacity(r);
    let mut next_unit = 0usize;
    for (lambda, mut v) in candidates {
        let accepted = orthonormalize_against(&mut v, &basis);
        if !accepted {
            // null-space direction: complete from the standard basis
            loop {
                assert!(next_unit < d, "r <= d guarantees a completion exists");
                let mut e = vec![0.0; d];
                e[next_unit] = 1.0;
                next_unit += 1;
                if orthonormalize_against(&mut e, &basis) {
                    v = e;
                    break;
                }
            }
        }
        fix_sign(&mut v);
        basis.push(v);
        variance.push(if accepted { lambda.max(0.0) } else { 0.0 });
    }
    // clamping and completion can only break monotonicity by round-off
    for i in 1..variance.len() {
        if variance[i] > variance[i - 1] {
            variance[i] = variance[i - 1];
        }
    }

    let mut components = Matrix::zeros(d, r);
    for (j, v) in basis.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            components[(i, j)] = *x;
        }
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: variance,
    })
}

/// Projects rows onto the fitted components: `(row − mean) · components`.
pub fn apply_pca(model: &PcaModel, x: &Matrix) -> Result<Matrix, EmbedError> {
    if x.cols() != model.input_dim() {
        return Err(EmbedError::DimensionMismatch {
            expected: model.input_dim(),
            got: x.cols(),
        });
    }
    let xc = DMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - model.mean[j]);
    let c = to_dmatrix(&model.components);
    Ok(from_dmatrix(&(xc * c)))
}
