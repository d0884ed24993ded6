//! Frobenius inner-product arithmetic.

use crate::error::{same_shape, Result};
use crate::matrix::DenseMatrix;
use crate::rank_manifold::TangentPair;

/// `<X, Y> = trace(X Y^T) = sum_ij X_ij Y_ij`.
pub fn inner(x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    same_shape("inner product", x.shape(), y.shape())?;
    Ok(inner_unchecked(x, y))
}

pub(crate) fn inner_unchecked(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a * b)
        .sum()
}

pub fn frob_norm(x: &DenseMatrix) -> f64 {
    x.norm()
}

/// Inner product on pairs: `<(X1, Y1), (X2, Y2)> = <X1, X2> + <Y1, Y2>`.
pub fn pair_inner(p: &TangentPair, q: &TangentPair) -> Result<f64> {
    Ok(inner(&p.left, &q.left)? + inner(&p.right, &q.right)?)
}
