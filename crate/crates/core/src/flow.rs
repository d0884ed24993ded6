//! The objective `f_A(X) = 1/2 |X - A|^2`, its gradient, and the
//! quasi-projected negative gradient field
//!
//! ```text
//! F(X) = (A - X) X^T X + X X^T (A - X) = L_X L_X^* (A - X)
//! ```
//!
//! together with the factor fields `G' = (A - X) X^T G` and
//! `H' = -X^T (A - X) H`, which certify that `X(t) = G(t) K H(t)^{-1}` stays
//! in the orbit of its initial value `K`.

use crate::error::{same_shape, Error, Result};
use crate::frobenius::{inner_unchecked, pair_inner};
use crate::matrix::DenseMatrix;
use crate::rank_manifold::{quasi_project_unchecked, tangent_adjoint_unchecked};
use crate::svd::numerical_rank;

/// Relative singular-value threshold used to decide whether the target has
/// rank greater than `k`.
const TARGET_RANK_TOL: f64 = 1e-12;

/// The approximation problem: target matrix `A` and desired rank `k`.
#[derive(Clone, Debug)]
pub struct FlowProblem {
    target: DenseMatrix,
    rank: usize,
    nondegenerate: bool,
}

impl FlowProblem {
    /// Validates `1 <= rank <= min(m, n)`. A target whose own rank does not
    /// exceed `rank` is accepted but flagged by [`FlowProblem::is_nondegenerate`].
    pub fn new(target: DenseMatrix, rank: usize) -> Result<Self> {
        let (m, n) = target.shape();
        if rank == 0 || rank > m.min(n) {
            return Err(Error::Domain(format!(
                "rank must satisfy 1 <= k <= min({m}, {n}), got {rank}"
            )));
        }
        let nondegenerate = numerical_rank(&target, TARGET_RANK_TOL) > rank;
        if !nondegenerate {
            log::warn!("target has rank <= {rank}; the approximation problem is trivial");
        }
        Ok(Self {
            target,
            rank,
            nondegenerate,
        })
    }

    pub fn target(&self) -> &DenseMatrix {
        &self.target
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn shape(&self) -> (usize, usize) {
        self.target.shape()
    }

    /// True when `rank(A) > k`.
    pub fn is_nondegenerate(&self) -> bool {
        self.nondegenerate
    }
}

/// The invertible factors `G` (m x m) and `H` (n x n) of `X = G K H^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub g: DenseMatrix,
    pub h: DenseMatrix,
}

impl FactorPair {
    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            g: DenseMatrix::identity(m),
            h: DenseMatrix::identity(n),
        }
    }
}

/// `f_A(X) = 1/2 <X - A, X - A>`.
pub fn objective(a: &DenseMatrix, x: &DenseMatrix) -> Result<f64> {
    same_shape("objective", a.shape(), x.shape())?;
    Ok(objective_unchecked(a, x))
}

pub(crate) fn objective_unchecked(a: &DenseMatrix, x: &DenseMatrix) -> f64 {
    let r = x - a;
    0.5 * inner_unchecked(&r, &r)
}

/// `grad f_A(X) = X - A`.
pub fn gradient(a: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    same_shape("gradient", a.shape(), x.shape())?;
    Ok(x - a)
}

/// `F(X) = (A - X) X^T X + X X^T (A - X)`.
pub fn vector_field(a: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    same_shape("vector field", a.shape(), x.shape())?;
    Ok(vector_field_unchecked(a, x))
}

pub(crate) fn vector_field_unchecked(a: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    quasi_project_unchecked(x, &(a - x))
}

/// Time derivative of `f_A` along the flow:
/// `-<L_X^*(X - A), L_X^*(X - A)>`, never positive.
pub fn lyapunov_rate(a: &DenseMatrix, x: &DenseMatrix) -> Result<f64> {
    same_shape("Lyapunov rate", a.shape(), x.shape())?;
    let pair = tangent_adjoint_unchecked(x, &(x - a));
    Ok(-pair_inner(&pair, &pair)?)
}

/// `G' = (A - X) X^T G`.
pub fn factor_field_g(a: &DenseMatrix, x: &DenseMatrix, g: &DenseMatrix) -> Result<DenseMatrix> {
    same_shape("factor field G", a.shape(), x.shape())?;
    same_shape("factor field G", g.shape(), (a.rows(), a.rows()))?;
    Ok(factor_field_g_unchecked(a, x, g))
}

pub(crate) fn factor_field_g_unchecked(
    a: &DenseMatrix,
    x: &DenseMatrix,
    g: &DenseMatrix,
) -> DenseMatrix {
    &(&(a - x) * &x.transpose()) * g
}

/// `H' = -X^T (A - X) H`.
pub fn factor_field_h(a: &DenseMatrix, x: &DenseMatrix, h: &DenseMatrix) -> Result<DenseMatrix> {
    same_shape("factor field H", a.shape(), x.shape())?;
    same_shape("factor field H", h.shape(), (a.cols(), a.cols()))?;
    Ok(factor_field_h_unchecked(a, x, h))
}

pub(crate) fn factor_field_h_unchecked(
    a: &DenseMatrix,
    x: &DenseMatrix,
    h: &DenseMatrix,
) -> DenseMatrix {
    -&(&(&x.transpose() * &(a - x)) * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::inner;
    use crate::random::{random_rank_k, seeded_rng, standard_normal};
    use crate::rank_manifold::{tangent_adjoint, tangent_map};

    fn diag43(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diag(4, 3, d)
    }

    #[test]
    fn problem_validation() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        assert!(FlowProblem::new(a.clone(), 0).is_err());
        assert!(FlowProblem::new(a.clone(), 4).is_err());
        assert!(FlowProblem::new(a.clone(), 2).unwrap().is_nondegenerate());
        assert!(!FlowProblem::new(a, 3).unwrap().is_nondegenerate());
    }

    #[test]
    fn objective_examples() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        assert_eq!(objective(&a, &a).unwrap(), 0.0);
        assert_eq!(objective(&a, &diag43(&[3.0, 2.0, 0.0])).unwrap(), 0.5);
        let x = standard_normal(4, 3, &mut seeded_rng(2));
        let zero = DenseMatrix::zeros(4, 3);
        let expected = 0.5 * x.norm().powi(2);
        assert!((objective(&zero, &x).unwrap() - expected).abs() <= 1e-14 * expected);
        assert!(objective(&a, &DenseMatrix::zeros(3, 4)).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = seeded_rng(4);
        let a = standard_normal(4, 3, &mut rng);
        assert_eq!(gradient(&a, &a).unwrap(), DenseMatrix::zeros(4, 3));
        assert_eq!(gradient(&DenseMatrix::zeros(4, 3), &a).unwrap(), a);
        for _ in 0..10 {
            let a = standard_normal(4, 3, &mut rng);
            let x = standard_normal(4, 3, &mut rng);
            let g = gradient(&a, &x).unwrap();
            let step = 1e-5;
            for i in 0..4 {
                for j in 0..3 {
                    let e = DenseMatrix::elementary(4, 3, i, j);
                    let mut plus = x.clone();
                    plus.axpy(step, &e);
                    let mut minus = x.clone();
                    minus.axpy(-step, &e);
                    let fd = (objective(&a, &plus).unwrap() - objective(&a, &minus).unwrap())
                        / (2.0 * step);
                    assert!((fd - g[(i, j)]).abs() <= 1e-6, "{fd} vs {}", g[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn vector_field_examples() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        assert_eq!(vector_field(&a, &a).unwrap(), DenseMatrix::zeros(4, 3));
        assert_eq!(
            vector_field(&a, &diag43(&[1.0, 0.0, 0.0])).unwrap(),
            diag43(&[4.0, 0.0, 0.0])
        );
        assert_eq!(
            vector_field(&a, &diag43(&[3.0, 2.0, 0.0])).unwrap(),
            DenseMatrix::zeros(4, 3)
        );
    }

    #[test]
    fn vector_field_is_quasi_projected_negative_gradient() {
        let mut rng = seeded_rng(8);
        for _ in 0..20 {
            let a = standard_normal(4, 3, &mut rng);
            let x = random_rank_k(4, 3, 2, &mut rng);
            let f = vector_field(&a, &x).unwrap();
            let composed = tangent_map(&x, &tangent_adjoint(&x, &(&a - &x)).unwrap()).unwrap();
            assert!((&f - &composed).norm() <= 1e-12 * f.norm().max(1.0));
        }
    }

    #[test]
    fn lyapunov_rate_examples() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        assert_eq!(lyapunov_rate(&a, &a).unwrap(), 0.0);
        assert_eq!(lyapunov_rate(&a, &diag43(&[3.0, 0.0, 1.0])).unwrap(), 0.0);

        let mut rng = seeded_rng(12);
        for _ in 0..20 {
            let a = standard_normal(4, 3, &mut rng);
            let x = random_rank_k(4, 3, 2, &mut rng);
            let rate = lyapunov_rate(&a, &x).unwrap();
            let f = vector_field(&a, &x).unwrap();
            let identity = -inner(&(&a - &x), &f).unwrap();
            assert!(rate < 0.0);
            assert!((rate - identity).abs() <= 1e-12 * rate.abs());
        }
    }

    #[test]
    fn factor_field_examples() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        let x = diag43(&[1.0, 0.0, 0.0]);
        let g = factor_field_g(&a, &x, &DenseMatrix::identity(4)).unwrap();
        assert_eq!(g, DenseMatrix::from_diag(4, 4, &[2.0, 0.0, 0.0, 0.0]));
        let h = factor_field_h(&a, &x, &DenseMatrix::identity(3)).unwrap();
        assert_eq!(h, DenseMatrix::from_diag(3, 3, &[-2.0, 0.0, 0.0]));

        assert_eq!(
            factor_field_g(&a, &a, &DenseMatrix::identity(4)).unwrap(),
            DenseMatrix::zeros(4, 4)
        );
        assert_eq!(
            factor_field_h(&a, &a, &DenseMatrix::identity(3)).unwrap(),
            DenseMatrix::zeros(3, 3)
        );

        let mut rng = seeded_rng(13);
        let gm = standard_normal(4, 4, &mut rng);
        let hm = standard_normal(3, 3, &mut rng);
        let g1 = factor_field_g(&a, &x, &gm).unwrap();
        let g2 = factor_field_g(&a, &x, &gm.scaled(2.0)).unwrap();
        assert!((&g2 - &g1.scaled(2.0)).max_abs() < 1e-14);
        let h1 = factor_field_h(&a, &x, &hm).unwrap();
        let h2 = factor_field_h(&a, &x, &hm.scaled(2.0)).unwrap();
        assert!((&h2 - &h1.scaled(2.0)).max_abs() < 1e-14);

        assert!(factor_field_g(&a, &x, &DenseMatrix::identity(3)).is_err());
        assert!(factor_field_h(&a, &x, &DenseMatrix::identity(4)).is_err());
    }

    #[test]
    fn small_step_along_field_decreases_objective() {
        let mut rng = seeded_rng(14);
        for _ in 0..20 {
            let a = standard_normal(5, 4, &mut rng);
            let x = random_rank_k(5, 4, 2, &mut rng);
            let f = vector_field(&a, &x).unwrap();
            let mut moved = x.clone();
            moved.axpy(1e-6 / (1.0 + f.norm()), &f);
            assert!(objective(&a, &moved).unwrap() < objective(&a, &x).unwrap());
        }
    }
}
