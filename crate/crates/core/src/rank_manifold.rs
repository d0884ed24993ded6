//! Geometry of the orbit of rank-k matrices under `(G, H, X) -> G X H^{-1}`.
//!
//! At a point `B` (m x n) the tangent space is the range of the map
//! `L_B(X, Y) = X B + B Y` with `X` m x m and `Y` n x n. Its Frobenius adjoint
//! is `L_B^*(Z) = (Z B^T, B^T Z)` and the composition `L_B L_B^*` is the
//! quasi-projection used to build the flow's vector field.

use serde::{Deserialize, Serialize};

use crate::error::{same_shape, Error, Result};
use crate::matrix::DenseMatrix;

/// A point `(X, Y)` in the domain of the tangent map: `left` is m x m and
/// `right` is n x n.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentPair {
    pub left: DenseMatrix,
    pub right: DenseMatrix,
}

impl TangentPair {
    pub fn new(left: DenseMatrix, right: DenseMatrix) -> Self {
        Self { left, right }
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self::new(DenseMatrix::zeros(m, m), DenseMatrix::zeros(n, n))
    }
}

/// One-based position `(p, q)` of an elementary matrix `E^{pq}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    pub p: usize,
    pub q: usize,
}

impl BasisIndex {
    pub fn new(p: usize, q: usize) -> Self {
        assert!(p >= 1 && q >= 1, "basis indices are one-based");
        Self { p, q }
    }

    /// The elementary `rows x cols` matrix with a one at this position.
    pub fn matrix(&self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::elementary(rows, cols, self.p - 1, self.q - 1)
    }
}

fn check_pair(b: &DenseMatrix, pair: &TangentPair) -> Result<()> {
    let (m, n) = b.shape();
    same_shape("tangent map (left factor)", pair.left.shape(), (m, m))?;
    same_shape("tangent map (right factor)", pair.right.shape(), (n, n))
}

/// `L_B(X, Y) = X B + B Y`.
pub fn tangent_map(b: &DenseMatrix, pair: &TangentPair) -> Result<DenseMatrix> {
    check_pair(b, pair)?;
    Ok(&(&pair.left * b) + &(b * &pair.right))
}

/// `L_B^*(Z) = (Z B^T, B^T Z)`.
pub fn tangent_adjoint(b: &DenseMatrix, z: &DenseMatrix) -> Result<TangentPair> {
    same_shape("tangent adjoint", b.shape(), z.shape())?;
    Ok(tangent_adjoint_unchecked(b, z))
}

pub(crate) fn tangent_adjoint_unchecked(b: &DenseMatrix, z: &DenseMatrix) -> TangentPair {
    let bt = b.transpose();
    TangentPair::new(z * &bt, &bt * z)
}

/// `L_B L_B^* (Z) = Z B^T B + B B^T Z`.
pub fn quasi_project(b: &DenseMatrix, z: &DenseMatrix) -> Result<DenseMatrix> {
    same_shape("quasi-projection", b.shape(), z.shape())?;
    Ok(quasi_project_unchecked(b, z))
}

pub(crate) fn quasi_project_unchecked(b: &DenseMatrix, z: &DenseMatrix) -> DenseMatrix {
    let bt = b.transpose();
    let mut out = &(z * &bt) * b;
    out += &(&(b * &bt) * z);
    out
}

/// Dimension of the tangent space to the rank-`k` orbit in `m x n` matrices:
/// `k^2 + k(m-k) + k(n-k)`.
pub fn tangent_dim(m: usize, n: usize, k: usize) -> Result<usize> {
    if k > m.min(n) {
        return Err(Error::Domain(format!("rank {k} exceeds min({m}, {n})")));
    }
    Ok(k * k + k * (m - k) + k * (n - k))
}

/// Positions `(p, q)` spanning the tangent space at the diagonal point
/// `Diag(e)` in `m x n` matrices, where `n = e.len()`: those with
/// `e_p != 0` or `e_q != 0` (with `e_p = 0` for `p > n`). Row-major order.
pub fn tangent_basis_at_diagonal(e: &[f64], m: usize) -> Vec<BasisIndex> {
    let n = e.len();
    let nonzero = |i: usize| i <= n && e[i - 1] != 0.0;
    let mut out = Vec::new();
    for p in 1..=m {
        for q in 1..=n {
            if nonzero(p) || nonzero(q) {
                out.push(BasisIndex::new(p, q));
            }
        }
    }
    out
}

/// Explicit `(mn) x (mn)` matrix of `Z -> quasi_project(B, Z)` acting on
/// row-major vectorizations, built column by column from elementary matrices.
pub fn quasi_projection_operator(b: &DenseMatrix) -> DenseMatrix {
    let (m, n) = b.shape();
    let dim = m * n;
    let mut op = DenseMatrix::zeros(dim, dim);
    for c in 0..dim {
        let image = quasi_project_unchecked(b, &DenseMatrix::elementary(m, n, c / n, c % n));
        op.set_column(c, image.as_slice());
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{inner, pair_inner};
    use crate::random::{random_rank_k, seeded_rng, standard_normal};

    #[test]
    fn tangent_map_examples() {
        let b = DenseMatrix::from_diag(2, 2, &[1.0, 0.0]);
        assert_eq!(
            tangent_map(&b, &TangentPair::zeros(2, 2)).unwrap(),
            DenseMatrix::zeros(2, 2)
        );
        let mut rng = seeded_rng(3);
        let b43 = standard_normal(4, 3, &mut rng);
        let id = TangentPair::new(DenseMatrix::identity(4), DenseMatrix::zeros(3, 3));
        assert_eq!(tangent_map(&b43, &id).unwrap(), b43);

        let pair = TangentPair::new(
            DenseMatrix::elementary(2, 2, 1, 0),
            DenseMatrix::zeros(2, 2),
        );
        assert_eq!(
            tangent_map(&b, &pair).unwrap(),
            DenseMatrix::elementary(2, 2, 1, 0)
        );
    }

    #[test]
    fn tangent_map_rejects_bad_factor_shapes() {
        let b = DenseMatrix::zeros(4, 3);
        let pair = TangentPair::zeros(3, 3);
        assert!(matches!(tangent_map(&b, &pair), Err(Error::Shape { .. })));
    }

    #[test]
    fn adjoint_examples() {
        let mut rng = seeded_rng(5);
        let b = standard_normal(4, 3, &mut rng);
        let zero = tangent_adjoint(&b, &DenseMatrix::zeros(4, 3)).unwrap();
        assert_eq!(zero, TangentPair::zeros(4, 3));

        let z = standard_normal(3, 3, &mut rng);
        let pair = tangent_adjoint(&DenseMatrix::identity(3), &z).unwrap();
        assert_eq!(pair.left, z);
        assert_eq!(pair.right, z);

        let z = standard_normal(4, 3, &mut rng);
        let p = TangentPair::new(
            standard_normal(4, 4, &mut rng),
            standard_normal(3, 3, &mut rng),
        );
        let lhs = pair_inner(&tangent_adjoint(&b, &z).unwrap(), &p).unwrap();
        let rhs = inner(&z, &tangent_map(&b, &p).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn quasi_project_examples() {
        let mut rng = seeded_rng(11);
        let b = standard_normal(4, 3, &mut rng);
        assert_eq!(
            quasi_project(&b, &DenseMatrix::zeros(4, 3)).unwrap(),
            DenseMatrix::zeros(4, 3)
        );
        let z = standard_normal(3, 3, &mut rng);
        let qp = quasi_project(&DenseMatrix::identity(3), &z).unwrap();
        assert!((&qp - &z.scaled(2.0)).max_abs() < 1e-15);

        let z = standard_normal(4, 3, &mut rng);
        let direct = quasi_project(&b, &z).unwrap();
        let composed = tangent_map(&b, &tangent_adjoint(&b, &z).unwrap()).unwrap();
        assert!((&direct - &composed).norm() <= 1e-12 * direct.norm());
    }

    #[test]
    fn tangent_dim_examples() {
        assert_eq!(tangent_dim(4, 3, 2).unwrap(), 10);
        assert_eq!(tangent_dim(5, 5, 5).unwrap(), 25);
        assert_eq!(tangent_dim(5, 5, 1).unwrap(), 9);
        assert!(matches!(tangent_dim(4, 3, 4), Err(Error::Domain(_))));
    }

    fn positions(list: &[(usize, usize)]) -> Vec<BasisIndex> {
        list.iter().map(|&(p, q)| BasisIndex::new(p, q)).collect()
    }

    #[test]
    fn basis_at_diagonal_matches_worked_tangent_forms() {
        // Free entries of the tangent form at Diag(s1, s2, 0): rows 1-2 full,
        // rows 3-4 only in columns 1-2.
        let basis = tangent_basis_at_diagonal(&[3.0, 2.0, 0.0], 4);
        let expected = positions(&[
            (1, 1),
            (1, 2),
            (1, 3),
            (2, 1),
            (2, 2),
            (2, 3),
            (3, 1),
            (3, 2),
            (4, 1),
            (4, 2),
        ]);
        assert_eq!(basis, expected);

        assert!(tangent_basis_at_diagonal(&[0.0, 0.0, 0.0], 4).is_empty());

        // Diag(0, s2, s3): zeros at (1,1) and (4,1).
        let basis = tangent_basis_at_diagonal(&[0.0, 2.0, 1.0], 4);
        assert_eq!(basis.len(), 10);
        assert!(!basis.contains(&BasisIndex::new(1, 1)));
        assert!(!basis.contains(&BasisIndex::new(4, 1)));
    }

    #[test]
    fn basis_size_equals_tangent_dim_exhaustively() {
        for m in 1..=7 {
            for n in 1..=7 {
                let r = m.min(n);
                if r > 6 {
                    continue;
                }
                for mask in 1u32..(1 << r) {
                    let mut e = vec![0.0; n];
                    for (i, slot) in e.iter_mut().enumerate().take(r) {
                        if mask & (1 << i) != 0 {
                            *slot = (i + 1) as f64;
                        }
                    }
                    let k = mask.count_ones() as usize;
                    assert_eq!(
                        tangent_basis_at_diagonal(&e, m).len(),
                        tangent_dim(m, n, k).unwrap(),
                        "m={m} n={n} mask={mask:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn operator_is_symmetric_psd() {
        let mut rng = seeded_rng(21);
        let b = random_rank_k(4, 3, 2, &mut rng);
        let op = quasi_projection_operator(&b);
        assert!(op.asymmetry() <= 1e-12 * op.max_abs());
        let eig = op.symmetric_eigenvalues().unwrap();
        assert!(eig[0] >= -1e-12 * op.max_abs());
        // The kernel of L_B L_B^* is the normal space; its dimension is
        // mn - tangent_dim.
        let zeros = eig
            .iter()
            .filter(|v| v.abs() <= 1e-10 * op.max_abs())
            .count();
        assert_eq!(zeros, 12 - tangent_dim(4, 3, 2).unwrap());
    }
}
