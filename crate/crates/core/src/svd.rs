//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations and
//! the best rank-k truncation it yields.
//!
//! This is the ground truth the flow is checked against, so it is written for
//! accuracy and independence rather than speed: columns of the working matrix
//! are rotated pairwise until every pair is orthogonal to within a small
//! multiple of machine precision, relative to the column norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{norm2, orthonormalize_columns, DenseMatrix};
use crate::random::{random_orthogonal, seeded_rng};

/// Pairs whose cosine is below this are treated as orthogonal.
const ORTHOGONALITY_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// `A = U Diag(sigma) V^T` with `sigma` of length `min(m, n)`, sorted
/// descending, `U` m x m and `V` n x n orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    pub sigma: Vec<f64>,
    pub u: DenseMatrix,
    pub v: DenseMatrix,
}

impl SingularSpectrum {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    /// `U Diag(d) V^T` for an arbitrary diagonal `d` of length `min(m, n)`.
    pub fn compose(&self, d: &[f64]) -> DenseMatrix {
        let diag = DenseMatrix::from_diag(self.rows(), self.cols(), d);
        &(&self.u * &diag) * &self.v.transpose()
    }

    /// Reconstructs the decomposed matrix.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.compose(&self.sigma)
    }

    /// Rotates `x` into the frame in which the decomposed matrix is
    /// diagonal: `U^T X V`.
    pub fn to_aligned_frame(&self, x: &DenseMatrix) -> DenseMatrix {
        &(&self.u.transpose() * x) * &self.v
    }

    /// Inverse of [`SingularSpectrum::to_aligned_frame`]: `U Y V^T`.
    pub fn from_aligned_frame(&self, y: &DenseMatrix) -> DenseMatrix {
        &(&self.u * y) * &self.v.transpose()
    }

    /// Genericity test: `sigma_r > rel_gap * sigma_1` and consecutive gaps
    /// `sigma_i - sigma_{i+1} > rel_gap * sigma_1`.
    pub fn has_distinct_positive(&self, rel_gap: f64) -> bool {
        distinct_positive(&self.sigma, rel_gap)
    }

    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            sigma: self.sigma.clone(),
            condition: match (self.sigma.first(), self.sigma.last()) {
                (Some(&hi), Some(&lo)) if lo > 0.0 => Some(hi / lo),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub sigma: Vec<f64>,
    pub condition: Option<f64>,
}

pub(crate) fn distinct_positive(sigma: &[f64], rel_gap: f64) -> bool {
    let Some(&top) = sigma.first() else {
        return false;
    };
    let floor = rel_gap * top;
    top > 0.0
        && sigma.last().is_some_and(|&s| s > floor)
        && sigma.windows(2).all(|w| w[0] - w[1] > floor)
}

/// Columns of the rotated working matrix, plus the accumulated right
/// rotations when requested. Requires `rows >= cols`.
fn jacobi_columns(a: &DenseMatrix, accumulate: bool) -> (Vec<Vec<f64>>, Option<DenseMatrix>) {
    let n = a.cols();
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Option<Vec<Vec<f64>>> = accumulate.then(|| {
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect()
    });

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha: f64 = w[i].iter().map(|x| x * x).sum();
                let beta: f64 = w[j].iter().map(|x| x * x).sum();
                let gamma: f64 = w[i].iter().zip(&w[j]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= ORTHOGONALITY_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + 1.0f64.hypot(zeta));
                let c = 1.0 / 1.0f64.hypot(t);
                let s = c * t;
                rotate(&mut w, i, j, c, s);
                if let Some(v) = v.as_mut() {
                    rotate(v, i, j, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let v = v.map(|cols| {
        let mut m = DenseMatrix::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            m.set_column(j, col);
        }
        m
    });
    (w, v)
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(j);
    let (ci, cj) = (&mut head[i], &mut tail[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Singular values only, sorted descending.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let tall = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let (w, _) = jacobi_columns(&tall, false);
    let mut sigma: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    sigma.sort_by(|x, y| y.total_cmp(x));
    sigma
}

/// Full SVD with the sign convention that the largest-magnitude entry of each
/// column of `U` is positive (`V` follows).
pub fn svd(a: &DenseMatrix) -> SingularSpectrum {
    if a.rows() < a.cols() {
        let t = svd_tall(&a.transpose());
        let mut out = SingularSpectrum {
            sigma: t.sigma,
            u: t.v,
            v: t.u,
        };
        normalize_signs(&mut out);
        return out;
    }
    let mut out = svd_tall(a);
    normalize_signs(&mut out);
    out
}

fn svd_tall(a: &DenseMatrix) -> SingularSpectrum {
    let (m, n) = a.shape();
    let (w, v) = jacobi_columns(a, true);
    let v = v.expect("rotations accumulated");
    let norms: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let mut u_seed = DenseMatrix::zeros(m, m);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (slot, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        if norms[j] > 0.0 {
            let col: Vec<f64> = w[j].iter().map(|x| x / norms[j]).collect();
            u_seed.set_column(slot, &col);
        }
        v_sorted.set_column(slot, &v.column(j));
    }
    // Zero columns (null singular values and the m - n complement) are
    // filled in with an orthonormal completion.
    let u = orthonormalize_columns(&u_seed);
    SingularSpectrum {
        sigma,
        u,
        v: v_sorted,
    }
}

fn normalize_signs(s: &mut SingularSpectrum) {
    let r = s.sigma.len();
    let flip = |m: &mut DenseMatrix, j: usize| {
        for i in 0..m.rows() {
            m[(i, j)] = -m[(i, j)];
        }
    };
    let leading_negative = |m: &DenseMatrix, j: usize| {
        let col = m.column(j);
        let idx = col.iter().enumerate().fold(
            0,
            |best, (i, x)| if x.abs() > col[best].abs() { i } else { best },
        );
        col[idx] < 0.0
    };
    for j in 0..s.u.cols() {
        if leading_negative(&s.u, j) {
            flip(&mut s.u, j);
            if j < r {
                flip(&mut s.v, j);
            }
        }
    }
    for j in r..s.v.cols() {
        if leading_negative(&s.v, j) {
            flip(&mut s.v, j);
        }
    }
}

/// Count of singular values above `rel_tol` times the largest; 0 for the
/// zero matrix.
pub fn numerical_rank(x: &DenseMatrix, rel_tol: f64) -> usize {
    let sigma = singular_values(x);
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Result of [`svd_truncate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    pub matrix: DenseMatrix,
    /// Set when `rank(A) <= k`, in which case `matrix` is `A` itself.
    pub rank_deficient: bool,
}

/// Relative threshold below which a singular value counts as zero when
/// deciding whether truncation is needed at all.
const TRUNCATION_RANK_TOL: f64 = 1e-12;

/// Best rank-`k` approximation `U Diag(sigma_1..sigma_k, 0..) V^T`.
pub fn svd_truncate(a: &DenseMatrix, k: usize) -> Result<Truncation> {
    let r = a.rows().min(a.cols());
    if k == 0 || k > r {
        return Err(Error::Domain(format!(
            "truncation rank must satisfy 1 <= k <= {r}, got {k}"
        )));
    }
    let spectrum = svd(a);
    let top = spectrum.sigma[0];
    let rank = spectrum
        .sigma
        .iter()
        .filter(|&&s| s > TRUNCATION_RANK_TOL * top)
        .count();
    if rank <= k {
        return Ok(Truncation {
            matrix: a.clone(),
            rank_deficient: true,
        });
    }
    let mut d = spectrum.sigma.clone();
    d[k..].iter_mut().for_each(|s| *s = 0.0);
    Ok(Truncation {
        matrix: spectrum.compose(&d),
        rank_deficient: false,
    })
}

pub fn has_distinct_positive_singular_values(a: &DenseMatrix, rel_gap: f64) -> bool {
    distinct_positive(&singular_values(a), rel_gap)
}

/// `U Diag(sigma) V^T` for seeded random orthogonal `U` (m x m), `V` (n x n).
pub fn generate_with_spectrum(m: usize, n: usize, sigma: &[f64], seed: u64) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::Domain("dimensions must be positive".into()));
    }
    if sigma.len() != m.min(n) {
        return Err(Error::Shape {
            op: "generate with spectrum",
            left: (m, n),
            right: (sigma.len(), 1),
        });
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::Domain(
            "singular values must be finite and non-negative".into(),
        ));
    }
    if sigma.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain(
            "singular values must be sorted descending".into(),
        ));
    }
    let mut rng = seeded_rng(seed);
    let u = random_orthogonal(m, &mut rng);
    let v = random_orthogonal(n, &mut rng);
    let diag = DenseMatrix::from_diag(m, n, sigma);
    Ok(&(&u * &diag) * &v.transpose())
}
