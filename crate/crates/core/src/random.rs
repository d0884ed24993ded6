//! Seeded random matrices. All randomness in the crate flows through a
//! ChaCha generator built from a single `u64` seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{orthonormalize_columns, DenseMatrix};

pub type FlowRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> FlowRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix of i.i.d. standard normal entries.
pub fn standard_normal<R: rand::Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Orthogonal `n x n` matrix obtained by orthonormalizing a Gaussian matrix.
pub fn random_orthogonal<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> DenseMatrix {
    orthonormalize_columns(&standard_normal(n, n, rng))
}

/// Random matrix of rank `k` (with probability one): the product of Gaussian
/// `rows x k` and `k x cols` factors.
pub fn random_rank_k<R: rand::Rng + ?Sized>(
    rows: usize,
    cols: usize,
    k: usize,
    rng: &mut R,
) -> DenseMatrix {
    let left = standard_normal(rows, k, rng);
    let right = standard_normal(k, cols, rng);
    &left * &right
}

/// Singular values `sigma_1 > ... > sigma_r > 0` with `sigma_1 = scale` and
/// every gap `sigma_i - sigma_{i+1}` (including `sigma_r - 0`) at least
/// `min_gap * scale`. The gaps are `min_gap` plus a Dirichlet-distributed
/// share of the remaining slack.
pub fn gapped_spectrum<R: rand::Rng + ?Sized>(
    r: usize,
    min_gap: f64,
    scale: f64,
    rng: &mut R,
) -> Vec<f64> {
    assert!(r >= 1 && min_gap * r as f64 <= 1.0, "gaps do not fit");
    let weights: Vec<f64> = (0..r)
        .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    let slack = 1.0 - min_gap * r as f64;
    let gaps: Vec<f64> = weights
        .iter()
        .map(|w| min_gap + slack * w / total)
        .collect();
    // sigma_i is the sum of gaps i..r.
    let mut sigma: Vec<f64> = gaps
        .iter()
        .rev()
        .scan(0.0, |acc, g| {
            *acc += g;
            Some(*acc)
        })
        .collect();
    sigma.reverse();
    let top = sigma[0];
    sigma.iter_mut().for_each(|s| *s *= scale / top);
    sigma
}
