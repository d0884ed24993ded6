//! Equilibria of the flow and their linear stability.
//!
//! For a target with distinct positive singular values, in the frame where
//! `A = Diag(sigma)` every equilibrium is diagonal with `e_i` either `sigma_i`
//! or 0. The linearization at such a point,
//!
//! ```text
//! DF(E)[X] = (A - E) X^T E + E X^T (A - E) - X E^T E - E E^T X,
//! ```
//!
//! decouples into scalars on `E^{ii}` (`c_i = 2 e_i (sigma_i - 2 e_i)`), 2x2
//! blocks `[[-a, b], [b, -a]]` on `(E^{ij}, E^{ji})` with
//! `a = e_i^2 + e_j^2`, `b = (sigma_i - e_i) e_j + e_i (sigma_j - e_j)`, and
//! scalars `-e_j^2` on rows below the square part. Exactly one equilibrium,
//! `Diag(sigma_1, .., sigma_k, 0, ..)`, has only negative eigenvalues.

use serde::Serialize;

use crate::error::{same_shape, Error, Result};
use crate::frobenius::inner_unchecked;
use crate::matrix::DenseMatrix;
use crate::rank_manifold::{tangent_basis_at_diagonal, BasisIndex};
use crate::svd::SingularSpectrum;

/// Relative gap below which singular values count as repeated (or zero).
pub const GENERICITY_GAP: f64 = 1e-8;
pub const MAX_ENUMERATION_DIM: usize = 20;
pub const MAX_ENUMERATED_SUBSETS: u64 = 200_000;
/// Residual above which `linearization_apply` warns that `E` is not an
/// equilibrium.
const EQUILIBRIUM_WARN_TOL: f64 = 1e-8;

/// Eigenvector shape of one eigenvalue of the linearization, in the frame
/// where `A` is diagonal. Indices are one-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// `E^{pq}` alone.
    Single { p: usize, q: usize },
    /// `E^{ij} + E^{ji}`.
    Symmetric { i: usize, j: usize },
    /// `E^{ij} - E^{ji}`.
    Antisymmetric { i: usize, j: usize },
}

impl Mode {
    fn transposed(self) -> Self {
        match self {
            Mode::Single { p, q } => Mode::Single { p: q, q: p },
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenMode {
    pub value: f64,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    /// Some eigenvalue is exactly zero and none is positive.
    Degenerate,
}

/// A positive-eigenvalue direction `E^{pq} + E^{qp}` at an unstable
/// equilibrium that skips `sigma_p` in favour of `sigma_q`, `p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub p: usize,
    pub q: usize,
    /// `(sigma_p - sigma_q) sigma_q`.
    pub eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    /// Diagonal of the equilibrium in the frame where `A` is diagonal.
    pub e: Vec<f64>,
    /// One-based indices `i` with `e_i != 0`.
    pub support: Vec<usize>,
    pub residual_equilibrium: f64,
    /// Larger of the two quasi-commuting residuals.
    pub residual_quasi_commuting: f64,
    pub eigenvalues: Vec<EigenMode>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl EquilibriumReport {
    pub fn rank(&self) -> usize {
        self.support.len()
    }

    /// The equilibrium as a matrix in the original frame.
    pub fn matrix(&self, spectrum: &SingularSpectrum) -> DenseMatrix {
        spectrum.compose(&self.e)
    }
}

/// `max(|A E^T - E E^T|, |E^T A - E^T E|)`; zero exactly at equilibria.
pub fn equilibrium_residual(a: &DenseMatrix, e: &DenseMatrix) -> Result<f64> {
    same_shape("equilibrium residual", a.shape(), e.shape())?;
    let et = e.transpose();
    let left = (&(a * &et) - &(e * &et)).norm();
    let right = (&(&et * a) - &(&et * e)).norm();
    Ok(left.max(right))
}

/// `(|A E^T - E A^T|, |A^T E - E^T A|)`, both zero at any equilibrium.
pub fn quasi_commuting_residual(a: &DenseMatrix, e: &DenseMatrix) -> Result<(f64, f64)> {
    same_shape("quasi-commuting residual", a.shape(), e.shape())?;
    let at = a.transpose();
    let et = e.transpose();
    let first = (&(a * &et) - &(e * &at)).norm();
    let second = (&(&at * e) - &(&et * a)).norm();
    Ok((first, second))
}

/// Errors unless the singular values are distinct and positive, with
/// consecutive gaps and the smallest value above `GENERICITY_GAP * sigma_1`.
pub fn check_generic(spectrum: &SingularSpectrum) -> Result<()> {
    if spectrum.has_distinct_positive(GENERICITY_GAP) {
        Ok(())
    } else {
        Err(Error::Degenerate(format!(
            "singular values {:?} are not distinct and positive",
            spectrum.sigma
        )))
    }
}

/// `DF(E)[X] = (A - E) X^T E + E X^T (A - E) - X E^T E - E E^T X`.
pub fn linearization_apply(
    a: &DenseMatrix,
    e: &DenseMatrix,
    x: &DenseMatrix,
) -> Result<DenseMatrix> {
    same_shape("linearization", a.shape(), e.shape())?;
    same_shape("linearization", a.shape(), x.shape())?;
    let residual = equilibrium_residual(a, e)?;
    if residual > EQUILIBRIUM_WARN_TOL * (1.0 + a.norm() * a.norm()) {
        log::warn!("linearizing at a non-equilibrium point (residual {residual:e})");
    }
    Ok(linearization_unchecked(a, e, x))
}

fn linearization_unchecked(a: &DenseMatrix, e: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    let r = a - e;
    let xt = x.transpose();
    let et = e.transpose();
    let mut out = &(&r * &xt) * e;
    out += &(&(e * &xt) * &r);
    out -= &(&(x * &et) * e);
    out -= &(&(e * &et) * x);
    out
}

fn validate_equilibrium_vector(sigma: &[f64], e: &[f64]) -> Result<()> {
    if sigma.len() != e.len() {
        return Err(Error::Shape {
            op: "equilibrium vector",
            left: (sigma.len(), 1),
            right: (e.len(), 1),
        });
    }
    for (i, (&s, &v)) in sigma.iter().zip(e).enumerate() {
        if v != 0.0 && v != s {
            return Err(Error::Domain(format!(
                "e_{} = {v} is neither 0 nor sigma_{} = {s}",
                i + 1,
                i + 1
            )));
        }
    }
    Ok(())
}

/// Closed-form eigenvalues of the linearization at `Diag(e)` restricted to
/// the tangent space, for an `m x n` problem with `m >= n = sigma.len()`.
///
/// The list holds, in order: `c_i` for each `i` in the support; for each pair
/// `i < j` touching the support, `-a_ij + b_ij` on `E^{ij} + E^{ji}` and
/// `-a_ij - b_ij` on `E^{ij} - E^{ji}`; then `-e_q^2` on `E^{pq}` for rows
/// `p > n` and `q` in the support. Its length is the tangent dimension.
pub fn linearization_eigenvalues(sigma: &[f64], e: &[f64], m: usize) -> Result<Vec<EigenMode>> {
    validate_equilibrium_vector(sigma, e)?;
    let n = sigma.len();
    if m < n {
        return Err(Error::Domain(format!(
            "closed form needs m >= n, got m = {m}, n = {n}; transpose the problem"
        )));
    }
    let mut out = Vec::new();
    for i in 0..n {
        if e[i] != 0.0 {
            out.push(EigenMode {
                value: 2.0 * e[i] * (sigma[i] - 2.0 * e[i]),
                mode: Mode::Single { p: i + 1, q: i + 1 },
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if e[i] == 0.0 && e[j] == 0.0 {
                continue;
            }
            let a = e[i] * e[i] + e[j] * e[j];
            let b = (sigma[i] - e[i]) * e[j] + e[i] * (sigma[j] - e[j]);
            out.push(EigenMode {
                value: -a + b,
                mode: Mode::Symmetric { i: i + 1, j: j + 1 },
            });
            out.push(EigenMode {
                value: -a - b,
                mode: Mode::Antisymmetric { i: i + 1, j: j + 1 },
            });
        }
    }
    for p in n..m {
        for (q, &eq) in e.iter().enumerate() {
            if eq != 0.0 {
                out.push(EigenMode {
                    value: -eq * eq,
                    mode: Mode::Single { p: p + 1, q: q + 1 },
                });
            }
        }
    }
    Ok(out)
}

fn verdict_of(eigenvalues: &[EigenMode]) -> Verdict {
    if eigenvalues.iter().any(|m| m.value > 0.0) {
        Verdict::Unstable
    } else if eigenvalues.iter().any(|m| m.value == 0.0) {
        Verdict::Degenerate
    } else {
        Verdict::Stable
    }
}

/// Smallest `p` with `e_p = 0` among the first `k` indices, paired with the
/// first `q > p` in the support.
fn find_witness(sigma: &[f64], e: &[f64], eigenvalues: &[EigenMode]) -> Option<Witness> {
    let k = e.iter().filter(|v| **v != 0.0).count();
    let p = (0..k).find(|&i| e[i] == 0.0)?;
    let q = ((p + 1)..e.len()).find(|&j| e[j] != 0.0)?;
    let target = Mode::Symmetric { i: p + 1, j: q + 1 };
    let eigenvalue = eigenvalues
        .iter()
        .find(|m| m.mode == target)
        .map_or((sigma[p] - sigma[q]) * sigma[q], |m| m.value);
    Some(Witness {
        p: p + 1,
        q: q + 1,
        eigenvalue,
    })
}

/// Full stability report for the equilibrium `U Diag(e) V^T` of the matrix
/// described by `spectrum`.
pub fn classify(spectrum: &SingularSpectrum, e: &[f64]) -> Result<EquilibriumReport> {
    check_generic(spectrum)?;
    validate_equilibrium_vector(&spectrum.sigma, e)?;
    let (m, n) = (spectrum.rows(), spectrum.cols());
    // Wide problems are analysed through the transpose, which swaps the
    // roles of rows and columns in every basis element.
    let eigenvalues = if m >= n {
        linearization_eigenvalues(&spectrum.sigma, e, m)?
    } else {
        linearization_eigenvalues(&spectrum.sigma, e, n)?
            .into_iter()
            .map(|em| EigenMode {
                value: em.value,
                mode: em.mode.transposed(),
            })
            .collect()
    };
    let verdict = verdict_of(&eigenvalues);
    let witness = match verdict {
        Verdict::Unstable => find_witness(&spectrum.sigma, e, &eigenvalues),
        _ => None,
    };
    let a = spectrum.reconstruct();
    let em = spectrum.compose(e);
    let (qc1, qc2) = quasi_commuting_residual(&a, &em)?;
    Ok(EquilibriumReport {
        e: e.to_vec(),
        support: support_of(e),
        residual_equilibrium: equilibrium_residual(&a, &em)?,
        residual_quasi_commuting: qc1.max(qc2),
        eigenvalues,
        verdict,
        witness,
    })
}

fn support_of(e: &[f64]) -> Vec<usize> {
    e.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i + 1)
        .collect()
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// All `C(r, k)` rank-`k` equilibria, `r = min(m, n)`, in lexicographic order
/// of their supports, each classified.
pub fn enumerate_equilibria(
    spectrum: &SingularSpectrum,
    k: usize,
) -> Result<Vec<EquilibriumReport>> {
    check_generic(spectrum)?;
    let r = spectrum.sigma.len();
    if k == 0 || k > r {
        return Err(Error::Domain(format!(
            "rank must satisfy 1 <= k <= {r}, got {k}"
        )));
    }
    if r > MAX_ENUMERATION_DIM || binomial(r, k) > MAX_ENUMERATED_SUBSETS {
        return Err(Error::Domain(format!(
            "refusing to enumerate C({r}, {k}) equilibria"
        )));
    }
    let mut reports = Vec::with_capacity(binomial(r, k) as usize);
    let mut chosen: Vec<usize> = (0..k).collect();
    loop {
        let mut e = vec![0.0; r];
        for &i in &chosen {
            e[i] = spectrum.sigma[i];
        }
        reports.push(classify(spectrum, &e)?);
        // Advance to the next k-subset in lexicographic order.
        let Some(pos) = (0..k).rev().find(|&i| chosen[i] < r - k + i) else {
            break;
        };
        chosen[pos] += 1;
        for i in (pos + 1)..k {
            chosen[i] = chosen[i - 1] + 1;
        }
    }
    Ok(reports)
}

/// Finds the equilibrium nearest to `x` and returns its report if it lies
/// within Frobenius distance `tol`. Works in the aligned frame `U^T X V`,
/// where the nearest equilibrium is obtained entrywise on the diagonal.
pub fn match_to_equilibrium(
    spectrum: &SingularSpectrum,
    x: &DenseMatrix,
    tol: f64,
) -> Option<EquilibriumReport> {
    if x.shape() != (spectrum.rows(), spectrum.cols()) {
        return None;
    }
    let y = spectrum.to_aligned_frame(x);
    let e: Vec<f64> = spectrum
        .sigma
        .iter()
        .zip(y.diagonal())
        .map(|(&s, d)| if (d - s).abs() < d.abs() { s } else { 0.0 })
        .collect();
    if e.iter().all(|v| *v == 0.0) {
        return None;
    }
    let nearest = DenseMatrix::from_diag(y.rows(), y.cols(), &e);
    if (&y - &nearest).norm() > tol {
        return None;
    }
    match classify(spectrum, &e) {
        Ok(report) => Some(report),
        Err(err) => {
            log::warn!("cannot classify matched equilibrium: {err}");
            None
        }
    }
}

/// Tangent basis at `U Diag(e) V^T` in the original frame: the images
/// `U E^{pq} V^T` of the aligned-frame basis positions. Orthonormal.
pub fn tangent_frame(spectrum: &SingularSpectrum, e: &[f64]) -> Vec<(BasisIndex, DenseMatrix)> {
    let (m, n) = (spectrum.rows(), spectrum.cols());
    let mut padded = e.to_vec();
    padded.resize(n, 0.0);
    tangent_basis_at_diagonal(&padded, m)
        .into_iter()
        .map(|idx| (idx, spectrum.from_aligned_frame(&idx.matrix(m, n))))
        .collect()
}

/// Matrix of `DF(E)` in an orthonormal `basis` of the tangent space:
/// entry `(r, c)` is `<B_r, DF(E)[B_c]>`.
pub fn linearization_matrix(
    a: &DenseMatrix,
    e: &DenseMatrix,
    basis: &[DenseMatrix],
) -> Result<DenseMatrix> {
    same_shape("linearization matrix", a.shape(), e.shape())?;
    let dim = basis.len();
    if dim == 0 {
        return Err(Error::Domain("empty tangent basis".into()));
    }
    let mut out = DenseMatrix::zeros(dim, dim);
    for (c, bc) in basis.iter().enumerate() {
        same_shape("linearization matrix", a.shape(), bc.shape())?;
        let image = linearization_unchecked(a, e, bc);
        for (r, br) in basis.iter().enumerate() {
            out[(r, c)] = inner_unchecked(br, &image);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svd::{generate_with_spectrum, svd};

    fn diag43(d: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diag(4, 3, d)
    }

    fn sorted_values(modes: &[EigenMode]) -> Vec<f64> {
        let mut v: Vec<f64> = modes.iter().map(|m| m.value).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn residual_examples() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        assert_eq!(equilibrium_residual(&a, &a).unwrap(), 0.0);
        assert_eq!(
            equilibrium_residual(&a, &diag43(&[3.0, 2.0, 0.0])).unwrap(),
            0.0
        );
        assert_eq!(
            equilibrium_residual(&a, &diag43(&[1.0, 0.0, 0.0])).unwrap(),
            2.0
        );
        assert!(equilibrium_residual(&a, &DenseMatrix::zeros(3, 4)).is_err());
    }

    #[test]
    fn quasi_commuting_examples() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        assert_eq!(quasi_commuting_residual(&a, &a).unwrap(), (0.0, 0.0));
        assert_eq!(
            quasi_commuting_residual(&a, &diag43(&[3.0, 0.0, 1.0])).unwrap(),
            (0.0, 0.0)
        );
        // Brute force: A E^T - E A^T = 2 (E^{21} - E^{12}) and
        // A^T E - E^T A = 3 (E^{12} - E^{21}) for E = E^{12}.
        let (r1, r2) = quasi_commuting_residual(&a, &DenseMatrix::elementary(4, 3, 0, 1)).unwrap();
        assert!((r1 - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((r2 - 3.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn linearization_apply_examples() {
        let a = diag43(&[3.0, 2.0, 1.0]);
        let star = diag43(&[3.0, 2.0, 0.0]);
        let zero = DenseMatrix::zeros(4, 3);
        assert_eq!(linearization_apply(&a, &star, &zero).unwrap(), zero);

        let e11 = DenseMatrix::elementary(4, 3, 0, 0);
        assert_eq!(
            linearization_apply(&a, &star, &e11).unwrap(),
            e11.scaled(-18.0)
        );

        let e = diag43(&[3.0, 0.0, 1.0]);
        let dir = &DenseMatrix::elementary(4, 3, 1, 2) + &DenseMatrix::elementary(4, 3, 2, 1);
        assert_eq!(linearization_apply(&a, &e, &dir).unwrap(), dir);
    }

    #[test]
    fn closed_form_at_optimum_for_worked_example() {
        // Values of the 2x2 blocks [[-a, b], [b, -a]] at Diag(3, 2, 0) with
        // sigma = (3, 2, 1), checked against a finite-difference Jacobian of
        // the vector field restricted to the tangent basis:
        // c = (-18, -8), pair (1,2): a = 13, b = 0; pair (1,3): a = 9, b = 3;
        // pair (2,3): a = 4, b = 2; rows below: -9, -4.
        let modes = linearization_eigenvalues(&[3.0, 2.0, 1.0], &[3.0, 2.0, 0.0], 4).unwrap();
        assert_eq!(modes.len(), 10);
        assert_eq!(
            sorted_values(&modes),
            vec![-18.0, -13.0, -13.0, -12.0, -9.0, -8.0, -6.0, -6.0, -4.0, -2.0]
        );
    }

    #[test]
    fn unstable_cases_of_worked_example() {
        let modes = linearization_eigenvalues(&[3.0, 2.0, 1.0], &[3.0, 0.0, 1.0], 4).unwrap();
        let sym23 = modes
            .iter()
            .find(|m| m.mode == Mode::Symmetric { i: 2, j: 3 })
            .unwrap();
        assert_eq!(sym23.value, 1.0);

        let spectrum = svd(&diag43(&[3.0, 2.0, 1.0]));
        let report = classify(&spectrum, &[3.0, 0.0, 1.0]).unwrap();
        assert_eq!(report.verdict, Verdict::Unstable);
        assert_eq!(
            report.witness,
            Some(Witness {
                p: 2,
                q: 3,
                eigenvalue: 1.0
            })
        );
        let report = classify(&spectrum, &[0.0, 2.0, 1.0]).unwrap();
        assert_eq!(
            report.witness,
            Some(Witness {
                p: 1,
                q: 2,
                eigenvalue: 2.0
            })
        );
        let report = classify(&spectrum, &[3.0, 2.0, 0.0]).unwrap();
        assert_eq!(report.verdict, Verdict::Stable);
        assert_eq!(report.witness, None);
    }

    #[test]
    fn antisymmetric_block_eigenvalue_is_never_positive() {
        let sigma = [5.0, 3.5, 2.0, 0.5];
        for mask in 1u32..16 {
            let e: Vec<f64> = (0..4)
                .map(|i| if mask & (1 << i) != 0 { sigma[i] } else { 0.0 })
                .collect();
            for m in linearization_eigenvalues(&sigma, &e, 6).unwrap() {
                if let Mode::Antisymmetric { .. } = m.mode {
                    assert!(m.value <= 0.0);
                }
            }
        }
    }

    #[test]
    fn invalid_equilibrium_vector_is_rejected() {
        assert!(matches!(
            linearization_eigenvalues(&[3.0, 2.0, 1.0], &[3.0, 1.5, 0.0], 4),
            Err(Error::Domain(_))
        ));
        assert!(linearization_eigenvalues(&[3.0, 2.0, 1.0], &[3.0, 2.0, 0.0], 2).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let spectrum = svd(&diag43(&[3.0, 2.0, 1.0]));
        let reports = enumerate_equilibria(&spectrum, 2).unwrap();
        let supports: Vec<Vec<usize>> = reports.iter().map(|r| r.support.clone()).collect();
        assert_eq!(supports, vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert!(reports.iter().all(|r| r.residual_equilibrium <= 1e-12));
        assert_eq!(
            reports
                .iter()
                .filter(|r| r.verdict == Verdict::Stable)
                .count(),
            1
        );

        let full = enumerate_equilibria(&spectrum, 3).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].e, vec![3.0, 2.0, 1.0]);
        assert_eq!(full[0].verdict, Verdict::Stable);

        let two = svd(&DenseMatrix::from_diag(2, 2, &[2.0, 1.0]));
        let reports = enumerate_equilibria(&two, 1).unwrap();
        let es: Vec<Vec<f64>> = reports.iter().map(|r| r.e.clone()).collect();
        assert_eq!(es, vec![vec![2.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn degenerate_spectra_are_rejected() {
        for d in [[2.0, 2.0, 1.0], [3.0, 2.0, 0.0]] {
            let spectrum = svd(&diag43(&d));
            assert!(matches!(
                enumerate_equilibria(&spectrum, 2),
                Err(Error::Degenerate(_))
            ));
        }
    }

    #[test]
    fn wide_problem_matches_its_transpose() {
        let a = generate_with_spectrum(3, 5, &[4.0, 2.5, 1.0], 3).unwrap();
        let wide = svd(&a);
        let tall = svd(&a.transpose());
        for k in 1..=3 {
            let w = enumerate_equilibria(&wide, k).unwrap();
            let t = enumerate_equilibria(&tall, k).unwrap();
            for (rw, rt) in w.iter().zip(&t) {
                assert_eq!(
                    sorted_values(&rw.eigenvalues),
                    sorted_values(&rt.eigenvalues)
                );
                assert_eq!(rw.verdict, rt.verdict);
                assert!(rw.residual_equilibrium < 1e-12);
            }
        }
    }

    #[test]
    fn matching_examples() {
        let a = generate_with_spectrum(5, 4, &[4.0, 3.0, 2.0, 1.0], 8).unwrap();
        let spectrum = svd(&a);
        let star = spectrum.compose(&[4.0, 3.0, 0.0, 0.0]);
        let report = match_to_equilibrium(&spectrum, &star, 1e-8).unwrap();
        assert_eq!(report.support, vec![1, 2]);
        assert_eq!(report.verdict, Verdict::Stable);

        let far = spectrum.compose(&[2.0, 1.5, 0.0, 0.0]);
        assert!(match_to_equilibrium(&spectrum, &far, 1e-3).is_none());
    }

    #[test]
    fn tangent_frame_is_orthonormal() {
        let a = generate_with_spectrum(4, 3, &[3.0, 2.0, 1.0], 1).unwrap();
        let spectrum = svd(&a);
        let frame = tangent_frame(&spectrum, &[3.0, 0.0, 1.0]);
        assert_eq!(frame.len(), 10);
        for (i, (_, bi)) in frame.iter().enumerate() {
            for (j, (_, bj)) in frame.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((inner_unchecked(bi, bj) - expected).abs() < 1e-13);
            }
        }
    }
}
