//! Spectral primitives (singular values, principal subspaces, pseudoinverse
//! solves) routed through symmetric eigendecompositions of Gram matrices.
//!
//! Why not the dense SVD: the SVD routine in the linear-algebra backend can
//! mispair singular triplets on matrices with repeated singular values — in
//! particular exact zeros — and then the returned factors fail U·Σ·Vᵀ ≈ X by
//! a wide margin while the reported values are silently wrong. Exactly
//! rank-deficient matrices are everyday inputs in this crate (rank-r factor
//! products, projector differences, in-subspace residuals), so every spectral
//! quantity that does not come from a generic-position least-squares system
//! goes through the Gram route instead: eigenvalues of X·Xᵀ or Xᵀ·X from the
//! symmetric eigensolver, which has no such failure mode.
//!
//! The price of the detour is precision at the bottom of the spectrum:
//! eigenvalues of the Gram matrix carry an absolute error of order ε·σ₁², so
//! a singular value recovered as √λ has an absolute noise floor near
//! 1e-8·σ₁. [`GRAM_SIGMA_FLOOR`] encodes that floor with a safety factor;
//! rank decisions and pseudoinverse truncation in this module never trust
//! digits below it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value floor of the Gram route: values at or below
/// `GRAM_SIGMA_FLOOR · σ₁` are indistinguishable from zero because the
/// underlying Gram eigenvalue is dominated by rounding noise.
pub const GRAM_SIGMA_FLOOR: f64 = 1e-7;

fn check_finite(x: &DMatrix<f64>) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    Ok(())
}

/// Eigenvalues (descending, clamped at zero) and matching eigenvectors of a
/// small symmetric positive-semidefinite matrix.
fn sorted_psd_eigen(g: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let k = g.nrows();
    let eig = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues of a finite symmetric matrix are finite")
    });
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = DMatrix::from_fn(k, k, |row, col| eig.eigenvectors[(row, order[col])]);
    (lambdas, vectors)
}

/// All singular values of `x`, descending, computed as square roots of the
/// eigenvalues of the smaller Gram matrix.
///
/// Values are exact to relative ~1e-15 at the top of the spectrum and carry
/// an absolute noise floor near `1e-8 · σ₁` at the bottom (see the module
/// docs); exact zeros are reported as small non-negative numbers under that
/// floor, never as NaN or misordered values.
pub fn singular_values(x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if x.is_empty() {
        return Err(Error::InvalidArgument(
            "singular values of an empty matrix".into(),
        ));
    }
    check_finite(x)?;
    let g = if x.nrows() <= x.ncols() {
        x * x.transpose()
    } else {
        x.transpose() * x
    };
    let mut lambdas: Vec<f64> = g.symmetric_eigenvalues().iter().cloned().collect();
    lambdas.sort_by(|a, b| {
        b.partial_cmp(a)
            .expect("eigenvalues of a finite symmetric matrix are finite")
    });
    Ok(DVector::from_iterator(
        lambdas.len(),
        lambdas.into_iter().map(|l| l.max(0.0).sqrt()),
    ))
}

fn check_top_r_identifiable(lambdas: &[f64], r: usize) -> Result<()> {
    let sigma1 = lambdas[0].sqrt();
    let sigma_r = lambdas[r - 1].sqrt();
    if sigma1 <= 0.0 || sigma_r <= GRAM_SIGMA_FLOOR * sigma1 {
        return Err(Error::RankDeficient(format!(
            "top-{r} singular subspace is not identifiable: σ_{r} = {sigma_r:.3e} \
             against σ_1 = {sigma1:.3e}"
        )));
    }
    Ok(())
}

/// Orthonormal basis (as an m×r matrix) of the span of the top-r left
/// singular vectors of `x`.
///
/// Requires σ_r > [`GRAM_SIGMA_FLOOR`] · σ₁ so the subspace is actually
/// determined by the data; fails with a rank-deficiency error otherwise.
/// The basis is unique only as a span: individual columns may differ from
/// any particular SVD's by rotation within equal-value clusters and by sign.
pub fn left_singular_basis(x: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let (m, n) = x.shape();
    if r == 0 || r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "cannot take a rank-{r} basis of a {m}x{n} matrix"
        )));
    }
    check_finite(x)?;
    if m <= n {
        let (lambdas, vectors) = sorted_psd_eigen(x * x.transpose());
        check_top_r_identifiable(&lambdas, r)?;
        Ok(vectors.columns(0, r).into_owned())
    } else {
        // Tall matrix: eigendecompose the smaller right Gram, then lift the
        // right vectors through x and re-orthonormalize (QR keeps the span).
        let (lambdas, vectors) = sorted_psd_eigen(x.transpose() * x);
        check_top_r_identifiable(&lambdas, r)?;
        let mut derived = x * vectors.columns(0, r).into_owned();
        for j in 0..r {
            let scale = lambdas[j].sqrt().recip();
            for i in 0..m {
                derived[(i, j)] *= scale;
            }
        }
        Ok(derived.qr().q())
    }
}

/// Orthonormal basis (as an n×r matrix) of the span of the top-r right
/// singular vectors of `x`. Same contract as [`left_singular_basis`].
pub fn right_singular_basis(x: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    left_singular_basis(&x.transpose(), r)
}

/// Minimum-norm least-squares solution of `a·x ≈ b` through the Gram route,
/// returning `(solution, σ_max(a))`.
///
/// Directions with singular value at or below `max(rel_tol,
/// GRAM_SIGMA_FLOOR) · σ_max` are truncated — they receive a zero
/// coefficient — so requesting a tolerance below the Gram noise floor cannot
/// amplify rounding noise into the solution. A numerically zero `a` yields
/// the zero solution with `σ_max = 0`; deciding whether that is degenerate
/// is the caller's business.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> Result<(DVector<f64>, f64)> {
    let (t, r) = a.shape();
    if t == 0 || r == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot solve a least-squares system with a {t}x{r} matrix"
        )));
    }
    if b.len() != t {
        return Err(Error::InvalidArgument(format!(
            "system has {t} rows but the right-hand side has {} entries",
            b.len()
        )));
    }
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "truncation tolerance must be positive and finite, got {rel_tol}"
        )));
    }
    check_finite(a)?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "right-hand side has non-finite entries".into(),
        ));
    }
    let (lambdas, vectors) = sorted_psd_eigen(a.transpose() * a);
    let sigma_max = lambdas[0].sqrt();
    let mut x = DVector::zeros(r);
    if sigma_max <= 0.0 {
        return Ok((x, 0.0));
    }
    let cutoff = rel_tol.max(GRAM_SIGMA_FLOOR) * sigma_max;
    let atb = a.transpose() * b;
    for j in 0..r {
        let sigma = lambdas[j].sqrt();
        if sigma <= cutoff {
            break; // eigenvalues are descending
        }
        let coeff = vectors.column(j).dot(&atb) / lambdas[j];
        x.axpy(coeff, &vectors.column(j).into_owned(), 1.0);
    }
    Ok((x, sigma_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng))
    }

    fn rank_r_product(m: usize, n: usize, r: usize, seed: u64) -> DMatrix<f64> {
        gaussian(m, r, seed) * gaussian(r, n, seed.wrapping_add(1))
    }

    #[test]
    fn singular_values_match_hand_diagonal() {
        let x = DMatrix::from_partial_diagonal(3, 5, &[3.0, 0.0, 2.0]);
        let sv = singular_values(&x).unwrap();
        assert_eq!(sv.len(), 3);
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 2.0).abs() < 1e-12);
        assert!(sv[2].abs() < 1e-12);
        assert!(singular_values(&DMatrix::<f64>::zeros(0, 0)).is_err());
        let bad = dmatrix![1.0, f64::NAN];
        assert!(singular_values(&bad).is_err());
    }

    #[test]
    fn singular_values_agree_with_dense_svd_on_generic_matrices() {
        // Full-rank Gaussian matrices are exactly the inputs where the dense
        // SVD is healthy, so the two routes must coincide there.
        for (m, n, seed) in [(12, 9, 0u64), (9, 12, 1), (20, 20, 2), (35, 7, 3)] {
            let x = gaussian(m, n, seed);
            let ours = singular_values(&x).unwrap();
            let reference = x.clone().svd(false, false).singular_values;
            let scale = reference[0];
            for (a, b) in ours.iter().zip(reference.iter()) {
                assert!(
                    (a - b).abs() <= 1e-9 * scale,
                    "routes disagree: {a} vs {b} (shape {m}x{n}, seed {seed})"
                );
            }
        }
    }

    #[test]
    fn singular_values_of_transpose_agree() {
        for seed in 0..5u64 {
            let x = rank_r_product(14, 23, 4, 700 + seed);
            let a = singular_values(&x).unwrap();
            let b = singular_values(&x.transpose()).unwrap();
            for (s, t) in a.iter().zip(b.iter()) {
                assert!((s - t).abs() <= 1e-10 * a[0]);
            }
        }
    }

    #[test]
    fn rank_deficient_products_have_clean_tails_and_faithful_bases() {
        // Regression sweep over exactly rank-r products, the input class on
        // which the dense SVD mispairs triplets for a few percent of draws.
        for (m, n, r) in [(30, 40, 4), (40, 30, 4), (25, 25, 5), (80, 100, 5), (12, 9, 3)] {
            for seed in 1000..1020u64 {
                let x = rank_r_product(m, n, r, seed);
                let sv = singular_values(&x).unwrap();
                assert!(
                    sv[r] <= 1e-7 * sv[0],
                    "tail σ_{} = {:.3e} vs σ_1 = {:.3e} ({m}x{n} seed {seed})",
                    r + 1,
                    sv[r],
                    sv[0]
                );
                assert!(sv[r - 1] > 1e-4 * sv[0], "healthy σ_r expected");

                let x_norm = x.norm();
                let l = left_singular_basis(&x, r).unwrap();
                let left_residual = (&l * (l.transpose() * &x) - &x).norm();
                assert!(
                    left_residual <= 1e-8 * x_norm,
                    "left basis misses the column space: {left_residual:.3e} \
                     ({m}x{n} seed {seed})"
                );
                let v = right_singular_basis(&x, r).unwrap();
                let right_residual = ((&x * &v) * v.transpose() - &x).norm();
                assert!(
                    right_residual <= 1e-8 * x_norm,
                    "right basis misses the row space: {right_residual:.3e} \
                     ({m}x{n} seed {seed})"
                );
            }
        }
    }

    #[test]
    fn bases_are_orthonormal_for_tall_and_wide_inputs() {
        for (m, n, r, seed) in [(40, 8, 8, 10u64), (40, 8, 3, 11), (8, 40, 3, 12), (21, 21, 5, 13)] {
            let x = rank_r_product(m, n, r.max(3), seed);
            let basis = left_singular_basis(&x, r.min(3)).unwrap();
            assert_eq!(basis.nrows(), m);
            let gram = basis.transpose() * &basis;
            let eye = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
            assert!((gram - eye).amax() < 1e-12, "shape {m}x{n} seed {seed}");
        }
    }

    #[test]
    fn basis_extraction_rejects_unidentifiable_requests() {
        let x = rank_r_product(10, 12, 2, 99);
        assert!(matches!(
            left_singular_basis(&x, 3),
            Err(Error::RankDeficient(_))
        ));
        assert!(left_singular_basis(&x, 0).is_err());
        assert!(left_singular_basis(&x, 11).is_err());
        assert!(right_singular_basis(&x, 2).is_ok());
    }

    #[test]
    fn pinv_solve_matches_hand_least_squares() {
        // Overdetermined: normal equations Gx = aᵀb with G = [[2,1],[1,2]],
        // aᵀb = (1, 2) give x = (0, 1) by hand.
        let a = dmatrix![1.0, 0.0; 0.0, 1.0; 1.0, 1.0];
        let b = DVector::from_vec(vec![1.0, 2.0, 0.0]);
        let (x, sigma_max) = pinv_solve(&a, &b, 1e-10).unwrap();
        assert!((x[0] - 0.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((sigma_max - 3f64.sqrt()).abs() < 1e-12);

        // Underdetermined: the minimum-norm solution of x₁ + x₂ = 2 is (1, 1).
        let a = dmatrix![1.0, 1.0];
        let b = DVector::from_vec(vec![2.0]);
        let (x, sigma_max) = pinv_solve(&a, &b, 1e-10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((sigma_max - 2f64.sqrt()).abs() < 1e-12);

        // A numerically zero system solves to zero and reports σ_max = 0.
        let (x, sigma_max) = pinv_solve(&DMatrix::zeros(3, 2), &DVector::zeros(3), 1e-10).unwrap();
        assert_eq!(sigma_max, 0.0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pinv_solve_truncates_below_the_requested_tolerance() {
        // σ = {1, 1e-3}: a generous tolerance drops the weak direction.
        let a = DMatrix::from_partial_diagonal(2, 2, &[1.0, 1e-3]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        let (sharp, _) = pinv_solve(&a, &b, 1e-6).unwrap();
        assert!((sharp[1] - 1e3).abs() < 1e-6);
        let (blunt, _) = pinv_solve(&a, &b, 1e-2).unwrap();
        assert_eq!(blunt[1], 0.0);
        assert!((blunt[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_solve_rejects_bad_inputs() {
        let a = dmatrix![1.0, 0.0; 0.0, 1.0];
        let b3 = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(pinv_solve(&a, &b3, 1e-10).is_err());
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(pinv_solve(&a, &b, 0.0).is_err());
        assert!(pinv_solve(&a, &b, f64::NAN).is_err());
        let bad = dmatrix![f64::INFINITY, 0.0; 0.0, 1.0];
        assert!(pinv_solve(&bad, &b, 1e-10).is_err());
        let nan_b = DVector::from_vec(vec![f64::NAN, 0.0]);
        assert!(pinv_solve(&a, &nan_b, 1e-10).is_err());
    }
}
