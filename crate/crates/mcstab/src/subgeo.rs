//! Geometry of column subspaces: canonical angles, projector distances,
//! single-column completion from a known subspace, and the conditioning
//! quantities (restricted σ_min, coherence, condition number) that drive the
//! stability bounds.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matcore::{norm, MatrixNorm};

/// Relative pseudoinverse cutoff used by column completion when the caller
/// has no better choice: singular values below `tol · σ_max` are truncated.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Absolute floor under which a singular value is reported as exactly zero.
pub const SIGMA_ZERO_TOL: f64 = 1e-14;

/// An r-dimensional subspace of R^m, stored as an m×r matrix with
/// orthonormal columns (max |NᵀN − I| ≤ 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis after checking it is orthonormal.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let (m, r) = basis.shape();
        if r == 0 || m < r {
            return Err(Error::InvalidArgument(format!(
                "a subspace basis needs 1 <= r <= m, got {m}x{r}"
            )));
        }
        let gram = basis.transpose() * &basis;
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        if !worst.is_finite() || worst > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "basis columns are not orthonormal (max Gram deviation {worst:.3e})"
            )));
        }
        Ok(Subspace { basis })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Ambient dimension m.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Subspace dimension r.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The orthogonal projector NNᵀ onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Rows of the basis restricted to `rows`, one per index in order.
    fn restrict(&self, rows: &[usize]) -> DMatrix<f64> {
        let r = self.dim();
        DMatrix::from_fn(rows.len(), r, |i, j| self.basis[(rows[i], j)])
    }
}

/// Orthonormalizes the columns of `a` into a [`Subspace`] spanning the same
/// columns.
///
/// Fails with a rank-deficiency error (reporting the numerical rank) when the
/// columns do not span a full `a.ncols()`-dimensional space. Numerical rank
/// is judged at the [`crate::linalg::GRAM_SIGMA_FLOOR`] relative threshold.
pub fn orthonormalize(a: &DMatrix<f64>) -> Result<Subspace> {
    let (m, r) = a.shape();
    if r == 0 || m < r {
        return Err(Error::InvalidArgument(format!(
            "cannot orthonormalize a {m}x{r} matrix into a basis"
        )));
    }
    let sv = crate::linalg::singular_values(a)?;
    let sigma_max = sv[0];
    let numerical_rank = sv
        .iter()
        .filter(|&&s| s > crate::linalg::GRAM_SIGMA_FLOOR * sigma_max)
        .count();
    if sigma_max <= 0.0 || numerical_rank < r {
        return Err(Error::RankDeficient(format!(
            "columns span a rank-{numerical_rank} space, need rank {r}"
        )));
    }
    Subspace::new(crate::linalg::left_singular_basis(a, r)?)
}

/// Canonical angles θ₁ ≥ θ₂ ≥ … ≥ θ_r between two equal-dimension subspaces,
/// each in [0, π/2].
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalAngles {
    angles: Vec<f64>,
}

impl CanonicalAngles {
    /// All angles, descending.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// θ₁, the largest canonical angle.
    pub fn max_angle(&self) -> f64 {
        self.angles[0]
    }
}

/// Computes the canonical angles θᵢ = arccos σᵢ(AᵀB) between two subspaces.
///
/// Singular values are clamped to [0, 1] before the arccosine so that
/// rounding can never produce NaN. Because the angle is recovered from its
/// cosine, angles below √(2ε) ≈ 2e-8 are indistinguishable from zero and may
/// read as ~2e-8 noise.
pub fn canonical_angles(a: &Subspace, b: &Subspace) -> Result<CanonicalAngles> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "subspaces live in different ambient spaces ({} vs {})",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument(format!(
            "canonical angles need equal dimensions, got {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let product = a.basis().transpose() * b.basis();
    let sv = crate::linalg::singular_values(&product)?;
    // σ descending makes θ = arccos σ ascending; flip to descending.
    let mut angles: Vec<f64> = sv.iter().map(|&s| s.clamp(0.0, 1.0).acos()).collect();
    angles.reverse();
    Ok(CanonicalAngles { angles })
}

/// ‖sin Θ‖ for a set of canonical angles: the largest sine (spectral) or the
/// root sum of squared sines (Frobenius).
pub fn sin_theta_norm(angles: &CanonicalAngles, kind: MatrixNorm) -> f64 {
    match kind {
        MatrixNorm::Spectral => angles.max_angle().sin(),
        MatrixNorm::Frobenius => angles
            .angles()
            .iter()
            .map(|t| {
                let s = t.sin();
                s * s
            })
            .sum::<f64>()
            .sqrt(),
    }
}

/// Distance between the orthogonal projectors of two subspaces,
/// ‖AAᵀ − BBᵀ‖ in the requested norm.
///
/// For equal-dimension subspaces this relates to the canonical angles by
/// ‖P_A − P_B‖_F = √2 ‖sin Θ‖_F and ‖P_A − P_B‖₂ = sin θ₁.
pub fn projection_distance(a: &Subspace, b: &Subspace, kind: MatrixNorm) -> Result<f64> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::InvalidArgument(format!(
            "subspaces live in different ambient spaces ({} vs {})",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    norm(&(a.projector() - b.projector()), kind)
}

/// Validates a strictly-increasing-compatible row index list against an
/// ambient dimension: in range, non-empty, no duplicates.
fn check_rows(rows: &[usize], m: usize) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::DegenerateMask(
            "no observed rows to fit against".into(),
        ));
    }
    let mut seen = vec![false; m];
    for &i in rows {
        if i >= m {
            return Err(Error::InvalidArgument(format!(
                "row index {i} outside ambient dimension {m}"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidArgument(format!("duplicate row index {i}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Predicts a full column from its observed entries, assuming it lies near
/// the given subspace: y* = N · pinv(N₁) · y₁, where N₁ is the basis
/// restricted to the observed rows.
///
/// `pinv_tol` is the relative truncation threshold of the pseudoinverse
/// (singular values of N₁ below `pinv_tol · σ_max` are dropped); use
/// [`DEFAULT_PINV_TOL`] unless you have a reason not to.
pub fn complete_column(
    subspace: &Subspace,
    observed_rows: &[usize],
    y_obs: &[f64],
    pinv_tol: f64,
) -> Result<DVector<f64>> {
    let m = subspace.ambient_dim();
    check_rows(observed_rows, m)?;
    if y_obs.len() != observed_rows.len() {
        return Err(Error::InvalidArgument(format!(
            "{} observed rows but {} observed values",
            observed_rows.len(),
            y_obs.len()
        )));
    }
    if !(pinv_tol > 0.0 && pinv_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "pinv_tol must be positive and finite, got {pinv_tol}"
        )));
    }
    if y_obs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "observed values are not finite".into(),
        ));
    }
    let n1 = subspace.restrict(observed_rows);
    let y1 = DVector::from_column_slice(y_obs);
    let (coeffs, sigma_max) = crate::linalg::pinv_solve(&n1, &y1, pinv_tol)?;
    if sigma_max <= SIGMA_ZERO_TOL {
        return Err(Error::DegenerateMask(
            "restricted basis is numerically zero; the observed rows carry no signal".into(),
        ));
    }
    Ok(subspace.basis() * coeffs)
}

/// Smallest singular value of the basis restricted to the observed rows,
/// reported as 0 when the restriction cannot have full column rank or the
/// value falls below 1e-14.
pub fn restricted_sigma_min(subspace: &Subspace, observed_rows: &[usize]) -> Result<f64> {
    check_rows(observed_rows, subspace.ambient_dim())?;
    if observed_rows.len() < subspace.dim() {
        return Ok(0.0);
    }
    let n1 = subspace.restrict(observed_rows);
    let sv = crate::linalg::singular_values(&n1)?;
    let smin = sv[sv.len() - 1];
    Ok(if smin < SIGMA_ZERO_TOL { 0.0 } else { smin })
}

/// Standard coherence μ₀ of a subspace: (m/r) · maxᵢ ‖eᵢᵀN‖².
///
/// Flat subspaces have μ₀ near 1; a subspace aligned with a coordinate axis
/// reaches the maximum m/r.
pub fn coherence_mu0(subspace: &Subspace) -> f64 {
    let (m, r) = (subspace.ambient_dim(), subspace.dim());
    let max_row_sq = (0..m)
        .map(|i| subspace.basis().row(i).norm_squared())
        .fold(0.0, f64::max);
    m as f64 / r as f64 * max_row_sq
}

/// Condition number σ₁/σ_r of a matrix treated as rank r.
///
/// σ_r must clear the [`crate::linalg::GRAM_SIGMA_FLOOR`] relative floor, so
/// condition numbers beyond ~1e7 are reported as rank deficiency rather than
/// returned as noise.
pub fn condition_number(y: &DMatrix<f64>, r: usize) -> Result<f64> {
    let (m, n) = y.shape();
    if r == 0 || r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range for a {m}x{n} matrix"
        )));
    }
    let sv = crate::linalg::singular_values(y)?;
    let s1 = sv[0];
    let sr = sv[r - 1];
    if s1 == 0.0 || sr <= crate::linalg::GRAM_SIGMA_FLOOR * s1 {
        return Err(Error::RankDeficient(format!(
            "σ_{r} = {sr:.3e} vanishes relative to σ_1 = {s1:.3e}"
        )));
    }
    Ok(s1 / sr)
}
