//! Closed-form stability-bound evaluators paired with their measured
//! left-hand sides.
//!
//! Each evaluator returns either the bare right-hand-side value of a bound
//! or a [`BoundReport`] that compares a measured quantity against it. The
//! multiplicative constants the bounds depend on are never pinned down by
//! theory, so they are explicit inputs ([`BoundConstants`]) with neutral
//! defaults of 1; the harness fits them empirically.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matcore::{norm, project_omega, MatrixNorm, ObservedMatrix, ProblemShape, SampleSet};
use crate::subgeo::{
    complete_column, Subspace, DEFAULT_PINV_TOL,
};

/// Absolute slack granted to every inequality check, absorbing floating-point
/// round-off in the lhs/rhs evaluations.
pub const BOUND_SLACK: f64 = 1e-9;

/// The unknown multiplicative constants appearing in the bounds.
///
/// All logarithms in the bound formulas are natural (see [`Self::LOG_BASE`]).
/// A single generic constant `c_loss_gap` scales every sampling-gap term of
/// the form k·(nr·ln n/|Ω|)^¼ — in the factorization-error, loss-gap,
/// targeted-attack, and spectral competitor bounds — while the mass-attack
/// and Gaussian σ_min bounds carry their own constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// Scales the k·(nr·ln n/|Ω|)^¼ sampling-gap term.
    pub c_loss_gap: f64,
    /// Scales the honest-block mass-attack bound.
    pub c1_mass: f64,
    /// Scales the attacker-block mass-attack bound.
    pub c2_mass: f64,
    /// Scales the √(ln m/m) term of the Gaussian σ_min bound.
    pub c_sigma_min: f64,
}

impl BoundConstants {
    /// Base of every logarithm in the bound formulas: fixed to e.
    pub const LOG_BASE: f64 = std::f64::consts::E;

    fn validate(&self) -> Result<()> {
        for (label, c) in [
            ("c_loss_gap", self.c_loss_gap),
            ("c1_mass", self.c1_mass),
            ("c2_mass", self.c2_mass),
            ("c_sigma_min", self.c_sigma_min),
        ] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "bound constant {label} must be positive and finite, got {c}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c_loss_gap: 1.0,
            c1_mass: 1.0,
            c2_mass: 1.0,
            c_sigma_min: 1.0,
        }
    }
}

/// One evaluated inequality: a measured `lhs` against a bound `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Exactly `lhs ≤ rhs + BOUND_SLACK`.
    pub satisfied: bool,
    /// Echo of the parameters behind the evaluation, for the CSV trail.
    pub inputs: Vec<(String, f64)>,
}

impl BoundReport {
    /// Header of the CSV serialization produced by [`Self::csv_row`].
    pub const CSV_HEADER: &'static str = "name,lhs,rhs,satisfied,params";

    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, inputs: Vec<(String, f64)>) -> Self {
        BoundReport {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs <= rhs + BOUND_SLACK,
            inputs,
        }
    }

    /// One CSV row; parameter echoes are `;`-joined `key=value` pairs.
    pub fn csv_row(&self) -> String {
        let params: Vec<String> = self
            .inputs
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!(
            "{},{},{},{},{}",
            self.name,
            self.lhs,
            self.rhs,
            self.satisfied,
            params.join(";")
        )
    }
}

fn require_samples(omega_size: usize) -> Result<()> {
    if omega_size == 0 {
        return Err(Error::InvalidArgument(
            "bound evaluation needs a non-empty sample set".into(),
        ));
    }
    Ok(())
}

fn require_log_arg(n: usize, label: &str) -> Result<()> {
    if n <= 1 {
        return Err(Error::InvalidArgument(format!(
            "{label} must exceed 1 so its logarithm is positive, got {n}"
        )));
    }
    Ok(())
}

fn require_rating_bound(k: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rating bound k must be positive and finite, got {k}"
        )));
    }
    Ok(())
}

/// Frobenius norm of X restricted to the sampled entries, without
/// materializing the masked matrix.
fn masked_frobenius(x: &DMatrix<f64>, omega: &SampleSet) -> f64 {
    omega
        .entries()
        .iter()
        .map(|&(i, j)| x[(i, j)] * x[(i, j)])
        .sum::<f64>()
        .sqrt()
}

/// Gap between the sampled and the full root-mean-square residual of a
/// candidate completion:
/// |(1/√|Ω|)·‖P_Ω(Ŷ−Y*)‖_F − (1/√(mn))·‖Ŷ−Y*‖_F|.
pub fn rms_sampling_gap(
    y_hat: &DMatrix<f64>,
    y_star: &DMatrix<f64>,
    omega: &SampleSet,
) -> Result<f64> {
    if y_hat.shape() != y_star.shape()
        || y_hat.shape() != (omega.nrows(), omega.ncols())
    {
        return Err(Error::ShapeMismatch {
            expected_rows: omega.nrows(),
            expected_cols: omega.ncols(),
            rows: y_star.nrows(),
            cols: y_star.ncols(),
        });
    }
    require_samples(omega.len())?;
    let diff = y_hat - y_star;
    let sampled = masked_frobenius(&diff, omega) / (omega.len() as f64).sqrt();
    let full = norm(&diff, MatrixNorm::Frobenius)?
        / ((y_hat.nrows() * y_hat.ncols()) as f64).sqrt();
    Ok((sampled - full).abs())
}

/// Square root of the gap between the sampled and the full *mean-square*
/// residual of a candidate completion:
/// √|(1/|Ω|)·‖P_Ω(Ŷ−Y*)‖²_F − (1/(mn))·‖Ŷ−Y*‖²_F|.
///
/// Always ≥ [`rms_sampling_gap`] on the same inputs (for a, b ≥ 0,
/// |a−b| ≤ √|a²−b²|), and scales like the fourth-root sampling-gap term:
/// the mean-square gap is a centered sampling fluctuation of order
/// k²·√(1/|Ω|), so its square root tracks k·(1/|Ω|)^¼ directly, making this
/// the right witness for fitting the gap constant empirically.
pub fn quadratic_sampling_gap(
    y_hat: &DMatrix<f64>,
    y_star: &DMatrix<f64>,
    omega: &SampleSet,
) -> Result<f64> {
    if y_hat.shape() != y_star.shape()
        || y_hat.shape() != (omega.nrows(), omega.ncols())
    {
        return Err(Error::ShapeMismatch {
            expected_rows: omega.nrows(),
            expected_cols: omega.ncols(),
            rows: y_star.nrows(),
            cols: y_star.ncols(),
        });
    }
    require_samples(omega.len())?;
    let diff = y_hat - y_star;
    let sampled_ms = masked_frobenius(&diff, omega).powi(2) / omega.len() as f64;
    let full_ms = norm(&diff, MatrixNorm::Frobenius)?.powi(2)
        / (y_hat.nrows() * y_hat.ncols()) as f64;
    Ok((sampled_ms - full_ms).abs().sqrt())
}

/// The sampling-gap term C·k·(n·r·ln n/|Ω|)^¼ bounding the deviation between
/// sampled and full RMS loss, uniformly over entrywise-bounded rank-r
/// matrices.
pub fn loss_gap_bound(
    shape: &ProblemShape,
    k: f64,
    omega_size: usize,
    consts: &BoundConstants,
) -> Result<f64> {
    require_samples(omega_size)?;
    require_log_arg(shape.n, "column count n")?;
    require_rating_bound(k)?;
    consts.validate()?;
    let n = shape.n as f64;
    let ratio = n * shape.r as f64 * n.ln() / omega_size as f64;
    Ok(consts.c_loss_gap * k * ratio.powf(0.25))
}

/// Full RMSE bound for the box-constrained rank-r completion:
/// (1/√|Ω|)·‖P_Ω(E)‖_F + ‖E‖_F/√(mn) + C·k·(n·r·ln n/|Ω|)^¼.
pub fn factorization_rmse_bound(
    e: &DMatrix<f64>,
    omega: &SampleSet,
    shape: &ProblemShape,
    k: f64,
    consts: &BoundConstants,
) -> Result<f64> {
    if e.shape() != (shape.m, shape.n) || e.shape() != (omega.nrows(), omega.ncols()) {
        return Err(Error::ShapeMismatch {
            expected_rows: shape.m,
            expected_cols: shape.n,
            rows: e.nrows(),
            cols: e.ncols(),
        });
    }
    require_samples(omega.len())?;
    let sampled_term = masked_frobenius(e, omega) / (omega.len() as f64).sqrt();
    let full_term =
        norm(e, MatrixNorm::Frobenius)? / ((shape.m * shape.n) as f64).sqrt();
    let gap_term = loss_gap_bound(shape, k, omega.len(), consts)?;
    Ok(sampled_term + full_term + gap_term)
}

/// Competitor RMSE bound for trace-norm completion:
/// √(32·min(m,n)/|Ω|)·‖P_Ω(E)‖_F + (1/√(mn))·‖P_Ω(E)‖_F.
pub fn stablemc_rmse_bound(
    e: &DMatrix<f64>,
    omega: &SampleSet,
    shape: &ProblemShape,
) -> Result<f64> {
    if e.shape() != (shape.m, shape.n) || e.shape() != (omega.nrows(), omega.ncols()) {
        return Err(Error::ShapeMismatch {
            expected_rows: shape.m,
            expected_cols: shape.n,
            rows: e.nrows(),
            cols: e.ncols(),
        });
    }
    require_samples(omega.len())?;
    let masked = masked_frobenius(e, omega);
    let mn = (shape.m * shape.n) as f64;
    let lead = (32.0 * shape.m.min(shape.n) as f64 / omega.len() as f64).sqrt();
    Ok(lead * masked + masked / mn.sqrt())
}

/// Competitor RMSE bound for spectral trimming-based completion:
/// C·κ²·(n·√r/|Ω|)·‖P_Ω(E)‖₂.
pub fn optspace_rmse_bound(
    e: &DMatrix<f64>,
    omega: &SampleSet,
    shape: &ProblemShape,
    kappa: f64,
    consts: &BoundConstants,
) -> Result<f64> {
    if e.shape() != (shape.m, shape.n) || e.shape() != (omega.nrows(), omega.ncols()) {
        return Err(Error::ShapeMismatch {
            expected_rows: shape.m,
            expected_cols: shape.n,
            rows: e.nrows(),
            cols: e.ncols(),
        });
    }
    require_samples(omega.len())?;
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "condition number must be ≥ 1, got {kappa}"
        )));
    }
    consts.validate()?;
    let masked_spectral = norm(&project_omega(e, omega)?, MatrixNorm::Spectral)?;
    let lead = shape.n as f64 * (shape.r as f64).sqrt() / omega.len() as f64;
    Ok(consts.c_loss_gap * kappa * kappa * lead * masked_spectral)
}

/// Outcome of the known-subspace oracle: measured root-mean-square residual
/// on the sampled entries against the prediction √(1/|Ω|)·‖P_Ω(E)‖_F.
///
/// The two sides approximate each other rather than bounding one another,
/// so the comparison is a ratio, not an inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// √(1/|Ω|)·‖P_Ω(completion − Ŷ)‖_F over the sampled entries.
    pub measured_rmse: f64,
    /// √(1/|Ω|)·‖P_Ω(E)‖_F, the predicted residual level.
    pub predicted_rmse: f64,
    /// measured/predicted, absent when the prediction is exactly zero.
    pub ratio: Option<f64>,
    /// Columns that could not be completed (no usable observations); their
    /// entries in the returned matrix are zero.
    pub degenerate_columns: Vec<usize>,
}

/// Completes every column of `obs` against the ground-truth subspace and
/// reports how the residual compares with its predicted level. `clean` is
/// the noiseless matrix, used only to isolate the noise E = Ŷ − Y on the
/// sampled entries.
pub fn oracle_complete(
    n_gnd: &Subspace,
    obs: &ObservedMatrix,
    clean: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, OracleReport)> {
    let (m, n) = (obs.nrows(), obs.ncols());
    if n_gnd.ambient_dim() != m {
        return Err(Error::ShapeMismatch {
            expected_rows: m,
            expected_cols: n_gnd.dim(),
            rows: n_gnd.ambient_dim(),
            cols: n_gnd.dim(),
        });
    }
    if clean.shape() != (m, n) {
        return Err(Error::ShapeMismatch {
            expected_rows: m,
            expected_cols: n,
            rows: clean.nrows(),
            cols: clean.ncols(),
        });
    }
    let rows_by_column = obs.omega().rows_by_column();
    let mut completion = DMatrix::zeros(m, n);
    let mut degenerate = Vec::new();
    for (j, rows) in rows_by_column.iter().enumerate() {
        if rows.is_empty() {
            degenerate.push(j);
            continue;
        }
        let y_obs: Vec<f64> = rows.iter().map(|&i| obs.values()[(i, j)]).collect();
        match complete_column(n_gnd, rows, &y_obs, DEFAULT_PINV_TOL) {
            Ok(col) => completion.set_column(j, &col),
            Err(Error::DegenerateMask(_)) => degenerate.push(j),
            Err(e) => return Err(e),
        }
    }
    let omega = obs.omega();
    let size = omega.len() as f64;
    let mut measured_sq = 0.0;
    let mut predicted_sq = 0.0;
    for &(i, j) in omega.entries() {
        let observed = obs.values()[(i, j)];
        measured_sq += (completion[(i, j)] - observed).powi(2);
        predicted_sq += (observed - clean[(i, j)]).powi(2);
    }
    let measured_rmse = (measured_sq / size).sqrt();
    let predicted_rmse = (predicted_sq / size).sqrt();
    let ratio = if predicted_rmse > 0.0 {
        Some(measured_rmse / predicted_rmse)
    } else {
        None
    };
    Ok((
        completion,
        OracleReport {
            measured_rmse,
            predicted_rmse,
            ratio,
            degenerate_columns: degenerate,
        },
    ))
}

/// Top-r left and right singular subspaces of a matrix.
fn principal_subspaces(x: &DMatrix<f64>, r: usize) -> Result<(Subspace, Subspace)> {
    let col = Subspace::new(crate::linalg::left_singular_basis(x, r)?)?;
    let row = Subspace::new(crate::linalg::right_singular_basis(x, r)?)?;
    Ok((col, row))
}

/// Compares the tilt of the recovered column and row subspaces, and the
/// drift of the recovered r-th singular value, against their perturbation
/// bounds. `y` is the exactly rank-r reference, `y_star` the recovery.
///
/// Emits seven reports: ‖sinΘ‖ ≤ (√2/δ)·‖ℙ^⊥Δ‖ for column and row spaces in
/// Frobenius and spectral norms, plus three brackets pinning δ (the r-th
/// singular value of the recovery) near the r-th singular value of the
/// reference and of its two subspace-aligned intermediates.
pub fn subspace_stability_report(
    y: &DMatrix<f64>,
    y_star: &DMatrix<f64>,
    r: usize,
) -> Result<Vec<BoundReport>> {
    let (m, n) = y.shape();
    if y_star.shape() != (m, n) {
        return Err(Error::ShapeMismatch {
            expected_rows: m,
            expected_cols: n,
            rows: y_star.nrows(),
            cols: y_star.ncols(),
        });
    }
    if r == 0 || r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range for a {m}x{n} matrix"
        )));
    }
    let rank_floor = crate::linalg::GRAM_SIGMA_FLOOR;
    let sv_y = crate::linalg::singular_values(y)?;
    if sv_y[r - 1] <= rank_floor * sv_y[0] || sv_y[0] == 0.0 {
        return Err(Error::RankDeficient(format!(
            "reference matrix has numerical rank below {r}"
        )));
    }
    if r < m.min(n) && sv_y[r] > rank_floor * sv_y[0] {
        return Err(Error::RankDeficient(format!(
            "reference matrix has numerical rank above {r} (σ_{}/σ_1 = {:.3e})",
            r + 1,
            sv_y[r] / sv_y[0]
        )));
    }
    let sv_star = crate::linalg::singular_values(y_star)?;
    let delta_sv = sv_star[r - 1];
    if delta_sv <= rank_floor * sv_star[0] || sv_star[0] == 0.0 {
        return Err(Error::RankDeficient(format!(
            "recovery's r-th singular value {delta_sv:.3e} is numerically zero; \
             its rank-{r} subspaces are not identifiable"
        )));
    }

    let (col_ref, row_ref) = principal_subspaces(y, r)?;
    let (col_rec, row_rec) = principal_subspaces(y_star, r)?;
    // sin Θ through the perp-projected recovered basis: the singular values
    // of (I − AAᵀ)B are exactly the canonical sines, and the residual form
    // stays accurate for angles far below the arccos resolution floor of
    // [`canonical_angles`].
    let col_resid =
        col_rec.basis() - col_ref.basis() * (col_ref.basis().transpose() * col_rec.basis());
    let row_resid =
        row_rec.basis() - row_ref.basis() * (row_ref.basis().transpose() * row_rec.basis());

    let diff = y_star - y;
    let col_in = col_ref.basis() * (col_ref.basis().transpose() * &diff);
    let col_perp = &diff - &col_in;
    let diff_t = diff.transpose();
    let row_in_t = row_ref.basis() * (row_ref.basis().transpose() * &diff_t);
    let row_perp_t = &diff_t - &row_in_t;

    let inputs = vec![
        ("m".to_string(), m as f64),
        ("n".to_string(), n as f64),
        ("r".to_string(), r as f64),
        ("sigma_r_recovered".to_string(), delta_sv),
    ];
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut reports = Vec::with_capacity(7);
    for (label, resid, perp) in [
        ("column_tilt", &col_resid, &col_perp),
        ("row_tilt", &row_resid, &row_perp_t),
    ] {
        for (suffix, kind) in [
            ("frobenius", MatrixNorm::Frobenius),
            ("spectral", MatrixNorm::Spectral),
        ] {
            reports.push(BoundReport::new(
                format!("{label}_{suffix}"),
                norm(resid, kind)?,
                sqrt2 / delta_sv * norm(perp, kind)?,
                inputs.clone(),
            ));
        }
    }

    let aligned_col = y + &col_in;
    let aligned_row = y + row_in_t.transpose();
    let sigma_r_aligned_col = crate::linalg::singular_values(&aligned_col)?[r - 1];
    let sigma_r_aligned_row = crate::linalg::singular_values(&aligned_row)?[r - 1];
    for (label, reference_sigma, radius) in [
        (
            "recovered_sigma_r_full_bracket",
            sv_y[r - 1],
            norm(&diff, MatrixNorm::Spectral)?,
        ),
        (
            "recovered_sigma_r_column_bracket",
            sigma_r_aligned_col,
            norm(&col_perp, MatrixNorm::Spectral)?,
        ),
        (
            "recovered_sigma_r_row_bracket",
            sigma_r_aligned_row,
            norm(&row_perp_t, MatrixNorm::Spectral)?,
        ),
    ] {
        reports.push(BoundReport::new(
            label,
            (delta_sv - reference_sigma).abs(),
            radius,
            inputs.clone(),
        ));
    }
    Ok(reports)
}

/// Prediction-error bound for a single user completed from partial ratings:
/// (1 + 1/σ_min)·ρ·‖y‖ + ‖y_perp‖/σ_min, where ρ is the spectral subspace
/// tilt and ‖y_perp‖ the user's energy outside the model subspace (0 for an
/// in-subspace user).
pub fn user_prediction_bound(
    rho: f64,
    sigma_min: f64,
    y_norm: f64,
    y_perp_norm: f64,
) -> Result<f64> {
    if !(sigma_min > 0.0 && sigma_min.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma_min must be positive and finite, got {sigma_min}"
        )));
    }
    for (label, v) in [
        ("rho", rho),
        ("y_norm", y_norm),
        ("y_perp_norm", y_perp_norm),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{label} must be non-negative and finite, got {v}"
            )));
        }
    }
    Ok((1.0 + 1.0 / sigma_min) * rho * y_norm + y_perp_norm / sigma_min)
}

/// Lower bound on the restricted-basis σ_min under a row-incoherence
/// assumption with parameter μ: 1 − √(r/m + (1−p)·μ·√r).
pub fn sigma_min_incoherence_bound(r: usize, m: usize, p: f64, mu: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("ambient dimension must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "sampling rate must lie in [0, 1], got {p}"
        )));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "incoherence parameter must be non-negative, got {mu}"
        )));
    }
    let inner = r as f64 / m as f64 + (1.0 - p) * mu * (r as f64).sqrt();
    if inner < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "incoherence bound is undefined: inner expression {inner} is negative"
        )));
    }
    Ok(1.0 - inner.sqrt())
}

/// Lower bound on the restricted-basis σ_min when the subspace comes from a
/// Gaussian factor: √(observed_rows/m) − 2√(r/m) − C·√(ln m/m).
pub fn sigma_min_gaussian_bound(
    observed_rows: usize,
    m: usize,
    r: usize,
    consts: &BoundConstants,
) -> Result<f64> {
    if observed_rows == 0 || observed_rows > m {
        return Err(Error::InvalidArgument(format!(
            "observed row count must lie in 1..={m}, got {observed_rows}"
        )));
    }
    consts.validate()?;
    let m_f = m as f64;
    Ok((observed_rows as f64 / m_f).sqrt()
        - 2.0 * (r as f64 / m_f).sqrt()
        - consts.c_sigma_min * (m_f.ln() / m_f).sqrt())
}

/// RMSE bound under targeted (copy-plus-sparse-overwrite) attacks:
/// 4k·√(s_max·n_e/|Ω|) + C·k·((n+n_e)·r·ln(n+n_e)/|Ω|)^¼.
pub fn targeted_attack_rmse_bound(
    s_max: usize,
    n_e: usize,
    omega_size: usize,
    n: usize,
    r: usize,
    k: f64,
    consts: &BoundConstants,
) -> Result<f64> {
    require_samples(omega_size)?;
    require_log_arg(n + n_e, "total column count n + n_e")?;
    require_rating_bound(k)?;
    consts.validate()?;
    let sparse_term =
        4.0 * k * (s_max as f64 * n_e as f64 / omega_size as f64).sqrt();
    let total = (n + n_e) as f64;
    let gap_ratio = total * r as f64 * total.ln() / omega_size as f64;
    Ok(sparse_term + consts.c_loss_gap * k * gap_ratio.powf(0.25))
}

/// RMSE bounds under mass (dense random) attacks, for the honest block and
/// the attacker block respectively:
/// (C₁·κ·k·(r³·ln n/(p³·n))^¼, C₂·k/√p).
pub fn mass_attack_rmse_bounds(
    kappa: f64,
    k: f64,
    r: usize,
    p: f64,
    n: usize,
    consts: &BoundConstants,
) -> Result<(f64, f64)> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "condition number must be ≥ 1, got {kappa}"
        )));
    }
    require_rating_bound(k)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling rate must lie in (0, 1], got {p}"
        )));
    }
    require_log_arg(n, "honest column count n")?;
    consts.validate()?;
    let r_f = r as f64;
    let honest_ratio = r_f.powi(3) * (n as f64).ln() / (p.powi(3) * n as f64);
    let honest = consts.c1_mass * kappa * k * honest_ratio.powf(0.25);
    let attacker = consts.c2_mass * k / p.sqrt();
    Ok((honest, attacker))
}

/// Checks the singular-value perturbation inequality
/// max_i |σᵢ(A+Δ) − σᵢ(A)| ≤ ‖Δ‖₂ (Weyl) on a concrete pair.
pub fn weyl_shift_check(a: &DMatrix<f64>, delta: &DMatrix<f64>) -> Result<BoundReport> {
    if a.shape() != delta.shape() {
        return Err(Error::ShapeMismatch {
            expected_rows: a.nrows(),
            expected_cols: a.ncols(),
            rows: delta.nrows(),
            cols: delta.ncols(),
        });
    }
    let base = crate::linalg::singular_values(a)?;
    let shifted = crate::linalg::singular_values(&(a + delta))?;
    let lhs = base
        .iter()
        .zip(shifted.iter())
        .map(|(s, t)| (s - t).abs())
        .fold(0.0, f64::max);
    let rhs = norm(delta, MatrixNorm::Spectral)?;
    Ok(BoundReport::new(
        "weyl_singular_value_shift",
        lhs,
        rhs,
        vec![
            ("m".to_string(), a.nrows() as f64),
            ("n".to_string(), a.ncols() as f64),
        ],
    ))
}
