//! Rank-r factorization of a partially observed matrix by alternating least
//! squares, plus the objective in factored and subspace form.
//!
//! The model is min ½ Σ_Ω (uᵢᵀvⱼ − ŷᵢⱼ)², optionally with a ridge term on
//! the factor being refit. Ratings are box-bounded by k; the solver leaves
//! iterates unconstrained and callers may clamp the assembled prediction
//! afterwards (`BoxMode::ClipFinal`).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Axis, Error, Result};
use crate::matcore::{project_omega, ObservedMatrix};
use crate::parallel::map_indexed;
use crate::subgeo::{Subspace, DEFAULT_PINV_TOL};

/// How the factors are initialized before the first sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMethod {
    /// Independent Gaussian entries scaled by sqrt(mean observed magnitude / r),
    /// drawn deterministically from the solver seed.
    #[default]
    GaussianRandom,
    /// Truncated SVD of the zero-filled observed matrix (deterministic; the
    /// seed is unused).
    SvdOfZeroFilled,
}

/// What to do about the |uᵢᵀvⱼ| ≤ k box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoxMode {
    /// Ignore the box during iterations and leave the output unclamped.
    #[default]
    Ignore,
    /// Ignore the box during iterations; consumers clamp the assembled
    /// prediction to [−k, k] (see [`box_project`]). The solver itself never
    /// constrains iterates.
    ClipFinal,
}

/// Tunables of [`als_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Hard cap on full (V then U) iterations.
    pub max_iterations: usize,
    /// Declare convergence when the relative objective decrease over one full
    /// iteration falls below this.
    pub rel_tolerance: f64,
    /// Ridge weight added to each least-squares subproblem; 0 disables it.
    /// A small positive value (1e-8 is plenty) makes the solver robust to
    /// masks that starve individual rows or columns.
    pub ridge: f64,
    pub init: InitMethod,
    pub box_mode: BoxMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 500,
            rel_tolerance: 1e-9,
            ridge: 0.0,
            init: InitMethod::default(),
            box_mode: BoxMode::default(),
        }
    }
}

/// The two factors of a rank-r model X = UVᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    /// m×r row factors.
    pub u: DMatrix<f64>,
    /// n×r column factors.
    pub v: DMatrix<f64>,
}

impl FactorPair {
    /// Assembles the dense prediction UVᵀ.
    pub fn product(&self) -> DMatrix<f64> {
        &self.u * self.v.transpose()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }
}

/// Outcome of an ALS run.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub factors: FactorPair,
    /// Objective value after every half-sweep (V-step, then U-step, per
    /// iteration).
    pub objective_trace: Vec<f64>,
    /// Full iterations performed.
    pub iterations: usize,
    /// Whether the relative-decrease test fired before `max_iterations`.
    pub converged: bool,
}

/// ½ Σ_Ω (uᵢᵀvⱼ − ŷᵢⱼ)², the data term of the solver objective.
pub fn objective(factors: &FactorPair, obs: &ObservedMatrix) -> Result<f64> {
    if factors.u.nrows() != obs.nrows() || factors.v.nrows() != obs.ncols() {
        return Err(Error::ShapeMismatch {
            expected_rows: obs.nrows(),
            expected_cols: obs.ncols(),
            rows: factors.u.nrows(),
            cols: factors.v.nrows(),
        });
    }
    if factors.u.ncols() != factors.v.ncols() {
        return Err(Error::InvalidArgument(format!(
            "factor ranks differ: {} vs {}",
            factors.u.ncols(),
            factors.v.ncols()
        )));
    }
    let mut sq = 0.0;
    for &(i, j) in obs.omega().entries() {
        let pred = factors.u.row(i).dot(&factors.v.row(j));
        let d = pred - obs.values()[(i, j)];
        sq += d * d;
    }
    Ok(0.5 * sq)
}

/// Clamps every entry of `x` to [−k, k].
pub fn box_project(x: &DMatrix<f64>, k: f64) -> Result<DMatrix<f64>> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "box bound k must be positive and finite, got {k}"
        )));
    }
    Ok(x.map(|v| v.clamp(-k, k)))
}

/// Solves one least-squares subproblem min ‖Av − b‖² + ridge·‖v‖² through an
/// orthogonal decomposition (SVD), never the normal equations. Zero rows of
/// data with zero ridge yield the zero vector.
fn solve_ls(a_rows: &[usize], basis: &DMatrix<f64>, rhs: &[f64], ridge: f64, r: usize) -> DVector<f64> {
    let t = a_rows.len();
    let aug = if ridge > 0.0 { t + r } else { t };
    if aug == 0 {
        return DVector::zeros(r);
    }
    let mut a = DMatrix::zeros(aug, r);
    let mut b = DVector::zeros(aug);
    for (row, &src) in a_rows.iter().enumerate() {
        for c in 0..r {
            a[(row, c)] = basis[(src, c)];
        }
        b[row] = rhs[row];
    }
    if ridge > 0.0 {
        let s = ridge.sqrt();
        for c in 0..r {
            a[(t + c, c)] = s;
        }
    }
    let svd = a.svd(true, true);
    let sigma_max = svd.singular_values[0];
    if sigma_max <= 0.0 {
        return DVector::zeros(r);
    }
    svd.solve(&b, 1e-12 * sigma_max)
        .unwrap_or_else(|_| DVector::zeros(r))
}

/// Fits a rank-r factorization to the observed entries by alternating least
/// squares, deterministically for a fixed seed and independent of thread
/// scheduling.
///
/// Each half-sweep refits every column of V (then every row of U) from its
/// own observed entries; the per-column subproblems are independent and run
/// in parallel under the `parallel` feature. With `ridge = 0`, any row or
/// column with fewer than r observed entries is rejected up front because its
/// subproblem is underdetermined.
pub fn als_solve(
    obs: &ObservedMatrix,
    r: usize,
    config: &SolverConfig,
    seed: u64,
) -> Result<SolveResult> {
    let (m, n) = (obs.nrows(), obs.ncols());
    if r == 0 {
        return Err(Error::InvalidArgument("rank must be at least 1".into()));
    }
    if config.max_iterations == 0 {
        return Err(Error::InvalidArgument(
            "max_iterations must be at least 1".into(),
        ));
    }
    if !(config.rel_tolerance >= 0.0 && config.rel_tolerance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "rel_tolerance must be finite and non-negative, got {}",
            config.rel_tolerance
        )));
    }
    if !(config.ridge >= 0.0 && config.ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ridge must be finite and non-negative, got {}",
            config.ridge
        )));
    }

    let rows_by_col = obs.omega().rows_by_column();
    let cols_by_row = obs.omega().cols_by_row();
    if config.ridge == 0.0 {
        for (j, rows) in rows_by_col.iter().enumerate() {
            if rows.len() < r {
                return Err(Error::StarvedIndex {
                    axis: Axis::Column,
                    index: j,
                    observed: rows.len(),
                    required: r,
                });
            }
        }
        for (i, cols) in cols_by_row.iter().enumerate() {
            if cols.len() < r {
                return Err(Error::StarvedIndex {
                    axis: Axis::Row,
                    index: i,
                    observed: cols.len(),
                    required: r,
                });
            }
        }
    }

    let (mut u, mut v) = init_factors(obs, r, config.init, seed);

    let mut trace = Vec::with_capacity(2 * config.max_iterations.min(1024));
    let mut prev_full: Option<f64> = None;
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..config.max_iterations {
        // V-step: refit every column factor against the frozen U.
        let new_v_rows = map_indexed(n, |j| {
            let rows = &rows_by_col[j];
            let rhs: Vec<f64> = rows.iter().map(|&i| obs.values()[(i, j)]).collect();
            solve_ls(rows, &u, &rhs, config.ridge, r)
        });
        for (j, col) in new_v_rows.iter().enumerate() {
            for c in 0..r {
                v[(j, c)] = col[c];
            }
        }
        let pair = FactorPair {
            u: u.clone(),
            v: v.clone(),
        };
        trace.push(objective(&pair, obs)?);

        // U-step: refit every row factor against the frozen V.
        let new_u_rows = map_indexed(m, |i| {
            let cols = &cols_by_row[i];
            let rhs: Vec<f64> = cols.iter().map(|&j| obs.values()[(i, j)]).collect();
            solve_ls(cols, &v, &rhs, config.ridge, r)
        });
        for (i, row) in new_u_rows.iter().enumerate() {
            for c in 0..r {
                u[(i, c)] = row[c];
            }
        }
        let pair = FactorPair {
            u: u.clone(),
            v: v.clone(),
        };
        let f_cur = objective(&pair, obs)?;
        trace.push(f_cur);
        iterations += 1;

        if let Some(f_prev) = prev_full {
            let decrease = if f_prev > 0.0 {
                (f_prev - f_cur) / f_prev
            } else {
                0.0
            };
            if decrease < config.rel_tolerance {
                converged = true;
                break;
            }
        }
        prev_full = Some(f_cur);
    }

    Ok(SolveResult {
        factors: FactorPair { u, v },
        objective_trace: trace,
        iterations,
        converged,
    })
}

fn init_factors(
    obs: &ObservedMatrix,
    r: usize,
    init: InitMethod,
    seed: u64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, n) = (obs.nrows(), obs.ncols());
    match init {
        InitMethod::GaussianRandom => {
            let count = obs.omega().len();
            let mean_abs = if count == 0 {
                0.0
            } else {
                obs.omega()
                    .entries()
                    .iter()
                    .map(|&(i, j)| obs.values()[(i, j)].abs())
                    .sum::<f64>()
                    / count as f64
            };
            let scale = if mean_abs > 0.0 {
                (mean_abs / r as f64).sqrt()
            } else {
                (1.0 / r as f64).sqrt()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |rows: usize, cols: usize| {
                let mut x = DMatrix::zeros(rows, cols);
                for c in 0..cols {
                    for i in 0..rows {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        x[(i, c)] = scale * g;
                    }
                }
                x
            };
            let u = draw(m, r);
            let v = draw(n, r);
            (u, v)
        }
        InitMethod::SvdOfZeroFilled => {
            let zero_filled =
                project_omega(obs.values(), obs.omega()).expect("shapes match by construction");
            let svd = zero_filled.svd(true, true);
            let take = r.min(svd.singular_values.len());
            let mut u = DMatrix::zeros(m, r);
            let mut v = DMatrix::zeros(n, r);
            let su = svd.u.expect("u requested");
            let vt = svd.v_t.expect("v_t requested");
            for c in 0..take {
                let w = svd.singular_values[c].max(0.0).sqrt();
                for i in 0..m {
                    u[(i, c)] = su[(i, c)] * w;
                }
                for j in 0..n {
                    v[(j, c)] = vt[(c, j)] * w;
                }
            }
            (u, v)
        }
    }
}

/// The subspace view of the objective: Σⱼ ‖y₁ⱼ − ℙ_{N₁ⱼ} y₁ⱼ‖², the squared
/// residual of every observed column against the basis restricted to that
/// column's observed rows. Columns with no observations contribute zero.
pub fn subspace_objective(subspace: &Subspace, obs: &ObservedMatrix) -> Result<f64> {
    if subspace.ambient_dim() != obs.nrows() {
        return Err(Error::ShapeMismatch {
            expected_rows: obs.nrows(),
            expected_cols: subspace.dim(),
            rows: subspace.ambient_dim(),
            cols: subspace.dim(),
        });
    }
    let rows_by_col = obs.omega().rows_by_column();
    let terms = map_indexed(obs.ncols(), |j| {
        let rows = &rows_by_col[j];
        if rows.is_empty() {
            return 0.0;
        }
        let r = subspace.dim();
        let mut n1 = DMatrix::zeros(rows.len(), r);
        let mut y1 = DVector::zeros(rows.len());
        for (t, &i) in rows.iter().enumerate() {
            for c in 0..r {
                n1[(t, c)] = subspace.basis()[(i, c)];
            }
            y1[t] = obs.values()[(i, j)];
        }
        let svd = n1.clone().svd(true, true);
        let sigma_max = svd.singular_values[0];
        if sigma_max <= 0.0 {
            return y1.norm_squared();
        }
        match svd.solve(&y1, DEFAULT_PINV_TOL * sigma_max) {
            Ok(coeffs) => (&n1 * coeffs - &y1).norm_squared(),
            Err(_) => y1.norm_squared(),
        }
    });
    Ok(terms.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{norm, rmse, sample_uniform, MatrixNorm, SampleSet};
    use crate::subgeo::orthonormalize;
    use approx::assert_relative_eq;

    fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng))
    }

    /// Random rank-r matrix observed at rate p, no noise.
    fn planted_instance(m: usize, n: usize, r: usize, p: f64, seed: u64) -> (DMatrix<f64>, ObservedMatrix) {
        let truth = gaussian(m, r, seed) * gaussian(n, r, seed + 1).transpose();
        let count = (p * m as f64 * n as f64).round() as usize;
        let omega = sample_uniform(m, n, count, seed + 2).unwrap();
        let k = truth.amax();
        let obs = ObservedMatrix::new(truth.clone(), omega, k).unwrap();
        (truth, obs)
    }

    #[test]
    fn box_project_clamps_and_validates() {
        let x = DMatrix::from_row_slice(2, 2, &[2.0, -0.5, -3.0, 1.0]);
        let clipped = box_project(&x, 1.0).unwrap();
        assert_eq!(
            clipped,
            DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -1.0, 1.0])
        );
        assert!(box_project(&x, 0.0).is_err());
        assert!(box_project(&x, f64::NAN).is_err());
    }

    #[test]
    fn objective_matches_hand_value() {
        // UVᵀ = [[3,4],[6,8]]; observed (0,0) = 3 and (1,1) = 10:
        // ½((3−3)² + (8−10)²) = 2.
        let factors = FactorPair {
            u: DMatrix::from_row_slice(2, 1, &[1.0, 2.0]),
            v: DMatrix::from_row_slice(2, 1, &[3.0, 4.0]),
        };
        let omega = SampleSet::new(2, 2, vec![(0, 0), (1, 1)]).unwrap();
        let mut values = DMatrix::zeros(2, 2);
        values[(0, 0)] = 3.0;
        values[(1, 1)] = 10.0;
        let obs = ObservedMatrix::new(values, omega, 10.0).unwrap();
        assert_relative_eq!(objective(&factors, &obs).unwrap(), 2.0);
    }

    #[test]
    fn objective_equals_scaled_empirical_loss() {
        // Identity linking the two loss conventions:
        // objective = ½ ‖P_Ω(UVᵀ − Ŷ)‖_F².
        let (_, obs) = planted_instance(12, 15, 2, 0.6, 50);
        let factors = FactorPair {
            u: gaussian(12, 2, 51),
            v: gaussian(15, 2, 52),
        };
        let masked_residual =
            project_omega(&(factors.product() - obs.values()), obs.omega()).unwrap();
        let oracle = 0.5 * norm(&masked_residual, MatrixNorm::Frobenius).unwrap().powi(2);
        assert_relative_eq!(
            objective(&factors, &obs).unwrap(),
            oracle,
            max_relative = 1e-10
        );
    }

    #[test]
    fn als_recovers_planted_low_rank_matrix() {
        let (truth, obs) = planted_instance(20, 25, 2, 0.6, 9);
        let result = als_solve(&obs, 2, &SolverConfig::default(), 99).unwrap();
        assert!(result.converged);
        let err = rmse(&result.factors.product(), &truth).unwrap();
        assert!(err < 1e-7, "rmse {err}");
    }

    #[test]
    fn als_svd_init_also_recovers() {
        let (truth, obs) = planted_instance(20, 25, 2, 0.5, 8);
        let config = SolverConfig {
            init: InitMethod::SvdOfZeroFilled,
            ..SolverConfig::default()
        };
        let result = als_solve(&obs, 2, &config, 0).unwrap();
        let err = rmse(&result.factors.product(), &truth).unwrap();
        assert!(err < 1e-7, "rmse {err}");
    }

    #[test]
    fn als_objective_trace_is_monotone_without_ridge() {
        let (_, obs) = planted_instance(15, 18, 2, 0.6, 9);
        let result = als_solve(&obs, 2, &SolverConfig::default(), 1).unwrap();
        assert!(!result.objective_trace.is_empty());
        for w in result.objective_trace.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-10) + 1e-12,
                "trace increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn als_rejects_starved_indices_without_ridge() {
        // Column 2 is observed once; a rank-2 fit needs two entries.
        let omega = SampleSet::new(
            3,
            3,
            vec![
                (0, 0),
                (1, 0),
                (2, 0),
                (0, 1),
                (1, 1),
                (2, 1),
                (0, 2),
            ],
        )
        .unwrap();
        let obs = ObservedMatrix::new(DMatrix::from_element(3, 3, 0.5), omega, 1.0).unwrap();
        match als_solve(&obs, 2, &SolverConfig::default(), 0) {
            Err(Error::StarvedIndex {
                axis: Axis::Column,
                index,
                observed,
                required,
            }) => {
                assert_eq!((index, observed, required), (2, 1, 2));
            }
            other => panic!("expected starved column, got {other:?}"),
        }
        // A touch of ridge makes the same problem well-posed.
        let ridged = SolverConfig {
            ridge: 1e-8,
            ..SolverConfig::default()
        };
        assert!(als_solve(&obs, 2, &ridged, 0).is_ok());
    }

    #[test]
    fn als_validates_config() {
        let (_, obs) = planted_instance(6, 6, 1, 1.0, 10);
        assert!(als_solve(&obs, 0, &SolverConfig::default(), 0).is_err());
        let bad_iters = SolverConfig {
            max_iterations: 0,
            ..SolverConfig::default()
        };
        assert!(als_solve(&obs, 1, &bad_iters, 0).is_err());
        let bad_ridge = SolverConfig {
            ridge: -1.0,
            ..SolverConfig::default()
        };
        assert!(als_solve(&obs, 1, &bad_ridge, 0).is_err());
        let bad_tol = SolverConfig {
            rel_tolerance: f64::NAN,
            ..SolverConfig::default()
        };
        assert!(als_solve(&obs, 1, &bad_tol, 0).is_err());
    }

    #[test]
    fn als_is_bitwise_deterministic_for_a_fixed_seed() {
        let (_, obs) = planted_instance(15, 20, 2, 0.5, 11);
        let a = als_solve(&obs, 2, &SolverConfig::default(), 5).unwrap();
        let b = als_solve(&obs, 2, &SolverConfig::default(), 5).unwrap();
        assert_eq!(a.factors.u, b.factors.u);
        assert_eq!(a.factors.v, b.factors.v);
        assert_eq!(a.objective_trace, b.objective_trace);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn als_result_does_not_depend_on_thread_count() {
        let (_, obs) = planted_instance(15, 20, 2, 0.5, 12);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let single = pool.install(|| als_solve(&obs, 2, &SolverConfig::default(), 5).unwrap());
        let ambient = als_solve(&obs, 2, &SolverConfig::default(), 5).unwrap();
        assert_eq!(single.factors.u, ambient.factors.u);
        assert_eq!(single.factors.v, ambient.factors.v);
        assert_eq!(single.objective_trace, ambient.objective_trace);
    }

    #[test]
    fn als_completion_is_seed_invariant_when_well_sampled() {
        // Different random inits must land on the same completion of a
        // noiseless, well-sampled instance.
        let (_, obs) = planted_instance(20, 25, 2, 0.6, 13);
        let a = als_solve(&obs, 2, &SolverConfig::default(), 1).unwrap();
        let b = als_solve(&obs, 2, &SolverConfig::default(), 2).unwrap();
        let gap = rmse(&a.factors.product(), &b.factors.product()).unwrap();
        assert!(gap < 1e-5, "seed gap {gap}");
    }

    #[test]
    fn subspace_objective_matches_half_sweep_optimum() {
        // With V* the per-column least-squares fit against U, the factored
        // objective at (U, V*) equals half the subspace residual of span(U).
        let (_, obs) = planted_instance(14, 17, 3, 0.7, 14);
        let u = gaussian(14, 3, 15);
        // Oracle half-sweep, written independently of the solver internals.
        let rows_by_col = obs.omega().rows_by_column();
        let mut v_star = DMatrix::zeros(17, 3);
        for (j, rows) in rows_by_col.iter().enumerate() {
            let mut a = DMatrix::zeros(rows.len(), 3);
            let mut b = DVector::zeros(rows.len());
            for (t, &i) in rows.iter().enumerate() {
                for c in 0..3 {
                    a[(t, c)] = u[(i, c)];
                }
                b[t] = obs.values()[(i, j)];
            }
            let svd = a.svd(true, true);
            let x = svd.solve(&b, 1e-12 * svd.singular_values[0]).unwrap();
            for c in 0..3 {
                v_star[(j, c)] = x[c];
            }
        }
        let pair = FactorPair { u: u.clone(), v: v_star };
        let span = orthonormalize(&u).unwrap();
        assert_relative_eq!(
            subspace_objective(&span, &obs).unwrap(),
            2.0 * objective(&pair, &obs).unwrap(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn subspace_objective_vanishes_on_consistent_data() {
        let (truth, obs) = planted_instance(12, 15, 2, 0.8, 16);
        let svd = truth.clone().svd(true, false);
        let mut basis = DMatrix::zeros(12, 2);
        for c in 0..2 {
            for i in 0..12 {
                basis[(i, c)] = svd.u.as_ref().unwrap()[(i, c)];
            }
        }
        let span = crate::subgeo::Subspace::new(basis).unwrap();
        let res = subspace_objective(&span, &obs).unwrap();
        assert!(res < 1e-18, "residual {res}");
    }
}
