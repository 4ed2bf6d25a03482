//! The bound-verification suite: per seed, build a noisy instance, solve it
//! once, and grade every implemented inequality against measurements from
//! that solve. A fitting pass first finds the smallest sampling-gap constant
//! that covers all seeds; the fitted bound is then re-graded per seed.
//!
//! Reports split into two classes. Deterministic inequalities (projector
//! identities, singular-value shift, subspace tilt and bracket bounds, user
//! prediction bounds, and the premise-gated recovery chain) are provable
//! facts about the measured objects — an unsatisfied one is a defect and
//! drives exit code 1. The remaining reports carry with-high-probability bounds
//! with fitted or unit constants; they are recorded but never fail the run.

use nalgebra::{DMatrix, DVector};

use mcstab::bounds::{
    loss_gap_bound, mass_attack_rmse_bounds, rms_sampling_gap, sigma_min_gaussian_bound,
    sigma_min_incoherence_bound, subspace_stability_report, targeted_attack_rmse_bound,
    user_prediction_bound, weyl_shift_check, BoundConstants, BoundReport,
};
use mcstab::factor::{als_solve, objective, FactorPair};
use mcstab::matcore::{
    norm, project_omega, rmse, sample_rows, MatrixNorm,
};
use mcstab::subgeo::{
    coherence_mu0, complete_column, orthonormalize, restricted_sigma_min, projection_distance,
    canonical_angles, sin_theta_norm, Subspace, DEFAULT_PINV_TOL,
};
use mcstab::{Error, Result};

use crate::config::ExperimentConfig;
use crate::fit::{fit_loss_gap_constant, GapTrial};
use crate::report::{write_csv, BOUND_CSV_HEADER};
use crate::scenarios::{build_instance, gaussian_noise, map_cells, scaled_truth, Instance, RunOutcome};
use crate::seeding::{derive_seed, purpose};

/// Report-name prefixes of the deterministic inequality checks.
const DETERMINISTIC_PREFIXES: [&str; 6] = [
    "projector_vs_angles",
    "weyl_singular_value_shift",
    "column_tilt",
    "row_tilt",
    "recovered_sigma_r",
    "user_prediction",
];

/// Whether an unsatisfied report must fail the run. The recovery chain is
/// deterministic only when its premise held (the solver matched or beat the
/// truth factors' objective), so it carries the premise as an input flag.
pub fn is_exit_driving(report: &BoundReport) -> bool {
    if report.name == "recovery_rmse_chain" {
        return report
            .inputs
            .iter()
            .any(|(key, v)| key == "premise" && *v == 1.0);
    }
    DETERMINISTIC_PREFIXES
        .iter()
        .any(|p| report.name.starts_with(p))
}

/// Everything measured from one seed's instance and solve.
struct SeedArtifacts {
    seed: u64,
    instance: Instance,
    /// Unclipped rank-r solver output U·Vᵀ.
    y_star: DMatrix<f64>,
    /// ½‖P_Ω(Y* − Ŷ)‖² achieved by the solver.
    objective_star: f64,
    /// ½‖P_Ω(Y − Ŷ)‖² achieved by exact truth factors.
    objective_truth: f64,
    trial: GapTrial,
}

fn build_artifacts(cfg: &ExperimentConfig, seed: u64) -> Result<SeedArtifacts> {
    let shape = &cfg.shape;
    let instance = build_instance(shape, cfg.k, cfg.noise_sigma, seed)?;
    let solved = als_solve(
        &instance.obs,
        shape.r,
        &cfg.solver,
        derive_seed(seed, &[purpose::SOLVER]),
    )?;
    let y_star = solved.factors.product();
    let objective_star = objective(&solved.factors, &instance.obs)?;
    // Exact factors of the rank-r truth: with L its column basis,
    // (L, YᵀL) multiplies back to L·Lᵀ·Y = Y.
    let truth_factors = FactorPair {
        u: instance.basis.basis().clone(),
        v: instance.y.transpose() * instance.basis.basis(),
    };
    let objective_truth = objective(&truth_factors, &instance.obs)?;
    let masked_term = norm(
        &project_omega(&instance.noise, &instance.omega)?,
        MatrixNorm::Frobenius,
    )? / (instance.omega.len() as f64).sqrt();
    let full_term = norm(&instance.noise, MatrixNorm::Frobenius)?
        / ((shape.m * shape.n) as f64).sqrt();
    let unit = BoundConstants { c_loss_gap: 1.0, ..BoundConstants::default() };
    let trial = GapTrial {
        lhs: rmse(&y_star, &instance.y)?,
        masked_term,
        full_term,
        gap_scale: loss_gap_bound(shape, cfg.k, instance.omega.len(), &unit)?,
    };
    Ok(SeedArtifacts {
        seed,
        instance,
        y_star,
        objective_star,
        objective_truth,
        trial,
    })
}

/// Draws a uniformly random r-dimensional subspace of R^m.
fn random_subspace(m: usize, r: usize, seed: u64) -> Result<Subspace> {
    orthonormalize(&gaussian_noise(m, r, 1.0, seed))
}

/// Spectral tilt between two subspaces through the perp-projected basis
/// residual, exact even for near-identical subspaces.
fn spectral_tilt(reference: &Subspace, other: &Subspace) -> Result<f64> {
    let resid = other.basis()
        - reference.basis() * (reference.basis().transpose() * other.basis());
    norm(&resid, MatrixNorm::Spectral)
}

/// The projector-vs-angles identity pair on a deterministic random subspace
/// pair: ‖P_A−P_B‖_F = √2‖sinΘ‖_F and ‖P_A−P_B‖₂ = sinθ₁.
fn identity_reports(m: usize, r: usize, seed: u64) -> Result<Vec<BoundReport>> {
    let a = random_subspace(m, r, derive_seed(seed, &[purpose::PROBE, 1]))?;
    let b = random_subspace(m, r, derive_seed(seed, &[purpose::PROBE, 2]))?;
    let angles = canonical_angles(&a, &b)?;
    let inputs = vec![
        ("seed".to_string(), seed as f64),
        ("m".to_string(), m as f64),
        ("r".to_string(), r as f64),
    ];
    let fro = (projection_distance(&a, &b, MatrixNorm::Frobenius)?
        - std::f64::consts::SQRT_2 * sin_theta_norm(&angles, MatrixNorm::Frobenius))
    .abs();
    let spec = (projection_distance(&a, &b, MatrixNorm::Spectral)?
        - sin_theta_norm(&angles, MatrixNorm::Spectral))
    .abs();
    Ok(vec![
        BoundReport::new("projector_vs_angles_frobenius", fro, 0.0, inputs.clone()),
        BoundReport::new("projector_vs_angles_spectral", spec, 0.0, inputs),
    ])
}

/// In- and out-of-subspace single-user prediction checks against the
/// recovered subspace.
fn user_prediction_reports(
    cfg: &ExperimentConfig,
    art: &SeedArtifacts,
    recovered: &Subspace,
    rho: f64,
) -> Result<Vec<BoundReport>> {
    let m = cfg.shape.m;
    let r = cfg.shape.r;
    let basis = &art.instance.basis;
    let rows_count = ((cfg.sampling_rate * m as f64).round() as usize).clamp(1, m);
    let mut reports = Vec::with_capacity(5);
    for user in 0..5u64 {
        let coeff_seed = derive_seed(art.seed, &[purpose::USER_COEFF, user]);
        let coeffs = gaussian_noise(r, 1, 1.0, coeff_seed).column(0).into_owned();
        let y_gnd: DVector<f64> = basis.basis() * &coeffs;
        let out_of_subspace = user == 4;
        let (y_user, y_perp_norm) = if out_of_subspace {
            let raw = gaussian_noise(m, 1, 1.0, derive_seed(art.seed, &[purpose::USER_COEFF, 5]))
                .column(0)
                .into_owned();
            let perp = &raw - basis.basis() * (basis.basis().transpose() * &raw);
            let norm_perp = perp.norm();
            (&y_gnd + perp, norm_perp)
        } else {
            (y_gnd.clone(), 0.0)
        };
        let rows = sample_rows(m, rows_count, derive_seed(art.seed, &[purpose::USER_MASK, user]))?;
        let observed: Vec<f64> = rows.iter().map(|&i| y_user[i]).collect();
        let sigma_min = restricted_sigma_min(recovered, &rows)?;
        if sigma_min <= 0.0 {
            return Err(Error::DegenerateMask(format!(
                "user mask with {rows_count} rows cannot identify a rank-{r} model",
            )));
        }
        let predicted = complete_column(recovered, &rows, &observed, DEFAULT_PINV_TOL)?;
        // The prediction is judged against the user's in-subspace component —
        // the part a subspace model can represent at all (for in-subspace
        // users that is the user itself).
        let lhs = (&predicted - &y_gnd).norm();
        let rhs = user_prediction_bound(rho, sigma_min, y_user.norm(), y_perp_norm)?;
        let name = if out_of_subspace {
            "user_prediction_out_of_subspace"
        } else {
            "user_prediction_in_subspace"
        };
        reports.push(BoundReport::new(
            name,
            lhs,
            rhs,
            vec![
                ("seed".to_string(), art.seed as f64),
                ("user".to_string(), user as f64),
                ("rho".to_string(), rho),
                ("sigma_min".to_string(), sigma_min),
                ("observed_rows".to_string(), rows_count as f64),
            ],
        ));
    }
    Ok(reports)
}

/// All reports for one seed, given the globally fitted constant.
fn seed_reports(
    cfg: &ExperimentConfig,
    art: &SeedArtifacts,
    fitted_c: f64,
) -> Result<Vec<BoundReport>> {
    let shape = &cfg.shape;
    let (m, n, r, p) = (shape.m, shape.n, shape.r, shape.p);
    let k = cfg.k;
    let omega_size = art.instance.omega.len();
    let seed_input = ("seed".to_string(), art.seed as f64);
    let mut reports = Vec::with_capacity(25);

    // Projector/angle identities on a fresh random pair.
    reports.extend(identity_reports(m, r, art.seed)?);

    // Singular-value shift inequality on a dense generic pair.
    let a = gaussian_noise(m, n, 1.0, derive_seed(art.seed, &[purpose::PROBE, 3]));
    let delta = gaussian_noise(m, n, 0.1, derive_seed(art.seed, &[purpose::PROBE, 4]));
    let mut weyl = weyl_shift_check(&a, &delta)?;
    weyl.inputs.push(seed_input.clone());
    reports.push(weyl);

    // Subspace tilt and σ_r bracket inequalities of the actual recovery.
    let mut stability = subspace_stability_report(&art.instance.y, &art.y_star, r)?;
    for report in &mut stability {
        report.inputs.push(seed_input.clone());
    }
    reports.extend(stability);

    // Single-user prediction bounds against the recovered subspace.
    let recovered = Subspace::new(mcstab::linalg::left_singular_basis(&art.y_star, r)?)?;
    let rho = spectral_tilt(&art.instance.basis, &recovered)?;
    reports.extend(user_prediction_reports(cfg, art, &recovered, rho)?);

    // Recovery chain: full RMSE ≤ 2·(sampled noise level) + measured
    // sampling gap — a deterministic consequence of the triangle inequality
    // whenever the solver's objective beat the truth factors' objective.
    let premise = art.objective_star <= art.objective_truth;
    let gap_measured = rms_sampling_gap(&art.y_star, &art.instance.y, &art.instance.omega)?;
    reports.push(BoundReport::new(
        "recovery_rmse_chain",
        art.trial.lhs,
        2.0 * art.trial.masked_term + gap_measured,
        vec![
            seed_input.clone(),
            ("premise".to_string(), if premise { 1.0 } else { 0.0 }),
            ("objective_star".to_string(), art.objective_star),
            ("objective_truth".to_string(), art.objective_truth),
            ("gap_measured".to_string(), gap_measured),
        ],
    ));

    // Recovery bound with unit and fitted constants (high-probability).
    for (name, c) in [
        ("recovery_rmse_bound_unit", 1.0),
        ("recovery_rmse_bound_fitted", fitted_c),
    ] {
        reports.push(BoundReport::new(
            name,
            art.trial.lhs,
            art.trial.bound_with(c),
            vec![seed_input.clone(), ("c_loss_gap".to_string(), c)],
        ));
    }

    // Sampling-gap bound on the solver output and two rank-r probes.
    let gap_rhs = loss_gap_bound(shape, k, omega_size, &cfg.constants)?;
    let mut gap_pairs: Vec<(&str, f64)> =
        vec![("sampling_gap_bound_solver", gap_measured)];
    for (idx, name) in [(1u64, "sampling_gap_bound_probe1"), (2, "sampling_gap_bound_probe2")] {
        let probe = scaled_truth(m, n, r, k, derive_seed(art.seed, &[purpose::PAIR, idx]))?;
        gap_pairs.push((name, rms_sampling_gap(&probe, &art.instance.y, &art.instance.omega)?));
    }
    for (name, lhs) in gap_pairs {
        reports.push(BoundReport::new(
            name,
            lhs,
            gap_rhs,
            vec![seed_input.clone(), ("omega_size".to_string(), omega_size as f64)],
        ));
    }

    // Restricted σ_min of the truth subspace against its two lower bounds.
    let rows_count = ((p * m as f64).round() as usize).clamp(1, m);
    let rows = sample_rows(m, rows_count, derive_seed(art.seed, &[purpose::PROBE, 5]))?;
    let measured_sigma = restricted_sigma_min(&art.instance.basis, &rows)?;
    let mu = coherence_mu0(&art.instance.basis);
    reports.push(BoundReport::new(
        "sigma_min_above_incoherence_bound",
        sigma_min_incoherence_bound(r, m, p, mu)?,
        measured_sigma,
        vec![
            seed_input.clone(),
            ("mu0".to_string(), mu),
            ("observed_rows".to_string(), rows_count as f64),
        ],
    ));
    reports.push(BoundReport::new(
        "sigma_min_above_gaussian_bound",
        sigma_min_gaussian_bound(rows_count, m, r, &cfg.constants)?,
        measured_sigma,
        vec![
            seed_input.clone(),
            ("observed_rows".to_string(), rows_count as f64),
        ],
    ));

    // Attack bounds degenerate to the no-attack case on this scenario.
    reports.push(BoundReport::new(
        "targeted_rmse_bound",
        art.trial.lhs,
        targeted_attack_rmse_bound(0, 0, omega_size, n, r, k, &cfg.constants)?,
        vec![seed_input.clone(), ("n_e".to_string(), 0.0)],
    ));
    let kappa = mcstab::subgeo::condition_number(&art.instance.y, r)?;
    let (mass_honest, mass_attacker) = mass_attack_rmse_bounds(kappa, k, r, p, n, &cfg.constants)?;
    reports.push(BoundReport::new(
        "mass_honest_rmse_bound",
        art.trial.lhs,
        mass_honest,
        vec![
            seed_input,
            ("kappa".to_string(), kappa),
            ("attacker_bound".to_string(), mass_attacker),
        ],
    ));

    Ok(reports)
}

/// Runs the full suite over the configured seeds.
pub fn run_bound_suite(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let artifacts: Vec<SeedArtifacts> = map_cells(cfg.seeds.clone(), |seed| {
        build_artifacts(cfg, seed)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let trials: Vec<GapTrial> = artifacts.iter().map(|a| a.trial).collect();
    let fitted_c = fit_loss_gap_constant(&trials);

    let mut reports = Vec::new();
    for art in &artifacts {
        reports.extend(seed_reports(cfg, art, fitted_c)?);
    }

    let reports_path = cfg.output_dir.join("bounds_reports.csv");
    write_csv(
        &reports_path,
        BOUND_CSV_HEADER,
        reports.iter().map(BoundReport::csv_row),
    )?;

    let constants_path = cfg.output_dir.join("bounds_fitted_constants.csv");
    let mut constant_lines: Vec<String> = artifacts
        .iter()
        .map(|a| format!("seed_{},{}", a.seed, a.trial.implied_constant()))
        .collect();
    constant_lines.push(format!("max,{fitted_c}"));
    write_csv(&constants_path, "scope,fitted_c_loss_gap", constant_lines)?;

    let violations = reports
        .iter()
        .filter(|rep| !rep.satisfied && is_exit_driving(rep))
        .count();
    let unsatisfied_total = reports.iter().filter(|rep| !rep.satisfied).count();

    let mut outcome = RunOutcome { violations, ..RunOutcome::default() };
    outcome.note(format!(
        "bounds: {} seeds, {} reports ({} unsatisfied, {} deterministic violations) -> {}",
        artifacts.len(),
        reports.len(),
        unsatisfied_total,
        violations,
        reports_path.display()
    ));
    outcome.note(format!(
        "bounds: fitted c_loss_gap = {fitted_c} -> {}",
        constants_path.display()
    ));
    Ok(outcome)
}
