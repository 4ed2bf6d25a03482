//! Attack-sweep simulations: recovery error as a function of the number of
//! injected attacker columns, for the targeted and mass attack models.
//!
//! Stream layout per trial seed: the honest truth depends only on the seed,
//! the mask and noise depend on (seed, n_e) — the observation grid widens
//! with the attack block — and the attack content depends on
//! (seed, model, n_e). The solver stream depends on (seed, n_e) but not the
//! model, so the two models' n_e = 0 cells solve bit-identical problems and
//! their rows coincide exactly.

use std::time::Instant;

use nalgebra::DMatrix;

use mcstab::attacks::{
    assemble, mass_attack, targeted_attack, AttackModel, AttackSpec,
};
use mcstab::bounds::{loss_gap_bound, mass_attack_rmse_bounds, targeted_attack_rmse_bound};
use mcstab::factor::{als_solve, box_project, BoxMode};
use mcstab::matcore::{rmse, sample_uniform, ProblemShape, ObservedMatrix};
use mcstab::subgeo::{canonical_angles, condition_number, restricted_sigma_min, sin_theta_norm, Subspace};
use mcstab::matcore::MatrixNorm;
use mcstab::Result;

use crate::config::{ExperimentConfig, Scenario};
use crate::plot::{figure1_svg, figure2_svg};
use crate::report::{write_csv, ExperimentRow, RowStatus, TimingRow, ROW_CSV_HEADER, TIMING_CSV_HEADER};
use crate::scenarios::{gaussian_noise, map_cells, scaled_truth, RunOutcome};
use crate::seeding::{derive_seed, purpose};

/// Attackers overwrite this many entries with +k and −k respectively in the
/// targeted model.
pub const N_PUSH: usize = 2;
pub const N_NUKE: usize = 2;

fn model_id(model: AttackModel) -> u64 {
    match model {
        AttackModel::Targeted => 1,
        AttackModel::Mass => 2,
    }
}

struct CellSpec {
    seed: u64,
    n_e: usize,
    model: AttackModel,
}

/// Runs one (seed, n_e, model) cell end to end.
fn run_cell(cfg: &ExperimentConfig, scenario: Scenario, cell: &CellSpec) -> (ExperimentRow, TimingRow) {
    let started = Instant::now();
    let mut row = ExperimentRow {
        scenario: scenario.name().to_string(),
        model: cell.model.to_string(),
        seed: cell.seed,
        n_e: cell.n_e,
        rmse_total: None,
        rmse_y: None,
        rmse_e: None,
        rho_spectral: None,
        sigma_min: None,
        delta: None,
        bound_loss_gap: None,
        bound_targeted_rmse: None,
        bound_mass_honest_rmse: None,
        bound_mass_attacker_rmse: None,
        status: RowStatus::SolverError,
    };
    let status = compute_cell(cfg, cell, &mut row);
    row.status = match status {
        Ok(converged) => {
            if converged {
                RowStatus::Ok
            } else {
                RowStatus::NotConverged
            }
        }
        // The row stays flagged with whatever metrics were filled before the
        // failure; the run continues.
        Err(_) => RowStatus::SolverError,
    };
    let timing = TimingRow {
        scenario: scenario.name().to_string(),
        model: cell.model.to_string(),
        seed: cell.seed,
        n_e: cell.n_e,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    (row, timing)
}

/// Fills the metric fields of `row`; returns the solver's convergence flag.
fn compute_cell(cfg: &ExperimentConfig, cell: &CellSpec, row: &mut ExperimentRow) -> Result<bool> {
    let ProblemShape { m, n, r, p } = cfg.shape;
    let k = cfg.k;
    let n_e = cell.n_e;

    // Honest block: shared across models and attacker counts.
    let y = scaled_truth(m, n, r, k, derive_seed(cell.seed, &[purpose::TRUTH]))?;
    let basis = Subspace::new(mcstab::linalg::left_singular_basis(&y, r)?)?;

    // Attack block.
    let spec = AttackSpec {
        model: cell.model,
        n_e,
        n_push: N_PUSH,
        n_nuke: N_NUKE,
        k,
    };
    let e = if n_e == 0 {
        DMatrix::zeros(m, 0)
    } else {
        let attack_seed = derive_seed(cell.seed, &[purpose::ATTACK, model_id(cell.model), n_e as u64]);
        match cell.model {
            AttackModel::Targeted => targeted_attack(&y, &spec, attack_seed)?,
            AttackModel::Mass => mass_attack(m, &spec, attack_seed)?,
        }
    };
    let dataset = assemble(&y, &e, &basis)?;

    // Observation of the combined matrix: mask and noise shared across
    // models at fixed (seed, n_e).
    let total_cols = n + n_e;
    let combined_shape = ProblemShape { m, n: total_cols, r, p };
    let count = combined_shape.expected_samples().max(1);
    let omega = sample_uniform(
        m,
        total_cols,
        count,
        derive_seed(cell.seed, &[purpose::MASK, n_e as u64]),
    )?;
    let noise = gaussian_noise(
        m,
        total_cols,
        cfg.noise_sigma,
        derive_seed(cell.seed, &[purpose::NOISE, n_e as u64]),
    );
    let observed_values = &dataset.combined + &noise;
    let obs = ObservedMatrix::new(observed_values, omega.clone(), k)?;

    // Bound columns do not need the solve; fill them first so a solver
    // failure still leaves the predicted levels in the flagged row.
    row.bound_loss_gap = loss_gap_bound(&combined_shape, k, omega.len(), &cfg.constants).ok();
    match cell.model {
        AttackModel::Targeted => {
            row.bound_targeted_rmse = targeted_attack_rmse_bound(
                spec.s_max(),
                n_e,
                omega.len(),
                n,
                r,
                k,
                &cfg.constants,
            )
            .ok();
        }
        AttackModel::Mass => {
            if let Ok(kappa) = condition_number(&y, r) {
                if let Ok((honest, attacker)) =
                    mass_attack_rmse_bounds(kappa, k, r, p, n, &cfg.constants)
                {
                    row.bound_mass_honest_rmse = Some(honest);
                    row.bound_mass_attacker_rmse = Some(attacker);
                }
            }
        }
    }
    row.sigma_min = attacked_column_sigma_min(&basis, &omega, n, n_e);

    // Solve; the stream omits the model so n_e = 0 cells coincide across
    // models.
    let solver_seed = derive_seed(cell.seed, &[purpose::SOLVER, n_e as u64]);
    let solved = als_solve(&obs, r, &cfg.solver, solver_seed)?;
    let product = solved.factors.product();
    let recovered = match cfg.solver.box_mode {
        BoxMode::ClipFinal => box_project(&product, k)?,
        BoxMode::Ignore => product.clone(),
    };

    row.rmse_total = Some(rmse(&recovered, &dataset.ground_truth)?);
    let (rmse_y, rmse_e) = mcstab::attacks::split_rmse(&recovered, &dataset)?;
    row.rmse_y = Some(rmse_y);
    row.rmse_e = if n_e > 0 { Some(rmse_e) } else { None };
    // Subspace tilt of the unclipped rank-r model against the honest truth.
    row.rho_spectral = recovered_tilt(&basis, &product, r);
    row.delta = mcstab::linalg::singular_values(&product)
        .ok()
        .map(|sv| sv[r - 1]);
    Ok(solved.converged)
}

/// Spectral sin-Θ between the honest column space and the recovered model's
/// column space; `None` when the recovery is too degenerate to carry an
/// r-dimensional column space.
fn recovered_tilt(basis: &Subspace, product: &DMatrix<f64>, r: usize) -> Option<f64> {
    let rec = mcstab::linalg::left_singular_basis(product, r).ok()?;
    let rec_space = Subspace::new(rec).ok()?;
    let angles = canonical_angles(basis, &rec_space).ok()?;
    Some(sin_theta_norm(&angles, MatrixNorm::Spectral))
}

/// Smallest restricted σ_min of the honest basis over the attacker columns'
/// observed row sets — how identifiable the attacked columns are from their
/// samples. `None` when there are no attackers.
fn attacked_column_sigma_min(
    basis: &Subspace,
    omega: &mcstab::matcore::SampleSet,
    honest_cols: usize,
    n_e: usize,
) -> Option<f64> {
    if n_e == 0 {
        return None;
    }
    let rows_by_column = omega.rows_by_column();
    let mut smin: Option<f64> = None;
    for j in honest_cols..honest_cols + n_e {
        let rows = &rows_by_column[j];
        if rows.is_empty() {
            return Some(0.0);
        }
        let s = restricted_sigma_min(basis, rows).ok()?;
        smin = Some(match smin {
            Some(current) => current.min(s),
            None => s,
        });
    }
    smin
}

fn run_sweep(
    cfg: &ExperimentConfig,
    scenario: Scenario,
    models: &[AttackModel],
) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &seed in &cfg.seeds {
        for &n_e in &cfg.attacker_counts {
            for &model in models {
                cells.push(CellSpec { seed, n_e, model });
            }
        }
    }
    let results = map_cells(cells, |cell| run_cell(cfg, scenario, &cell));
    let failures = results
        .iter()
        .filter(|(row, _)| row.status == RowStatus::SolverError)
        .count();

    let name = scenario.name();
    let rows_path = cfg.output_dir.join(format!("{name}_rows.csv"));
    let timing_path = cfg.output_dir.join(format!("{name}_timing.csv"));
    write_csv(
        &rows_path,
        ROW_CSV_HEADER,
        results.iter().map(|(row, _)| row.csv_line()),
    )?;
    write_csv(
        &timing_path,
        TIMING_CSV_HEADER,
        results.iter().map(|(_, timing)| timing.csv_line()),
    )?;

    // Plots are pure functions of the CSV text.
    let rows_csv = std::fs::read_to_string(&rows_path)?;
    let (plot_name, svg) = match scenario {
        Scenario::Figure2 => ("figure2_error_split.svg", figure2_svg(&rows_csv)?),
        _ => ("figure1_rmse_vs_ne.svg", figure1_svg(&rows_csv)?),
    };
    let plot_path = cfg.output_dir.join(plot_name);
    std::fs::write(&plot_path, svg)?;

    let mut outcome = RunOutcome::default();
    outcome.note(format!(
        "{name}: {} cells ({} solver failures) -> {}",
        results.len(),
        failures,
        rows_path.display()
    ));
    outcome.note(format!("{name}: timings -> {}", timing_path.display()));
    outcome.note(format!("{name}: plot -> {}", plot_path.display()));
    Ok(outcome)
}

/// Both attack models swept over the attacker counts; total-RMSE comparison.
pub fn run_figure1(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    run_sweep(cfg, Scenario::Figure1, &[AttackModel::Targeted, AttackModel::Mass])
}

/// Mass-attack sweep recording the honest/attacker error split.
pub fn run_figure2(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    run_sweep(cfg, Scenario::Figure2, &[AttackModel::Mass])
}
