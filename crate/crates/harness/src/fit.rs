//! Empirical fitting of the sampling-gap constant.
//!
//! The recovery-error bound has the shape
//! `rmse ≤ ‖P_Ω E‖_F/√|Ω| + C·gap + ‖E‖_F/√(mn)` with one unknown constant
//! `C`. Each solved instance yields the smallest `C` that covers it; fitting
//! takes the max over a calibration set so the fitted bound covers every
//! calibration trial by construction, and held-out trials test whether it
//! generalizes.

use mcstab::bounds::{loss_gap_bound, BoundConstants};
use mcstab::factor::{als_solve, SolverConfig};
use mcstab::matcore::{norm, project_omega, rmse, MatrixNorm, ProblemShape};
use mcstab::Result;

use crate::scenarios::build_instance;
use crate::seeding::{derive_seed, purpose};

/// One measured completion decomposed into the terms of the recovery-error
/// bound.
#[derive(Debug, Clone, Copy)]
pub struct GapTrial {
    /// Measured full-matrix RMSE of the solver output against the clean truth.
    pub lhs: f64,
    /// Sampled noise level ‖P_Ω E‖_F/√|Ω|.
    pub masked_term: f64,
    /// Full noise level ‖E‖_F/√(mn).
    pub full_term: f64,
    /// The sampling-gap term evaluated with constant 1.
    pub gap_scale: f64,
}

impl GapTrial {
    /// Smallest constant that makes the bound hold on this trial.
    pub fn implied_constant(&self) -> f64 {
        ((self.lhs - self.masked_term - self.full_term) / self.gap_scale).max(0.0)
    }

    /// Right-hand side of the bound under constant `c`.
    pub fn bound_with(&self, c: f64) -> f64 {
        self.masked_term + c * self.gap_scale + self.full_term
    }
}

/// Smallest constant that makes the recovery bound hold on every trial
/// (0 when `trials` is empty).
pub fn fit_loss_gap_constant(trials: &[GapTrial]) -> f64 {
    trials
        .iter()
        .map(GapTrial::implied_constant)
        .fold(0.0, f64::max)
}

/// Solves one noisy completion instance and measures the bound terms.
pub fn measure_gap_trial(
    shape: &ProblemShape,
    k: f64,
    noise_sigma: f64,
    solver: &SolverConfig,
    master_seed: u64,
) -> Result<GapTrial> {
    let instance = build_instance(shape, k, noise_sigma, master_seed)?;
    let solver_seed = derive_seed(master_seed, &[purpose::SOLVER]);
    let solved = als_solve(&instance.obs, shape.r, solver, solver_seed)?;
    let y_star = solved.factors.product();
    let lhs = rmse(&y_star, &instance.y)?;
    let masked_term = norm(
        &project_omega(&instance.noise, &instance.omega)?,
        MatrixNorm::Frobenius,
    )? / (instance.omega.len() as f64).sqrt();
    let full_term = norm(&instance.noise, MatrixNorm::Frobenius)?
        / ((shape.m * shape.n) as f64).sqrt();
    let unit = BoundConstants {
        c_loss_gap: 1.0,
        ..BoundConstants::default()
    };
    let gap_scale = loss_gap_bound(shape, k, instance.omega.len(), &unit)?;
    Ok(GapTrial {
        lhs,
        masked_term,
        full_term,
        gap_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_constant_covers_its_own_trials() {
        let trials = [
            GapTrial { lhs: 0.9, masked_term: 0.1, full_term: 0.1, gap_scale: 0.2 },
            GapTrial { lhs: 0.3, masked_term: 0.1, full_term: 0.1, gap_scale: 0.2 },
            GapTrial { lhs: 0.1, masked_term: 0.1, full_term: 0.1, gap_scale: 0.2 },
        ];
        let c = fit_loss_gap_constant(&trials);
        assert!((c - 3.5).abs() < 1e-12);
        for t in &trials {
            assert!(t.lhs <= t.bound_with(c) + 1e-12);
        }
        // The last trial is slack-free at its own implied constant (0).
        assert_eq!(trials[2].implied_constant(), 0.0);
    }

    #[test]
    fn noiseless_trial_measures_a_near_zero_constant() {
        let shape = ProblemShape { m: 40, n: 50, r: 3, p: 0.5 };
        // SVD initialization lands in the recovery basin deterministically;
        // Gaussian starts occasionally converge to a spurious local minimum,
        // which is measured behavior, not what this test pins.
        let solver = SolverConfig {
            init: mcstab::factor::InitMethod::SvdOfZeroFilled,
            ..SolverConfig::default()
        };
        let trial = measure_gap_trial(&shape, 1.0, 0.0, &solver, 77).unwrap();
        assert_eq!(trial.masked_term, 0.0);
        assert_eq!(trial.full_term, 0.0);
        assert!(trial.gap_scale > 0.0);
        // Noiseless half-sampled instances recover the truth to solver
        // precision, so the implied constant is essentially zero.
        assert!(trial.lhs < 1e-6, "lhs = {}", trial.lhs);
        assert!(trial.implied_constant() < 1e-5);
    }
}
