//! The experiment scenarios behind each CLI subcommand, plus the random
//! instance construction they share.
//!
//! Every randomized object is drawn from a stream derived with
//! [`crate::seeding::derive_seed`] from the trial seed and a purpose tag, so
//! any cell can be reproduced in isolation and results never depend on
//! execution order.

pub mod bounds_suite;
pub mod complete;
pub mod figures;
pub mod oracle;
pub mod sigma_min;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use mcstab::attacks::gen_ground_truth_gaussian;
use mcstab::matcore::{sample_uniform, ObservedMatrix, ProblemShape, SampleSet};
use mcstab::subgeo::Subspace;
use mcstab::{Error, Result};

use crate::seeding::{derive_seed, purpose};

/// What a scenario run produced, for the CLI to report and turn into an exit
/// code.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    /// Count of unsatisfied deterministic-inequality reports. Any nonzero
    /// value makes the process exit with code 1.
    pub violations: usize,
    /// Human-readable lines for stdout: what was run and where it went.
    pub summary: Vec<String>,
}

impl RunOutcome {
    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }
}

/// A rank-r ground-truth matrix rescaled so its largest absolute entry is
/// exactly `k`.
pub fn scaled_truth(m: usize, n: usize, r: usize, k: f64, seed: u64) -> Result<DMatrix<f64>> {
    let raw = gen_ground_truth_gaussian(m, n, r, 1.0, seed)?;
    let amax = raw.amax();
    if !(amax > 0.0) {
        return Err(Error::InvalidArgument(
            "degenerate ground truth: all entries are zero".into(),
        ));
    }
    Ok(raw * (k / amax))
}

/// Dense i.i.d. N(0, σ²) noise; exactly zero when σ = 0.
pub fn gaussian_noise(m: usize, n: usize, sigma: f64, seed: u64) -> DMatrix<f64> {
    if sigma == 0.0 {
        return DMatrix::zeros(m, n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            let g: f64 = StandardNormal.sample(&mut rng);
            out[(i, j)] = sigma * g;
        }
    }
    out
}

/// One attack-free simulation instance: the clean truth, its column space,
/// the noise realization, and the noisy observation.
#[derive(Debug, Clone)]
pub struct Instance {
    /// Clean rank-r truth with max |entry| = k.
    pub y: DMatrix<f64>,
    /// Column space of `y`.
    pub basis: Subspace,
    /// Full noise matrix E (zero outside Ω never matters; consumers mask it).
    pub noise: DMatrix<f64>,
    /// y + noise.
    pub y_hat: DMatrix<f64>,
    pub omega: SampleSet,
    /// `y_hat` restricted to Ω.
    pub obs: ObservedMatrix,
}

/// Builds the instance for one trial seed: truth, mask, and noise each come
/// from their own derived stream.
pub fn build_instance(
    shape: &ProblemShape,
    k: f64,
    noise_sigma: f64,
    trial_seed: u64,
) -> Result<Instance> {
    let y = scaled_truth(
        shape.m,
        shape.n,
        shape.r,
        k,
        derive_seed(trial_seed, &[purpose::TRUTH]),
    )?;
    let basis = Subspace::new(mcstab::linalg::left_singular_basis(&y, shape.r)?)?;
    let count = shape.expected_samples().max(1);
    let omega = sample_uniform(
        shape.m,
        shape.n,
        count,
        derive_seed(trial_seed, &[purpose::MASK]),
    )?;
    let noise = gaussian_noise(
        shape.m,
        shape.n,
        noise_sigma,
        derive_seed(trial_seed, &[purpose::NOISE]),
    );
    let y_hat = &y + &noise;
    let obs = ObservedMatrix::new(y_hat.clone(), omega.clone(), k)?;
    Ok(Instance {
        y,
        basis,
        noise,
        y_hat,
        omega,
        obs,
    })
}

/// Maps a closure over independent work items, in parallel under the
/// `parallel` feature. Results always come back in input order, so downstream
/// output is identical either way.
#[cfg(feature = "parallel")]
pub fn map_cells<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

/// Sequential fallback of [`map_cells`].
#[cfg(not(feature = "parallel"))]
pub fn map_cells<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_well_scaled() {
        let shape = ProblemShape { m: 30, n: 40, r: 3, p: 0.4 };
        let a = build_instance(&shape, 2.0, 0.1, 9).unwrap();
        let b = build_instance(&shape, 2.0, 0.1, 9).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.noise, b.noise);
        assert_eq!(a.omega.entries(), b.omega.entries());
        assert!((a.y.amax() - 2.0).abs() < 1e-12);
        assert_eq!(a.omega.len(), (0.4f64 * 30.0 * 40.0).round() as usize);
        assert_eq!(a.basis.dim(), 3);
        // Different trial seeds give different draws.
        let c = build_instance(&shape, 2.0, 0.1, 10).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn noise_is_zero_for_sigma_zero_and_scales_linearly() {
        assert_eq!(gaussian_noise(5, 5, 0.0, 3), DMatrix::zeros(5, 5));
        let n1 = gaussian_noise(5, 5, 0.1, 3);
        let n2 = gaussian_noise(5, 5, 0.2, 3);
        assert!((n2 - &n1 * 2.0).amax() < 1e-15);
    }

    #[test]
    fn map_cells_preserves_input_order() {
        let out = map_cells((0..100).collect::<Vec<usize>>(), |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<usize>>());
    }
}
