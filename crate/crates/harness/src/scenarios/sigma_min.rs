//! Restricted σ_min sweep: for each seed, draw a uniformly random
//! r-dimensional subspace of R^m, restrict its basis to a random set of
//! ⌈p·m⌉ rows, and grade the smallest singular value of the restriction
//! against its √p concentration band and its Gaussian lower bound.
//!
//! Every report here is a with-high-probability statement, so the run
//! records satisfaction fractions but never drives a nonzero exit code.

use mcstab::bounds::{sigma_min_gaussian_bound, BoundReport};
use mcstab::matcore::sample_rows;
use mcstab::subgeo::{orthonormalize, restricted_sigma_min};
use mcstab::Result;

use crate::config::ExperimentConfig;
use crate::report::{write_csv, BOUND_CSV_HEADER};
use crate::scenarios::{gaussian_noise, map_cells, RunOutcome};
use crate::seeding::{derive_seed, purpose};

/// The concentration band for σ_min/√p on a random subspace restriction.
pub const RATIO_LOWER: f64 = 0.8;
pub const RATIO_UPPER: f64 = 1.05;

fn seed_reports(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<BoundReport>> {
    let (m, r) = (cfg.shape.m, cfg.shape.r);
    let p = cfg.sampling_rate;
    let sub = orthonormalize(&gaussian_noise(m, r, 1.0, derive_seed(seed, &[purpose::TRUTH])))?;
    let rows_count = ((p * m as f64).round() as usize).clamp(1, m);
    let rows = sample_rows(m, rows_count, derive_seed(seed, &[purpose::MASK]))?;
    let smin = restricted_sigma_min(&sub, &rows)?;
    let inputs = vec![
        ("seed".to_string(), seed as f64),
        ("m".to_string(), m as f64),
        ("r".to_string(), r as f64),
        ("p".to_string(), p),
        ("observed_rows".to_string(), rows_count as f64),
    ];
    Ok(vec![
        BoundReport::new("sigma_min_ratio_lower", RATIO_LOWER * p.sqrt(), smin, inputs.clone()),
        BoundReport::new("sigma_min_ratio_upper", smin, RATIO_UPPER * p.sqrt(), inputs.clone()),
        BoundReport::new(
            "sigma_min_above_gaussian_bound",
            sigma_min_gaussian_bound(rows_count, m, r, &cfg.constants)?,
            smin,
            inputs,
        ),
    ])
}

/// Runs the sweep over the configured seeds and writes the report CSV.
pub fn run_sigma_min(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let per_seed: Vec<Vec<BoundReport>> = map_cells(cfg.seeds.clone(), |seed| {
        seed_reports(cfg, seed)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let reports: Vec<BoundReport> = per_seed.into_iter().flatten().collect();

    let path = cfg.output_dir.join("sigma_min_reports.csv");
    write_csv(&path, BOUND_CSV_HEADER, reports.iter().map(BoundReport::csv_row))?;

    let mut outcome = RunOutcome::default();
    for name in [
        "sigma_min_ratio_lower",
        "sigma_min_ratio_upper",
        "sigma_min_above_gaussian_bound",
    ] {
        let total = reports.iter().filter(|rep| rep.name == name).count();
        let good = reports
            .iter()
            .filter(|rep| rep.name == name && rep.satisfied)
            .count();
        outcome.note(format!("sigma-min: {name} satisfied {good}/{total}"));
    }
    outcome.note(format!("sigma-min: reports -> {}", path.display()));
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;
    use mcstab::matcore::ProblemShape;

    #[test]
    fn full_observation_gives_unit_sigma_min() {
        let mut cfg = ExperimentConfig::default_for(Scenario::SigmaMin);
        cfg.shape = ProblemShape { m: 60, n: 60, r: 4, p: 1.0 };
        cfg.sampling_rate = 1.0;
        cfg.seeds = vec![7, 8];
        cfg.output_dir = tempfile::tempdir().unwrap().keep();
        let outcome = run_sigma_min(&cfg).unwrap();
        assert_eq!(outcome.violations, 0);
        let csv = std::fs::read_to_string(cfg.output_dir.join("sigma_min_reports.csv")).unwrap();
        // Restricting an orthonormal basis to every row leaves σ_min = 1,
        // inside the [0.8, 1.05]·√1 band.
        for line in csv.lines().skip(1).filter(|l| l.starts_with("sigma_min_ratio")) {
            assert_eq!(line.split(',').nth(3).unwrap(), "true", "{line}");
        }
        let upper = csv
            .lines()
            .find(|l| l.starts_with("sigma_min_ratio_upper"))
            .unwrap();
        let lhs: f64 = upper.split(',').nth(1).unwrap().parse().unwrap();
        assert!((lhs - 1.0).abs() < 1e-12, "sigma_min = {lhs}");
        std::fs::remove_dir_all(&cfg.output_dir).ok();
    }

    #[test]
    fn moderate_scale_band_holds_for_most_seeds() {
        let mut cfg = ExperimentConfig::default_for(Scenario::SigmaMin);
        cfg.shape = ProblemShape { m: 500, n: 500, r: 5, p: 0.3 };
        cfg.sampling_rate = 0.3;
        cfg.seeds = (1..=10).collect();
        cfg.output_dir = tempfile::tempdir().unwrap().keep();
        let outcome = run_sigma_min(&cfg).unwrap();
        assert_eq!(outcome.violations, 0);
        let csv = std::fs::read_to_string(cfg.output_dir.join("sigma_min_reports.csv")).unwrap();
        let band_ok = csv
            .lines()
            .filter(|l| l.starts_with("sigma_min_ratio") && l.split(',').nth(3) == Some("true"))
            .count();
        assert!(band_ok >= 16, "only {band_ok}/20 band reports satisfied");
        std::fs::remove_dir_all(&cfg.output_dir).ok();
    }
}
