//! Known-subspace regression check: complete every column of a noisy sampled
//! instance against the *true* column space and compare the achieved sampled
//! residual with its predicted level (the RMS of the noise on Ω). The two
//! should agree up to a modest constant; the run records the ratio per seed.

use mcstab::bounds::oracle_complete;
use mcstab::Result;

use crate::config::ExperimentConfig;
use crate::report::{oracle_csv_line, write_csv, ORACLE_CSV_HEADER};
use crate::scenarios::{build_instance, map_cells, RunOutcome};

/// Agreement band for measured/predicted sampled residual.
pub const RATIO_LOWER: f64 = 0.5;
pub const RATIO_UPPER: f64 = 2.0;

struct SeedResult {
    line: String,
    ratio: Option<f64>,
    degenerate: usize,
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedResult> {
    let instance = build_instance(&cfg.shape, cfg.k, cfg.noise_sigma, seed)?;
    let (_completion, report) = oracle_complete(&instance.basis, &instance.obs, &instance.y)?;
    Ok(SeedResult {
        line: oracle_csv_line(cfg.scenario.name(), seed, &report),
        ratio: report.ratio,
        degenerate: report.degenerate_columns.len(),
    })
}

/// Runs the regression over the configured seeds and writes the result CSV.
pub fn run_oracle(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let results: Vec<SeedResult> = map_cells(cfg.seeds.clone(), |seed| run_seed(cfg, seed))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let path = cfg.output_dir.join("oracle_rows.csv");
    write_csv(&path, ORACLE_CSV_HEADER, results.iter().map(|r| r.line.clone()))?;

    let in_band = results
        .iter()
        .filter(|r| r.ratio.is_some_and(|q| (RATIO_LOWER..=RATIO_UPPER).contains(&q)))
        .count();
    let degenerate: usize = results.iter().map(|r| r.degenerate).sum();
    let mut outcome = RunOutcome::default();
    outcome.note(format!(
        "oracle: measured/predicted in [{RATIO_LOWER}, {RATIO_UPPER}] for {in_band}/{} seeds, \
         {degenerate} degenerate columns -> {}",
        results.len(),
        path.display()
    ));
    Ok(outcome)
}
