//! CSV row types and writers for the experiment outputs.
//!
//! Result CSVs are pure functions of (config, seeds): reruns must be
//! byte-identical. Anything nondeterministic — wall-clock timings — goes in a
//! separate sidecar file so it never perturbs the canonical outputs.

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use mcstab::bounds::{BoundReport, OracleReport};
use mcstab::Result;

/// Header of the per-cell result CSV of the figure scenarios.
pub const ROW_CSV_HEADER: &str = "scenario,model,seed,n_e,rmse_total,rmse_y,rmse_e,\
rho_spectral,sigma_min,delta,bound_loss_gap,bound_targeted_rmse,\
bound_mass_honest_rmse,bound_mass_attacker_rmse,status";

/// Header of the timing sidecar CSV.
pub const TIMING_CSV_HEADER: &str = "scenario,model,seed,n_e,wall_time_ms";

/// Header of the inequality-report CSV; rows come from
/// [`BoundReport::csv_row`].
pub const BOUND_CSV_HEADER: &str = BoundReport::CSV_HEADER;

/// Header of the subspace-regression result CSV.
pub const ORACLE_CSV_HEADER: &str =
    "scenario,seed,measured_rmse,predicted_rmse,ratio,degenerate_columns";

/// What happened to a simulation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    NotConverged,
    SolverError,
}

impl RowStatus {
    pub fn token(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NotConverged => "not_converged",
            RowStatus::SolverError => "solver_error",
        }
    }
}

/// One (model, seed, attacker-count) cell of a figure sweep. Metric fields
/// are `None` when undefined for the cell (e.g. `rmse_e` with no attackers)
/// and render as empty CSV fields.
#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub scenario: String,
    pub model: String,
    pub seed: u64,
    pub n_e: usize,
    pub rmse_total: Option<f64>,
    pub rmse_y: Option<f64>,
    pub rmse_e: Option<f64>,
    pub rho_spectral: Option<f64>,
    pub sigma_min: Option<f64>,
    pub delta: Option<f64>,
    pub bound_loss_gap: Option<f64>,
    pub bound_targeted_rmse: Option<f64>,
    pub bound_mass_honest_rmse: Option<f64>,
    pub bound_mass_attacker_rmse: Option<f64>,
    pub status: RowStatus,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.model,
            self.seed,
            self.n_e,
            fmt_opt(self.rmse_total),
            fmt_opt(self.rmse_y),
            fmt_opt(self.rmse_e),
            fmt_opt(self.rho_spectral),
            fmt_opt(self.sigma_min),
            fmt_opt(self.delta),
            fmt_opt(self.bound_loss_gap),
            fmt_opt(self.bound_targeted_rmse),
            fmt_opt(self.bound_mass_honest_rmse),
            fmt_opt(self.bound_mass_attacker_rmse),
            self.status.token(),
        )
    }
}

/// Wall-clock timing of one cell; lives in the sidecar CSV only.
#[derive(Debug, Clone)]
pub struct TimingRow {
    pub scenario: String,
    pub model: String,
    pub seed: u64,
    pub n_e: usize,
    pub wall_time_ms: u64,
}

impl TimingRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.scenario, self.model, self.seed, self.n_e, self.wall_time_ms
        )
    }
}

/// Renders a subspace-regression report as a CSV line; `ratio` is empty when
/// the predicted level is exactly zero, and the last field counts the columns
/// that had no usable observations.
pub fn oracle_csv_line(scenario: &str, seed: u64, report: &OracleReport) -> String {
    format!(
        "{},{},{},{},{},{}",
        scenario,
        seed,
        report.measured_rmse,
        report.predicted_rmse,
        fmt_opt(report.ratio),
        report.degenerate_columns.len()
    )
}

/// Writes `header` plus one line per item to `path`, creating parent
/// directories as needed. Every line is `\n`-terminated.
pub fn write_csv<I>(path: &Path, header: &str, lines: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for line in lines {
        writeln!(out, "{}", line.as_ref())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> ExperimentRow {
        ExperimentRow {
            scenario: "figure1".into(),
            model: "targeted".into(),
            seed: 3,
            n_e: 25,
            rmse_total: Some(0.125),
            rmse_y: Some(0.1),
            rmse_e: None,
            rho_spectral: Some(0.5),
            sigma_min: None,
            delta: Some(2.0),
            bound_loss_gap: None,
            bound_targeted_rmse: Some(1.5),
            bound_mass_honest_rmse: None,
            bound_mass_attacker_rmse: None,
            status: RowStatus::Ok,
        }
    }

    #[test]
    fn experiment_row_renders_empty_fields_for_missing_metrics() {
        let line = sample_row().csv_line();
        assert_eq!(line, "figure1,targeted,3,25,0.125,0.1,,0.5,,2,,1.5,,,ok");
        assert_eq!(
            line.matches(',').count(),
            ROW_CSV_HEADER.matches(',').count()
        );
    }

    #[test]
    fn oracle_line_handles_missing_ratio() {
        let report = OracleReport {
            measured_rmse: 0.0,
            predicted_rmse: 0.0,
            ratio: None,
            degenerate_columns: vec![2, 9],
        };
        assert_eq!(oracle_csv_line("oracle", 4, &report), "oracle,4,0,0,,2");
    }

    #[test]
    fn write_csv_creates_parent_directories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/deep/rows.csv");
        write_csv(&path, "a,b", ["1,2".to_string(), "3,4".to_string()]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n3,4\n");
    }
}
