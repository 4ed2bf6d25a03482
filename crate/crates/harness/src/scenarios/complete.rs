//! One-off completion of a user-provided triplet file: fit the rank-r
//! factorization to the listed entries and write the full predicted matrix
//! plus a small key/value summary.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use mcstab::factor::{als_solve, box_project, objective, BoxMode};
use mcstab::matcore::{read_triplets, write_dense, ObservedMatrix};
use mcstab::{Error, Result};

use crate::config::ExperimentConfig;
use crate::scenarios::RunOutcome;
use crate::seeding::{derive_seed, purpose};

fn open_input(path: &Path) -> Result<BufReader<File>> {
    // A missing or unreadable input file is a configuration mistake, so it
    // surfaces through the parse-error (exit 2) channel.
    File::open(path).map(BufReader::new).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot open input file {}: {e}", path.display()),
    })
}

/// Completes the triplet file named by `cfg.input_path` and writes
/// `completion.csv` (dense matrix) and `completion_summary.csv` into the
/// output directory.
pub fn run_complete(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let input = cfg.input_path.as_deref().ok_or_else(|| {
        Error::InvalidArgument(
            "the complete scenario needs an input triplet file (INPUT argument or \
             input_path config key)"
                .into(),
        )
    })?;
    let triplets = read_triplets(open_input(input)?)?;
    if triplets.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "input file {} holds no observations",
            input.display()
        )));
    }

    // Dimensions come from the config when given, otherwise from the data.
    let max_row = triplets.iter().map(|&(i, _, _)| i).max().unwrap_or(0);
    let max_col = triplets.iter().map(|&(_, j, _)| j).max().unwrap_or(0);
    let m = if cfg.shape.m > 0 { cfg.shape.m } else { max_row + 1 };
    let n = if cfg.shape.n > 0 { cfg.shape.n } else { max_col + 1 };
    let r = cfg.shape.r;

    let obs = ObservedMatrix::from_triplets(m, n, cfg.k, &triplets)?;
    let seed = derive_seed(cfg.seeds[0], &[purpose::SOLVER]);
    let solved = als_solve(&obs, r, &cfg.solver, seed)?;
    let product = solved.factors.product();
    let completed = match cfg.solver.box_mode {
        BoxMode::ClipFinal => box_project(&product, cfg.k)?,
        BoxMode::Ignore => product.clone(),
    };

    std::fs::create_dir_all(&cfg.output_dir)?;
    let matrix_path = cfg.output_dir.join("completion.csv");
    write_dense(File::create(&matrix_path)?, &completed)?;

    let obj = objective(&solved.factors, &obs)?;
    let sigma_r = mcstab::linalg::singular_values(&completed)?[r - 1];
    let summary_path = cfg.output_dir.join("completion_summary.csv");
    let pairs = [
        ("m", m.to_string()),
        ("n", n.to_string()),
        ("r", r.to_string()),
        ("objective", obj.to_string()),
        ("iterations", solved.iterations.to_string()),
        ("converged", solved.converged.to_string()),
        ("sigma_r", sigma_r.to_string()),
    ];
    crate::report::write_csv(
        &summary_path,
        "key,value",
        pairs.iter().map(|(k, v)| format!("{k},{v}")),
    )?;

    let mut outcome = RunOutcome::default();
    outcome.note(format!(
        "complete: {}x{n} rank-{r} fit of {} observations ({} iterations, converged: {}) -> {}",
        m,
        triplets.len(),
        solved.iterations,
        solved.converged,
        matrix_path.display()
    ));
    outcome.note(format!("complete: summary -> {}", summary_path.display()));
    Ok(outcome)
}
