//! Command-line entry point for the experiment harness.
//!
//! Exit codes: 0 on success, 1 when a deterministic inequality report is
//! unsatisfied (or a run fails mid-flight), 2 on configuration, usage, or
//! input-parsing errors.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use harness::config::{parse_config_text, ExperimentConfig, Scenario};
use harness::scenarios::{bounds_suite, complete, figures, oracle, sigma_min};
use mcstab::Error;

#[derive(Parser)]
#[command(
    name = "mcstab",
    version,
    about = "Low-rank completion experiments: attack sweeps, inequality \
             verification, subspace regression, and one-off completions."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// `key = value` configuration file layered over the scenario defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Replace the configured seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for CSV and SVG artifacts (default: out/).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Shrink the figure scenarios to a desk-scale grid (300x300, rank 5).
    #[arg(long, global = true)]
    desk: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an attack-response simulation sweep.
    Simulate {
        #[command(subcommand)]
        which: SimulateCommand,
    },
    /// Grade inequality suites on freshly sampled instances.
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
    /// Regress noisy columns on the true subspace and report residual ratios.
    Oracle,
    /// Complete a `row,col,value` triplet file and write the dense result.
    Complete {
        /// Input triplet CSV (alternatively set `input_path` in the config).
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Total RMSE versus attacker count for targeted and mass attacks.
    Figure1,
    /// Honest/attacker error split under mass attacks.
    Figure2,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Per-seed inequality battery on solved instances.
    Bounds,
    /// Restricted sigma-min concentration sweep.
    SigmaMin,
}

fn scenario_of(command: &Command) -> Scenario {
    match command {
        Command::Simulate { which: SimulateCommand::Figure1 } => Scenario::Figure1,
        Command::Simulate { which: SimulateCommand::Figure2 } => Scenario::Figure2,
        Command::Verify { which: VerifyCommand::Bounds } => Scenario::Bounds,
        Command::Verify { which: VerifyCommand::SigmaMin } => Scenario::SigmaMin,
        Command::Oracle => Scenario::Oracle,
        Command::Complete { .. } => Scenario::Complete,
    }
}

fn build_config(cli: &Cli) -> mcstab::Result<ExperimentConfig> {
    let scenario = scenario_of(&cli.command);
    let mut cfg = ExperimentConfig::default_for(scenario);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            message: format!("cannot read config file {}: {e}", path.display()),
        })?;
        cfg = parse_config_text(&text, cfg)?;
        if cfg.scenario != scenario {
            return Err(Error::Parse {
                line: 0,
                message: format!(
                    "config file selects scenario `{}` but the command line asked for `{}`",
                    cfg.scenario.name(),
                    scenario.name()
                ),
            });
        }
    }
    if let Command::Complete { input: Some(path) } = &cli.command {
        cfg.input_path = Some(path.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if cli.desk {
        cfg.apply_desk();
    }
    cfg.validate()?;
    if cfg.scenario == Scenario::Complete && cfg.input_path.is_none() {
        return Err(Error::InvalidArgument(
            "complete needs an INPUT argument or an input_path config key".into(),
        ));
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> i32 {
    let cfg = match build_config(cli) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return 2;
        }
    };
    let result = match cfg.scenario {
        Scenario::Figure1 => figures::run_figure1(&cfg),
        Scenario::Figure2 => figures::run_figure2(&cfg),
        Scenario::Bounds => bounds_suite::run_bound_suite(&cfg),
        Scenario::Oracle => oracle::run_oracle(&cfg),
        Scenario::SigmaMin => sigma_min::run_sigma_min(&cfg),
        Scenario::Complete => complete::run_complete(&cfg),
    };
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            if outcome.violations > 0 {
                eprintln!(
                    "{} deterministic inequality report(s) unsatisfied",
                    outcome.violations
                );
                1
            } else {
                0
            }
        }
        // Malformed input files share the configuration-error exit code.
        Err(err @ Error::Parse { .. }) => {
            eprintln!("error: {err}");
            2
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
