use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsco::par::Exec;
use nsco_harness::run::{resolve_output_dir, run_experiment};
use nsco_harness::slopes::{fit_slopes_file, Metric};
use nsco_harness::{reference_optimum, ExperimentConfig, HarnessError, Problem, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nsco", version, about = "Oracle-complexity experiments for nonsmooth constrained solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver at every epsilon and write run and aggregate CSVs.
    Run {
        config: PathBuf,
        /// Output directory; overrides NSCO_OUTPUT_DIR and the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Like `run`, then fit slopes for every metric into slopes.json.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Compute the reference optimum of the configured problem.
    Reference {
        config: PathBuf,
        /// PGD steps; the config's reference_budget when absent.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Fit log-log slopes from an aggregate CSV.
    Slopes {
        aggregate: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let line = serde_json::to_string(value).map_err(|e| HarnessError::config(e.to_string()))?;
    println!("{line}");
    Ok(())
}

fn run(config: &Path, output_dir: Option<&Path>, sweep: bool) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let dir = resolve_output_dir(&cfg, output_dir);
    let summary = run_experiment(&cfg, &dir)?;
    if sweep {
        let reports = Metric::ALL
            .iter()
            .map(|&m| fit_slopes_file(&summary.aggregate, m))
            .collect::<Result<Vec<_>>>()?;
        let path = dir.join("slopes.json");
        let text = serde_json::to_string_pretty(&reports).map_err(|e| HarnessError::config(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| HarnessError::Io { path, source: e })?;
    }
    print_json(&summary)?;
    if summary.failed > 0 {
        return Err(HarnessError::RunsFailed(summary.failed, summary.runs.len()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output_dir } => run(&config, output_dir.as_deref(), false),
        Command::Sweep { config, output_dir } => run(&config, output_dir.as_deref(), true),
        Command::Reference { config, budget } => ExperimentConfig::load(&config).and_then(|cfg| {
            let problem = Problem::build(&cfg.problem, Exec::default())?;
            let r = reference_optimum(&problem, budget.unwrap_or(cfg.reference_budget))?;
            #[derive(Serialize)]
            struct Out {
                reference: f64,
                budget: usize,
                certificate: Option<f64>,
                lipschitz: f64,
                diameter: f64,
            }
            print_json(&Out {
                reference: r.value,
                budget: r.budget,
                certificate: r.certificate,
                lipschitz: problem.lipschitz,
                diameter: problem.set.diameter(),
            })
        }),
        Command::Slopes { aggregate, metric } => fit_slopes_file(&aggregate, metric).and_then(|r| print_json(&r)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(if matches!(e, HarnessError::RunsFailed(..)) { 2 } else { 1 })
        }
    }
}
