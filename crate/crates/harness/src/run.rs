//! Epsilon sweeps: one CSV per (solver, epsilon, repetition) plus an aggregate.

use std::path::{Path, PathBuf};

use nsco::oracles::{minibatch_sfo, OracleCounters, StochasticFirstOrderOracle, Subgradients};
use nsco::par::{self, Exec};
use nsco::rng::{mix, StreamRng};
use nsco::solvers::{
    fw_pgd, fw_pgd_steps, moles, mopes, pgd, pgd_steps, Derivation, FwPgdConfig, MoreauConfig,
    PgdConfig, RunContext, RunTrace, TraceOptions,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SolverConfig, SolverName};
use crate::error::{HarnessError, Result};
use crate::problem::Problem;
use crate::reference::{reference_optimum, Reference};

/// Overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "NSCO_OUTPUT_DIR";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

/// Solver parameters derived for one target accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverPlan {
    Mopes(MoreauConfig),
    Moles(MoreauConfig),
    Pgd(PgdConfig),
    FwPgd(FwPgdConfig),
}

/// Derives the solver's parameters for accuracy `epsilon` and variance bound `variance`.
pub fn plan_solver(problem: &Problem, solver: &SolverConfig, epsilon: f64, variance: f64) -> Result<SolverPlan> {
    let g = problem.lipschitz;
    let dx = problem.set.diameter();
    Ok(match solver.name {
        SolverName::Mopes | SolverName::Moles => {
            let der = Derivation {
                epsilon,
                lipschitz: g,
                variance,
                diameter: dx,
                radius: problem.enclosing_radius,
                distance_estimate: solver.distance_estimate,
                c: solver.c,
                c_prime: solver.c_prime,
            };
            let mut cfg = if solver.name == SolverName::Mopes {
                MoreauConfig::mopes(&der)?
            } else {
                MoreauConfig::moles(&der)?
            };
            cfg.project_enclosing = solver.project_enclosing;
            cfg.projection_mode = solver.projection_mode();
            if solver.name == SolverName::Mopes {
                SolverPlan::Mopes(cfg)
            } else {
                SolverPlan::Moles(cfg)
            }
        }
        SolverName::Pgd => SolverPlan::Pgd(PgdConfig {
            steps: pgd_steps(epsilon, g, variance, dx),
            rule: solver.step_rule(),
            lipschitz: g,
            variance,
            diameter: dx,
        }),
        SolverName::FwPgd => SolverPlan::FwPgd(FwPgdConfig {
            steps: fw_pgd_steps(epsilon, g, variance, dx),
            lipschitz: g,
            variance,
            diameter: dx,
            projection_mode: solver.projection_mode(),
        }),
    })
}

/// One line of a run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub algorithm: String,
    pub k: usize,
    pub fo_calls: u64,
    pub sfo_calls: u64,
    pub po_calls: u64,
    pub lmo_calls: u64,
    pub f_value: f64,
    pub gap: f64,
    pub wall_ms: f64,
    pub seed: u64,
}

/// One line of the aggregate CSV: means over the runs that reached step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub epsilon: f64,
    pub k: usize,
    pub fo_calls: f64,
    pub sfo_calls: f64,
    pub po_calls: f64,
    pub lmo_calls: f64,
    pub f_value: f64,
    pub gap: f64,
    pub wall_ms: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub epsilon: f64,
    pub repetition: usize,
    pub seed: u64,
    pub file: PathBuf,
    pub steps: usize,
    pub final_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub output_dir: PathBuf,
    pub reference: f64,
    pub reference_budget: usize,
    pub certificate: Option<f64>,
    pub aggregate: PathBuf,
    pub runs: Vec<RunSummary>,
    pub failed: usize,
}

/// Seed of repetition `rep`; it fixes the start point and the solver's stream.
pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    mix(seed, rep as u64)
}

/// Output directory: explicit override, then `NSCO_OUTPUT_DIR`, then the config.
pub fn resolve_output_dir(config: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => config.output_dir.clone(),
    }
}

pub fn run_file_name(label: &str, epsilon: f64, rep: usize, failed: bool) -> String {
    let suffix = if failed { ".failed" } else { "" };
    format!("{label}_eps{epsilon}_rep{rep}{suffix}.csv")
}

/// Inputs of a single run.
#[derive(Debug, Clone, Copy)]
pub struct RunSpec<'a> {
    pub problem: &'a Problem,
    pub solver: &'a SolverConfig,
    pub epsilon: f64,
    pub reference: f64,
    pub seed: u64,
    pub wall_clock: bool,
}

/// Runs one solver; the trace is filled even when the run fails part way.
pub fn run_single(spec: &RunSpec<'_>, trace: &mut RunTrace) -> Result<()> {
    let problem = spec.problem;
    let counters = OracleCounters::new();
    let batch = match (spec.solver.batch_size, problem.finite_sum()) {
        (Some(b), Some(fs)) => Some(minibatch_sfo(fs, b)?),
        (Some(_), None) => {
            return Err(HarnessError::config("batch_size needs a finite-sum problem"));
        }
        (None, _) => None,
    };
    let (subgradients, variance) = match &batch {
        Some(sfo) => (Subgradients::Stochastic(sfo), sfo.variance_bound()),
        None => (Subgradients::Exact(problem.objective()), 0.0),
    };
    let plan = plan_solver(problem, spec.solver, spec.epsilon, variance)?;
    let ctx = RunContext {
        objective: problem.objective(),
        subgradients,
        set: &problem.set,
        counters: &counters,
        options: TraceOptions {
            reference: Some(spec.reference),
            stop_gap: spec.solver.stop_at_epsilon.then_some(spec.epsilon),
            wall_clock: spec.wall_clock,
        },
    };
    let x0 = problem.start_point(&mut StreamRng::new(spec.seed, 0));
    let mut rng = StreamRng::new(spec.seed, 1);
    match plan {
        SolverPlan::Mopes(cfg) => mopes(&ctx, &x0, &cfg, &mut rng, trace).map(|_| ()),
        SolverPlan::Moles(cfg) => moles(&ctx, &x0, &cfg, &mut rng, trace).map(|_| ()),
        SolverPlan::Pgd(cfg) => pgd(&ctx, &x0, &cfg, &mut rng, trace).map(|_| ()),
        SolverPlan::FwPgd(cfg) => fw_pgd(&ctx, &x0, &cfg, &mut rng, trace).map(|_| ()),
    }?;
    Ok(())
}

pub fn trace_rows(trace: &RunTrace, reference: f64, seed: u64) -> Vec<RunRow> {
    trace
        .records
        .iter()
        .map(|r| RunRow {
            algorithm: trace.algorithm.clone(),
            k: r.k,
            fo_calls: r.calls.fo,
            sfo_calls: r.calls.sfo,
            po_calls: r.calls.po,
            lmo_calls: r.calls.lmo,
            f_value: r.f_value,
            gap: r.gap.unwrap_or(r.f_value - reference),
            wall_ms: r.wall_ms,
            seed,
        })
        .collect()
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::csv(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes the header alone when there are no rows.
fn write_run_file(path: &Path, rows: &[RunRow]) -> Result<()> {
    if rows.is_empty() {
        let header = "algorithm,k,fo_calls,sfo_calls,po_calls,lmo_calls,f_value,gap,wall_ms,seed\n";
        return std::fs::write(path, header).map_err(|e| HarnessError::io(path, e));
    }
    write_rows(path, rows)
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| HarnessError::csv(path, e)))
        .collect()
}

/// Means of the given runs, row by row.
pub fn aggregate(algorithm: &str, epsilon: f64, runs: &[Vec<RunRow>]) -> Vec<AggregateRow> {
    let len = runs.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|k| {
            let rows: Vec<&RunRow> = runs.iter().filter_map(|r| r.get(k)).collect();
            let n = rows.len() as f64;
            let mean = |f: &dyn Fn(&RunRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
            AggregateRow {
                algorithm: algorithm.to_string(),
                epsilon,
                k: rows[0].k,
                fo_calls: mean(&|r| r.fo_calls as f64),
                sfo_calls: mean(&|r| r.sfo_calls as f64),
                po_calls: mean(&|r| r.po_calls as f64),
                lmo_calls: mean(&|r| r.lmo_calls as f64),
                f_value: mean(&|r| r.f_value),
                gap: mean(&|r| r.gap),
                wall_ms: mean(&|r| r.wall_ms),
                runs: rows.len(),
            }
        })
        .collect()
}

struct Job<'a> {
    solver: &'a SolverConfig,
    epsilon: f64,
    rep: usize,
}

struct Outcome {
    rows: Vec<RunRow>,
    summary: RunSummary,
}

/// Runs every (solver, epsilon, repetition) of the config into `output_dir`.
///
/// A failing run leaves a `.failed.csv` with its partial trace and is left
/// out of the aggregate; the other runs proceed.
pub fn run_experiment(config: &ExperimentConfig, output_dir: &Path) -> Result<ExperimentSummary> {
    config.validate()?;
    let exec = if config.parallel { Exec::Parallel } else { Exec::Sequential };
    let problem = Problem::build(&config.problem, exec)?;
    let reference = reference_optimum(&problem, config.reference_budget)?;
    run_with_reference(config, &problem, &reference, output_dir)
}

/// As [`run_experiment`] with a prebuilt problem and reference.
pub fn run_with_reference(
    config: &ExperimentConfig,
    problem: &Problem,
    reference: &Reference,
    output_dir: &Path,
) -> Result<ExperimentSummary> {
    config.validate()?;
    std::fs::create_dir_all(output_dir).map_err(|e| HarnessError::io(output_dir, e))?;
    // Reject bad parameter derivations before any run starts.
    for solver in &config.solvers {
        for &eps in &config.epsilons {
            plan_solver(problem, solver, eps, 0.0)?;
        }
    }
    let exec = if config.parallel { Exec::Parallel } else { Exec::Sequential };
    let mut jobs = Vec::new();
    for solver in &config.solvers {
        for &epsilon in &config.epsilons {
            for rep in 0..config.repetitions {
                jobs.push(Job { solver, epsilon, rep });
            }
        }
    }
    let outcomes = par::map_ordered(exec, jobs, |job| {
        let seed = repetition_seed(config.seed, job.rep);
        let spec = RunSpec {
            problem,
            solver: job.solver,
            epsilon: job.epsilon,
            reference: reference.value,
            seed,
            wall_clock: config.wall_clock,
        };
        let label = job.solver.label();
        let mut trace = RunTrace::new(label);
        let mut error = run_single(&spec, &mut trace).err().map(|e| e.to_string());
        let rows = trace_rows(&trace, reference.value, seed);
        let file = output_dir.join(run_file_name(label, job.epsilon, job.rep, error.is_some()));
        if let Err(e) = write_run_file(&file, &rows) {
            error.get_or_insert(e.to_string());
        }
        Outcome {
            summary: RunSummary {
                algorithm: label.to_string(),
                epsilon: job.epsilon,
                repetition: job.rep,
                seed,
                file,
                steps: rows.last().map_or(0, |r| r.k),
                final_gap: rows.last().map(|r| r.gap),
                error,
            },
            rows,
        }
    });

    let mut agg = Vec::new();
    for solver in &config.solvers {
        for &eps in &config.epsilons {
            let runs: Vec<Vec<RunRow>> = outcomes
                .iter()
                .filter(|o| {
                    o.summary.algorithm == solver.label() && o.summary.epsilon == eps && o.summary.error.is_none()
                })
                .map(|o| o.rows.clone())
                .collect();
            agg.extend(aggregate(solver.label(), eps, &runs));
        }
    }
    let aggregate_path = output_dir.join(AGGREGATE_FILE);
    if agg.is_empty() {
        let header = "algorithm,epsilon,k,fo_calls,sfo_calls,po_calls,lmo_calls,f_value,gap,wall_ms,runs\n";
        std::fs::write(&aggregate_path, header).map_err(|e| HarnessError::io(&aggregate_path, e))?;
    } else {
        write_rows(&aggregate_path, &agg)?;
    }
    let runs: Vec<RunSummary> = outcomes.into_iter().map(|o| o.summary).collect();
    let failed = runs.iter().filter(|r| r.error.is_some()).count();
    Ok(ExperimentSummary {
        output_dir: output_dir.to_path_buf(),
        reference: reference.value,
        reference_budget: reference.budget,
        certificate: reference.certificate,
        aggregate: aggregate_path,
        runs,
        failed,
    })
}
