//! Experiment configuration, read from TOML.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use nsco::geometry::SetKind;
use nsco::solvers::{ProjectionMode, StepRule};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const MIN_REFERENCE_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::repetitions")]
    pub repetitions: usize,
    pub epsilons: Vec<f64>,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    /// PGD steps for the reference optimum.
    #[serde(default = "defaults::reference_budget")]
    pub reference_budget: usize,
    #[serde(default)]
    pub wall_clock: bool,
    /// Run independent (solver, epsilon, repetition) jobs on the thread pool.
    #[serde(default = "defaults::yes")]
    pub parallel: bool,
    pub problem: ProblemConfig,
    #[serde(rename = "solver")]
    pub solvers: Vec<SolverConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    PiecewiseLinear,
    L1Distance,
    Hinge,
    MatrixHinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetName {
    L1Ball,
    L2Ball,
    NuclearBall,
}

impl From<SetName> for SetKind {
    fn from(s: SetName) -> Self {
        match s {
            SetName::L1Ball => SetKind::L1Ball,
            SetName::L2Ball => SetKind::L2Ball,
            SetName::NuclearBall => SetKind::NuclearBall,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRule {
    /// A random extreme point (signed vertex, or rank-1 boundary matrix).
    #[default]
    Extreme,
    /// A random point on the boundary.
    Boundary,
    Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    /// Defaults to `nuclear_ball` for matrix problems, `l1_ball` otherwise.
    #[serde(default)]
    pub set: Option<SetName>,
    #[serde(default = "defaults::one")]
    pub radius: f64,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub rows: Option<usize>,
    #[serde(default)]
    pub cols: Option<usize>,
    #[serde(default = "defaults::pieces")]
    pub pieces: usize,
    #[serde(default)]
    pub synth_seed: u64,
    /// The minimizer of synthetic objectives is this multiple of a boundary point.
    #[serde(default = "defaults::anchor_scale")]
    pub anchor_scale: f64,
    /// Dense CSV (features then a 0/1 label); relative paths resolve against
    /// the config file.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default)]
    pub bias: bool,
    /// Label noise of synthetic classification data.
    #[serde(default = "defaults::flip")]
    pub flip: f64,
    /// Radius `R` of the ball queried by the inner loop; the set's own
    /// enclosing radius when absent.
    #[serde(default)]
    pub enclosing_radius: Option<f64>,
    /// Overrides the computed Lipschitz constant `G`.
    #[serde(default)]
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub start: StartRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    Mopes,
    Moles,
    Pgd,
    FwPgd,
}

impl SolverName {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::Mopes => "mopes",
            SolverName::Moles => "moles",
            SolverName::Pgd => "pgd",
            SolverName::FwPgd => "fw_pgd",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionName {
    #[default]
    FixedBudget,
    WolfeGap,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepName {
    #[default]
    Fixed,
    Diminishing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub name: SolverName,
    /// Name used in file names and the `algorithm` column.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default = "defaults::one")]
    pub c: f64,
    #[serde(default = "defaults::one")]
    pub c_prime: f64,
    /// Minibatch size for finite-sum problems; exact subgradients when absent.
    #[serde(default)]
    pub batch_size: Option<usize>,
    /// Estimate of `||x0 - x*||`; the diameter when absent.
    #[serde(default)]
    pub distance_estimate: Option<f64>,
    #[serde(default = "defaults::yes")]
    pub project_enclosing: bool,
    #[serde(default)]
    pub projection_mode: ProjectionName,
    /// Cap on Frank-Wolfe steps per projection in `wolfe_gap` mode.
    #[serde(default = "defaults::max_fw_iterations")]
    pub max_fw_iterations: usize,
    #[serde(default)]
    pub step_rule: StepName,
    /// End the run once the gap reaches epsilon.
    #[serde(default)]
    pub stop_at_epsilon: bool,
}

impl SolverConfig {
    pub fn new(name: SolverName) -> Self {
        Self {
            name,
            label: None,
            c: 1.0,
            c_prime: 1.0,
            batch_size: None,
            distance_estimate: None,
            project_enclosing: true,
            projection_mode: ProjectionName::FixedBudget,
            max_fw_iterations: defaults::max_fw_iterations(),
            step_rule: StepName::Fixed,
            stop_at_epsilon: false,
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.name.as_str())
    }

    pub fn projection_mode(&self) -> ProjectionMode {
        match self.projection_mode {
            ProjectionName::FixedBudget => ProjectionMode::FixedBudget,
            ProjectionName::WolfeGap => ProjectionMode::WolfeGap {
                max_iter: self.max_fw_iterations,
            },
        }
    }

    pub fn step_rule(&self) -> StepRule {
        match self.step_rule {
            StepName::Fixed => StepRule::Fixed,
            StepName::Diminishing => StepRule::Diminishing,
        }
    }
}

mod defaults {
    use std::path::PathBuf;

    pub fn repetitions() -> usize {
        1
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("nsco-out")
    }
    pub fn reference_budget() -> usize {
        100_000
    }
    pub fn yes() -> bool {
        true
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn pieces() -> usize {
        100
    }
    pub fn anchor_scale() -> f64 {
        0.5
    }
    pub fn samples() -> usize {
        200
    }
    pub fn flip() -> f64 {
        0.1
    }
    pub fn max_fw_iterations() -> usize {
        10_000_000
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ProblemConfig {
    pub fn set_name(&self) -> SetName {
        self.set.unwrap_or(match self.kind {
            ProblemKind::MatrixHinge => SetName::NuclearBall,
            _ => SetName::L1Ball,
        })
    }

    pub fn validate(&self) -> Result<()> {
        positive("problem.radius", self.radius)?;
        if let Some(r) = self.enclosing_radius {
            positive("problem.enclosing_radius", r)?;
            if r < self.radius {
                return Err(HarnessError::config(format!(
                    "problem.enclosing_radius {r} is smaller than the set radius {}",
                    self.radius
                )));
            }
        }
        if let Some(g) = self.lipschitz {
            positive("problem.lipschitz", g)?;
        }
        if !(0.0..=1.0).contains(&self.flip) {
            return Err(HarnessError::config("problem.flip must lie in [0, 1]"));
        }
        if !(self.anchor_scale >= 0.0 && self.anchor_scale <= 1.0) {
            return Err(HarnessError::config("problem.anchor_scale must lie in [0, 1]"));
        }
        let matrix = self.rows.is_some() || self.cols.is_some();
        if matrix && (self.rows.unwrap_or(0) == 0 || self.cols.unwrap_or(0) == 0) {
            return Err(HarnessError::config("problem.rows and problem.cols must both be positive"));
        }
        if matrix && self.dim.is_some() {
            return Err(HarnessError::config("give either problem.dim or problem.rows/cols"));
        }
        if self.set_name() == SetName::NuclearBall && !matrix {
            return Err(HarnessError::config("nuclear_ball needs problem.rows and problem.cols"));
        }
        match self.kind {
            ProblemKind::PiecewiseLinear | ProblemKind::L1Distance => {
                if !matrix && self.dim.unwrap_or(0) == 0 {
                    return Err(HarnessError::config("problem.dim is required"));
                }
                if self.kind == ProblemKind::PiecewiseLinear && self.pieces < 2 {
                    return Err(HarnessError::config("problem.pieces must be at least 2"));
                }
            }
            ProblemKind::Hinge => {
                if matrix {
                    return Err(HarnessError::config("hinge takes problem.dim; use matrix_hinge for rows/cols"));
                }
                if self.data.is_none() && self.dim.unwrap_or(0) == 0 {
                    return Err(HarnessError::config("synthetic hinge data needs problem.dim"));
                }
                if self.data.is_none() && self.samples == 0 {
                    return Err(HarnessError::config("problem.samples must be positive"));
                }
            }
            ProblemKind::MatrixHinge => {
                if !matrix {
                    return Err(HarnessError::config("matrix_hinge needs problem.rows and problem.cols"));
                }
                if self.bias {
                    return Err(HarnessError::config("matrix_hinge does not take a bias column"));
                }
                if self.data.is_none() && self.samples == 0 {
                    return Err(HarnessError::config("problem.samples must be positive"));
                }
            }
        }
        Ok(())
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let label = self.label();
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(HarnessError::config(format!(
                "solver label {label:?} must be nonempty and use only letters, digits, '_' or '-'"
            )));
        }
        positive("solver.c", self.c)?;
        positive("solver.c_prime", self.c_prime)?;
        if let Some(d) = self.distance_estimate {
            positive("solver.distance_estimate", d)?;
        }
        if self.batch_size == Some(0) {
            return Err(HarnessError::config("solver.batch_size must be positive"));
        }
        if self.max_fw_iterations == 0 {
            return Err(HarnessError::config("solver.max_fw_iterations must be positive"));
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(HarnessError::config("epsilons must not be empty"));
        }
        for (i, &e) in self.epsilons.iter().enumerate() {
            positive("epsilon", e)?;
            if self.epsilons[..i].contains(&e) {
                return Err(HarnessError::config(format!("epsilon {e} is listed twice")));
            }
        }
        if self.repetitions == 0 {
            return Err(HarnessError::config("repetitions must be at least 1"));
        }
        if self.reference_budget < MIN_REFERENCE_BUDGET {
            return Err(HarnessError::config(format!(
                "reference_budget must be at least {MIN_REFERENCE_BUDGET}"
            )));
        }
        if self.solvers.is_empty() {
            return Err(HarnessError::config("at least one [[solver]] table is required"));
        }
        self.problem.validate()?;
        let mut labels = HashSet::new();
        for s in &self.solvers {
            s.validate()?;
            if !labels.insert(s.label()) {
                return Err(HarnessError::config(format!("duplicate solver label {:?}", s.label())));
            }
            if s.batch_size.is_some()
                && !matches!(self.problem.kind, ProblemKind::Hinge | ProblemKind::MatrixHinge)
            {
                return Err(HarnessError::config(format!(
                    "solver {:?}: batch_size needs a finite-sum problem (hinge or matrix_hinge)",
                    s.label()
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file, resolving a relative data path
    /// against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(data), Some(dir)) = (cfg.problem.data.as_mut(), path.parent()) {
            if data.is_relative() {
                *data = dir.join(&*data);
            }
        }
        Ok(cfg)
    }
}
