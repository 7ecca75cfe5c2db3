//! Builds objective and constraint set from a [`ProblemConfig`].

use nsco::geometry::{SetDescriptor, Shape};
use nsco::oracles::{FiniteSum, FirstOrderOracle};
use nsco::par::Exec;
use nsco::problems::{
    load_dense_csv, synth_classification, synth_piecewise_linear, HingeSvm, L1Distance, LoadOptions,
    MatrixSvm, PiecewiseLinear,
};
use nsco::rng::StreamRng;

use crate::config::{ProblemConfig, ProblemKind, StartRule};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone)]
enum Objective {
    Piecewise(PiecewiseLinear),
    Distance(L1Distance),
    Hinge(HingeSvm),
    Matrix(MatrixSvm),
}

/// A constrained instance ready for the solvers.
#[derive(Debug, Clone)]
pub struct Problem {
    objective: Objective,
    pub set: SetDescriptor,
    /// `G` used by every parameter derivation.
    pub lipschitz: f64,
    /// Radius `R` of the query ball.
    pub enclosing_radius: f64,
    /// Known optimal value, for synthetic instances.
    pub certificate: Option<f64>,
    start: StartRule,
}

impl Problem {
    pub fn build(cfg: &ProblemConfig, exec: Exec) -> Result<Self> {
        cfg.validate()?;
        let shape = match (cfg.rows, cfg.cols) {
            (Some(rows), Some(cols)) => Shape::Matrix { rows, cols },
            _ => Shape::Vector(cfg.dim.unwrap_or(0)),
        };
        let (objective, certificate, shape) = match cfg.kind {
            ProblemKind::PiecewiseLinear | ProblemKind::L1Distance => {
                let set = SetDescriptor::new(cfg.set_name().into(), cfg.radius, shape)?;
                let mut anchor = set.boundary_point(&mut StreamRng::new(cfg.synth_seed, 1));
                anchor.iter_mut().for_each(|v| *v *= cfg.anchor_scale);
                if cfg.kind == ProblemKind::PiecewiseLinear {
                    let f = synth_piecewise_linear(shape.dim(), cfg.pieces, cfg.synth_seed, &anchor)?;
                    let cert = f.certificate().map(|c| c.value);
                    (Objective::Piecewise(f), cert, shape)
                } else {
                    (Objective::Distance(L1Distance::new(anchor)?), Some(0.0), shape)
                }
            }
            ProblemKind::Hinge => {
                let h = if let Some(path) = &cfg.data {
                    let opts = LoadOptions {
                        features: cfg.dim,
                        bias: cfg.bias,
                    };
                    let data = load_dense_csv(path, opts)?;
                    HingeSvm::new(data.rows, data.n, data.d)?
                } else {
                    let d = cfg.dim.unwrap_or(0);
                    let teacher = StreamRng::new(cfg.synth_seed, 2).unit_vector(d);
                    let data = synth_classification(cfg.samples, &teacher, cfg.flip, cfg.synth_seed)?;
                    let width = d + cfg.bias as usize;
                    let mut features = Vec::with_capacity(data.n * width);
                    for row in data.features.chunks(d) {
                        features.extend_from_slice(row);
                        if cfg.bias {
                            features.push(1.0);
                        }
                    }
                    HingeSvm::from_labeled(&features, &data.labels, width)?
                };
                let d = FirstOrderOracle::dim(&h);
                (Objective::Hinge(h.with_exec(exec)), None, Shape::Vector(d))
            }
            ProblemKind::MatrixHinge => {
                let (rows, cols) = (cfg.rows.unwrap_or(0), cfg.cols.unwrap_or(0));
                let m = if let Some(path) = &cfg.data {
                    let opts = LoadOptions {
                        features: Some(rows * cols),
                        bias: false,
                    };
                    let data = load_dense_csv(path, opts)?;
                    MatrixSvm::new(&data.rows, &vec![1.0; data.n], rows, cols)?
                } else {
                    let nuclear = SetDescriptor::nuclear(rows, cols, 1.0)?;
                    let teacher = nuclear.boundary_point(&mut StreamRng::new(cfg.synth_seed, 2));
                    let data = synth_classification(cfg.samples, &teacher, cfg.flip, cfg.synth_seed)?;
                    MatrixSvm::new(&data.features, &data.labels, rows, cols)?
                };
                (Objective::Matrix(m.with_exec(exec)), None, shape)
            }
        };
        let set = SetDescriptor::new(cfg.set_name().into(), cfg.radius, shape)?;
        let computed = match &objective {
            Objective::Piecewise(f) => f.lipschitz(),
            Objective::Distance(f) => f.lipschitz(),
            Objective::Hinge(f) => f.lipschitz(),
            Objective::Matrix(f) => f.lipschitz(),
        };
        let lipschitz = cfg.lipschitz.unwrap_or(computed);
        if !(lipschitz > 0.0) {
            return Err(HarnessError::config(
                "the objective has Lipschitz constant 0; set problem.lipschitz",
            ));
        }
        let enclosing_radius = cfg.enclosing_radius.unwrap_or(set.enclosing_radius());
        Ok(Self {
            objective,
            set,
            lipschitz,
            enclosing_radius,
            certificate,
            start: cfg.start,
        })
    }

    pub fn objective(&self) -> &dyn FirstOrderOracle {
        match &self.objective {
            Objective::Piecewise(f) => f,
            Objective::Distance(f) => f,
            Objective::Hinge(f) => f,
            Objective::Matrix(f) => f,
        }
    }

    /// The finite-sum view used to build minibatch oracles.
    pub fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        match &self.objective {
            Objective::Hinge(f) => Some(f),
            Objective::Matrix(f) => Some(f),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Starting point drawn by the configured rule.
    pub fn start_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        match self.start {
            StartRule::Extreme => self.set.extreme_point(rng),
            StartRule::Boundary => self.set.boundary_point(rng),
            StartRule::Origin => vec![0.0; self.dim()],
        }
    }
}
