//! Reference optimum by a long projected subgradient run.

use nsco::linalg;
use nsco::oracles::ProjectionOracle;
use serde::Serialize;

use crate::config::MIN_REFERENCE_BUDGET;
use crate::error::{HarnessError, Result};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    /// Best objective value seen.
    pub value: f64,
    /// Iterate attaining it.
    pub point: Vec<f64>,
    pub budget: usize,
    pub certificate: Option<f64>,
}

/// Best value of PGD with steps `D_X/(G sqrt(k))` from the origin over
/// `budget` iterations.
pub fn reference_optimum(problem: &Problem, budget: usize) -> Result<Reference> {
    if budget < MIN_REFERENCE_BUDGET {
        return Err(HarnessError::config(format!(
            "reference budget {budget} is below {MIN_REFERENCE_BUDGET}"
        )));
    }
    let f = problem.objective();
    let d = problem.dim();
    let scale = problem.set.diameter() / problem.lipschitz;
    let mut x = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut next = vec![0.0; d];
    let mut best = x.clone();
    let mut best_value = f64::INFINITY;
    for k in 1..=budget {
        let v = f.evaluate(&x, &mut g)?;
        if v < best_value {
            best_value = v;
            best.copy_from_slice(&x);
        }
        linalg::axpy(-scale / (k as f64).sqrt(), &g, &mut x);
        problem.set.project(&x, &mut next)?;
        std::mem::swap(&mut x, &mut next);
    }
    let v = f.value(&x)?;
    if v < best_value {
        best_value = v;
        best.copy_from_slice(&x);
    }
    Ok(Reference {
        value: best_value,
        point: best,
        budget,
        certificate: problem.certificate,
    })
}
