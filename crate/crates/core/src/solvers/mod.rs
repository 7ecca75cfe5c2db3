//! Moreau-envelope sliding methods, their Frank-Wolfe variant, and the
//! projected subgradient baselines.

mod frank_wolfe;
mod moreau_method;
mod pgd;
mod prox_slide;
mod schedule;
mod trace;

pub use frank_wolfe::{fw_quadratic_projection, support_size, wolfe_gap, wolfe_gap_with, FwOutput, FwStop};
pub use moreau_method::{
    moles, mopes, moreau_subgradient_general, ApproxProjection, Derivation, ExactProjection,
    FrankWolfeProjection, MoreauConfig, MoreauOutput, ProjectionMode,
};
pub use pgd::{fw_pgd, fw_pgd_steps, pgd, pgd_steps, FwPgdConfig, PgdConfig, PgdOutput, StepRule};
pub use prox_slide::{prox_slide, prox_slide_objective, ProxSlideOutput};
pub use schedule::{compute_schedule, fw_budget, inner_steps, theta, Schedule, ScheduleParams};
pub use trace::{RunTrace, TraceOptions, TraceRecord};

use crate::error::{Error, Result};
use crate::geometry::SetDescriptor;
use crate::oracles::{FirstOrderOracle, OracleCounters, Subgradients};

/// Everything a solver run touches besides its own parameters.
#[derive(Clone, Copy)]
pub struct RunContext<'a> {
    /// Uncounted objective used only to fill the trace.
    pub objective: &'a dyn FirstOrderOracle,
    pub subgradients: Subgradients<'a>,
    pub set: &'a SetDescriptor,
    pub counters: &'a OracleCounters,
    pub options: TraceOptions,
}

impl RunContext<'_> {
    fn check_start(&self, x0: &[f64]) -> Result<()> {
        if x0.len() != self.set.dim() || self.subgradients.dim() != self.set.dim() {
            return Err(Error::invalid(format!(
                "starting point has length {}, problem dimension is {}",
                x0.len(),
                self.set.dim()
            )));
        }
        let res = self.set.residual(x0)?;
        if res > 1e-8 {
            return Err(Error::invalid(format!(
                "starting point is infeasible (residual {res:.3e})"
            )));
        }
        Ok(())
    }
}
