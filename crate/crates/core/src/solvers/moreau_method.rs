use crate::error::{Error, Result};
use crate::linalg::{self, ceil_robust};
use crate::oracles::{wrap_counting, LinearMinimizationOracle, OracleCounters, ProjectionOracle};
use crate::rng::StreamRng;
use crate::solvers::frank_wolfe::{fw_quadratic_projection, FwStop};
use crate::solvers::prox_slide::prox_slide;
use crate::solvers::schedule::{compute_schedule, fw_budget, inner_steps, Schedule, ScheduleParams};
use crate::solvers::trace::{Recorder, RunTrace};
use crate::solvers::RunContext;

/// Inputs from which the Moreau method parameters are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivation {
    pub epsilon: f64,
    pub lipschitz: f64,
    pub variance: f64,
    pub diameter: f64,
    /// Radius `R` of the query ball `X'`.
    pub radius: f64,
    /// Estimate of `||x0 - x*||`; `D_X` when absent.
    pub distance_estimate: Option<f64>,
    pub c: f64,
    pub c_prime: f64,
}

impl Derivation {
    pub fn new(epsilon: f64, lipschitz: f64, diameter: f64, radius: f64) -> Self {
        Self {
            epsilon,
            lipschitz,
            variance: 0.0,
            diameter,
            radius,
            distance_estimate: None,
            c: 1.0,
            c_prime: 1.0,
        }
    }

    fn estimate(&self) -> f64 {
        self.distance_estimate.unwrap_or(self.diameter)
    }

    fn check(&self) -> Result<()> {
        let positive = [self.epsilon, self.lipschitz, self.diameter, self.radius, self.c, self.c_prime, self.estimate()];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !(self.variance >= 0.0) {
            return Err(Error::invalid(format!("invalid parameter derivation {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    /// `T^` Frank-Wolfe steps per outer iteration.
    #[default]
    FixedBudget,
    /// Stop each projection once its Wolfe gap is at most `eta_k`.
    WolfeGap { max_iter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoreauConfig {
    pub lambda: f64,
    pub outer_steps: usize,
    pub d_tilde: f64,
    pub c: f64,
    pub c_prime: f64,
    pub lipschitz: f64,
    pub variance: f64,
    pub diameter: f64,
    pub radius: f64,
    /// Pull inner iterates back into `B(0, R)`.
    pub project_enclosing: bool,
    pub projection_mode: ProjectionMode,
}

impl MoreauConfig {
    /// `lambda = eps/G^2`, `D~ = c est^2`, `K = ceil(2 sqrt(10 + 8c) G est / eps)`.
    pub fn mopes(d: &Derivation) -> Result<Self> {
        d.check()?;
        let est = d.estimate();
        let k = ceil_robust(2.0 * (10.0 + 8.0 * d.c).sqrt() * d.lipschitz * est / d.epsilon);
        Ok(Self::from_derivation(d, k.max(1)))
    }

    /// As [`MoreauConfig::mopes`] with `K = ceil(2 sqrt(10 + 8c(1 + c')) G est / eps)`.
    pub fn moles(d: &Derivation) -> Result<Self> {
        d.check()?;
        let est = d.estimate();
        let k = ceil_robust(
            2.0 * (10.0 + 8.0 * d.c * (1.0 + d.c_prime)).sqrt() * d.lipschitz * est / d.epsilon,
        );
        Ok(Self::from_derivation(d, k.max(1)))
    }

    fn from_derivation(d: &Derivation, outer_steps: usize) -> Self {
        let est = d.estimate();
        Self {
            lambda: d.epsilon / (d.lipschitz * d.lipschitz),
            outer_steps,
            d_tilde: d.c * est * est,
            c: d.c,
            c_prime: d.c_prime,
            lipschitz: d.lipschitz,
            variance: d.variance,
            diameter: d.diameter,
            radius: d.radius,
            project_enclosing: true,
            projection_mode: ProjectionMode::FixedBudget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.lambda, self.d_tilde, self.c, self.c_prime, self.diameter, self.radius];
        if self.outer_steps == 0 || positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("invalid solver configuration {self:?}")));
        }
        if !(self.lipschitz >= 0.0) || !(self.variance >= 0.0) {
            return Err(Error::invalid("Lipschitz constant and variance must be nonnegative"));
        }
        Ok(())
    }

    pub fn schedule_params(&self) -> ScheduleParams {
        ScheduleParams {
            lambda: self.lambda,
            outer_steps: self.outer_steps,
            lipschitz: self.lipschitz,
            variance: self.variance,
            diameter: self.diameter,
            d_tilde: self.d_tilde,
            c_prime: self.c_prime,
        }
    }

    /// `sum_k T_k`, the subgradient calls of a full run.
    pub fn total_inner_steps(&self) -> u64 {
        let p = self.schedule_params();
        (1..=self.outer_steps).map(|k| inner_steps(&p, k) as u64).sum()
    }

    /// `T^`, the LMO calls per outer step in fixed-budget mode.
    pub fn fw_budget(&self) -> usize {
        fw_budget(&self.schedule_params())
    }
}

/// Approximate solver for `min_{u in X} (beta/2)||u - target||^2`.
pub trait ApproxProjection {
    /// Writes the approximate projection of `target` into `out`, warm-started
    /// at the feasible point `start`; `eta` is the Wolfe-gap tolerance.
    #[allow(clippy::too_many_arguments)]
    fn approx_project(
        &self,
        target: &[f64],
        start: &[f64],
        beta: f64,
        eta: f64,
        rng: &mut StreamRng,
        counters: &OracleCounters,
        out: &mut [f64],
    ) -> Result<()>;

    /// Tolerance `eta_k` requested at an outer step.
    fn tolerance(&self, _schedule: &Schedule) -> f64 {
        0.0
    }
}

/// Exact projection through a PO, one call per outer step.
pub struct ExactProjection<'a>(pub &'a dyn ProjectionOracle);

impl ApproxProjection for ExactProjection<'_> {
    fn approx_project(
        &self,
        target: &[f64],
        _start: &[f64],
        _beta: f64,
        _eta: f64,
        _rng: &mut StreamRng,
        counters: &OracleCounters,
        out: &mut [f64],
    ) -> Result<()> {
        wrap_counting(self.0, counters).project(target, out)
    }
}

/// Frank-Wolfe projection through an LMO.
pub struct FrankWolfeProjection<'a> {
    pub lmo: &'a dyn LinearMinimizationOracle,
    /// Steps per call in fixed-budget mode.
    pub budget: usize,
    pub mode: ProjectionMode,
}

impl ApproxProjection for FrankWolfeProjection<'_> {
    fn approx_project(
        &self,
        target: &[f64],
        start: &[f64],
        beta: f64,
        eta: f64,
        rng: &mut StreamRng,
        counters: &OracleCounters,
        out: &mut [f64],
    ) -> Result<()> {
        let stop = match self.mode {
            ProjectionMode::FixedBudget => FwStop::Budget(self.budget),
            ProjectionMode::WolfeGap { max_iter } => FwStop::WolfeGap { tol: eta, max_iter },
        };
        let lmo = wrap_counting(self.lmo, counters);
        let res = fw_quadratic_projection(target, start, beta, stop, &lmo, rng)?;
        out.copy_from_slice(&res.point);
        Ok(())
    }

    fn tolerance(&self, schedule: &Schedule) -> f64 {
        schedule.wolfe_tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoreauOutput {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    /// Outer steps actually performed (fewer than `K` after an early stop).
    pub steps: usize,
}

/// The generic Moreau subgradient loop with a pluggable projection step.
///
/// Rows are appended to `trace` as the run progresses, so a failed run leaves
/// its partial trace behind.
pub fn moreau_subgradient_general(
    ctx: &RunContext<'_>,
    projection: &dyn ApproxProjection,
    x0: &[f64],
    config: &MoreauConfig,
    rng: &mut StreamRng,
    trace: &mut RunTrace,
) -> Result<MoreauOutput> {
    config.validate()?;
    ctx.check_start(x0)?;
    let d = x0.len();
    let params = config.schedule_params();
    let radius = config.project_enclosing.then_some(config.radius);

    let mut x = x0.to_vec();
    let mut xp = x0.to_vec();
    let mut z = x0.to_vec();
    let mut zp = x0.to_vec();
    let mut y = vec![0.0; d];
    let mut yp = vec![0.0; d];
    let mut target = vec![0.0; d];
    let mut g_prime = vec![0.0; d];
    let mut z_next = vec![0.0; d];

    let mut rec = Recorder::new(trace, ctx.options);
    if rec.record(0, ctx.counters, ctx.objective.value(&x)?, 0.0) {
        return Ok(MoreauOutput { x, x_prime: xp, steps: 0 });
    }
    for k in 1..=config.outer_steps {
        let s = compute_schedule(&params, k, 1)?;
        linalg::lerp_into(&x, &z, s.gamma, &mut y);
        linalg::lerp_into(&xp, &zp, s.gamma, &mut yp);
        for i in 0..d {
            let gx = (y[i] - yp[i]) / config.lambda;
            target[i] = z[i] - gx / s.beta;
            g_prime[i] = -gx;
        }
        let eta = projection.tolerance(&s);
        projection.approx_project(&target, &z, s.beta, eta, rng, ctx.counters, &mut z_next)?;
        std::mem::swap(&mut z, &mut z_next);

        let inner = prox_slide(
            &g_prime,
            &zp,
            s.beta,
            s.inner_steps,
            ctx.subgradients,
            radius,
            rng,
            ctx.counters,
        )?;
        zp = inner.last;
        for i in 0..d {
            x[i] = (1.0 - s.gamma) * x[i] + s.gamma * z[i];
            xp[i] = (1.0 - s.gamma) * xp[i] + s.gamma * inner.average[i];
        }
        let stop = rec.record(k, ctx.counters, ctx.objective.value(&x)?, linalg::dist(&x, &xp));
        if stop {
            return Ok(MoreauOutput { x, x_prime: xp, steps: k });
        }
    }
    Ok(MoreauOutput {
        x,
        x_prime: xp,
        steps: config.outer_steps,
    })
}

/// Moreau projection-efficient subgradient method: one exact projection per
/// outer step.
pub fn mopes(
    ctx: &RunContext<'_>,
    x0: &[f64],
    config: &MoreauConfig,
    rng: &mut StreamRng,
    trace: &mut RunTrace,
) -> Result<MoreauOutput> {
    moreau_subgradient_general(ctx, &ExactProjection(ctx.set), x0, config, rng, trace)
}

/// Moreau LMO-efficient subgradient method: projections replaced by
/// Frank-Wolfe on the projection subproblem.
pub fn moles(
    ctx: &RunContext<'_>,
    x0: &[f64],
    config: &MoreauConfig,
    rng: &mut StreamRng,
    trace: &mut RunTrace,
) -> Result<MoreauOutput> {
    let fw = FrankWolfeProjection {
        lmo: ctx.set,
        budget: config.fw_budget(),
        mode: config.projection_mode,
    };
    moreau_subgradient_general(ctx, &fw, x0, config, rng, trace)
}
