use crate::error::{Error, Result};
use crate::linalg::{self, ceil_robust, ceil_strict};
use crate::oracles::{wrap_counting, ProjectionOracle};
use crate::rng::StreamRng;
use crate::solvers::frank_wolfe::{fw_quadratic_projection, FwStop};
use crate::solvers::moreau_method::ProjectionMode;
use crate::solvers::trace::{Recorder, RunTrace};
use crate::solvers::RunContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `D_X / (G sqrt(K))` at every step.
    #[default]
    Fixed,
    /// `D_X / (G sqrt(k))` at step `k = 1, 2, ...`.
    Diminishing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgdConfig {
    pub steps: usize,
    pub rule: StepRule,
    pub lipschitz: f64,
    /// `sigma^2`; stepsizes use `sqrt(G^2 + sigma^2)` in place of `G`.
    pub variance: f64,
    pub diameter: f64,
}

impl PgdConfig {
    fn effective_lipschitz(&self) -> Result<f64> {
        let g = (self.lipschitz * self.lipschitz + self.variance).sqrt();
        if self.steps == 0 {
            return Err(Error::invalid("step count must be positive"));
        }
        if !(g > 0.0 && g.is_finite()) || !(self.diameter > 0.0) {
            return Err(Error::invalid(
                "stepsizes need a positive Lipschitz bound and diameter",
            ));
        }
        Ok(g)
    }

    pub fn stepsize(&self, k: usize) -> Result<f64> {
        let g = self.effective_lipschitz()?;
        let n = match self.rule {
            StepRule::Fixed => self.steps,
            StepRule::Diminishing => k.max(1),
        };
        Ok(self.diameter / (g * (n as f64).sqrt()))
    }
}

/// Steps for an `eps`-accurate averaged iterate: `ceil((sqrt(G^2 + sigma^2) D_X / eps)^2)`.
pub fn pgd_steps(epsilon: f64, lipschitz: f64, variance: f64, diameter: f64) -> usize {
    let g = (lipschitz * lipschitz + variance).sqrt();
    let r = g * diameter / epsilon;
    ceil_robust(r * r).max(1)
}

/// Steps for FW-PGD: `ceil((2 sqrt(G^2 + sigma^2) D_X / eps)^2)`.
pub fn fw_pgd_steps(epsilon: f64, lipschitz: f64, variance: f64, diameter: f64) -> usize {
    let g = (lipschitz * lipschitz + variance).sqrt();
    let r = 2.0 * g * diameter / epsilon;
    ceil_robust(r * r).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdOutput {
    /// Stepsize-weighted average of `x_0, ..., x_{K-1}`.
    pub average: Vec<f64>,
    pub last: Vec<f64>,
    pub best: Vec<f64>,
    pub best_value: f64,
    pub steps: usize,
}

struct Averager {
    sum: Vec<f64>,
    weight: f64,
    out: Vec<f64>,
}

impl Averager {
    fn new(d: usize) -> Self {
        Self {
            sum: vec![0.0; d],
            weight: 0.0,
            out: vec![0.0; d],
        }
    }

    fn push(&mut self, w: f64, x: &[f64]) -> &[f64] {
        linalg::axpy(w, x, &mut self.sum);
        self.weight += w;
        for (o, s) in self.out.iter_mut().zip(&self.sum) {
            *o = s / self.weight;
        }
        &self.out
    }
}

/// Projected subgradient method `x_{k+1} = P_X(x_k - alpha_k g_k)`.
///
/// The trace reports the weighted-average iterate; `best_value` tracks the best
/// iterate seen.
pub fn pgd(
    ctx: &RunContext<'_>,
    x0: &[f64],
    config: &PgdConfig,
    rng: &mut StreamRng,
    trace: &mut RunTrace,
) -> Result<PgdOutput> {
    config.effective_lipschitz()?;
    ctx.check_start(x0)?;
    let d = x0.len();
    let po = wrap_counting(ctx.set, ctx.counters);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut step_pt = vec![0.0; d];
    let mut avg = Averager::new(d);
    let mut best = x.clone();
    let mut best_value = ctx.objective.value(&x)?;

    let mut rec = Recorder::new(trace, ctx.options);
    let mut done = rec.record_with_best(0, ctx.counters, best_value, 0.0, best_value);
    let mut steps = 0;
    while !done && steps < config.steps {
        let k = steps + 1;
        let alpha = config.stepsize(k)?;
        ctx.subgradients.draw(&x, rng, ctx.counters, &mut g)?;
        let avg_x = avg.push(alpha, &x);
        for i in 0..d {
            step_pt[i] = x[i] - alpha * g[i];
        }
        let f_avg = ctx.objective.value(avg_x)?;
        po.project(&step_pt, &mut x)?;
        let fx = ctx.objective.value(&x)?;
        if fx < best_value {
            best_value = fx;
            best.copy_from_slice(&x);
        }
        steps = k;
        done = rec.record_with_best(k, ctx.counters, f_avg, 0.0, best_value);
    }
    let average = if steps == 0 { x0.to_vec() } else { avg.out };
    Ok(PgdOutput {
        average,
        last: x,
        best,
        best_value,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwPgdConfig {
    pub steps: usize,
    pub lipschitz: f64,
    pub variance: f64,
    pub diameter: f64,
    pub projection_mode: ProjectionMode,
}

impl FwPgdConfig {
    /// `alpha = D_X / (2 sqrt(G^2 + sigma^2) sqrt(K))`.
    pub fn stepsize(&self) -> Result<f64> {
        let g2 = self.lipschitz * self.lipschitz + self.variance;
        if self.steps == 0 || !(g2 > 0.0) || !(self.diameter > 0.0) {
            return Err(Error::invalid("FW-PGD needs K >= 1, positive G and D_X"));
        }
        Ok(self.diameter / (2.0 * g2.sqrt() * (self.steps as f64).sqrt()))
    }

    /// Projection tolerance `eta = (G^2 + sigma^2) alpha`.
    pub fn tolerance(&self) -> Result<f64> {
        Ok((self.lipschitz * self.lipschitz + self.variance) * self.stepsize()?)
    }

    /// Frank-Wolfe steps per projection: the least integer above
    /// `7 D_X^2 / (alpha^2 (G^2 + sigma^2))`, i.e. `28K + 1`.
    pub fn fw_budget(&self) -> Result<usize> {
        let a = self.stepsize()?;
        let g2 = self.lipschitz * self.lipschitz + self.variance;
        Ok(ceil_strict(7.0 * self.diameter * self.diameter / (a * a * g2)))
    }
}

/// Projected subgradient method with each projection replaced by Frank-Wolfe.
pub fn fw_pgd(
    ctx: &RunContext<'_>,
    x0: &[f64],
    config: &FwPgdConfig,
    rng: &mut StreamRng,
    trace: &mut RunTrace,
) -> Result<PgdOutput> {
    let alpha = config.stepsize()?;
    let eta = config.tolerance()?;
    let budget = config.fw_budget()?;
    ctx.check_start(x0)?;
    let d = x0.len();
    let lmo = wrap_counting(ctx.set, ctx.counters);
    let stop = match config.projection_mode {
        ProjectionMode::FixedBudget => FwStop::Budget(budget),
        ProjectionMode::WolfeGap { max_iter } => FwStop::WolfeGap { tol: eta, max_iter },
    };
    let mut x = x0.to_vec();
    let mut g = vec![0.0; d];
    let mut target = vec![0.0; d];
    let mut avg = Averager::new(d);
    let mut best = x.clone();
    let mut best_value = ctx.objective.value(&x)?;

    let mut rec = Recorder::new(trace, ctx.options);
    let mut done = rec.record_with_best(0, ctx.counters, best_value, 0.0, best_value);
    let mut steps = 0;
    while !done && steps < config.steps {
        ctx.subgradients.draw(&x, rng, ctx.counters, &mut g)?;
        let avg_x = avg.push(alpha, &x);
        for i in 0..d {
            target[i] = x[i] - alpha * g[i];
        }
        let f_avg = ctx.objective.value(avg_x)?;
        let res = fw_quadratic_projection(&target, &x, 1.0 / alpha, stop, &lmo, rng)?;
        x = res.point;
        let fx = ctx.objective.value(&x)?;
        if fx < best_value {
            best_value = fx;
            best.copy_from_slice(&x);
        }
        steps += 1;
        done = rec.record_with_best(steps, ctx.counters, f_avg, 0.0, best_value);
    }
    let average = if steps == 0 { x0.to_vec() } else { avg.out };
    Ok(PgdOutput {
        average,
        last: x,
        best,
        best_value,
        steps,
    })
}
