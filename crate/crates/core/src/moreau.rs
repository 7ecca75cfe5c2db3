//! Moreau envelope machinery: the joint objective
//! `Psi(x, x') = f(x') + ||x - x'||^2 / (2 lambda)` and approximate prox
//! evaluation through subgradient calls only.

use crate::error::{Error, Result};
use crate::linalg;
use crate::oracles::{FirstOrderOracle, OracleCounters, Subgradients};
use crate::rng::StreamRng;
use crate::solvers::prox_slide;

/// `f` smoothed by `lambda`, with queries confined to `B(0, R)`.
#[derive(Clone, Copy)]
pub struct JointObjective<'a> {
    pub f: &'a dyn FirstOrderOracle,
    pub lambda: f64,
    pub radius: f64,
}

impl<'a> JointObjective<'a> {
    pub fn new(f: &'a dyn FirstOrderOracle, lambda: f64, radius: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(radius > 0.0) {
            return Err(Error::invalid("enclosing radius must be positive"));
        }
        Ok(Self { f, lambda, radius })
    }

    pub fn value(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        joint_value(self.f, x, xp, self.lambda)
    }

    pub fn envelope(&self, x: &[f64], options: &ProxOptions) -> Result<ProxResult> {
        envelope(self.f, x, self.lambda, self.radius, options)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// `f(x') + ||x - x'||^2 / (2 lambda)`; one FO call.
pub fn joint_value(f: &dyn FirstOrderOracle, x: &[f64], xp: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if x.len() != xp.len() {
        return Err(Error::invalid("dimension mismatch in joint objective"));
    }
    Ok(f.value(xp)? + linalg::dist_sq(x, xp) / (2.0 * lambda))
}

/// Gradient of the coupling term: `((x - x')/lambda, (x' - x)/lambda)`.
pub fn grad_psi(x: &[f64], xp: &[f64], lambda: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_lambda(lambda)?;
    if x.len() != xp.len() {
        return Err(Error::invalid("dimension mismatch in joint objective"));
    }
    let gx: Vec<f64> = x.iter().zip(xp).map(|(a, b)| (a - b) / lambda).collect();
    let gxp = gx.iter().map(|v| -v).collect();
    Ok((gx, gxp))
}

/// Approximate `prox_{lambda f}(x)` together with the envelope value.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub point: Vec<f64>,
    /// `f(x^) + ||x - x^||^2 / (2 lambda)`.
    pub value: f64,
    pub iterations: usize,
}

/// Inner solver for the prox subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProxMethod {
    /// Proximal subgradient steps with a constant stepsize and a uniform
    /// average; error `O(1/sqrt(T))`.
    #[default]
    Subgradient,
    /// Prox-slide steps `1/((1 + t/2) beta)` with weighted averaging; error `O(1/T)`.
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxOptions {
    pub iterations: usize,
    pub method: ProxMethod,
    /// Estimate of `||x - prox(x)||` for the constant stepsize; `G lambda` by default.
    pub distance: Option<f64>,
}

impl ProxOptions {
    pub fn new(iterations: usize) -> Self {
        Self {
            iterations,
            method: ProxMethod::Subgradient,
            distance: None,
        }
    }

    pub fn sliding(iterations: usize) -> Self {
        Self {
            method: ProxMethod::Sliding,
            ..Self::new(iterations)
        }
    }
}

/// Proximal subgradient method on `f(u) + (beta/2)||u - x||^2`, `beta = 1/lambda`:
///
/// `u_{t+1} = P_{B(0,R)}(u_t - (eta/(1 + eta beta))(g_t + beta(u_t - x)))`
///
/// with `eta = dist / (2 G sqrt(T))` and output `(1/T) sum_t u_{t+1}`. Spends `T`
/// FO calls on the iterations and one more on the returned value.
pub fn prox_subgradient(
    f: &dyn FirstOrderOracle,
    x: &[f64],
    lambda: f64,
    iterations: usize,
    radius: f64,
    distance: Option<f64>,
) -> Result<ProxResult> {
    check_lambda(lambda)?;
    if iterations == 0 {
        return Err(Error::invalid("proximal subgradient needs at least one iteration"));
    }
    let d = x.len();
    if f.dim() != d {
        return Err(Error::invalid("dimension mismatch in proximal subgradient"));
    }
    let beta = 1.0 / lambda;
    let g_bound = f.lipschitz();
    let dist = distance.unwrap_or(g_bound * lambda);
    let eta = dist / (2.0 * g_bound * (iterations as f64).sqrt());
    let factor = if eta.is_finite() && eta > 0.0 {
        eta / (1.0 + eta * beta)
    } else if eta == 0.0 {
        0.0
    } else {
        1.0 / beta
    };

    let mut u = x.to_vec();
    let mut g = vec![0.0; d];
    let mut sum = vec![0.0; d];
    for _ in 0..iterations {
        f.evaluate(&u, &mut g)?;
        for i in 0..d {
            u[i] -= factor * (g[i] + beta * (u[i] - x[i]));
        }
        let n = linalg::norm(&u);
        if n > radius {
            linalg::scale(&mut u, radius / n);
        }
        linalg::axpy(1.0, &u, &mut sum);
    }
    linalg::scale(&mut sum, 1.0 / iterations as f64);
    let value = f.value(&sum)? + linalg::dist_sq(x, &sum) / (2.0 * lambda);
    Ok(ProxResult {
        point: sum,
        value,
        iterations,
    })
}

/// Prox-slide with `g = 0`, `u0 = x`, `beta = 1/lambda` on an exact oracle.
pub fn prox_sliding(
    f: &dyn FirstOrderOracle,
    x: &[f64],
    lambda: f64,
    iterations: usize,
    radius: f64,
) -> Result<ProxResult> {
    check_lambda(lambda)?;
    let counters = OracleCounters::new();
    let mut rng = StreamRng::from_seed(0);
    let zero = vec![0.0; x.len()];
    let out = prox_slide(
        &zero,
        x,
        1.0 / lambda,
        iterations,
        Subgradients::Exact(f),
        Some(radius),
        &mut rng,
        &counters,
    )?;
    let value = f.value(&out.average)? + linalg::dist_sq(x, &out.average) / (2.0 * lambda);
    Ok(ProxResult {
        point: out.average,
        value,
        iterations,
    })
}

/// Envelope value and prox point at `x`.
pub fn envelope(
    f: &dyn FirstOrderOracle,
    x: &[f64],
    lambda: f64,
    radius: f64,
    options: &ProxOptions,
) -> Result<ProxResult> {
    match options.method {
        ProxMethod::Subgradient => {
            prox_subgradient(f, x, lambda, options.iterations, radius, options.distance)
        }
        ProxMethod::Sliding => prox_sliding(f, x, lambda, options.iterations, radius),
    }
}

/// `(x - x^)/lambda`, the envelope gradient at `x`.
pub fn envelope_gradient(
    f: &dyn FirstOrderOracle,
    x: &[f64],
    lambda: f64,
    radius: f64,
    options: &ProxOptions,
) -> Result<Vec<f64>> {
    let p = envelope(f, x, lambda, radius, options)?;
    Ok(x.iter().zip(&p.point).map(|(a, b)| (a - b) / lambda).collect())
}
