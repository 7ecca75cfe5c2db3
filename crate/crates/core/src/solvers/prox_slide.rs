use crate::error::{Error, Result};
use crate::linalg;
use crate::oracles::{OracleCounters, Subgradients};
use crate::rng::StreamRng;
use crate::solvers::schedule::theta;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxSlideOutput {
    /// Final iterate `u_T`.
    pub last: Vec<f64>,
    /// Weighted average `u~_T`.
    pub average: Vec<f64>,
}

/// Approximately resolves `prox_{f/beta}(u0 - g/beta)` with `steps` subgradient
/// steps on `phi(u) = f(u) + (beta/2)||u - (u0 - g/beta)||^2`.
///
/// With `radius = Some(R)` every iterate is pulled back into `B(0, R)`.
/// Consumes exactly `steps` subgradient draws.
#[allow(clippy::too_many_arguments)]
pub fn prox_slide(
    g: &[f64],
    u0: &[f64],
    beta: f64,
    steps: usize,
    oracle: Subgradients<'_>,
    radius: Option<f64>,
    rng: &mut StreamRng,
    counters: &OracleCounters,
) -> Result<ProxSlideOutput> {
    if steps == 0 {
        return Err(Error::invalid("prox-slide needs at least one step"));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let d = u0.len();
    if g.len() != d || oracle.dim() != d {
        return Err(Error::invalid("dimension mismatch in prox-slide"));
    }
    let center: Vec<f64> = u0.iter().zip(g).map(|(u, gi)| u - gi / beta).collect();
    let mut u = u0.to_vec();
    let mut avg = u0.to_vec();
    let mut grad = vec![0.0; d];
    for t in 1..=steps {
        oracle.draw(&u, rng, counters, &mut grad)?;
        let step = 1.0 / ((1.0 + t as f64 / 2.0) * beta);
        for i in 0..d {
            u[i] -= step * (grad[i] + beta * (u[i] - center[i]));
        }
        if let Some(r) = radius {
            let n = linalg::norm(&u);
            if n > r {
                linalg::scale(&mut u, r / n);
            }
        }
        let th = theta(t);
        for (a, ui) in avg.iter_mut().zip(&u) {
            *a = (1.0 - th) * *a + th * ui;
        }
    }
    Ok(ProxSlideOutput {
        last: u,
        average: avg,
    })
}

/// `phi(u) = f(u) + <g, u> + (beta/2)||u - u0||^2`, the objective resolved by
/// [`prox_slide`] up to an additive constant.
pub fn prox_slide_objective(f_u: f64, g: &[f64], u: &[f64], u0: &[f64], beta: f64) -> f64 {
    f_u + linalg::dot(g, u) + 0.5 * beta * linalg::dist_sq(u, u0)
}
