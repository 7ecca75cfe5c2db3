use crate::error::{Error, Result};
use crate::linalg::ceil_robust;

/// Constants that fix every per-step parameter of the Moreau methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub lambda: f64,
    pub outer_steps: usize,
    pub lipschitz: f64,
    /// `sigma^2`, zero for exact subgradients.
    pub variance: f64,
    pub diameter: f64,
    pub d_tilde: f64,
    pub c_prime: f64,
}

/// Parameters in effect at outer step `k` and inner step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub beta: f64,
    pub gamma: f64,
    pub inner_steps: usize,
    pub theta: f64,
    pub fw_budget: usize,
    pub wolfe_tol: f64,
}

/// `theta_t = 2(t+1) / (t(t+3))`.
pub fn theta(t: usize) -> f64 {
    let t = t as f64;
    2.0 * (t + 1.0) / (t * (t + 3.0))
}

/// `T_k = ceil((4G^2 + sigma^2) lambda^2 K k^2 / (2 D~))`.
pub fn inner_steps(p: &ScheduleParams, k: usize) -> usize {
    let g2 = p.lipschitz * p.lipschitz;
    let kk = k as f64;
    ceil_robust((4.0 * g2 + p.variance) * p.lambda * p.lambda * p.outer_steps as f64 * kk * kk / (2.0 * p.d_tilde))
        .max(1)
}

/// `T^ = ceil(7 K D_X^2 / (c' D~))`.
pub fn fw_budget(p: &ScheduleParams) -> usize {
    ceil_robust(7.0 * p.outer_steps as f64 * p.diameter * p.diameter / (p.c_prime * p.d_tilde)).max(1)
}

pub fn compute_schedule(p: &ScheduleParams, k: usize, t: usize) -> Result<Schedule> {
    if k == 0 || t == 0 {
        return Err(Error::invalid("schedule indices start at 1"));
    }
    if k > p.outer_steps {
        return Err(Error::invalid(format!(
            "outer step {k} exceeds K = {}",
            p.outer_steps
        )));
    }
    if !(p.lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {}", p.lambda)));
    }
    if !(p.d_tilde > 0.0) || !(p.c_prime > 0.0) || !(p.diameter > 0.0) || p.variance < 0.0 {
        return Err(Error::invalid("schedule constants must be positive"));
    }
    let kk = k as f64;
    let big_k = p.outer_steps as f64;
    Ok(Schedule {
        beta: 4.0 / (p.lambda * kk),
        gamma: 2.0 / (kk + 1.0),
        inner_steps: inner_steps(p, k),
        theta: theta(t),
        fw_budget: fw_budget(p),
        wolfe_tol: 4.0 * p.c_prime * p.d_tilde / (p.lambda * big_k * kk),
    })
}
