use crate::error::{Error, Result};
use crate::oracles::LinearMinimizationOracle;
use crate::rng::StreamRng;

/// How long Frank-Wolfe runs on a projection subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FwStop {
    /// Exactly this many LMO calls.
    Budget(usize),
    /// Until the Wolfe gap is at most `tol`; each check costs one LMO call.
    WolfeGap { tol: f64, max_iter: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwOutput {
    pub point: Vec<f64>,
    /// Frank-Wolfe updates performed.
    pub iterations: usize,
    pub lmo_calls: usize,
    /// Wolfe gap at the returned point when it was computed.
    pub gap: Option<f64>,
}

/// Wolfe gap `beta <u - z, u - s>` of `min_X (beta/2)||u - z||^2` at `u`,
/// given the LMO answer `s` for the direction `u - z`.
pub fn wolfe_gap_with(u: &[f64], z: &[f64], s: &[f64], beta: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.len() {
        acc += (u[i] - z[i]) * (u[i] - s[i]);
    }
    beta * acc
}

/// Wolfe gap at `u`, spending one LMO call.
pub fn wolfe_gap(
    u: &[f64],
    z: &[f64],
    beta: f64,
    lmo: &dyn LinearMinimizationOracle,
    rng: &mut StreamRng,
) -> Result<f64> {
    let dir: Vec<f64> = u.iter().zip(z).map(|(a, b)| a - b).collect();
    let mut s = vec![0.0; u.len()];
    lmo.minimize(&dir, rng, &mut s)?;
    Ok(wolfe_gap_with(u, z, &s, beta))
}

/// Frank-Wolfe on `min_{u in X} ||u - z||^2` from `u0` with step `2/(t+1)`:
/// `u_t = ((t-1) u_{t-1} + 2 s_t) / (t+1)`. `beta` only scales the reported gap.
pub fn fw_quadratic_projection(
    z: &[f64],
    u0: &[f64],
    beta: f64,
    stop: FwStop,
    lmo: &dyn LinearMinimizationOracle,
    rng: &mut StreamRng,
) -> Result<FwOutput> {
    let d = z.len();
    if u0.len() != d {
        return Err(Error::invalid("dimension mismatch in Frank-Wolfe projection"));
    }
    let mut u = u0.to_vec();
    let mut dir = vec![0.0; d];
    let mut s = vec![0.0; d];
    match stop {
        FwStop::Budget(budget) => {
            if budget == 0 {
                return Err(Error::invalid("Frank-Wolfe budget must be positive"));
            }
            for t in 1..=budget {
                fw_step(&mut u, z, &mut dir, &mut s, t, lmo, rng)?;
            }
            Ok(FwOutput {
                point: u,
                iterations: budget,
                lmo_calls: budget,
                gap: None,
            })
        }
        FwStop::WolfeGap { tol, max_iter } => {
            if !(tol >= 0.0) {
                return Err(Error::invalid("Wolfe gap tolerance must be nonnegative"));
            }
            for t in 1..=max_iter + 1 {
                for i in 0..d {
                    dir[i] = u[i] - z[i];
                }
                lmo.minimize(&dir, rng, &mut s)?;
                let gap = wolfe_gap_with(&u, z, &s, beta);
                if gap <= tol {
                    return Ok(FwOutput {
                        point: u,
                        iterations: t - 1,
                        lmo_calls: t,
                        gap: Some(gap),
                    });
                }
                if t > max_iter {
                    break;
                }
                let tf = t as f64;
                for i in 0..d {
                    u[i] = ((tf - 1.0) * u[i] + 2.0 * s[i]) / (tf + 1.0);
                }
            }
            Err(Error::numerical(format!(
                "Frank-Wolfe did not reach Wolfe gap {tol} in {max_iter} iterations"
            )))
        }
    }
}

fn fw_step(
    u: &mut [f64],
    z: &[f64],
    dir: &mut [f64],
    s: &mut [f64],
    t: usize,
    lmo: &dyn LinearMinimizationOracle,
    rng: &mut StreamRng,
) -> Result<()> {
    for i in 0..u.len() {
        dir[i] = u[i] - z[i];
    }
    lmo.minimize(dir, rng, s)?;
    let tf = t as f64;
    for i in 0..u.len() {
        u[i] = ((tf - 1.0) * u[i] + 2.0 * s[i]) / (tf + 1.0);
    }
    Ok(())
}

/// Support size of `x` (entries with magnitude above `tol`).
pub fn support_size(x: &[f64], tol: f64) -> usize {
    x.iter().filter(|v| v.abs() > tol).count()
}
