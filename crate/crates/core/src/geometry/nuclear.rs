use crate::error::{Error, Result};
use crate::geometry::ball::project_l1_ball;
use crate::geometry::matrix::outer_into;
use crate::geometry::svd::{jacobi_svd, top_singular_pair, DEFAULT_JACOBI_TOL, DEFAULT_MAX_SWEEPS};
use crate::rng::StreamRng;

/// Frobenius-nearest point of `{X : ||X||_* <= r}` via SVD and an ℓ1
/// projection of the singular values.
pub fn project_nuclear_ball(
    a: &[f64],
    rows: usize,
    cols: usize,
    r: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let svd = jacobi_svd(a, rows, cols, tol, max_sweeps)?;
    if svd.s.iter().sum::<f64>() <= r {
        return Ok(a.to_vec());
    }
    let sigma = project_l1_ball(&svd.s, r);
    Ok(svd.reconstruct_with(&sigma))
}

/// Writes `-r u v^T` for the top singular pair of `g`.
///
/// A zero direction makes every feasible point optimal; a rank-1 point of
/// norm `r` built from `rng` is returned.
#[allow(clippy::too_many_arguments)]
pub fn lmo_nuclear_ball_into(
    g: &[f64],
    rows: usize,
    cols: usize,
    r: f64,
    tol: f64,
    max_iter: usize,
    rng: &mut StreamRng,
    out: &mut [f64],
) -> Result<()> {
    if g.len() != rows * cols || out.len() != rows * cols {
        return Err(Error::invalid("matrix shape does not match data length"));
    }
    let (u, v) = if g.iter().all(|x| *x == 0.0) {
        (rng.unit_vector(rows), rng.unit_vector(cols))
    } else {
        match top_singular_pair(g, rows, cols, tol, max_iter, rng) {
            Ok((_, u, v)) => (u, v),
            // Nearly tied top singular values stall power iteration.
            Err(Error::NumericalFailure(_)) => {
                let svd = jacobi_svd(g, rows, cols, DEFAULT_JACOBI_TOL, DEFAULT_MAX_SWEEPS)?;
                let top = (0..svd.s.len())
                    .max_by(|&i, &j| svd.s[i].total_cmp(&svd.s[j]))
                    .unwrap_or(0);
                let u: Vec<f64> = (0..rows).map(|i| svd.u[i * svd.s.len() + top]).collect();
                let v: Vec<f64> = (0..cols).map(|j| svd.v[j * svd.s.len() + top]).collect();
                (u, v)
            }
            Err(e) => return Err(e),
        }
    };
    outer_into(&u, &v, -r, out);
    Ok(())
}

pub fn lmo_nuclear_ball(
    g: &[f64],
    rows: usize,
    cols: usize,
    r: f64,
    tol: f64,
    max_iter: usize,
    rng: &mut StreamRng,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; rows * cols];
    lmo_nuclear_ball_into(g, rows, cols, r, tol, max_iter, rng, &mut out)?;
    Ok(out)
}
