//! Singular value kernels: one-sided Jacobi SVD for desk-scale matrices and
//! power iteration for the top singular pair.

use crate::error::{Error, Result};
use crate::geometry::matrix::{matvec, matvec_t};
use crate::linalg;
use crate::rng::StreamRng;

pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 60;

/// Thin SVD `A = U diag(s) V^T` with singular values in descending order.
///
/// `u` is rows x k and `v` is cols x k (row-major), `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub rows: usize,
    pub cols: usize,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U diag(sigma) V^T` for replacement singular values `sigma`.
    pub fn reconstruct_with(&self, sigma: &[f64]) -> Vec<f64> {
        let k = self.rank();
        let mut out = vec![0.0; self.rows * self.cols];
        for (j, &sj) in sigma.iter().enumerate().take(k) {
            if sj == 0.0 {
                continue;
            }
            for i in 0..self.rows {
                let uij = self.u[i * k + j] * sj;
                if uij == 0.0 {
                    continue;
                }
                let row = &mut out[i * self.cols..(i + 1) * self.cols];
                for (c, o) in row.iter_mut().enumerate() {
                    *o += uij * self.v[c * k + j];
                }
            }
        }
        out
    }
}

/// One-sided (Hestenes) Jacobi SVD of a row-major `rows x cols` matrix.
///
/// Sweeps until every column pair is orthogonal to relative tolerance `tol`;
/// exceeding `max_sweeps` is a numerical failure.
pub fn jacobi_svd(a: &[f64], rows: usize, cols: usize, tol: f64, max_sweeps: usize) -> Result<Svd> {
    if a.len() != rows * cols {
        return Err(Error::invalid("matrix shape does not match data length"));
    }
    if rows < cols {
        let mut t = vec![0.0; a.len()];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = a[i * cols + j];
            }
        }
        let svd = jacobi_svd(&t, cols, rows, tol, max_sweeps)?;
        return Ok(Svd {
            rows,
            cols,
            u: svd.v,
            s: svd.s,
            v: svd.u,
        });
    }
    let (m, n) = (rows, cols);
    // column-major working copies
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[i * n + j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = n < 2;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = linalg::dot(&w[p], &w[p]);
                let beta = linalg::dot(&w[q], &w[q]);
                let gamma = linalg::dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical(format!(
            "Jacobi SVD did not converge in {max_sweeps} sweeps"
        )));
    }

    let mut order: Vec<(usize, f64)> = w.iter().map(|c| linalg::norm(c)).enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let k = n;
    let mut u = vec![0.0; m * k];
    let mut vv = vec![0.0; n * k];
    let mut s = Vec::with_capacity(k);
    for (col, (j, sj)) in order.into_iter().enumerate() {
        s.push(sj);
        if sj > 0.0 {
            for i in 0..m {
                u[i * k + col] = w[j][i] / sj;
            }
        }
        for i in 0..n {
            vv[i * k + col] = v[j][i];
        }
    }
    Ok(Svd {
        rows,
        cols,
        u,
        s,
        v: vv,
    })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Nuclear norm (sum of singular values).
pub fn nuclear_norm(a: &[f64], rows: usize, cols: usize) -> Result<f64> {
    Ok(jacobi_svd(a, rows, cols, DEFAULT_JACOBI_TOL, DEFAULT_MAX_SWEEPS)?
        .s
        .iter()
        .sum())
}

/// Top singular pair `(sigma, u, v)` by power iteration on `A^T A`.
///
/// Stops once `||A^T u - sigma v|| <= tol * sigma`; `A v = sigma u` holds by
/// construction. The start vector is drawn from `rng`.
pub fn top_singular_pair(
    a: &[f64],
    rows: usize,
    cols: usize,
    tol: f64,
    max_iter: usize,
    rng: &mut StreamRng,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if a.len() != rows * cols {
        return Err(Error::invalid("matrix shape does not match data length"));
    }
    if a.iter().all(|x| *x == 0.0) {
        return Err(Error::invalid("top singular pair of the zero matrix"));
    }
    let mut v = rng.unit_vector(cols);
    let mut u = vec![0.0; rows];
    let mut z = vec![0.0; cols];
    for _ in 0..max_iter {
        matvec(a, rows, cols, &v, &mut u);
        let sigma = linalg::norm(&u);
        if sigma == 0.0 {
            v = rng.unit_vector(cols);
            continue;
        }
        linalg::scale(&mut u, 1.0 / sigma);
        matvec_t(a, rows, cols, &u, &mut z);
        let mut resid = 0.0;
        for (zi, vi) in z.iter().zip(&v) {
            resid += (zi - sigma * vi) * (zi - sigma * vi);
        }
        if resid.sqrt() <= tol * sigma {
            return Ok((sigma, u, v));
        }
        let zn = linalg::norm(&z);
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / zn;
        }
    }
    Err(Error::numerical(format!(
        "power iteration did not reach tolerance {tol} in {max_iter} iterations"
    )))
}
