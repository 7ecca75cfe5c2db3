//! Vector-ball kernels: projections and linear minimization for the l2 and l1
//! balls centred at the origin.

use crate::linalg;

/// Projection onto `{y : ||y||_2 <= r}`.
pub fn project_l2_ball(x: &[f64], r: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    project_l2_ball_into(x, r, &mut out);
    out
}

pub fn project_l2_ball_into(x: &[f64], r: f64, out: &mut [f64]) {
    let n = linalg::norm(x);
    let s = if n > r { r / n } else { 1.0 };
    for (o, xi) in out.iter_mut().zip(x) {
        *o = xi * s;
    }
}

/// Projection onto `{y : ||y||_1 <= r}` by sort and soft-threshold.
pub fn project_l1_ball(x: &[f64], r: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    project_l1_ball_into(x, r, &mut out);
    out
}

pub fn project_l1_ball_into(x: &[f64], r: f64, out: &mut [f64]) {
    if linalg::norm1(x) <= r {
        out.copy_from_slice(x);
        return;
    }
    let theta = l1_threshold(x, r);
    for (o, xi) in out.iter_mut().zip(x) {
        *o = xi.signum() * (xi.abs() - theta).max(0.0);
    }
}

/// The unique `theta >= 0` with `sum_i max(|x_i| - theta, 0) = r`, for `||x||_1 > r`.
pub(crate) fn l1_threshold(x: &[f64], r: f64) -> f64 {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - r) / (j + 1) as f64;
        if m - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    theta.max(0.0)
}

/// `argmin_{||s||_1 <= r} <g, s>`: the vertex `-r sign(g_i) e_i` at the largest
/// `|g_i|`, lowest index on ties, with `sign(0) = +1`.
pub fn lmo_l1_ball(g: &[f64], r: f64) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    lmo_l1_ball_into(g, r, &mut out);
    out
}

pub fn lmo_l1_ball_into(g: &[f64], r: f64, out: &mut [f64]) {
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (i, gi) in g.iter().enumerate() {
        if gi.abs() > best_mag {
            best_mag = gi.abs();
            best = i;
        }
    }
    out.iter_mut().for_each(|o| *o = 0.0);
    if !out.is_empty() {
        let sign = if g[best] < 0.0 { -1.0 } else { 1.0 };
        out[best] = -r * sign;
    }
}

/// `argmin_{||s||_2 <= r} <g, s> = -r g / ||g||`; `-r e_1` when `g = 0`.
pub fn lmo_l2_ball_into(g: &[f64], r: f64, out: &mut [f64]) {
    let n = linalg::norm(g);
    if n > 0.0 {
        for (o, gi) in out.iter_mut().zip(g) {
            *o = -r * gi / n;
        }
    } else {
        out.iter_mut().for_each(|o| *o = 0.0);
        if !out.is_empty() {
            out[0] = -r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_examples() {
        assert_eq!(project_l2_ball(&[3.0, 4.0], 5.0), vec![3.0, 4.0]);
        let p = project_l2_ball(&[3.0, 4.0], 1.0);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert_eq!(project_l2_ball(&[0.0, 0.0], 2.0), vec![0.0, 0.0]);
    }

    #[test]
    fn l1_examples() {
        assert_eq!(project_l1_ball(&[0.2, -0.3], 1.0), vec![0.2, -0.3]);
        assert_eq!(project_l1_ball(&[3.0, 1.0], 1.0), vec![1.0, 0.0]);
        assert_eq!(project_l1_ball(&[2.0, 2.0], 2.0), vec![1.0, 1.0]);
        assert_eq!(l1_threshold(&[3.0, 1.0], 1.0), 2.0);
    }

    #[test]
    fn l1_lmo_examples() {
        assert_eq!(lmo_l1_ball(&[0.5, -2.0], 2.0), vec![0.0, 2.0]);
        assert_eq!(lmo_l1_ball(&[0.0, 0.0], 1.0), vec![-1.0, 0.0]);
        assert_eq!(lmo_l1_ball(&[1.0, 1.0], 1.0), vec![-1.0, 0.0]);
    }

    #[test]
    fn l2_lmo_points_against_gradient() {
        let mut s = [0.0; 2];
        lmo_l2_ball_into(&[3.0, 4.0], 1.0, &mut s);
        assert!((s[0] + 0.6).abs() < 1e-15 && (s[1] + 0.8).abs() < 1e-15);
    }
}
