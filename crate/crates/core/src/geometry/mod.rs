//! Constraint sets centered at the origin and their exact kernels.

mod ball;
mod matrix;
mod nuclear;
mod svd;

pub use ball::{
    lmo_l1_ball, lmo_l1_ball_into, lmo_l2_ball_into, project_l1_ball, project_l1_ball_into,
    project_l2_ball, project_l2_ball_into,
};
pub use matrix::Matrix;
pub use nuclear::{lmo_nuclear_ball, lmo_nuclear_ball_into, project_nuclear_ball};
pub use svd::{
    jacobi_svd, nuclear_norm, top_singular_pair, Svd, DEFAULT_JACOBI_TOL, DEFAULT_MAX_SWEEPS,
};

use crate::error::{Error, Result};
use crate::linalg;
use crate::oracles::{LinearMinimizationOracle, ProjectionOracle};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    L2Ball,
    L1Ball,
    NuclearBall,
}

impl SetKind {
    pub fn name(self) -> &'static str {
        match self {
            SetKind::L2Ball => "l2_ball",
            SetKind::L1Ball => "l1_ball",
            SetKind::NuclearBall => "nuclear_ball",
        }
    }
}

impl std::str::FromStr for SetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2_ball" | "l2" => Ok(SetKind::L2Ball),
            "l1_ball" | "l1" => Ok(SetKind::L1Ball),
            "nuclear_ball" | "nuclear" => Ok(SetKind::NuclearBall),
            other => Err(Error::invalid(format!("unknown set kind `{other}`"))),
        }
    }
}

/// Ambient shape. Matrices are stored row-major as flat vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Vector(usize),
    Matrix { rows: usize, cols: usize },
}

impl Shape {
    pub fn dim(self) -> usize {
        match self {
            Shape::Vector(d) => d,
            Shape::Matrix { rows, cols } => rows * cols,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SetDescriptor {
    kind: SetKind,
    radius: f64,
    shape: Shape,
    /// Relative tolerance of the power iteration behind the nuclear LMO.
    pub lmo_tol: f64,
    pub lmo_max_iter: usize,
    pub svd_tol: f64,
    pub svd_max_sweeps: usize,
}

impl SetDescriptor {
    pub fn new(kind: SetKind, radius: f64, shape: Shape) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("radius must be positive, got {radius}")));
        }
        if shape.dim() == 0 {
            return Err(Error::invalid("empty ambient dimension"));
        }
        if kind == SetKind::NuclearBall && matches!(shape, Shape::Vector(_)) {
            return Err(Error::invalid("nuclear ball needs a matrix shape"));
        }
        Ok(Self {
            kind,
            radius,
            shape,
            lmo_tol: 1e-10,
            lmo_max_iter: 100_000,
            svd_tol: DEFAULT_JACOBI_TOL,
            svd_max_sweeps: DEFAULT_MAX_SWEEPS,
        })
    }

    pub fn l2(d: usize, radius: f64) -> Result<Self> {
        Self::new(SetKind::L2Ball, radius, Shape::Vector(d))
    }

    pub fn l1(d: usize, radius: f64) -> Result<Self> {
        Self::new(SetKind::L1Ball, radius, Shape::Vector(d))
    }

    pub fn nuclear(rows: usize, cols: usize, radius: f64) -> Result<Self> {
        Self::new(SetKind::NuclearBall, radius, Shape::Matrix { rows, cols })
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn shape(&self) -> Shape {
        self.shape
    }
    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Euclidean diameter `D_X`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Radius `R` of the origin-centered ball containing the set.
    pub fn enclosing_radius(&self) -> f64 {
        self.radius
    }

    /// The set's own norm of `x` (ℓ2, ℓ1 or nuclear).
    pub fn set_norm(&self, x: &[f64]) -> Result<f64> {
        match (self.kind, self.shape) {
            (SetKind::L2Ball, _) => Ok(linalg::norm(x)),
            (SetKind::L1Ball, _) => Ok(linalg::norm1(x)),
            (SetKind::NuclearBall, Shape::Matrix { rows, cols }) => {
                Ok(jacobi_svd(x, rows, cols, self.svd_tol, self.svd_max_sweeps)?.s.iter().sum())
            }
            (SetKind::NuclearBall, Shape::Vector(_)) => unreachable!(),
        }
    }

    /// Membership residual `max(0, ||x|| - r)`.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        Ok((self.set_norm(x)? - self.radius).max(0.0))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.residual(x)? <= tol)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::invalid(format!(
                "point has length {n}, set dimension is {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// A random point on the boundary; rank one for the nuclear ball.
    pub fn boundary_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        match (self.kind, self.shape) {
            (SetKind::L2Ball, _) => {
                let mut u = rng.unit_vector(self.dim());
                linalg::scale(&mut u, self.radius);
                u
            }
            (SetKind::L1Ball, _) => {
                let mut u = vec![0.0; self.dim()];
                rng.fill_normal(&mut u);
                let n1 = linalg::norm1(&u);
                linalg::scale(&mut u, self.radius / n1);
                u
            }
            (SetKind::NuclearBall, Shape::Matrix { rows, cols }) => {
                let (u, v) = (rng.unit_vector(rows), rng.unit_vector(cols));
                Matrix::outer(&u, &v, self.radius).into_vec()
            }
            (SetKind::NuclearBall, Shape::Vector(_)) => unreachable!(),
        }
    }

    /// A random extreme point: a signed scaled basis vector for the ℓ1 ball, a
    /// rank-one matrix of norm `r` for the nuclear ball, a sphere point for ℓ2.
    pub fn extreme_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        match self.kind {
            SetKind::L1Ball => {
                let mut v = vec![0.0; self.dim()];
                let i = rng.index(self.dim());
                v[i] = if rng.uniform() < 0.5 { -self.radius } else { self.radius };
                v
            }
            _ => self.boundary_point(rng),
        }
    }

    /// A random feasible point: a scaled convex combination of boundary points.
    pub fn random_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        let parts = match self.kind {
            SetKind::NuclearBall => 3,
            _ => 1,
        };
        let mut weights: Vec<f64> = (0..parts).map(|_| rng.uniform() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let shrink = rng.uniform();
        weights.iter_mut().for_each(|w| *w *= shrink / total);
        let mut out = vec![0.0; self.dim()];
        for w in weights {
            let b = self.boundary_point(rng);
            linalg::axpy(w, &b, &mut out);
        }
        out
    }

    pub fn project_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.project(x, &mut out)?;
        Ok(out)
    }

    pub fn lmo_vec(&self, g: &[f64], rng: &mut StreamRng) -> Result<Vec<f64>> {
        let mut out = vec![0.0; g.len()];
        self.minimize(g, rng, &mut out)?;
        Ok(out)
    }
}

impl ProjectionOracle for SetDescriptor {
    fn project(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        self.check_len(out.len())?;
        match (self.kind, self.shape) {
            (SetKind::L2Ball, _) => project_l2_ball_into(x, self.radius, out),
            (SetKind::L1Ball, _) => project_l1_ball_into(x, self.radius, out),
            (SetKind::NuclearBall, Shape::Matrix { rows, cols }) => {
                let p = project_nuclear_ball(
                    x,
                    rows,
                    cols,
                    self.radius,
                    self.svd_tol,
                    self.svd_max_sweeps,
                )?;
                out.copy_from_slice(&p);
            }
            (SetKind::NuclearBall, Shape::Vector(_)) => unreachable!(),
        }
        Ok(())
    }
}

impl LinearMinimizationOracle for SetDescriptor {
    fn minimize(&self, g: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        self.check_len(g.len())?;
        self.check_len(out.len())?;
        match (self.kind, self.shape) {
            (SetKind::L2Ball, _) => lmo_l2_ball_into(g, self.radius, out),
            (SetKind::L1Ball, _) => lmo_l1_ball_into(g, self.radius, out),
            (SetKind::NuclearBall, Shape::Matrix { rows, cols }) => lmo_nuclear_ball_into(
                g,
                rows,
                cols,
                self.radius,
                self.lmo_tol,
                self.lmo_max_iter,
                rng,
                out,
            )?,
            (SetKind::NuclearBall, Shape::Vector(_)) => unreachable!(),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameters_and_radii() {
        for s in [
            SetDescriptor::l2(3, 1.5).unwrap(),
            SetDescriptor::l1(3, 1.5).unwrap(),
            SetDescriptor::nuclear(2, 3, 1.5).unwrap(),
        ] {
            assert_eq!(s.diameter(), 3.0);
            assert_eq!(s.enclosing_radius(), 1.5);
        }
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(SetDescriptor::l2(3, 0.0).is_err());
        assert!(SetDescriptor::l2(0, 1.0).is_err());
        assert!(SetDescriptor::new(SetKind::NuclearBall, 1.0, Shape::Vector(4)).is_err());
    }

    #[test]
    fn random_points_are_feasible() {
        let mut rng = StreamRng::from_seed(11);
        for s in [
            SetDescriptor::l2(5, 2.0).unwrap(),
            SetDescriptor::l1(5, 2.0).unwrap(),
            SetDescriptor::nuclear(3, 4, 2.0).unwrap(),
        ] {
            for _ in 0..50 {
                let p = s.random_point(&mut rng);
                assert!(s.contains(&p, 1e-10).unwrap());
                let b = s.boundary_point(&mut rng);
                assert!((s.set_norm(&b).unwrap() - 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [SetKind::L2Ball, SetKind::L1Ball, SetKind::NuclearBall] {
            assert_eq!(k.name().parse::<SetKind>().unwrap(), k);
        }
    }
}
