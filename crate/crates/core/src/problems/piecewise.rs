use crate::error::{Error, Result};
use crate::linalg;
use crate::oracles::FirstOrderOracle;
use crate::rng::StreamRng;

/// `f(x) = max_j <w_j, x> + b_j`.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    dim: usize,
    /// Row-major `m x d` slopes.
    weights: Vec<f64>,
    intercepts: Vec<f64>,
    lipschitz: f64,
    certificate: Option<Certificate>,
}

/// A known minimizer recorded at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub point: Vec<f64>,
    pub value: f64,
}

impl PiecewiseLinear {
    pub fn new(weights: &[Vec<f64>], intercepts: &[f64]) -> Result<Self> {
        let m = weights.len();
        if m == 0 || intercepts.len() != m {
            return Err(Error::invalid("need one intercept per piece and at least one piece"));
        }
        let dim = weights[0].len();
        if dim == 0 || weights.iter().any(|w| w.len() != dim) {
            return Err(Error::invalid("pieces must share a positive dimension"));
        }
        let lipschitz = weights.iter().map(|w| linalg::norm(w)).fold(0.0, f64::max);
        Ok(Self {
            dim,
            weights: weights.iter().flatten().copied().collect(),
            intercepts: intercepts.to_vec(),
            lipschitz,
            certificate: None,
        })
    }

    pub fn pieces(&self) -> usize {
        self.intercepts.len()
    }

    pub fn weight(&self, j: usize) -> &[f64] {
        &self.weights[j * self.dim..(j + 1) * self.dim]
    }

    pub fn intercept(&self, j: usize) -> f64 {
        self.intercepts[j]
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    /// Active piece (lowest index on ties) and value.
    pub fn active(&self, x: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for j in 0..self.pieces() {
            let v = linalg::dot(self.weight(j), x) + self.intercepts[j];
            if v > best.1 {
                best = (j, v);
            }
        }
        best
    }
}

impl FirstOrderOracle for PiecewiseLinear {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        if x.len() != self.dim || grad.len() != self.dim {
            return Err(Error::invalid(format!(
                "expected dimension {}, got {}",
                self.dim,
                x.len()
            )));
        }
        let (j, v) = self.active(x);
        grad.copy_from_slice(self.weight(j));
        Ok(v)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::invalid("dimension mismatch"));
        }
        Ok(self.active(x).1)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Random piecewise-linear function whose minimum over any set containing
/// `anchor` is attained at `anchor`.
///
/// Pieces `1..m-1` get unit-norm random slopes; the last slope is
/// `-sum mu_j w_j / sum mu_j` for random `mu_j > 0`, so zero is a convex
/// combination of all slopes. Intercepts make every piece equal to zero at
/// `anchor`, which is then a global minimizer with value zero.
pub fn synth_piecewise_linear(d: usize, m: usize, seed: u64, anchor: &[f64]) -> Result<PiecewiseLinear> {
    if m < 2 {
        return Err(Error::invalid("need at least two pieces"));
    }
    if d == 0 || anchor.len() != d {
        return Err(Error::invalid("anchor must have the problem dimension"));
    }
    let mut rng = StreamRng::new(seed, 0x5eed);
    let mut weights: Vec<Vec<f64>> = (0..m - 1).map(|_| rng.unit_vector(d)).collect();
    let mu: Vec<f64> = (0..m - 1).map(|_| 0.5 + rng.uniform()).collect();
    let total: f64 = mu.iter().sum();
    let mut last = vec![0.0; d];
    for (w, mj) in weights.iter().zip(&mu) {
        linalg::axpy(-mj / total, w, &mut last);
    }
    weights.push(last);
    let intercepts: Vec<f64> = weights.iter().map(|w| -linalg::dot(w, anchor)).collect();
    let mut f = PiecewiseLinear::new(&weights, &intercepts)?;
    let value = f.value(anchor)?;
    f.certificate = Some(Certificate {
        point: anchor.to_vec(),
        value,
    });
    Ok(f)
}

/// `f(x) = ||x - a||_1` with `sign(0) = 0` in the subgradient.
#[derive(Debug, Clone)]
pub struct L1Distance {
    anchor: Vec<f64>,
}

impl L1Distance {
    pub fn new(anchor: Vec<f64>) -> Result<Self> {
        if anchor.is_empty() {
            return Err(Error::invalid("empty anchor"));
        }
        Ok(Self { anchor })
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }
}

impl FirstOrderOracle for L1Distance {
    fn dim(&self) -> usize {
        self.anchor.len()
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        if x.len() != self.dim() || grad.len() != self.dim() {
            return Err(Error::invalid("dimension mismatch"));
        }
        let mut v = 0.0;
        for ((g, xi), ai) in grad.iter_mut().zip(x).zip(&self.anchor) {
            let r = xi - ai;
            v += r.abs();
            *g = if r > 0.0 {
                1.0
            } else if r < 0.0 {
                -1.0
            } else {
                0.0
            };
        }
        Ok(v)
    }

    fn lipschitz(&self) -> f64 {
        (self.dim() as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lipschitz_is_max_slope_norm() {
        let f = PiecewiseLinear::new(&[vec![1.0, 0.0], vec![0.0, -2.0]], &[0.0, 0.0]).unwrap();
        assert_eq!(f.lipschitz(), 2.0);
    }

    #[test]
    fn two_pieces_give_absolute_value() {
        let a = 0.3;
        let f = PiecewiseLinear::new(&[vec![1.0], vec![-1.0]], &[-a, a]).unwrap();
        for x in [-1.0, 0.0, 0.3, 0.9] {
            assert!((f.value(&[x]).unwrap() - (x - a).abs()).abs() < 1e-15);
        }
        let mut g = [0.0];
        f.evaluate(&[a], &mut g).unwrap();
        assert_eq!(g, [1.0]);
    }

    #[test]
    fn certificate_matches_value() {
        let anchor = vec![0.1, -0.2, 0.05];
        let f = synth_piecewise_linear(3, 6, 9, &anchor).unwrap();
        let c = f.certificate().unwrap();
        assert_eq!(c.value, f.value(&anchor).unwrap());
        assert!(c.value.abs() < 1e-15);
        assert!(f.lipschitz() <= 1.0 + 1e-12);
    }

    #[test]
    fn l1_distance_kinks_have_zero_sign() {
        let f = L1Distance::new(vec![0.5, -1.0]).unwrap();
        let mut g = [9.0; 2];
        let v = f.evaluate(&[0.5, 0.0], &mut g).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(g, [0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(synth_piecewise_linear(2, 1, 0, &[0.0, 0.0]).is_err());
        let f = L1Distance::new(vec![0.0]).unwrap();
        assert!(f.evaluate(&[0.0, 1.0], &mut [0.0, 0.0]).is_err());
    }
}
