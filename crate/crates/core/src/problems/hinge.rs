use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::linalg;
use crate::oracles::{FiniteSum, FirstOrderOracle};
use crate::par::{self, Exec};
use crate::rng::StreamRng;

const CHUNK: usize = 512;

/// `f(x) = (1/n) sum_i max(0, 1 - <x, a_i>)` over label-folded rows `a_i`.
#[derive(Debug, Clone)]
pub struct HingeSvm {
    n: usize,
    d: usize,
    rows: Vec<f64>,
    norms: Vec<f64>,
    exec: Exec,
}

impl HingeSvm {
    /// `rows` is row-major `n x d`, each row already multiplied by its label.
    pub fn new(rows: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid("hinge loss needs at least one sample and feature"));
        }
        if rows.len() != n * d {
            return Err(Error::invalid(format!(
                "data has {} entries, expected {n}x{d}",
                rows.len()
            )));
        }
        let norms = rows.chunks(d).map(linalg::norm).collect();
        Ok(Self {
            n,
            d,
            rows,
            norms,
            exec: Exec::default(),
        })
    }

    /// Builds label-folded rows from features and `{-1, +1}` labels.
    pub fn from_labeled(features: &[f64], labels: &[f64], d: usize) -> Result<Self> {
        if labels.iter().any(|b| *b != 1.0 && *b != -1.0) {
            return Err(Error::invalid("labels must be -1 or +1"));
        }
        if features.len() != labels.len() * d {
            return Err(Error::invalid("feature matrix does not match label count"));
        }
        let rows = features
            .chunks(d)
            .zip(labels)
            .flat_map(|(row, b)| row.iter().map(move |v| v * b))
            .collect();
        Self::new(rows, labels.len(), d)
    }

    /// Chooses sequential or chunked-parallel evaluation of the full sum.
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    /// Value and subgradient `-(1/n) sum_{margin < 1} a_i`.
    pub fn value_and_subgradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; self.d];
        let v = self.evaluate(x, &mut g)?;
        Ok((v, g))
    }

    /// `(1/n) sum ||a_i||`, a bound on every subgradient norm.
    pub fn lipschitz_bound(&self) -> f64 {
        self.norms.iter().sum::<f64>() / self.n as f64
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::invalid(format!(
                "expected dimension {}, got {}",
                self.d,
                x.len()
            )));
        }
        Ok(())
    }
}

impl FirstOrderOracle for HingeSvm {
    fn dim(&self) -> usize {
        self.d
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.check(x)?;
        if grad.len() != self.d {
            return Err(Error::invalid("gradient buffer has the wrong dimension"));
        }
        let parts = par::map_chunks(self.exec, self.n, CHUNK, |range| {
            let mut g = vec![0.0; self.d];
            let mut v = 0.0;
            for i in range {
                let slack = 1.0 - linalg::dot(x, self.row(i));
                if slack > 0.0 {
                    v += slack;
                    linalg::axpy(-1.0, self.row(i), &mut g);
                }
            }
            (v, g)
        });
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for (v, g) in parts {
            total += v;
            linalg::axpy(1.0, &g, grad);
        }
        let inv = 1.0 / self.n as f64;
        linalg::scale(grad, inv);
        Ok(total * inv)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let parts = par::map_chunks(self.exec, self.n, CHUNK, |range| {
            range
                .map(|i| (1.0 - linalg::dot(x, self.row(i))).max(0.0))
                .sum::<f64>()
        });
        Ok(parts.into_iter().sum::<f64>() / self.n as f64)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz_bound()
    }
}

impl FiniteSum for HingeSvm {
    fn len(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        (1.0 - linalg::dot(x, self.row(i))).max(0.0)
    }

    fn add_component_subgradient(&self, i: usize, x: &[f64], weight: f64, grad: &mut [f64]) {
        if 1.0 - linalg::dot(x, self.row(i)) > 0.0 {
            linalg::axpy(-weight, self.row(i), grad);
        }
    }

    fn component_bound(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

/// Features and `{-1, +1}` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled {
    pub n: usize,
    pub d: usize,
    /// Row-major `n x d`.
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
}

/// Gaussian features with variance `1/d` labelled by `sign(<teacher, a>)`,
/// each label flipped with probability `flip`.
pub fn synth_classification(n: usize, teacher: &[f64], flip: f64, seed: u64) -> Result<Labeled> {
    let d = teacher.len();
    if n == 0 || d == 0 {
        return Err(Error::invalid("need at least one sample and feature"));
    }
    if !(0.0..=1.0).contains(&flip) {
        return Err(Error::invalid(format!("flip probability {flip} outside [0, 1]")));
    }
    let mut rng = StreamRng::new(seed, 0xc1a55);
    let scale = 1.0 / (d as f64).sqrt();
    let mut features = vec![0.0; n * d];
    let mut labels = Vec::with_capacity(n);
    for row in features.chunks_mut(d) {
        rng.fill_normal(row);
        linalg::scale(row, scale);
        let mut b = if linalg::dot(teacher, row) >= 0.0 { 1.0 } else { -1.0 };
        if rng.uniform() < flip {
            b = -b;
        }
        labels.push(b);
    }
    Ok(Labeled { n, d, features, labels })
}

/// `f(X) = (1/n) sum_i max(0, 1 - b_i <X, A_i>)` over `rows x cols` matrices,
/// evaluated on row-major flattenings.
#[derive(Debug, Clone)]
pub struct MatrixSvm {
    inner: HingeSvm,
    rows: usize,
    cols: usize,
}

impl MatrixSvm {
    /// `samples` holds `n` row-major `rows x cols` matrices back to back.
    pub fn new(samples: &[f64], labels: &[f64], rows: usize, cols: usize) -> Result<Self> {
        let inner = HingeSvm::from_labeled(samples, labels, rows * cols)?;
        Ok(Self { inner, rows, cols })
    }

    pub fn shape(&self) -> Shape {
        Shape::Matrix {
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn flat(&self) -> &HingeSvm {
        &self.inner
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.inner = self.inner.with_exec(exec);
        self
    }

    /// Value and subgradient for an explicitly shaped argument.
    pub fn value_and_subgradient(&self, x: &[f64], shape: Shape) -> Result<(f64, Vec<f64>)> {
        if shape != self.shape() {
            return Err(Error::invalid(format!(
                "expected shape {:?}, got {shape:?}",
                self.shape()
            )));
        }
        self.inner.value_and_subgradient(x)
    }

    /// `(1/n) sum ||A_i||_F`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.inner.lipschitz_bound()
    }
}

impl FirstOrderOracle for MatrixSvm {
    fn dim(&self) -> usize {
        self.rows * self.cols
    }
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.inner.evaluate(x, grad)
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.inner.value(x)
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
}

impl FiniteSum for MatrixSvm {
    fn len(&self) -> usize {
        self.inner.n
    }
    fn dim(&self) -> usize {
        self.rows * self.cols
    }
    fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        self.inner.component_value(i, x)
    }
    fn add_component_subgradient(&self, i: usize, x: &[f64], weight: f64, grad: &mut [f64]) {
        self.inner.add_component_subgradient(i, x, weight, grad)
    }
    fn component_bound(&self) -> f64 {
        self.inner.component_bound()
    }
}
