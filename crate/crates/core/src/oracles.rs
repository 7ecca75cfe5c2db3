//! Oracle interfaces (first-order, stochastic first-order, projection, linear
//! minimization), per-run call counters, and the minibatch stochastic
//! subgradient construction for finite sums.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::StreamRng;

/// Deterministic first-order oracle: value and one subgradient of `f`.
///
/// Implementations must be valid on the whole enclosing ball `X'` and return
/// subgradients with norm at most [`lipschitz`](Self::lipschitz).
pub trait FirstOrderOracle {
    fn dim(&self) -> usize;

    /// Writes a subgradient at `x` into `grad` and returns `f(x)`.
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Result<f64>;

    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut g = vec![0.0; self.dim()];
        self.evaluate(x, &mut g)
    }

    /// Upper bound `G` on subgradient norms over the enclosing ball.
    fn lipschitz(&self) -> f64;
}

/// Stochastic first-order oracle: an unbiased subgradient estimate with
/// variance at most [`variance_bound`](Self::variance_bound).
pub trait StochasticFirstOrderOracle {
    fn dim(&self) -> usize;

    fn sample(&self, x: &[f64], rng: &mut StreamRng, grad: &mut [f64]) -> Result<()>;

    /// The variance bound `sigma^2`.
    fn variance_bound(&self) -> f64;
}

/// Euclidean projection onto the constraint set.
pub trait ProjectionOracle {
    fn project(&self, x: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Linear minimization over the constraint set: writes `argmin_{s in X} <g, s>`.
///
/// The rng is only consumed by oracles that need randomized kernels.
pub trait LinearMinimizationOracle {
    fn minimize(&self, g: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()>;
}

impl<T: FirstOrderOracle + ?Sized> FirstOrderOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        (**self).evaluate(x, grad)
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn lipschitz(&self) -> f64 {
        (**self).lipschitz()
    }
}

impl<T: StochasticFirstOrderOracle + ?Sized> StochasticFirstOrderOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample(&self, x: &[f64], rng: &mut StreamRng, grad: &mut [f64]) -> Result<()> {
        (**self).sample(x, rng, grad)
    }
    fn variance_bound(&self) -> f64 {
        (**self).variance_bound()
    }
}

impl<T: ProjectionOracle + ?Sized> ProjectionOracle for &T {
    fn project(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).project(x, out)
    }
}

impl<T: LinearMinimizationOracle + ?Sized> LinearMinimizationOracle for &T {
    fn minimize(&self, g: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        (**self).minimize(g, rng, out)
    }
}

/// Snapshot of oracle call tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CallCounts {
    pub fo: u64,
    pub sfo: u64,
    pub po: u64,
    pub lmo: u64,
}

/// Monotone per-run call tallies. Owned by a single run; not shared across
/// threads.
#[derive(Debug, Default)]
pub struct OracleCounters {
    fo: Cell<u64>,
    sfo: Cell<u64>,
    po: Cell<u64>,
    lmo: Cell<u64>,
}

impl OracleCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fo_calls(&self) -> u64 {
        self.fo.get()
    }
    pub fn sfo_calls(&self) -> u64 {
        self.sfo.get()
    }
    pub fn po_calls(&self) -> u64 {
        self.po.get()
    }
    pub fn lmo_calls(&self) -> u64 {
        self.lmo.get()
    }

    pub fn snapshot(&self) -> CallCounts {
        CallCounts {
            fo: self.fo.get(),
            sfo: self.sfo.get(),
            po: self.po.get(),
            lmo: self.lmo.get(),
        }
    }

    fn bump(c: &Cell<u64>) {
        c.set(c.get() + 1);
    }
}

/// An oracle whose every call is tallied in an [`OracleCounters`].
///
/// The wrapper delegates verbatim, so results are bit-identical to the wrapped
/// oracle's.
#[derive(Debug, Clone, Copy)]
pub struct Counting<'c, O> {
    inner: O,
    counters: &'c OracleCounters,
}

/// Wraps `oracle` so that each call increments the matching counter by one.
pub fn wrap_counting<O>(oracle: O, counters: &OracleCounters) -> Counting<'_, O> {
    Counting {
        inner: oracle,
        counters,
    }
}

impl<O> Counting<'_, O> {
    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: FirstOrderOracle> FirstOrderOracle for Counting<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        OracleCounters::bump(&self.counters.fo);
        self.inner.evaluate(x, grad)
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        OracleCounters::bump(&self.counters.fo);
        self.inner.value(x)
    }
    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
}

impl<O: StochasticFirstOrderOracle> StochasticFirstOrderOracle for Counting<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn sample(&self, x: &[f64], rng: &mut StreamRng, grad: &mut [f64]) -> Result<()> {
        OracleCounters::bump(&self.counters.sfo);
        self.inner.sample(x, rng, grad)
    }
    fn variance_bound(&self) -> f64 {
        self.inner.variance_bound()
    }
}

impl<O: ProjectionOracle> ProjectionOracle for Counting<'_, O> {
    fn project(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        OracleCounters::bump(&self.counters.po);
        self.inner.project(x, out)
    }
}

impl<O: LinearMinimizationOracle> LinearMinimizationOracle for Counting<'_, O> {
    fn minimize(&self, g: &[f64], rng: &mut StreamRng, out: &mut [f64]) -> Result<()> {
        OracleCounters::bump(&self.counters.lmo);
        self.inner.minimize(g, rng, out)
    }
}

/// Where a solver draws its subgradients from.
#[derive(Clone, Copy)]
pub enum Subgradients<'a> {
    /// Deterministic FO; calls are tallied as `fo`.
    Exact(&'a dyn FirstOrderOracle),
    /// Stochastic FO; calls are tallied as `sfo`.
    Stochastic(&'a dyn StochasticFirstOrderOracle),
}

impl<'a> Subgradients<'a> {
    pub fn dim(&self) -> usize {
        match self {
            Subgradients::Exact(o) => o.dim(),
            Subgradients::Stochastic(o) => o.dim(),
        }
    }

    /// `sigma^2`; zero for a deterministic oracle.
    pub fn variance_bound(&self) -> f64 {
        match self {
            Subgradients::Exact(_) => 0.0,
            Subgradients::Stochastic(o) => o.variance_bound(),
        }
    }

    /// Draws one (stochastic) subgradient at `x`, tallying the call.
    pub fn draw(
        &self,
        x: &[f64],
        rng: &mut StreamRng,
        counters: &OracleCounters,
        grad: &mut [f64],
    ) -> Result<()> {
        match self {
            Subgradients::Exact(o) => wrap_counting(*o, counters).evaluate(x, grad).map(|_| ()),
            Subgradients::Stochastic(o) => wrap_counting(*o, counters).sample(x, rng, grad),
        }
    }
}

/// An objective of the form `f = (1/n) sum_i f_i`.
pub trait FiniteSum: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dim(&self) -> usize;

    fn component_value(&self, i: usize, x: &[f64]) -> f64;

    /// `grad += weight * g_i(x)` with `g_i(x)` in the subdifferential of `f_i`
    /// chosen by a fixed tie-breaking rule.
    fn add_component_subgradient(&self, i: usize, x: &[f64], weight: f64, grad: &mut [f64]);

    /// Bound on `||g_i(x)||` over all components and points.
    fn component_bound(&self) -> f64;
}

/// Minibatch stochastic subgradient of a finite sum.
///
/// Each sample draws `batch` indices uniformly with replacement and averages
/// the component subgradients. A batch equal to `n` is treated as the full
/// deterministic pass.
#[derive(Debug, Clone, Copy)]
pub struct MinibatchSfo<'a, P: ?Sized> {
    problem: &'a P,
    batch: usize,
}

pub fn minibatch_sfo<P: FiniteSum + ?Sized>(
    problem: &P,
    batch_size: usize,
) -> Result<MinibatchSfo<'_, P>> {
    if batch_size == 0 {
        return Err(Error::invalid("batch size must be positive"));
    }
    if problem.is_empty() {
        return Err(Error::invalid("finite sum has no components"));
    }
    Ok(MinibatchSfo {
        problem,
        batch: batch_size,
    })
}

impl<P: FiniteSum + ?Sized> MinibatchSfo<'_, P> {
    pub fn batch_size(&self) -> usize {
        self.batch
    }

    fn is_full(&self) -> bool {
        self.batch == self.problem.len()
    }
}

impl<P: FiniteSum + ?Sized> StochasticFirstOrderOracle for MinibatchSfo<'_, P> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn sample(&self, x: &[f64], rng: &mut StreamRng, grad: &mut [f64]) -> Result<()> {
        if x.len() != self.dim() || grad.len() != self.dim() {
            return Err(Error::invalid("dimension mismatch in stochastic oracle"));
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        let n = self.problem.len();
        if self.is_full() {
            let w = 1.0 / n as f64;
            for i in 0..n {
                self.problem.add_component_subgradient(i, x, w, grad);
            }
        } else {
            let w = 1.0 / self.batch as f64;
            for _ in 0..self.batch {
                let i = rng.index(n);
                self.problem.add_component_subgradient(i, x, w, grad);
            }
        }
        Ok(())
    }

    fn variance_bound(&self) -> f64 {
        if self.is_full() {
            0.0
        } else {
            let b = self.problem.component_bound();
            b * b / self.batch as f64
        }
    }
}

/// Unbiased sample variance `1/(m-1) sum ||g_j - mean||^2` of `trials` draws at `x`.
pub fn estimate_variance<S: StochasticFirstOrderOracle + ?Sized>(
    sfo: &S,
    x: &[f64],
    trials: usize,
    rng: &mut StreamRng,
) -> Result<f64> {
    if trials < 2 {
        return Err(Error::invalid("variance estimate needs at least two trials"));
    }
    let d = sfo.dim();
    let mut draws = vec![0.0; trials * d];
    for chunk in draws.chunks_mut(d) {
        sfo.sample(x, rng, chunk)?;
    }
    let mut mean = vec![0.0; d];
    for chunk in draws.chunks(d) {
        linalg::axpy(1.0, chunk, &mut mean);
    }
    linalg::scale(&mut mean, 1.0 / trials as f64);
    let ss: f64 = draws.chunks(d).map(|c| linalg::dist_sq(c, &mean)).sum();
    Ok(ss / (trials - 1) as f64)
}
