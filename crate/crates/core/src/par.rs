//! Data-parallel helpers with a sequential fallback.
//!
//! Work is always split into the same fixed chunks and partial results are
//! returned in chunk order, so a reduction performed by the caller gives
//! bit-identical results in both modes. Without the `parallel` feature,
//! [`Exec::Parallel`] runs sequentially.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Whether work actually fans out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

fn chunk_ranges(n: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..n.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(n))
        .collect()
}

/// Applies `f` to consecutive ranges of `0..n` of length `chunk` and returns the
/// results in range order.
pub fn map_chunks<T, F>(exec: Exec, n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = chunk_ranges(n, chunk);
    map_ordered(exec, ranges, f)
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<I, T, F>(exec: Exec, items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = exec;
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_covers_range() {
        let r = chunk_ranges(10, 4);
        assert_eq!(r, vec![0..4, 4..8, 8..10]);
        assert!(chunk_ranges(0, 4).is_empty());
    }

    #[test]
    fn modes_agree_bitwise() {
        let xs: Vec<f64> = (0..10_000).map(|i| (i as f64).sin() * 1e-3).collect();
        let sum = |exec| -> f64 {
            map_chunks(exec, xs.len(), 257, |r| xs[r].iter().sum::<f64>())
                .into_iter()
                .sum()
        };
        assert_eq!(
            sum(Exec::Sequential).to_bits(),
            sum(Exec::Parallel).to_bits()
        );
    }
}
