//! Data-parallel helpers. With the `parallel` feature (default) work is spread
//! over the rayon pool; otherwise, or under [`Execution::Sequential`], it runs
//! on the calling thread. Results always come back in input order, so output
//! never depends on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Order-preserving map with the default execution mode.
pub fn map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    map_with(Execution::Parallel, items, f)
}

pub fn map_with<T, R, F>(exec: Execution, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.into_par_iter().map(f).collect(),
        _ => items.into_iter().map(f).collect(),
    }
}

/// Order-preserving map over `0..count`.
pub fn map_range<R, F>(exec: Execution, count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    map_with(exec, (0..count).collect(), f)
}

/// Splits `0..total` into about `parts` contiguous half-open ranges.
pub fn chunk_ranges(total: u64, parts: u64) -> Vec<(u64, u64)> {
    let parts = parts.max(1).min(total.max(1));
    let step = total.div_ceil(parts);
    (0..parts)
        .map(|i| (i * step, ((i + 1) * step).min(total)))
        .filter(|(a, b)| a < b)
        .collect()
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
